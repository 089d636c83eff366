#include "glmstab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <initializer_list>
#include <memory>
#include <set>
#include <sstream>

#include "glmstab/error.hpp"

namespace glmstab {

namespace {

// ---- config reading ------------------------------------------------------

class Reader {
 public:
  Reader(const Json& obj, std::string path, std::initializer_list<const char*> allowed)
      : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail(ErrorCode::Config, where() + ": expected a JSON object");
    std::set<std::string> keys;
    for (const char* k : allowed) keys.insert(k);
    for (const auto& item : obj_.items()) {
      if (keys.count(item.key())) continue;
      std::string list;
      for (const auto& k : keys) list += (list.empty() ? "" : ", ") + k;
      fail(ErrorCode::Config, where() + ": unknown key '" + item.key() + "' (allowed: " + list + ")");
    }
  }

  bool has(const char* key) const { return obj_.contains(key); }
  const Json& raw(const char* key) const { return obj_.at(key); }
  std::string child_path(const char* key) const { return path_ + "/" + key; }

  [[noreturn]] void bad(const char* key, const std::string& msg) const {
    fail(ErrorCode::Config, child_path(key) + ": " + msg);
  }

  void require(const char* key) const {
    if (!has(key)) fail(ErrorCode::Config, where() + ": missing required key '" + key + "'");
  }

  double number(const char* key, std::optional<double> def = std::nullopt) const {
    if (!has(key)) {
      if (def) return *def;
      require(key);
    }
    const Json& v = raw(key);
    if (!v.is_number()) bad(key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) bad(key, "expected a finite number");
    return x;
  }

  double positive(const char* key, std::optional<double> def = std::nullopt) const {
    const double x = number(key, def);
    if (!(x > 0.0)) bad(key, "must be > 0");
    return x;
  }

  std::uint64_t unsigned_int(const char* key, std::optional<std::uint64_t> def = std::nullopt) const {
    if (!has(key)) {
      if (def) return *def;
      require(key);
    }
    const Json& v = raw(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) bad(key, "must be >= 0");
    bad(key, "expected a non-negative integer");
  }

  std::size_t count(const char* key, std::size_t min, std::optional<std::size_t> def = std::nullopt) const {
    const std::uint64_t v = unsigned_int(key, def);
    if (v < min) bad(key, "must be >= " + std::to_string(min));
    return static_cast<std::size_t>(v);
  }

  std::string string(const char* key, std::optional<std::string> def = std::nullopt) const {
    if (!has(key)) {
      if (def) return *def;
      require(key);
    }
    const Json& v = raw(key);
    if (!v.is_string()) bad(key, "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const char* key, bool def) const {
    if (!has(key)) return def;
    const Json& v = raw(key);
    if (!v.is_boolean()) bad(key, "expected true or false");
    return v.get<bool>();
  }

  Vector vector(const char* key) const {
    require(key);
    const Json& v = raw(key);
    if (!v.is_array() || v.empty()) bad(key, "expected a non-empty array of numbers");
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!v[k].is_number()) bad(key, "element " + std::to_string(k) + " is not a number");
      out(static_cast<Eigen::Index>(k)) = v[k].get<double>();
      if (!std::isfinite(out(static_cast<Eigen::Index>(k))))
        bad(key, "element " + std::to_string(k) + " is not finite");
    }
    return out;
  }

  Matrix matrix(const char* key) const {
    require(key);
    const Json& v = raw(key);
    if (!v.is_array() || v.empty()) bad(key, "expected a non-empty array of rows");
    const std::size_t rows = v.size();
    std::size_t cols = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      if (!v[r].is_array() || v[r].empty()) bad(key, "row " + std::to_string(r) + " is not a non-empty array");
      if (r == 0) cols = v[r].size();
      if (v[r].size() != cols) bad(key, "rows have different lengths");
    }
    Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        const Json& e = v[r][c];
        if (!e.is_number()) bad(key, "entry (" + std::to_string(r) + "," + std::to_string(c) + ") is not a number");
        const double x = e.get<double>();
        if (!std::isfinite(x))
          bad(key, "entry (" + std::to_string(r) + "," + std::to_string(c) + ") is not finite");
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = x;
      }
    return out;
  }

 private:
  std::string where() const { return path_.empty() ? "/" : path_; }

  const Json& obj_;
  std::string path_;
};

// Runs f; any library error raised while interpreting the config becomes a
// Config error prefixed with the config path.
template <class F>
auto as_config(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) throw;
    fail(ErrorCode::Config, path + ": " + e.what());
  }
}

// ---- plans ---------------------------------------------------------------

struct Common {
  std::uint64_t seed = 0;
  double tol = kDefaultTol;
  unsigned threads = 0;
  std::size_t max_iter = kDefaultMaxIter;
  std::string output_dir = kDefaultOutputDir;
};

#define GLMSTAB_COMMON_KEYS "command", "description", "seed", "tol", "threads", "max_iter", "output_dir"

Common read_common(const Reader& r, const std::string& command, const RunOptions& options) {
  Common c;
  if (r.has("command") && r.string("command") != command)
    r.bad("command", "config is for '" + r.string("command") + "', not '" + command + "'");
  if (r.has("description")) (void)r.string("description");
  c.seed = options.seed ? *options.seed : r.unsigned_int("seed", 0);
  c.tol = options.tol ? *options.tol : r.positive("tol", kDefaultTol);
  if (!(c.tol > 0.0) || !std::isfinite(c.tol)) fail(ErrorCode::Config, "tol must be a finite number > 0");
  if (options.threads) {
    c.threads = *options.threads;
  } else if (r.has("threads")) {
    const Json& t = r.raw("threads");
    if (t.is_string() && t.get<std::string>() == "auto")
      c.threads = 0;
    else if (t.is_number_unsigned() && t.get<std::uint64_t>() >= 1 && t.get<std::uint64_t>() <= 4096)
      c.threads = static_cast<unsigned>(t.get<std::uint64_t>());
    else
      r.bad("threads", "expected an integer in [1, 4096] or \"auto\"");
  }
  c.max_iter = r.count("max_iter", 1, kDefaultMaxIter);
  c.output_dir = options.output_dir ? *options.output_dir : r.string("output_dir", kDefaultOutputDir);
  return c;
}

DistributionSpec read_distribution(const Reader& parent, const char* key) {
  parent.require(key);
  const std::string path = parent.child_path(key);
  Reader r(parent.raw(key), path,
           {"d", "spectrum", "w_star_direction", "w_star_norm", "noise_sigma", "cap_Y", "instance_norm",
            "instance_radius", "family", "rotation_seed"});
  DistributionSpec s;
  s.spectrum = r.vector("spectrum");
  s.d = s.spectrum.size();
  if (r.has("d") && r.unsigned_int("d") != static_cast<std::uint64_t>(s.d))
    r.bad("d", "does not match the length of spectrum");
  if (r.has("w_star_direction")) {
    s.w_star_direction = r.vector("w_star_direction");
  } else {
    s.w_star_direction = Vector::Zero(s.d);
    s.w_star_direction(0) = 1.0;
  }
  s.w_star_norm = r.number("w_star_norm");
  s.noise_sigma = r.number("noise_sigma", 0.0);
  s.cap_Y = r.number("cap_Y", 1.0);
  s.instance_radius = r.number("instance_radius", 1.0);
  const std::string norm = r.string("instance_norm", "L2");
  s.instance_norm = as_config(r.child_path("instance_norm"), [&] { return instance_norm_from_string(norm); });
  const std::string family = r.string("family", "square");
  s.family_kind = as_config(r.child_path("family"), [&] { return loss_kind_from_string(family); });
  if (r.has("rotation_seed")) s.rotation_seed = r.unsigned_int("rotation_seed");
  as_config(path, [&] {
    s.validate();
    return 0;
  });
  return s;
}

LossFamily read_loss(const Reader& parent, const char* key) {
  Reader r(parent.raw(key), parent.child_path(key), {"kind", "cap_Y"});
  const std::string kind = r.string("kind");
  const double cap = r.number("cap_Y");
  return as_config(parent.child_path(key), [&] {
    const LossKind k = loss_kind_from_string(kind);
    if (k == LossKind::Custom) fail(ErrorCode::Argument, "custom losses cannot be configured from JSON");
    return make_loss(k, cap);
  });
}

Domain read_domain(const Reader& parent, const char* key) {
  Reader r(parent.raw(key), parent.child_path(key), {"kind", "radius", "A"});
  const std::string kind = r.string("kind");
  const double radius = r.number("radius");
  if (kind != "quad_ball" && r.has("A")) r.bad("A", "only quad_ball takes a matrix");
  return as_config(parent.child_path(key), [&] {
    if (kind == "euclidean_ball") return Domain::euclidean_ball(radius);
    if (kind == "l1_ball") return Domain::l1_ball(radius);
    if (kind == "box") return Domain::box(radius);
    if (kind == "quad_ball") return Domain::quad_ball(r.matrix("A"), radius);
    fail(ErrorCode::Argument, "unknown domain kind '" + kind + "' (euclidean_ball, quad_ball, l1_ball, box)");
  });
}

double dataset_cap_for(const LossFamily& family) {
  return family.kind() == LossKind::BoundedLogistic ? std::max(family.cap_Y(), 1.0) : family.cap_Y();
}

// A dataset from a CSV file, an inline matrix, or a synthetic distribution,
// together with the loss and domain it is analysed under.
struct Problem {
  enum class Source { File, Inline, Synthetic } source = Source::Inline;
  std::filesystem::path path;
  Matrix X;
  Vector y;
  std::optional<DistributionSpec> spec;
  Eigen::Index n = 0;
  std::optional<LossFamily> family;
  std::optional<Domain> domain;

  Dataset load(std::uint64_t seed) const {
    if (source == Source::Synthetic) return synth_regression(*spec, n, seed);
    const double cap = dataset_cap_for(*family);
    if (source == Source::File) return load_csv(path, cap);
    return Dataset(X, y, cap);
  }

  Json describe() const {
    Json out;
    switch (source) {
      case Source::File:
        out["source"] = "file";
        out["dataset_path"] = path.generic_string();
        break;
      case Source::Inline:
        out["source"] = "inline";
        break;
      case Source::Synthetic:
        out["source"] = "synthetic";
        out["distribution"] = to_json(*spec);
        out["n"] = n;
        break;
    }
    out["loss"] = to_json(*family);
    out["domain"] = to_json(*domain);
    return out;
  }
};

Problem read_problem(const Reader& r, const RunOptions& options) {
  Problem p;
  const int sources = int(r.has("dataset_path")) + int(r.has("dataset")) + int(r.has("distribution"));
  if (sources != 1)
    fail(ErrorCode::Config, "exactly one of dataset_path, dataset, distribution must be given");
  if (r.has("dataset_path")) {
    p.source = Problem::Source::File;
    std::filesystem::path path = r.string("dataset_path");
    if (path.is_relative() && !options.base_dir.empty()) path = options.base_dir / path;
    p.path = path;
  } else if (r.has("dataset")) {
    p.source = Problem::Source::Inline;
    Reader d(r.raw("dataset"), r.child_path("dataset"), {"X", "y"});
    p.X = d.matrix("X");
    p.y = d.vector("y");
    if (p.y.size() != p.X.rows()) d.bad("y", "length differs from the number of rows of X");
  } else {
    p.source = Problem::Source::Synthetic;
    p.spec = read_distribution(r, "distribution");
    p.n = static_cast<Eigen::Index>(r.count("n", 2));
    const SyntheticDistribution dist(*p.spec);
    p.family = dist.family();
    p.domain = dist.domain();
  }
  if (p.source != Problem::Source::Synthetic && r.has("n")) r.bad("n", "only used with distribution");
  if (r.has("loss")) {
    if (p.family) r.bad("loss", "implied by distribution");
    p.family = read_loss(r, "loss");
  }
  if (r.has("domain")) p.domain = read_domain(r, "domain");
  if (!p.family) r.require("loss");
  if (!p.domain) r.require("domain");
  if (p.source == Problem::Source::Inline) {
    as_config(r.child_path("dataset"), [&] { return Dataset(p.X, p.y, dataset_cap_for(*p.family)).n(); });
  }
  return p;
}

ExperimentOptions read_experiment_options(const Reader& r, const Common& c) {
  ExperimentOptions o;
  o.m_test = r.count("m_test", 1000, kDefaultTestSize);
  o.oracle_factor = r.count("oracle_factor", 1, 50);
  o.max_iter = c.max_iter;
  o.threads = c.threads;
  return o;
}

// ---- output helpers ------------------------------------------------------

std::string fmt(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Output {
 public:
  void check(std::string name, bool pass, std::string detail) {
    predicates.push_back({std::move(name), pass, std::move(detail)});
  }

  std::vector<Predicate> predicates;
};

Json predicates_json(const std::vector<Predicate>& preds) {
  Json out = Json::array();
  for (const auto& p : preds) out.push_back(Json{{"name", p.name}, {"pass", p.pass}, {"detail", p.detail}});
  return out;
}

std::string mc_row(const McReport& r, double bound_uncond, bool pass) {
  std::ostringstream os;
  os << r.n << ',' << r.trials << ',' << fmt(r.mean_delta) << ',' << fmt(r.se_delta) << ',' << fmt(r.mean_gap) << ','
     << fmt(r.se_gap) << ',' << fmt(r.mean_excess) << ',' << fmt(r.se_excess) << ',' << fmt(r.bound_preconditioned)
     << ',' << fmt(bound_uncond) << ',' << (pass ? "true" : "false") << '\n';
  return os.str();
}

// Square loss is checked against 4 Y^2 d / n; other losses against 2 rho^2 d / (alpha n).
double excess_threshold(const LossFamily& family, Eigen::Index d, Eigen::Index n) {
  if (family.kind() == LossKind::Square)
    return 4.0 * family.cap_Y() * family.cap_Y() * static_cast<double>(d) / static_cast<double>(n);
  return preconditioned_bound(family.rho(), family.alpha(), d, n);
}

// ---- commands ------------------------------------------------------------

struct Context {
  Common common;
  Json echo;  // config as given, minus run-location keys
  Json result;
  std::string csv;
  std::vector<Artifact> artifacts;
  Output out;
  std::vector<std::string> notes;
};

void run_gen(const Reader& r, Context& ctx) {
  const DistributionSpec spec = read_distribution(r, "distribution");
  const auto n = static_cast<Eigen::Index>(r.count("n", 2));
  const std::string file = r.string("dataset_file", "dataset.csv");
  if (file.empty() || file.find('/') != std::string::npos) r.bad("dataset_file", "must be a plain file name");

  const SyntheticDistribution dist(spec);
  const Dataset ds = dist.sample(n, ctx.common.seed);
  const CovarianceSummary cov = empirical_covariance(ds);
  ctx.artifacts.push_back({file, to_csv(ds)});

  double max_norm = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto x = ds.X().row(i);
    max_norm = std::max(max_norm, spec.instance_norm == InstanceNorm::L2 ? x.norm() : x.cwiseAbs().maxCoeff());
  }
  const double max_label = ds.y().cwiseAbs().maxCoeff();
  ctx.out.check("instances_within_radius", max_norm <= spec.instance_radius * (1.0 + 1e-12),
                "max norm " + fmt_short(max_norm) + " <= " + fmt_short(spec.instance_radius));
  ctx.out.check("labels_within_cap", max_label <= dist.dataset_cap(),
                "max |y| " + fmt_short(max_label) + " <= " + fmt_short(dist.dataset_cap()));

  ctx.result["dataset_file"] = file;
  ctx.result["n"] = n;
  ctx.result["d"] = ds.d();
  ctx.result["distribution"] = to_json(spec);
  ctx.result["covariance"] = to_json(cov);
  ctx.result["max_instance_norm"] = max_norm;
  ctx.result["max_abs_label"] = max_label;
  ctx.csv = "n,d,rank,kappa_C,trace,lambda_max,lambda_min_nonzero\n" + std::to_string(n) + ',' +
            std::to_string(ds.d()) + ',' + std::to_string(cov.rank) + ',' + fmt(cov.kappa_C) + ',' + fmt(cov.trace) +
            ',' + fmt(cov.lambda_max) + ',' + fmt(cov.lambda_min_nonzero) + '\n';
  ctx.notes.push_back("synthetic distribution constructed for this run; see result.distribution");
}

void run_stability(const Reader& r, const RunOptions& options, Context& ctx) {
  const Problem p = read_problem(r, options);
  std::optional<double> expected;
  if (r.has("expected_delta")) expected = r.number("expected_delta");

  const Dataset ds = p.load(ctx.common.seed);
  StabilityOptions so;
  so.max_iter = ctx.common.max_iter;
  so.threads = ctx.common.threads;
  const StabilityReport rep = average_stability(ds, *p.family, *p.domain, ctx.common.tol, so);

  ctx.out.check("converged", rep.converged, "max certificate " + fmt_short(rep.max_certificate_eps));
  ctx.out.check("delta_within_bound", rep.delta <= rep.bound_avg + rep.numeric_slack,
                "delta " + fmt_short(rep.delta) + " <= bound_avg " + fmt_short(rep.bound_avg) + " + slack " +
                    fmt_short(rep.numeric_slack));
  ctx.out.check("average_below_uniform", rep.bound_avg <= rep.bound_uniform + 1e-12,
                "bound_avg " + fmt_short(rep.bound_avg) + " <= bound_uniform " + fmt_short(rep.bound_uniform));
  if (expected) {
    const double tol = rep.numeric_slack + 1e-9;
    ctx.out.check("expected_delta", std::abs(rep.delta - *expected) <= tol,
                  "|delta - " + fmt_short(*expected) + "| = " + fmt_short(std::abs(rep.delta - *expected)) +
                      " <= " + fmt_short(tol));
  }

  ctx.result["problem"] = p.describe();
  ctx.result["covariance"] = to_json(empirical_covariance(ds));
  ctx.result["stability"] = to_json(rep, true);
  bool pass = true;
  for (const auto& pr : ctx.out.predicates) pass = pass && pr.pass;
  ctx.csv = "n,d,rank,kappa_C,delta,bound_avg,bound_uniform,bound_precond,numeric_slack,converged,pass\n" +
            std::to_string(rep.n) + ',' + std::to_string(rep.d) + ',' + std::to_string(rep.rank) + ',' +
            fmt(rep.kappa_C) + ',' + fmt(rep.delta) + ',' + fmt(rep.bound_avg) + ',' + fmt(rep.bound_uniform) + ',' +
            fmt(rep.bound_preconditioned) + ',' + fmt(rep.numeric_slack) + ',' + (rep.converged ? "true" : "false") +
            ',' + (pass ? "true" : "false") + '\n';
}

// Preconditioner battery entries, resolved once the dataset is known.
struct BatteryEntry {
  std::string type;
  double c = 1.0;
  std::optional<double> delta;
  std::size_t count = 0;
  double max_log10_condition = 4.0;
  std::optional<std::uint64_t> seed;
  Matrix P;
};

std::vector<BatteryEntry> read_battery(const Reader& r) {
  std::vector<BatteryEntry> out;
  if (!r.has("preconditioners")) {
    for (const char* type : {"identity", "optimal"}) {
      BatteryEntry e;
      e.type = type;
      out.push_back(std::move(e));
    }
    return out;
  }
  const Json& list = r.raw("preconditioners");
  if (!list.is_array() || list.empty()) r.bad("preconditioners", "expected a non-empty array");
  for (std::size_t k = 0; k < list.size(); ++k) {
    const std::string path = r.child_path("preconditioners") + "/" + std::to_string(k);
    const Json& item = list[k];
    if (!item.is_object() || !item.contains("type") || !item["type"].is_string())
      fail(ErrorCode::Config, path + ": expected an object with a string 'type'");
    BatteryEntry e;
    e.type = item["type"].get<std::string>();
    if (e.type == "identity") {
      Reader(item, path, {"type"});
    } else if (e.type == "scaled_identity") {
      Reader s(item, path, {"type", "c"});
      e.c = s.positive("c");
    } else if (e.type == "optimal") {
      Reader s(item, path, {"type", "delta"});
      if (s.has("delta")) e.delta = s.positive("delta");
    } else if (e.type == "random") {
      Reader s(item, path, {"type", "count", "max_log10_condition", "seed"});
      e.count = s.count("count", 1);
      e.max_log10_condition = s.number("max_log10_condition", 4.0);
      if (e.max_log10_condition < 0.0 || e.max_log10_condition > 12.0)
        s.bad("max_log10_condition", "must lie in [0, 12]");
      if (s.has("seed")) e.seed = s.unsigned_int("seed");
    } else if (e.type == "matrix") {
      Reader s(item, path, {"type", "P"});
      e.P = s.matrix("P");
      as_config(path + "/P", [&] { return inverse_sqrt(e.P).delta; });
    } else {
      fail(ErrorCode::Config,
           path + "/type: unknown preconditioner '" + e.type + "' (identity, scaled_identity, optimal, random, matrix)");
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<LabeledPreconditioner> resolve_battery(const std::vector<BatteryEntry>& battery, const Dataset& ds,
                                                   std::uint64_t seed) {
  const Eigen::Index d = ds.d();
  const CovarianceSummary cov = empirical_covariance(ds);
  const Stream root = Stream(seed).child(1);
  std::vector<LabeledPreconditioner> out;
  for (std::size_t k = 0; k < battery.size(); ++k) {
    const BatteryEntry& e = battery[k];
    if (e.type == "identity") {
      out.push_back({"identity", inverse_sqrt(Matrix::Identity(d, d))});
    } else if (e.type == "scaled_identity") {
      out.push_back({"scaled_identity(c=" + fmt_short(e.c) + ")", inverse_sqrt(e.c * Matrix::Identity(d, d))});
    } else if (e.type == "optimal") {
      const double delta = e.delta ? *e.delta : (cov.lambda_max > 0.0 ? cov.lambda_max : 1.0);
      out.push_back({"optimal(C_hat)", optimal_preconditioner(cov, delta)});
    } else if (e.type == "random") {
      const Stream stream = e.seed ? Stream(*e.seed) : root.child(k);
      for (std::size_t j = 0; j < e.count; ++j) {
        Stream item = stream.child(j);
        const double cond = std::pow(10.0, e.max_log10_condition * item.uniform01());
        const Matrix P = random_spd(d, cond, item.child(0).key());
        out.push_back({"random[" + std::to_string(j) + "](cond=" + fmt_short(cond) + ")", inverse_sqrt(P)});
      }
    } else {
      if (e.P.rows() != d || e.P.cols() != d)
        fail(ErrorCode::Argument, "preconditioner matrix must be " + std::to_string(d) + "x" + std::to_string(d));
      out.push_back({"matrix[" + std::to_string(k) + "]", inverse_sqrt(e.P)});
    }
  }
  return out;
}

void run_invariance(const Reader& r, const RunOptions& options, Context& ctx) {
  const Problem p = read_problem(r, options);
  const std::vector<BatteryEntry> battery = read_battery(r);

  const Dataset ds = p.load(ctx.common.seed);
  const auto pres = resolve_battery(battery, ds, ctx.common.seed);
  StabilityOptions so;
  so.max_iter = ctx.common.max_iter;
  so.threads = ctx.common.threads;
  StabilityReport original;
  const auto reports = invariance_check(ds, *p.family, *p.domain, pres, ctx.common.tol, so, &original);

  ctx.out.check("converged", original.converged, "original problem, max certificate " +
                                                      fmt_short(original.max_certificate_eps));
  std::string csv =
      "label,delta_original,delta_preconditioned,abs_diff,tolerance_used,kappa_before,kappa_after,per_index_checked,"
      "max_abs_diff_i,pass\n";
  Json items = Json::array();
  for (const auto& rep : reports) {
    ctx.out.check("invariance[" + rep.label + "]", rep.pass,
                  "abs_diff " + fmt_short(rep.abs_diff) + " <= " + fmt_short(rep.tolerance_used) + ", kappa " +
                      fmt_short(rep.kappa_before) + " -> " + fmt_short(rep.kappa_after));
    if (rep.per_index_checked)
      ctx.out.check("per_index[" + rep.label + "]", rep.per_index_pass,
                    "max_i |diff| " + fmt_short(rep.max_abs_diff_i) + " <= " + fmt_short(10.0 * rep.tolerance_used));
    const bool row_pass = rep.pass && rep.per_index_pass;
    csv += rep.label + ',' + fmt(rep.delta_original) + ',' + fmt(rep.delta_preconditioned) + ',' + fmt(rep.abs_diff) +
           ',' + fmt(rep.tolerance_used) + ',' + fmt(rep.kappa_before) + ',' + fmt(rep.kappa_after) + ',' +
           (rep.per_index_checked ? "true" : "false") + ',' + fmt(rep.max_abs_diff_i) + ',' +
           (row_pass ? "true" : "false") + '\n';
    items.push_back(to_json(rep));
  }
  ctx.result["problem"] = p.describe();
  ctx.result["original"] = to_json(original);
  ctx.result["invariance"] = std::move(items);
  ctx.csv = std::move(csv);
}

void run_mc(const Reader& r, Context& ctx) {
  const DistributionSpec spec = read_distribution(r, "distribution");
  const auto n = static_cast<Eigen::Index>(r.count("n", 2));
  const std::size_t trials = r.count("trials", 30, 200);
  const ExperimentOptions eo = read_experiment_options(r, ctx.common);

  const SyntheticDistribution dist(spec);
  const McReport rep = monte_carlo_gap(dist, n, trials, ctx.common.tol, ctx.common.seed, eo);

  const double id_diff = std::abs(rep.mean_gap - rep.mean_delta);
  const double id_tol = 3.0 * (rep.se_gap + rep.se_delta);
  ctx.out.check("identity", id_diff <= id_tol,
                "|mean_gap - mean_delta| " + fmt_short(id_diff) + " <= " + fmt_short(id_tol));
  const double ex_tol = rep.mean_delta + 3.0 * (rep.se_excess + rep.se_delta);
  ctx.out.check("excess_below_delta", rep.mean_excess <= ex_tol,
                "mean_excess " + fmt_short(rep.mean_excess) + " <= " + fmt_short(ex_tol));
  ctx.out.check("per_trial_bound", rep.bound_violations == 0,
                std::to_string(rep.bound_violations) + " of " + std::to_string(rep.trials) + " trials above bound");
  ctx.out.check("converged", rep.all_converged, "all solves reached tol");

  bool pass = true;
  for (const auto& pr : ctx.out.predicates) pass = pass && pr.pass;
  ctx.result["distribution"] = to_json(spec);
  ctx.result["mc"] = to_json(rep);
  ctx.csv = std::string(kSummaryHeader) + '\n' + mc_row(rep, rep.bound_unpreconditioned_mean, pass);
  ctx.notes.push_back("synthetic distribution constructed for this run; see result.distribution");
  ctx.notes.push_back(kSampleSizeNote);
}

void run_excess(const Reader& r, Context& ctx) {
  const DistributionSpec spec = read_distribution(r, "distribution");
  r.require("n_grid");
  const Json& grid_json = r.raw("n_grid");
  if (!grid_json.is_array() || grid_json.empty()) r.bad("n_grid", "expected a non-empty array of integers");
  std::vector<Eigen::Index> grid;
  for (const auto& v : grid_json) {
    if (!v.is_number_unsigned() || v.get<std::uint64_t>() < 2) r.bad("n_grid", "every entry must be an integer >= 2");
    grid.push_back(static_cast<Eigen::Index>(v.get<std::uint64_t>()));
  }
  const std::size_t trials = r.count("trials", 30, 100);
  const ExperimentOptions eo = read_experiment_options(r, ctx.common);
  std::optional<std::pair<double, double>> rate;
  if (r.has("rate_ratio")) {
    const Vector v = r.vector("rate_ratio");
    if (v.size() != 2 || !(v(0) > 0.0) || !(v(0) <= v(1))) r.bad("rate_ratio", "expected [lo, hi] with 0 < lo <= hi");
    rate = std::make_pair(v(0), v(1));
  }
  std::optional<double> gap_factor;
  if (r.has("min_gap_factor")) gap_factor = r.positive("min_gap_factor");

  const SyntheticDistribution dist(spec);
  const LossFamily family = dist.family();
  const auto rows = excess_risk_experiment(dist, grid, trials, ctx.common.tol, ctx.common.seed, eo);

  std::string csv = std::string(kSummaryHeader) + '\n';
  Json items = Json::array();
  for (const auto& row : rows) {
    const std::string tag = "[n=" + std::to_string(row.n) + "]";
    const double threshold = excess_threshold(family, row.d, row.n);
    const double limit = threshold + 3.0 * row.se_excess;
    const std::size_t before = ctx.out.predicates.size();
    ctx.out.check("excess_bound" + tag, row.mean_excess <= limit,
                  "mean_excess " + fmt_short(row.mean_excess) + " <= " + fmt_short(threshold) + " + 3 se = " +
                      fmt_short(limit));
    ctx.out.check("per_trial_bound" + tag, row.bound_violations == 0,
                  std::to_string(row.bound_violations) + " of " + std::to_string(row.trials) + " trials above bound");
    ctx.out.check("converged" + tag, row.all_converged, "all solves reached tol");
    if (gap_factor) {
      const double ratio = row.bound_unpreconditioned_mean / row.bound_preconditioned;
      ctx.out.check("conditioning_gap" + tag, ratio >= *gap_factor,
                    "bound_uncond / bound_precond " + fmt_short(ratio) + " >= " + fmt_short(*gap_factor));
    }
    bool pass = true;
    for (std::size_t k = before; k < ctx.out.predicates.size(); ++k) pass = pass && ctx.out.predicates[k].pass;
    csv += mc_row(row, row.bound_unpreconditioned_mean, pass);
    Json item = to_json(row);
    item["excess_threshold"] = threshold;
    items.push_back(std::move(item));
  }
  if (rate) {
    for (std::size_t a = 0; a < rows.size(); ++a)
      for (std::size_t b = 0; b < rows.size(); ++b) {
        if (rows[b].n != 2 * rows[a].n) continue;
        const double ratio = rows[b].mean_excess / rows[a].mean_excess;
        ctx.out.check("rate[n=" + std::to_string(rows[a].n) + "->" + std::to_string(rows[b].n) + "]",
                      ratio >= rate->first && ratio <= rate->second,
                      "mean_excess ratio " + fmt_short(ratio) + " in [" + fmt_short(rate->first) + ", " +
                          fmt_short(rate->second) + "]");
      }
  }
  ctx.result["distribution"] = to_json(spec);
  ctx.result["rows"] = std::move(items);
  ctx.csv = std::move(csv);
  ctx.notes.push_back("synthetic distribution constructed for this run; see result.distribution");
  ctx.notes.push_back(family.kind() == LossKind::Square
                          ? "excess_threshold = 4 Y^2 d / n; bound_preconditioned = 2 rho^2 d / (alpha n)"
                          : "excess_threshold = bound_preconditioned = 2 rho^2 d / (alpha n)");
  ctx.notes.push_back(kSampleSizeNote);
}

void run_sgd(const Reader& r, Context& ctx) {
  const DistributionSpec spec = read_distribution(r, "distribution");
  const auto n = static_cast<Eigen::Index>(r.count("n", 2));
  const std::size_t trials = r.count("trials", 30, 50);
  const ExperimentOptions eo = read_experiment_options(r, ctx.common);
  SgdExperimentConfig cfg;
  if (r.has("sgd")) {
    Reader s(r.raw("sgd"), r.child_path("sgd"), {"passes", "step_rule", "constant_step", "gamma", "averaging"});
    cfg.passes = s.count("passes", 1, 50);
    const std::string rule = s.string("step_rule", "inverse_strong_convexity");
    if (rule == "inverse_strong_convexity") {
      cfg.step_rule = StepRule::InverseStrongConvexity;
      if (s.has("constant_step")) s.bad("constant_step", "only used with step_rule \"constant\"");
    } else if (rule == "constant") {
      cfg.step_rule = StepRule::Constant;
      cfg.constant_step = s.number("constant_step");
      if (cfg.constant_step < 0.0) s.bad("constant_step", "must be >= 0");
    } else {
      s.bad("step_rule", "expected \"inverse_strong_convexity\" or \"constant\"");
    }
    cfg.gamma = s.number("gamma", 0.0);
    cfg.averaging = s.boolean("averaging", true);
  }
  const double max_eps = r.positive("max_eps", 1e-2);
  std::optional<double> min_ratio;
  if (r.has("min_hardt_ratio_over_kappa")) min_ratio = r.positive("min_hardt_ratio_over_kappa");

  const SyntheticDistribution dist(spec);
  const SgdReport rep = sgd_stability_experiment(dist, n, cfg, trials, ctx.common.seed, eo);

  ctx.out.check("eps_small", rep.measured_eps_max <= max_eps,
                "max measured eps " + fmt_short(rep.measured_eps_max) + " <= " + fmt_short(max_eps));
  const double limit = rep.preconditioned_bound + 3.0 * rep.se_delta_plus_eps;
  ctx.out.check("delta_plus_eps_bound", rep.mean_delta_plus_eps <= limit,
                "mean(delta + eps) " + fmt_short(rep.mean_delta_plus_eps) + " <= " + fmt_short(limit));
  if (min_ratio)
    ctx.out.check("hardt_inflation", rep.min_hardt_ratio_over_kappa >= *min_ratio,
                  "min (hardt / precond) / (kappa / d) " + fmt_short(rep.min_hardt_ratio_over_kappa) +
                      " >= " + fmt_short(*min_ratio));

  bool pass = true;
  for (const auto& pr : ctx.out.predicates) pass = pass && pr.pass;
  Json sgd_cfg;
  sgd_cfg["passes"] = cfg.passes;
  sgd_cfg["step_rule"] = cfg.step_rule == StepRule::Constant ? "constant" : "inverse_strong_convexity";
  sgd_cfg["constant_step"] = cfg.constant_step;
  sgd_cfg["gamma"] = cfg.gamma;
  sgd_cfg["averaging"] = cfg.averaging;
  ctx.result["distribution"] = to_json(spec);
  ctx.result["sgd_config"] = std::move(sgd_cfg);
  ctx.result["sgd"] = to_json(rep);
  ctx.csv = std::string(kSummaryHeader) + '\n' + mc_row(rep.mc, rep.hardt_style_bound, pass);
  ctx.notes.push_back("synthetic distribution constructed for this run; see result.distribution");
  ctx.notes.push_back("delta uses SGD outputs in place of exact minimizers; eps is measured against exact ERM");
  ctx.notes.push_back("summary.csv bound_uncond holds hardt_style_bound");
}

}  // namespace

bool RunResult::all_pass() const {
  return std::all_of(predicates.begin(), predicates.end(), [](const Predicate& p) { return p.pass; });
}

std::string RunResult::report_text() const { return report.dump(2) + "\n"; }

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"gen", "stability", "invariance", "mc", "excess", "sgd"};
  return names;
}

Json parse_config(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
  }
}

std::string format_predicate(const Predicate& p) {
  return std::string(p.pass ? "PASS " : "FAIL ") + p.name + (p.detail.empty() ? "" : ": " + p.detail);
}

RunResult run_command(const std::string& command, const Json& config, const RunOptions& options) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), command) == names.end())
    fail(ErrorCode::Config, "unknown command '" + command + "' (gen, stability, invariance, mc, excess, sgd)");

  std::unique_ptr<Reader> reader;
  if (command == "gen")
    reader.reset(new Reader(config, "", {GLMSTAB_COMMON_KEYS, "distribution", "n", "dataset_file"}));
  else if (command == "stability")
    reader.reset(new Reader(config, "",
                            {GLMSTAB_COMMON_KEYS, "dataset_path", "dataset", "distribution", "n", "loss", "domain",
                             "expected_delta"}));
  else if (command == "invariance")
    reader.reset(new Reader(config, "",
                            {GLMSTAB_COMMON_KEYS, "dataset_path", "dataset", "distribution", "n", "loss", "domain",
                             "preconditioners"}));
  else if (command == "mc")
    reader.reset(new Reader(config, "", {GLMSTAB_COMMON_KEYS, "distribution", "n", "trials", "m_test", "oracle_factor"}));
  else if (command == "excess")
    reader.reset(new Reader(config, "",
                            {GLMSTAB_COMMON_KEYS, "distribution", "n_grid", "trials", "m_test", "oracle_factor",
                             "rate_ratio", "min_gap_factor"}));
  else
    reader.reset(new Reader(config, "",
                            {GLMSTAB_COMMON_KEYS, "distribution", "n", "trials", "m_test", "oracle_factor", "sgd",
                             "max_eps", "min_hardt_ratio_over_kappa"}));
  const Reader& r = *reader;

  Context ctx;
  ctx.common = read_common(r, command, options);
  ctx.echo = config;
  ctx.echo.erase("threads");
  ctx.echo.erase("output_dir");

  if (command == "gen")
    run_gen(r, ctx);
  else if (command == "stability")
    run_stability(r, options, ctx);
  else if (command == "invariance")
    run_invariance(r, options, ctx);
  else if (command == "mc")
    run_mc(r, ctx);
  else if (command == "excess")
    run_excess(r, ctx);
  else
    run_sgd(r, ctx);

  RunResult out;
  out.command = command;
  out.predicates = std::move(ctx.out.predicates);
  out.summary_csv = std::move(ctx.csv);
  out.artifacts = std::move(ctx.artifacts);
  out.output_dir = ctx.common.output_dir;

  Json& rep = out.report;
  rep["command"] = command;
  rep["timestamp"] = options.timestamp ? utc_timestamp() : "";
  rep["seed"] = ctx.common.seed;
  rep["tol"] = ctx.common.tol;
  rep["max_iter"] = ctx.common.max_iter;
  rep["config"] = std::move(ctx.echo);
  rep["result"] = std::move(ctx.result);
  rep["predicates"] = predicates_json(out.predicates);
  rep["pass"] = out.all_pass();
  rep["notes"] = ctx.notes;
  return out;
}

}  // namespace glmstab
