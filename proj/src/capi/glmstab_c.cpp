#include "glmstab/glmstab.h"

#include <exception>
#include <new>
#include <string>
#include <vector>

#include "glmstab/error.hpp"
#include "glmstab/runner.hpp"
#include "glmstab/stability.hpp"

struct gs_dataset {
  glmstab::Dataset value;
};

struct gs_loss {
  glmstab::LossFamily value;
};

struct gs_domain {
  glmstab::Domain value;
};

struct gs_report {
  glmstab::RunResult result;
  std::string json;
  std::vector<std::string> lines;
};

namespace {

thread_local std::string last_error;

gs_status set_error(gs_status status, const char* message) {
  last_error = message;
  return status;
}

template <class F>
gs_status guarded(F&& f) {
  try {
    last_error.clear();
    f();
    return GS_OK;
  } catch (const glmstab::Error& e) {
    return set_error(static_cast<gs_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(GS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(GS_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(GS_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) glmstab::fail(glmstab::ErrorCode::Argument, what);
}

glmstab::Matrix row_major(const double* data, size_t rows, size_t cols) {
  glmstab::Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (size_t r = 0; r < rows; ++r)
    for (size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = data[r * cols + c];
  return m;
}

gs_status make_domain(gs_domain** out, glmstab::Domain (*make)(double), double radius) {
  return guarded([&] {
    require(out != nullptr, "out must not be NULL");
    *out = new gs_domain{make(radius)};
  });
}

}  // namespace

extern "C" {

const char* gs_version(void) { return "0.1.0"; }

const char* gs_last_error(void) { return last_error.c_str(); }

const char* gs_status_name(gs_status status) {
  if (status == GS_OK) return "ok";
  if (status == GS_ERR_INTERNAL) return "internal";
  return glmstab::to_string(static_cast<glmstab::ErrorCode>(static_cast<int>(status)));
}

gs_status gs_dataset_create(const double* X, const double* y, size_t n, size_t d, double cap_Y, gs_dataset** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be NULL");
    require(X != nullptr && y != nullptr, "X and y must not be NULL");
    glmstab::Vector labels(static_cast<Eigen::Index>(n));
    for (size_t i = 0; i < n; ++i) labels(static_cast<Eigen::Index>(i)) = y[i];
    *out = new gs_dataset{glmstab::Dataset(row_major(X, n, d), std::move(labels), cap_Y)};
  });
}

gs_status gs_dataset_load_csv(const char* path, double cap_Y, gs_dataset** out) {
  return guarded([&] {
    require(out != nullptr && path != nullptr, "path and out must not be NULL");
    *out = new gs_dataset{glmstab::load_csv(path, cap_Y)};
  });
}

size_t gs_dataset_n(const gs_dataset* dataset) { return dataset ? static_cast<size_t>(dataset->value.n()) : 0; }

size_t gs_dataset_d(const gs_dataset* dataset) { return dataset ? static_cast<size_t>(dataset->value.d()) : 0; }

void gs_dataset_free(gs_dataset* dataset) { delete dataset; }

gs_status gs_loss_create(gs_loss_kind kind, double cap_Y, gs_loss** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be NULL");
    require(kind == GS_LOSS_SQUARE || kind == GS_LOSS_BOUNDED_LOGISTIC, "unknown loss kind");
    const auto k = kind == GS_LOSS_SQUARE ? glmstab::LossKind::Square : glmstab::LossKind::BoundedLogistic;
    *out = new gs_loss{glmstab::make_loss(k, cap_Y)};
  });
}

double gs_loss_rho(const gs_loss* loss) { return loss ? loss->value.rho() : 0.0; }

double gs_loss_alpha(const gs_loss* loss) { return loss ? loss->value.alpha() : 0.0; }

gs_status gs_loss_eval(const gs_loss* loss, double y, double z, double* value, double* first, double* second) {
  return guarded([&] {
    require(loss != nullptr, "loss must not be NULL");
    const glmstab::LossValue v = loss->value.eval(y, z);
    if (value) *value = v.value;
    if (first) *first = v.first;
    if (second) *second = v.second;
  });
}

void gs_loss_free(gs_loss* loss) { delete loss; }

gs_status gs_domain_euclidean_ball(double radius, gs_domain** out) {
  return make_domain(out, &glmstab::Domain::euclidean_ball, radius);
}

gs_status gs_domain_l1_ball(double radius, gs_domain** out) {
  return make_domain(out, &glmstab::Domain::l1_ball, radius);
}

gs_status gs_domain_box(double radius, gs_domain** out) { return make_domain(out, &glmstab::Domain::box, radius); }

gs_status gs_domain_quad_ball(const double* A, size_t d, double radius, gs_domain** out) {
  return guarded([&] {
    require(out != nullptr && A != nullptr, "A and out must not be NULL");
    *out = new gs_domain{glmstab::Domain::quad_ball(row_major(A, d, d), radius)};
  });
}

void gs_domain_free(gs_domain* domain) { delete domain; }

gs_status gs_erm_solve(const gs_dataset* dataset, const gs_loss* loss, const gs_domain* domain, double tol,
                       size_t max_iter, double* w_out, gs_solve_info* info) {
  return guarded([&] {
    require(dataset && loss && domain && w_out, "dataset, loss, domain and w_out must not be NULL");
    const glmstab::SolveResult r = glmstab::erm_solve(dataset->value, loss->value, domain->value, tol, max_iter);
    for (Eigen::Index k = 0; k < r.w_hat.size(); ++k) w_out[k] = r.w_hat(k);
    if (info) {
      info->certificate_eps = r.certificate_eps;
      info->objective = r.objective;
      info->iterations = r.iterations;
      info->converged = r.converged ? 1 : 0;
    }
  });
}

gs_status gs_average_stability(const gs_dataset* dataset, const gs_loss* loss, const gs_domain* domain, double tol,
                               unsigned threads, gs_stability* out, double* delta_i) {
  return guarded([&] {
    require(dataset && loss && domain && out, "dataset, loss, domain and out must not be NULL");
    glmstab::StabilityOptions options;
    options.threads = threads;
    const glmstab::StabilityReport r =
        glmstab::average_stability(dataset->value, loss->value, domain->value, tol, options);
    out->delta = r.delta;
    out->bound_avg = r.bound_avg;
    out->bound_uniform = r.bound_uniform;
    out->bound_preconditioned = r.bound_preconditioned;
    out->numeric_slack = r.numeric_slack;
    out->kappa_C = r.kappa_C;
    out->rank = static_cast<size_t>(r.rank);
    out->converged = r.converged ? 1 : 0;
    if (delta_i)
      for (Eigen::Index i = 0; i < r.delta_i.size(); ++i) delta_i[i] = r.delta_i(i);
  });
}

void gs_run_options_init(gs_run_options* options) {
  if (!options) return;
  *options = gs_run_options{};
  options->threads = -1;
  options->timestamp = 1;
}

gs_status gs_run_command(const char* command, const char* config_json, const gs_run_options* options,
                         gs_report** out) {
  return guarded([&] {
    require(command && config_json && out, "command, config_json and out must not be NULL");
    glmstab::RunOptions ro;
    if (options) {
      if (options->has_seed) ro.seed = options->seed;
      if (options->has_tol) ro.tol = options->tol;
      if (options->threads >= 0) ro.threads = static_cast<unsigned>(options->threads);
      if (options->output_dir) ro.output_dir = std::string(options->output_dir);
      if (options->base_dir) ro.base_dir = options->base_dir;
      ro.timestamp = options->timestamp != 0;
    }
    if (ro.tol && !(*ro.tol > 0.0))
      glmstab::fail(glmstab::ErrorCode::Config, "tol must be a finite number > 0");
    const glmstab::Json config = glmstab::parse_config(config_json);
    auto report = std::make_unique<gs_report>();
    report->result = glmstab::run_command(command, config, ro);
    report->json = report->result.report_text();
    for (const auto& p : report->result.predicates) report->lines.push_back(glmstab::format_predicate(p));
    *out = report.release();
  });
}

const char* gs_report_json(const gs_report* report) { return report ? report->json.c_str() : ""; }

const char* gs_report_summary_csv(const gs_report* report) {
  return report ? report->result.summary_csv.c_str() : "";
}

const char* gs_report_output_dir(const gs_report* report) {
  return report ? report->result.output_dir.c_str() : "";
}

int gs_report_all_pass(const gs_report* report) { return report && report->result.all_pass() ? 1 : 0; }

size_t gs_report_predicate_count(const gs_report* report) { return report ? report->result.predicates.size() : 0; }

const char* gs_report_predicate_name(const gs_report* report, size_t index) {
  if (!report || index >= report->result.predicates.size()) return nullptr;
  return report->result.predicates[index].name.c_str();
}

int gs_report_predicate_pass(const gs_report* report, size_t index) {
  if (!report || index >= report->result.predicates.size()) return 0;
  return report->result.predicates[index].pass ? 1 : 0;
}

const char* gs_report_predicate_line(const gs_report* report, size_t index) {
  if (!report || index >= report->lines.size()) return nullptr;
  return report->lines[index].c_str();
}

size_t gs_report_artifact_count(const gs_report* report) { return report ? report->result.artifacts.size() : 0; }

const char* gs_report_artifact_name(const gs_report* report, size_t index) {
  if (!report || index >= report->result.artifacts.size()) return nullptr;
  return report->result.artifacts[index].file_name.c_str();
}

const char* gs_report_artifact_content(const gs_report* report, size_t index) {
  if (!report || index >= report->result.artifacts.size()) return nullptr;
  return report->result.artifacts[index].content.c_str();
}

void gs_report_free(gs_report* report) { delete report; }

}  // extern "C"
