#include "glmstab/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "glmstab/error.hpp"

namespace glmstab {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

double parse_double(std::string_view field, std::size_t line_no, std::size_t column) {
  double value = 0.0;
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    std::ostringstream os;
    os << "line " << line_no << ", column " << column << ": cannot parse '" << field << "' as a number";
    fail(ErrorCode::Data, os.str());
  }
  return value;
}

}  // namespace

Dataset::Dataset(Matrix X, Vector y, double cap_Y) : X_(std::move(X)), y_(std::move(y)), cap_Y_(cap_Y) {
  if (!(cap_Y_ > 0.0) || !std::isfinite(cap_Y_)) fail(ErrorCode::Data, "cap_Y must be positive and finite");
  if (X_.rows() < 2) fail(ErrorCode::Data, "a dataset needs at least 2 samples");
  if (X_.cols() < 1) fail(ErrorCode::Data, "a dataset needs at least 1 feature");
  if (y_.size() != X_.rows()) fail(ErrorCode::Data, "label count does not match the number of instances");
  if (!X_.allFinite()) fail(ErrorCode::Data, "instance matrix contains non-finite entries");
  if (!y_.allFinite()) fail(ErrorCode::Data, "labels contain non-finite entries");
  for (Eigen::Index i = 0; i < y_.size(); ++i) {
    if (std::abs(y_(i)) > cap_Y_) {
      std::ostringstream os;
      os.precision(17);
      os << "label y[" << i << "] = " << y_(i) << " lies outside [-" << cap_Y_ << ", " << cap_Y_ << "]";
      fail(ErrorCode::Data, os.str());
    }
  }
}

bool Dataset::operator==(const Dataset& other) const {
  return cap_Y_ == other.cap_Y_ && X_.rows() == other.X_.rows() && X_.cols() == other.X_.cols() &&
         X_ == other.X_ && y_ == other.y_;
}

Dataset parse_csv(std::string_view text, double cap_Y) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(start, end - start));
    if (!line.empty()) lines.push_back(line);
    start = end + 1;
  }
  if (lines.empty()) fail(ErrorCode::Data, "empty dataset file");

  const auto header = split_fields(lines.front());
  if (header.size() < 2) fail(ErrorCode::Data, "header must be x1,...,xd,y");
  const std::size_t d = header.size() - 1;
  for (std::size_t k = 0; k < d; ++k) {
    if (header[k] != "x" + std::to_string(k + 1))
      fail(ErrorCode::Data, "header column " + std::to_string(k + 1) + " must be named x" + std::to_string(k + 1));
  }
  if (header.back() != "y") fail(ErrorCode::Data, "last header column must be named y");

  const std::size_t n = lines.size() - 1;
  Matrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Vector y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto fields = split_fields(lines[i + 1]);
    if (fields.size() != d + 1) {
      std::ostringstream os;
      os << "line " << i + 2 << ": expected " << d + 1 << " fields, found " << fields.size();
      fail(ErrorCode::Data, os.str());
    }
    for (std::size_t k = 0; k < d; ++k)
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = parse_double(fields[k], i + 2, k + 1);
    y(static_cast<Eigen::Index>(i)) = parse_double(fields[d], i + 2, d + 1);
  }
  return Dataset(std::move(X), std::move(y), cap_Y);
}

Dataset load_csv(const std::filesystem::path& path, double cap_Y) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open dataset file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), cap_Y);
}

std::string to_csv(const Dataset& dataset) {
  std::string out;
  for (Eigen::Index k = 0; k < dataset.d(); ++k) out += "x" + std::to_string(k + 1) + ",";
  out += "y\n";
  char buf[32];
  for (Eigen::Index i = 0; i < dataset.n(); ++i) {
    for (Eigen::Index k = 0; k < dataset.d(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g,", dataset.X()(i, k));
      out += buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g\n", dataset.y()(i));
    out += buf;
  }
  return out;
}

}  // namespace glmstab
