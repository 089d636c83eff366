#ifndef GLMSTAB_DATASET_HPP
#define GLMSTAB_DATASET_HPP

#include <filesystem>
#include <string>
#include <string_view>

#include "glmstab/linalg.hpp"

namespace glmstab {

// Training sequence S: n instances (rows of X), labels y and the label cap Y.
// Construction validates n >= 2, d >= 1, finiteness and |y_i| <= cap_Y.
class Dataset {
 public:
  Dataset(Matrix X, Vector y, double cap_Y);

  const Matrix& X() const noexcept { return X_; }
  const Vector& y() const noexcept { return y_; }
  double cap_Y() const noexcept { return cap_Y_; }
  Eigen::Index n() const noexcept { return X_.rows(); }
  Eigen::Index d() const noexcept { return X_.cols(); }

  bool operator==(const Dataset& other) const;

 private:
  Matrix X_;
  Vector y_;
  double cap_Y_;
};

// CSV with header "x1,...,xd,y" and one sample per row.
Dataset parse_csv(std::string_view text, double cap_Y);
Dataset load_csv(const std::filesystem::path& path, double cap_Y);
// Values are written with 17 significant digits so parse_csv(to_csv(s)) == s.
std::string to_csv(const Dataset& dataset);

}  // namespace glmstab

#endif  // GLMSTAB_DATASET_HPP
