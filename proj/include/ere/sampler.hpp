#pragma once

#include <Eigen/Dense>

#include <random>

namespace ere {

/// Source of covariate rows x ~ N(0, Sigma).
class CovariateSampler {
 public:
  virtual ~CovariateSampler() = default;
  virtual Eigen::Index dim() const = 0;
  /// `rows` independent draws, one per row.
  virtual Eigen::MatrixXd sample(Eigen::Index rows, std::mt19937_64& rng) const = 0;
};

/// Sigma = (1 - rho) I + rho J, drawn as sqrt(1 - rho) Z + sqrt(rho) g 1'
/// with one shared normal g per row.
class EquicorrelatedSampler final : public CovariateSampler {
 public:
  EquicorrelatedSampler(Eigen::Index p, double rho);
  Eigen::Index dim() const override { return p_; }
  Eigen::MatrixXd sample(Eigen::Index rows, std::mt19937_64& rng) const override;
  Eigen::MatrixXd covariance() const;
  double rho() const { return rho_; }

 private:
  Eigen::Index p_;
  double rho_;
};

/// General Sigma through its Cholesky factor.
class GaussianSampler final : public CovariateSampler {
 public:
  explicit GaussianSampler(const Eigen::MatrixXd& sigma);
  Eigen::Index dim() const override { return factor_.rows(); }
  Eigen::MatrixXd sample(Eigen::Index rows, std::mt19937_64& rng) const override;

 private:
  Eigen::MatrixXd factor_;
};

/// Matrix of iid standard normals.
Eigen::MatrixXd standard_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng);

}  // namespace ere
