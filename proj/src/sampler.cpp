#include "ere/sampler.hpp"

#include "ere/error.hpp"

#include <cmath>

namespace ere {

Eigen::MatrixXd standard_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd Z(rows, cols);
  // row-major fill so that a row's draws do not depend on the row count
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) Z(i, j) = nd(rng);
  }
  return Z;
}

EquicorrelatedSampler::EquicorrelatedSampler(Eigen::Index p, double rho) : p_(p), rho_(rho) {
  if (p < 1) throw std::invalid_argument("sampler dimension must be >= 1");
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("equicorrelation must lie in [0, 1)");
}

Eigen::MatrixXd EquicorrelatedSampler::sample(Eigen::Index rows, std::mt19937_64& rng) const {
  std::normal_distribution<double> nd;
  const double a = std::sqrt(1.0 - rho_), b = std::sqrt(rho_);
  Eigen::MatrixXd X(rows, p_);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double g = nd(rng);
    for (Eigen::Index j = 0; j < p_; ++j) X(i, j) = a * nd(rng) + b * g;
  }
  return X;
}

Eigen::MatrixXd EquicorrelatedSampler::covariance() const {
  return (1.0 - rho_) * Eigen::MatrixXd::Identity(p_, p_) + rho_ * Eigen::MatrixXd::Ones(p_, p_);
}

GaussianSampler::GaussianSampler(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0) throw std::invalid_argument("covariance must be square");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
  factor_ = llt.matrixL();
}

Eigen::MatrixXd GaussianSampler::sample(Eigen::Index rows, std::mt19937_64& rng) const {
  return standard_normal(rows, factor_.rows(), rng) * factor_.transpose();
}

}  // namespace ere
