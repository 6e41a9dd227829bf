#pragma once

#include "ere/glm.hpp"

#include <optional>

namespace ere::detail {

/// Sum of per-observation log-likelihoods at eta (unit dispersion), or nullopt
/// when any eta leaves the family domain.
std::optional<double> objective_loglik(const GlmFamily& family, const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& eta);

struct WorkingTerms {
  double loglik = 0.0;
  Eigen::VectorXd score;   // dl/deta per observation
  Eigen::VectorXd weight;  // -d2l/deta2 per observation, floored
  bool separation = false;
};

WorkingTerms working_terms(const GlmFamily& family, const Eigen::VectorXd& y, const Eigen::VectorXd& eta,
                           double weight_floor, double separation_eta);

/// X' diag(w) X.
Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& X, const Eigen::VectorXd& w);

/// Feasible starting coefficients for the columns `Xs`: zero, except for the
/// exponential family where the fit targets eta = 1/mean(y).
Eigen::VectorXd initial_coefficients(const GlmFamily& family, const Eigen::MatrixXd& Xs,
                                     const Eigen::VectorXd& y);

}  // namespace ere::detail
