#include "ere/glm.hpp"

#include "ere/error.hpp"
#include "glm_detail.hpp"

#include <cmath>
#include <string>

namespace ere {

namespace detail {

std::optional<double> objective_loglik(const GlmFamily& family, const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& eta) {
  double total = 0.0;
  for (Index i = 0; i < y.size(); ++i) {
    if (!in_domain(family, eta[i])) return std::nullopt;
    total += observation_loglik(family, y[i], eta[i]);
  }
  if (!std::isfinite(total)) return std::nullopt;
  return total;
}

WorkingTerms working_terms(const GlmFamily& family, const Eigen::VectorXd& y, const Eigen::VectorXd& eta,
                           double weight_floor, double separation_eta) {
  WorkingTerms t;
  const Index n = y.size();
  t.score.resize(n);
  t.weight.resize(n);
  for (Index i = 0; i < n; ++i) {
    const ObservationTerms o = observation_terms(family, y[i], eta[i]);
    t.loglik += o.loglik;
    t.score[i] = o.score;
    t.weight[i] = std::max(o.weight, weight_floor);
    if (family.binomial() && std::abs(eta[i]) > separation_eta) t.separation = true;
  }
  return t;
}

Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& X, const Eigen::VectorXd& w) {
  const Eigen::MatrixXd Xw = X.array().colwise() * w.array().sqrt();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(X.cols(), X.cols());
  G.selfadjointView<Eigen::Lower>().rankUpdate(Xw.transpose());
  return G.selfadjointView<Eigen::Lower>();
}

Eigen::VectorXd initial_coefficients(const GlmFamily& family, const Eigen::MatrixXd& Xs,
                                     const Eigen::VectorXd& y) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(Xs.cols());
  if (family.kind != FamilyKind::exponential) return beta;
  if (Xs.cols() == 0) {
    throw DomainError("exponential: the empty model has linear predictor 0, outside the domain");
  }
  const Eigen::VectorXd target = Eigen::VectorXd::Constant(y.size(), 1.0 / y.mean());
  beta = Xs.colPivHouseholderQr().solve(target);
  const Eigen::VectorXd eta = Xs * beta;
  if ((eta.array() <= 0.0).any()) {
    throw DomainError("exponential: no feasible starting point with a positive linear predictor");
  }
  return beta;
}

}  // namespace detail

void validate_dataset(const Dataset& data, const GlmFamily& family) {
  if (data.n() < 2) throw DataError("dataset needs at least 2 rows");
  if (data.y.size() != data.n()) throw DataError("response length does not match the design");
  if (!data.X.allFinite()) throw DataError("design matrix has non-finite entries");
  for (Index i = 0; i < data.n(); ++i) {
    if (!admissible_response(family, data.y[i])) {
      throw DataError("row " + std::to_string(i + 1) + ": response " + std::to_string(data.y[i]) +
                      " is not admissible for the " + std::string(family.name()) + " family");
    }
  }
}

double log_likelihood(const Dataset& data, const Eigen::VectorXd& beta, const GlmFamily& family,
                      double dispersion) {
  if (!(dispersion > 0.0)) throw std::invalid_argument("dispersion must be positive");
  if (!beta.allFinite()) throw std::invalid_argument("coefficients must be finite");
  const Eigen::VectorXd eta = data.X * beta;
  double total = 0.0;
  for (Index i = 0; i < data.n(); ++i) total += observation_loglik(family, data.y[i], eta[i]);
  return total / dispersion;
}

double reported_loglik(const Dataset& data, const Eigen::VectorXd& eta, const GlmFamily& family) {
  if (family.estimates_dispersion()) {
    const double n = static_cast<double>(data.n());
    const double rss = std::max((data.y - eta).squaredNorm(), 1e-300);
    return -0.5 * n * (std::log(rss / n) + 1.0);
  }
  auto ll = detail::objective_loglik(family, data.y, eta);
  if (!ll) throw DomainError(std::string(family.name()) + ": linear predictor outside the domain");
  return *ll;
}

double estimate_dispersion(const Dataset& data, const Eigen::VectorXd& eta, const GlmFamily& family,
                           Index df) {
  if (!family.estimates_dispersion()) return 1.0;
  const Index resid_df = data.n() - df;
  if (resid_df <= 0) throw NumericalError("no residual degrees of freedom to estimate the dispersion");
  return std::max((data.y - eta).squaredNorm() / static_cast<double>(resid_df), 1e-300);
}

Eigen::VectorXd score(const Dataset& data, const Eigen::VectorXd& beta, const GlmFamily& family) {
  const Eigen::VectorXd eta = data.X * beta;
  Eigen::VectorXd g(data.n());
  for (Index i = 0; i < data.n(); ++i) g[i] = observation_terms(family, data.y[i], eta[i]).score;
  return data.X.transpose() * g;
}

FitResult fit_mle(const Dataset& data, const IndexSet& support, const GlmFamily& family,
                  const IrlsOptions& options) {
  const Index n = data.n();
  const Index p = data.p();
  const auto s = static_cast<Index>(support.size());
  for (Index j : support) {
    if (j < 0 || j >= p) throw std::out_of_range("support index " + std::to_string(j) + " outside the design");
  }
  if (s >= n) throw NumericalError("support size " + std::to_string(s) + " must be smaller than n");

  FitResult fit;
  fit.n = n;
  fit.beta = Eigen::VectorXd::Zero(p);

  const Eigen::MatrixXd Xs = data.X(Eigen::all, support);
  Eigen::VectorXd beta = detail::initial_coefficients(family, Xs, data.y);
  Eigen::VectorXd eta = Xs * beta;
  auto start = detail::objective_loglik(family, data.y, eta);
  if (!start) throw DomainError(std::string(family.name()) + ": starting point outside the domain");
  double obj = *start;
  fit.objective_trace.push_back(obj);

  int small_changes = 0;
  double gnorm = 0.0;
  for (int it = 0; it < options.max_iterations; ++it) {
    const auto terms = detail::working_terms(family, data.y, eta, options.weight_floor, options.separation_eta);
    fit.separation = fit.separation || terms.separation;
    const Eigen::VectorXd grad = Xs.transpose() * terms.score;
    gnorm = grad.norm();
    if (gnorm <= options.gradient_tolerance) break;

    const Eigen::MatrixXd H = detail::weighted_gram(Xs, terms.weight);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    const Eigen::VectorXd d = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || d.minCoeff() <= 1e-12 * std::max(1.0, d.maxCoeff())) {
      throw NumericalError("rank-deficient design on the requested support");
    }
    const Eigen::VectorXd step = ldlt.solve(grad);

    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd cand_beta, cand_eta;
    double cand_obj = obj;
    for (int h = 0; h <= options.max_halvings; ++h, t *= 0.5) {
      cand_beta = beta + t * step;
      cand_eta = Xs * cand_beta;
      auto ll = detail::objective_loglik(family, data.y, cand_eta);
      if (ll && *ll >= obj) {
        cand_obj = *ll;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // near the optimum the ascent test sits in rounding noise; take the full
      // step if it does not lose more than that and shrinks the score
      cand_beta = beta + step;
      cand_eta = Xs * cand_beta;
      auto ll = detail::objective_loglik(family, data.y, cand_eta);
      if (!ll || *ll < obj - 1e-12 * std::max(1.0, std::abs(obj))) break;
      const auto cand_terms =
          detail::working_terms(family, data.y, cand_eta, options.weight_floor, options.separation_eta);
      if ((Xs.transpose() * cand_terms.score).norm() >= gnorm) break;
      cand_obj = *ll;
    }

    const double change = std::abs(cand_obj - obj) / std::max(1.0, std::abs(obj));
    beta = std::move(cand_beta);
    eta = std::move(cand_eta);
    obj = cand_obj;
    fit.objective_trace.push_back(obj);
    fit.iterations = it + 1;
    small_changes = change < options.tolerance ? small_changes + 1 : 0;
    // a flat likelihood alone does not stop Newton while the score is still
    // large relative to it
    const bool flat = small_changes >= 2 && gnorm <= options.gradient_tolerance * std::max(1.0, std::abs(obj));
    if (flat || small_changes >= 4 || (small_changes >= 1 && fit.separation)) {
      const auto final_terms =
          detail::working_terms(family, data.y, eta, options.weight_floor, options.separation_eta);
      gnorm = (Xs.transpose() * final_terms.score).norm();
      break;
    }
  }
  if (fit.iterations == options.max_iterations || s == 0) {
    const auto final_terms = detail::working_terms(family, data.y, eta, options.weight_floor, options.separation_eta);
    gnorm = s == 0 ? 0.0 : (Xs.transpose() * final_terms.score).norm();
  }

  fit.gradient_norm = gnorm;
  fit.converged = gnorm <= options.gradient_tolerance * std::max(1.0, std::abs(obj));
  for (Index k = 0; k < s; ++k) {
    fit.beta[support[static_cast<std::size_t>(k)]] = beta[k];
    if (beta[k] != 0.0) fit.support.push_back(support[static_cast<std::size_t>(k)]);
  }
  fit.loglik = reported_loglik(data, eta, family);
  fit.dispersion = estimate_dispersion(data, eta, family, static_cast<Index>(fit.support.size()));
  return fit;
}

double deviance_difference(const FitResult& full, const FitResult& reduced, Index n) {
  if (full.n != n || reduced.n != n) {
    throw std::invalid_argument("deviance_difference: fits were produced on datasets of different size");
  }
  return 2.0 / static_cast<double>(n) * (full.loglik - reduced.loglik);
}

double bic(const FitResult& fit) {
  return -2.0 * fit.loglik + static_cast<double>(fit.support.size()) * std::log(static_cast<double>(fit.n));
}

}  // namespace ere
