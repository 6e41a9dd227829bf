#include "ere/family.hpp"

#include "ere/error.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ere {

namespace {

void require_domain(const GlmFamily& family, double eta) {
  if (!in_domain(family, eta)) {
    throw DomainError(std::string(family.name()) + ": linear predictor " + std::to_string(eta) +
                      " outside the admissible domain");
  }
}

double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double logistic(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

namespace normal {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double log_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double log_cdf(double x) {
  if (x > -20.0) return std::log(cdf(x));
  // asymptotic series of the Mills ratio for the far lower tail
  const double z2 = 1.0 / (x * x);
  const double series = 1.0 - z2 * (1.0 - 3.0 * z2 * (1.0 - 5.0 * z2 * (1.0 - 7.0 * z2)));
  return log_pdf(x) - std::log(-x) + std::log(series);
}

double mills_ratio(double x) {
  if (x > -20.0) return std::exp(log_pdf(x)) / cdf(x);
  return std::exp(log_pdf(x) - log_cdf(x));
}

}  // namespace normal

std::string_view GlmFamily::name() const {
  switch (kind) {
    case FamilyKind::gaussian: return "gaussian";
    case FamilyKind::binomial_logit: return "logistic";
    case FamilyKind::poisson: return "poisson";
    case FamilyKind::exponential: return "exponential";
    case FamilyKind::binomial_probit: return "probit";
  }
  return "unknown";
}

GlmFamily parse_family(std::string_view name) {
  if (name == "gaussian" || name == "gaussian-identity" || name == "linear") return GlmFamily::gaussian();
  if (name == "logistic" || name == "binomial-logit" || name == "logit") return GlmFamily::logistic();
  if (name == "poisson" || name == "poisson-log") return GlmFamily::poisson();
  if (name == "exponential" || name == "exponential-reciprocal") return GlmFamily::exponential();
  if (name == "probit" || name == "binomial-probit") return GlmFamily::probit();
  throw ConfigError("unknown family '" + std::string(name) + "'");
}

bool in_domain(const GlmFamily& family, double eta) {
  if (!std::isfinite(eta)) return false;
  return family.kind != FamilyKind::exponential || eta > 0.0;
}

bool admissible_response(const GlmFamily& family, double y) {
  if (!std::isfinite(y)) return false;
  switch (family.kind) {
    case FamilyKind::gaussian: return true;
    case FamilyKind::binomial_logit:
    case FamilyKind::binomial_probit: return y == 0.0 || y == 1.0;
    case FamilyKind::poisson: return y >= 0.0 && y == std::floor(y);
    case FamilyKind::exponential: return y > 0.0;
  }
  return false;
}

Cumulant family_eval(const GlmFamily& family, double theta) {
  require_domain(family, theta);
  switch (family.kind) {
    case FamilyKind::gaussian: return {0.5 * theta * theta, theta, 1.0};
    case FamilyKind::binomial_logit: {
      const double mu = logistic(theta);
      return {softplus(theta), mu, mu * logistic(-theta)};
    }
    case FamilyKind::poisson: {
      const double e = std::exp(theta);
      return {e, e, e};
    }
    case FamilyKind::exponential: return {-std::log(theta), -1.0 / theta, 1.0 / (theta * theta)};
    case FamilyKind::binomial_probit: break;
  }
  throw std::invalid_argument("probit is not a canonical family; it has no cumulant function");
}

ObservationTerms observation_terms(const GlmFamily& family, double y, double eta) {
  require_domain(family, eta);
  if (family.kind == FamilyKind::binomial_probit) {
    // l = y log Phi(eta) + (1 - y) log Phi(-eta); exact second derivative
    if (y > 0.5) {
      const double r = normal::mills_ratio(eta);
      return {normal::log_cdf(eta), r, r * (eta + r)};
    }
    const double r = normal::mills_ratio(-eta);
    return {normal::log_cdf(-eta), -r, r * (r - eta)};
  }
  const Cumulant c = family_eval(family, eta);
  const double t = family.kind == FamilyKind::exponential ? -y : y;
  return {t * eta - c.b, t - c.b_prime, c.b_double_prime};
}

double observation_loglik(const GlmFamily& family, double y, double eta) {
  require_domain(family, eta);
  switch (family.kind) {
    case FamilyKind::gaussian: return y * eta - 0.5 * eta * eta;
    case FamilyKind::binomial_logit: return y * eta - softplus(eta);
    case FamilyKind::poisson: return y * eta - std::exp(eta);
    case FamilyKind::exponential: return -y * eta + std::log(eta);
    case FamilyKind::binomial_probit: return y > 0.5 ? normal::log_cdf(eta) : normal::log_cdf(-eta);
  }
  return 0.0;
}

double mean_response(const GlmFamily& family, double eta) {
  require_domain(family, eta);
  switch (family.kind) {
    case FamilyKind::gaussian: return eta;
    case FamilyKind::binomial_logit: return logistic(eta);
    case FamilyKind::poisson: return std::exp(eta);
    case FamilyKind::exponential: return 1.0 / eta;
    case FamilyKind::binomial_probit: return normal::cdf(eta);
  }
  return 0.0;
}

double fisher_weight(const GlmFamily& family, double eta) {
  if (family.kind == FamilyKind::binomial_probit) {
    require_domain(family, eta);
    // phi^2 / (Phi (1 - Phi)) = r(eta) r(-eta) in terms of Mills ratios
    return normal::mills_ratio(eta) * normal::mills_ratio(-eta);
  }
  return family_eval(family, eta).b_double_prime;
}

double kl_divergence(const GlmFamily& family, double eta_true, double eta_alt) {
  if (family.kind == FamilyKind::binomial_probit) {
    require_domain(family, eta_true);
    require_domain(family, eta_alt);
    const double p = normal::cdf(eta_true);
    const double q = normal::cdf(-eta_true);
    double kl = 0.0;
    if (p > 0) kl += p * (normal::log_cdf(eta_true) - normal::log_cdf(eta_alt));
    if (q > 0) kl += q * (normal::log_cdf(-eta_true) - normal::log_cdf(-eta_alt));
    return kl;
  }
  const Cumulant star = family_eval(family, eta_true);
  const Cumulant alt = family_eval(family, eta_alt);
  return star.b_prime * (eta_true - eta_alt) + alt.b - star.b;
}

}  // namespace ere
