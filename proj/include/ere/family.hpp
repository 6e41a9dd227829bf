#pragma once

#include <string>
#include <string_view>

namespace ere {

enum class FamilyKind { gaussian, binomial_logit, poisson, exponential, binomial_probit };

enum class DispersionMode { fixed_one, estimated };

/// Exponential-family response model. Every family except binomial-probit is
/// written in canonical form exp{t(y) eta - b(eta)} with t(y) = y, except the
/// exponential family where t(y) = -y and b(eta) = -log(eta).
struct GlmFamily {
  FamilyKind kind = FamilyKind::gaussian;
  DispersionMode dispersion = DispersionMode::fixed_one;

  static GlmFamily gaussian(DispersionMode mode = DispersionMode::estimated) {
    return {FamilyKind::gaussian, mode};
  }
  static GlmFamily logistic() { return {FamilyKind::binomial_logit, DispersionMode::fixed_one}; }
  static GlmFamily poisson() { return {FamilyKind::poisson, DispersionMode::fixed_one}; }
  static GlmFamily exponential() { return {FamilyKind::exponential, DispersionMode::fixed_one}; }
  static GlmFamily probit() { return {FamilyKind::binomial_probit, DispersionMode::fixed_one}; }

  bool canonical() const { return kind != FamilyKind::binomial_probit; }
  bool estimates_dispersion() const {
    return kind == FamilyKind::gaussian && dispersion == DispersionMode::estimated;
  }
  bool binomial() const {
    return kind == FamilyKind::binomial_logit || kind == FamilyKind::binomial_probit;
  }
  std::string_view name() const;

  friend bool operator==(const GlmFamily&, const GlmFamily&) = default;
};

/// Accepts gaussian, logistic, poisson, exponential, probit (and the long
/// names such as "binomial-logit"). Throws ConfigError otherwise.
GlmFamily parse_family(std::string_view name);

struct Cumulant {
  double b;
  double b_prime;
  double b_double_prime;
};

/// b, b' and b'' at theta. Throws DomainError outside the domain and
/// std::invalid_argument for the non-canonical probit family.
Cumulant family_eval(const GlmFamily& family, double theta);

bool in_domain(const GlmFamily& family, double eta);
bool admissible_response(const GlmFamily& family, double y);

/// Per-observation pieces of the log-likelihood on the linear-predictor scale,
/// with dispersion one: loglik, d loglik / d eta, and -d2 loglik / d eta2.
struct ObservationTerms {
  double loglik;
  double score;
  double weight;
};

ObservationTerms observation_terms(const GlmFamily& family, double y, double eta);
double observation_loglik(const GlmFamily& family, double y, double eta);

/// E[y | eta].
double mean_response(const GlmFamily& family, double eta);

/// Expected information per observation, E[-d2 loglik / d eta2].
double fisher_weight(const GlmFamily& family, double eta);

/// KL divergence between the response laws at eta_true and eta_alt (unit
/// dispersion). For canonical families this is
/// b'(eta_true)(eta_true - eta_alt) + b(eta_alt) - b(eta_true).
double kl_divergence(const GlmFamily& family, double eta_true, double eta_alt);

namespace normal {
double cdf(double x);
double log_cdf(double x);
double log_pdf(double x);
/// phi(x) / Phi(x), stable for large negative x.
double mills_ratio(double x);
}  // namespace normal

}  // namespace ere
