#include "ere/inference.hpp"

#include "ere/error.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>

namespace ere {

namespace {

constexpr double kPoissonTail = 1e-12;

void check_k(Index k) {
  if (k < 1) throw std::invalid_argument("degrees of freedom must be >= 1");
}

// log Q(a, z) by the Legendre continued fraction, for z > a + 1
double log_gamma_q_cf(double a, double z) {
  const double tiny = 1e-300;
  double b = z + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return a * std::log(z) - z - std::lgamma(a) + std::log(h);
}

}  // namespace

double ncx2_cdf(Index k, double theta, double x) {
  check_k(k);
  if (!(theta >= 0.0)) throw std::invalid_argument("noncentrality must be >= 0");
  if (std::isnan(x)) throw std::invalid_argument("ncx2_cdf: x is NaN");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double a0 = 0.5 * static_cast<double>(k);
  const double z = 0.5 * x;
  if (theta == 0.0) return boost::math::gamma_p(a0, z);

  const double lam = 0.5 * theta;
  const double mode = std::floor(lam);
  // Poisson weights by recurrence from the mode; exp(j log lam - lgamma) loses
  // about 1e-9 relative accuracy once lam reaches 1e5
  const double w_mode = boost::math::gamma_p_derivative(mode + 1.0, lam);
  const double p_mode = boost::math::gamma_p(a0 + mode, z);
  double total = 0.0, mass = 0.0;

  // downwards from the mode: P(a - 1) = P(a) + z^(a-1) e^-z / Gamma(a)
  double p = p_mode, w = w_mode;
  for (double j = mode; j >= 0.0; j -= 1.0) {
    total += w * p;
    mass += w;
    if (w < 1e-17 && j < lam) break;
    if (j > 0.0) {
      p = std::min(1.0, p + boost::math::gamma_p_derivative(a0 + j, z));
      w *= j / lam;
    }
  }
  // upwards: P(a + 1) = P(a) - z^a e^-z / Gamma(a + 1)
  p = p_mode;
  w = w_mode;
  for (double j = mode + 1.0;; j += 1.0) {
    p = std::max(0.0, p - boost::math::gamma_p_derivative(a0 + j, z));
    w *= lam / j;
    total += w * p;
    mass += w;
    if (1.0 - mass < kPoissonTail || (w < 1e-17 && j > lam) || p == 0.0) break;
  }
  return std::clamp(total, 0.0, 1.0);
}

double chi2_sf(Index k, double x) {
  check_k(k);
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * static_cast<double>(k), 0.5 * x);
}

double chi2_log_sf(Index k, double x) {
  check_k(k);
  if (x <= 0.0) return 0.0;
  const double q = chi2_sf(k, x);
  if (q > 1e-300) return std::log(q);
  const double a = 0.5 * static_cast<double>(k), z = 0.5 * x;
  return log_gamma_q_cf(a, z);
}

double solve_noncentrality(Index k, double x, double target) {
  check_k(k);
  if (!(target > 0.0 && target < 1.0)) throw std::invalid_argument("target probability must lie in (0, 1)");
  if (!(x > 0.0)) return 0.0;
  if (ncx2_cdf(k, 0.0, x) <= target) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (ncx2_cdf(k, hi, x) >= target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e8) throw NumericalError("solve_noncentrality: bracket exceeded 1e8");
  }
  while (hi - lo > 1e-10 * std::max(1.0, 0.5 * (lo + hi))) {
    const double mid = 0.5 * (lo + hi);
    if (ncx2_cdf(k, mid, x) >= target) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

EreInference infer(const EreEstimate& estimate, double alpha, bool two_sided) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  EreInference r;
  r.h_hat = estimate.h_hat;
  r.n = estimate.n;
  r.s_tilde_m = estimate.s_tilde_m;
  r.alpha = alpha;
  r.one_sided = !two_sided;
  if (estimate.screened_out || estimate.s_tilde_m == 0) {
    r.screened_out = true;
    r.h_hat = 0.0;
    return r;
  }
  if (estimate.n < 1) throw std::invalid_argument("infer: n must be >= 1");
  const double n = static_cast<double>(estimate.n);
  const double stat = n * estimate.h_hat;
  const Index k = estimate.s_tilde_m;

  r.p_value = chi2_sf(k, stat);
  r.log_p_value = chi2_log_sf(k, stat);
  if (two_sided) {
    r.ci_lower = solve_noncentrality(k, stat, 1.0 - alpha / 2.0) / n;
    r.ci_upper = solve_noncentrality(k, stat, alpha / 2.0) / n;
  } else {
    r.ci_lower = solve_noncentrality(k, stat, 1.0 - alpha) / n;
    r.ci_upper = std::numeric_limits<double>::infinity();
  }
  r.r2_hat = pseudo_r2(r.h_hat);
  r.r2_ci_lower = pseudo_r2(r.ci_lower);
  r.r2_ci_upper = std::isinf(r.ci_upper) ? 1.0 : pseudo_r2(r.ci_upper);
  return r;
}

}  // namespace ere
