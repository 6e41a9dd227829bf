#pragma once

// Reference computations written independently of the library code paths.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

// Central chi-square CDF without incomplete-gamma routines: the finite sum for
// even k, erf plus the upward recurrence F_{k+2} = F_k - (x/2)^{k/2} e^{-x/2} / Gamma(k/2 + 1)
// for odd k.
inline double chi2_cdf(int k, double x) {
  if (x <= 0.0) return 0.0;
  const double z = 0.5 * x;
  if (k % 2 == 0) {
    double term = 1.0, sum = 1.0;
    for (int j = 1; j < k / 2; ++j) {
      term *= z / j;
      sum += term;
    }
    return -std::expm1(-z + std::log(sum));
  }
  double f = std::erf(std::sqrt(z));
  for (int m = 1; m < k; m += 2) {
    const double a = 0.5 * m;
    f -= std::exp(a * std::log(z) - z - std::lgamma(a + 1.0));
  }
  return f;
}

// log P(chi2_k > x) for even k, summed in log space.
inline double chi2_log_sf_even(int k, double x) {
  const double z = 0.5 * x;
  double best = -INFINITY;
  std::vector<double> logs;
  for (int j = 0; j < k / 2; ++j) {
    logs.push_back(j * std::log(z) - std::lgamma(j + 1.0));
    best = std::max(best, logs.back());
  }
  double s = 0.0;
  for (double l : logs) s += std::exp(l - best);
  return -z + best + std::log(s);
}

// Empirical CDF of the noncentral chi-square by simulation: (Z_1 + sqrt(theta))^2 + sum Z_j^2.
inline std::vector<double> ncx2_draws(int k, double theta, std::size_t count, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::vector<double> out(count);
  const double mu = std::sqrt(theta);
  for (auto& v : out) {
    const double z1 = nd(rng) + mu;
    double s = z1 * z1;
    for (int j = 1; j < k; ++j) {
      const double z = nd(rng);
      s += z * z;
    }
    v = s;
  }
  return out;
}

inline double ecdf(const std::vector<double>& sorted, double x) {
  return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin()) /
         static_cast<double>(sorted.size());
}

// Least squares through the normal equations.
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd G = X.transpose() * X;
  return G.inverse() * (X.transpose() * y);
}

// SCAD penalty obtained by integrating its derivative with the trapezoid rule.
inline double scad_integrated(double t, double lambda, double a, int steps = 20000) {
  auto d = [&](double u) {
    if (u <= lambda) return lambda;
    return std::max(a * lambda - u, 0.0) / (a - 1.0);
  };
  if (t <= 0.0) return 0.0;
  const double h = t / steps;
  double s = 0.5 * (d(0.0) + d(t));
  for (int i = 1; i < steps; ++i) s += d(i * h);
  return s * h;
}

// Minimiser of 0.5 (b - z)^2 + pen(|b|) over a grid on [-10, 10].
inline double grid_minimiser(double z, const std::function<double(double)>& pen, double step = 1e-4) {
  double best = 0.0, best_val = INFINITY;
  const long count = std::lround(20.0 / step);
  for (long i = 0; i <= count; ++i) {
    const double b = -10.0 + static_cast<double>(i) * step;
    const double v = 0.5 * (b - z) * (b - z) + pen(std::abs(b));
    if (v < best_val) {
      best_val = v;
      best = b;
    }
  }
  return best;
}

// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
inline double ks_distance(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
  }
  return d;
}

}  // namespace oracle
