#include "ere/entropy.hpp"

#include "ere/error.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace ere {

EreEstimate estimate_ere(const FitResult& full, const FitResult& reduced, const Dataset& data,
                         const GlmFamily& family, Index s_tilde_m, GaussianScale scale) {
  EreEstimate e;
  e.n = data.n();
  e.s_tilde_m = s_tilde_m;
  if (s_tilde_m < 0) throw std::invalid_argument("s_tilde_m must be >= 0");
  if (s_tilde_m == 0) {
    e.screened_out = true;
    return e;
  }
  if (family.estimates_dispersion() && scale == GaussianScale::shared) {
    if (full.n != data.n() || reduced.n != data.n()) {
      throw std::invalid_argument("estimate_ere: fits were produced on a different dataset");
    }
    const double phi = full.dispersion;
    const double lf = log_likelihood(data, full.beta, family, phi);
    const double lr = log_likelihood(data, reduced.beta, family, phi);
    e.raw_diff = 2.0 / static_cast<double>(data.n()) * (lf - lr);
  } else {
    e.raw_diff = deviance_difference(full, reduced, data.n());
  }
  e.clamped = e.raw_diff < 0.0;
  e.h_hat = std::max(e.raw_diff, 0.0);
  return e;
}

double ere_linear_closed_form(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& beta_star,
                              const IndexSet& modality, double sigma_eps2) {
  const Index p = sigma.rows();
  if (sigma.cols() != p || beta_star.size() != p) throw std::invalid_argument("dimension mismatch");
  if (!(sigma_eps2 > 0.0)) throw std::invalid_argument("sigma_eps2 must be positive");
  for (Index j : modality) {
    if (j < 0 || j >= p) throw std::out_of_range("modality index outside the design");
  }
  IndexSet all(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) all[static_cast<std::size_t>(j)] = j;
  const IndexSet rest = set_difference(all, modality);

  const Eigen::VectorXd bm = beta_star(modality);
  const Eigen::MatrixXd Smm = sigma(modality, modality);
  const double total = bm.dot(Smm * bm);
  double cond = total;
  if (!rest.empty()) {
    const Eigen::MatrixXd Srr = sigma(rest, rest);
    const Eigen::MatrixXd Srm = sigma(rest, modality);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Srr);
    const Eigen::VectorXd d = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || d.minCoeff() <= 1e-12 * std::max(1.0, d.maxCoeff())) {
      throw NumericalError("covariance of the remaining covariates is singular");
    }
    const Eigen::VectorXd v = Srm * bm;
    cond = total - v.dot(ldlt.solve(v));
  }
  cond = std::max(cond, 0.0);
  const double h = std::log((cond + sigma_eps2) / sigma_eps2) + (total - cond) / (cond + sigma_eps2);
  return std::max(h, 0.0);
}

double pairwise_sum(const double* values, std::size_t count) {
  if (count <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += values[i];
    return s;
  }
  const std::size_t half = count / 2;
  return pairwise_sum(values, half) + pairwise_sum(values + half, count - half);
}

GroundTruthEre mc_ere(const GlmFamily& family, const Eigen::VectorXd& beta_star, const ReducedModel& reduced,
                      const CovariateSampler& sampler, Index n_samples, std::uint64_t seed,
                      const McOptions& options) {
  if (n_samples < 1000) throw std::invalid_argument("mc_ere needs at least 1000 samples");
  const Index p = sampler.dim();
  if (beta_star.size() != p || reduced.beta0.size() != p) throw std::invalid_argument("mc_ere: dimension mismatch");
  const bool gaussian = family.kind == FamilyKind::gaussian;
  if (gaussian && !(reduced.dispersion > 0.0 && options.sigma_eps2 > 0.0)) {
    throw std::invalid_argument("mc_ere: variances must be positive");
  }
  const std::size_t shards = std::max<std::size_t>(1, options.shards);

  std::vector<double> values(static_cast<std::size_t>(n_samples));
  Index bad = 0;
  Index offset = 0;
  for (std::size_t s = 0; s < shards; ++s) {
    const Index count = n_samples / static_cast<Index>(shards) + (static_cast<Index>(s) < n_samples % static_cast<Index>(shards) ? 1 : 0);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(s)};
    std::mt19937_64 rng(seq);
    // chunked to keep memory bounded for large p
    const Index chunk = std::max<Index>(1, 4'000'000 / std::max<Index>(p, 1));
    for (Index done = 0; done < count; done += chunk) {
      const Index rows = std::min(chunk, count - done);
      const Eigen::MatrixXd X = sampler.sample(rows, rng);
      const Eigen::VectorXd es = X * beta_star;
      const Eigen::VectorXd e0 = X * reduced.beta0;
      for (Index i = 0; i < rows; ++i) {
        double v;
        if (gaussian) {
          const double tau2 = reduced.dispersion, s2 = options.sigma_eps2, d = es[i] - e0[i];
          v = std::log(tau2 / s2) + (s2 + d * d) / tau2 - 1.0;
        } else if (!in_domain(family, es[i]) || !in_domain(family, e0[i])) {
          ++bad;
          v = 0.0;
        } else {
          v = 2.0 * kl_divergence(family, es[i], e0[i]);
        }
        values[static_cast<std::size_t>(offset + done + i)] = v;
      }
    }
    offset += count;
  }
  if (bad > 0) {
    std::ostringstream os;
    os << std::string(family.name()) << ": linear predictor outside the domain for a fraction "
       << static_cast<double>(bad) / static_cast<double>(n_samples) << " of sampled covariates";
    throw DomainError(os.str());
  }

  GroundTruthEre out;
  out.method = GroundTruthMethod::monte_carlo;
  out.mc_samples = n_samples;
  const double N = static_cast<double>(n_samples);
  const double mean = pairwise_sum(values.data(), values.size()) / N;
  for (double& v : values) v = (v - mean) * (v - mean);
  const double var = pairwise_sum(values.data(), values.size()) / (N - 1.0);
  out.h = mean;
  out.mc_std_error = std::sqrt(var / N);
  return out;
}

double pseudo_r2(double h) {
  if (!(h >= 0.0)) throw std::invalid_argument("pseudo_r2 needs h >= 0");
  return -std::expm1(-h);
}

double pseudo_r2_inverse(double r) {
  if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("pseudo_r2_inverse needs r in [0, 1]");
  return -std::log1p(-r);
}

}  // namespace ere
