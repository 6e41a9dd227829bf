#include <doctest.h>

#include "ere/error.hpp"
#include "ere/sim.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace ere;

TEST_SUITE("sim") {

TEST_CASE("model layouts") {
  const SimModel m1 = make_model(1, 1.0);
  CHECK(m1.n == 300);
  CHECK(m1.p == 600);
  CHECK(m1.modalities.size() == 3);
  for (const auto& b : m1.modalities.modalities) CHECK(b.columns.size() == 200);
  CHECK(m1.true_support() == IndexSet{0, 1, 2, 200, 201, 202, 400, 401, 402});
  CHECK(m1.beta_star[0] == -1.15);
  CHECK(m1.beta_star[2] == 1.75);
  CHECK(m1.family.kind == FamilyKind::gaussian);

  const SimModel m2 = make_model(2, 2.0);
  CHECK(m2.modalities.size() == 2);
  CHECK(m2.modalities[1].columns.size() == 300);
  CHECK(m2.true_support().size() == 8);
  CHECK(m2.beta_star[2] == doctest::Approx(-3.2));
  CHECK(m2.family.kind == FamilyKind::binomial_logit);

  const SimModel m3 = make_model(3, 1.0);
  CHECK(m3.family.kind == FamilyKind::binomial_probit);
  CHECK(m3.beta_star[303] == doctest::Approx(-0.7));

  const SimModel z = with_null_block(m1, 1);
  CHECK(z.true_support().size() == 6);
  CHECK(z.slots == m1.slots);
  CHECK_THROWS_AS(make_model(4, 1.0), ConfigError);
  CHECK_THROWS_AS(make_model(1, -1.0), ConfigError);
}

TEST_CASE("generated data") {
  const SimModel m = make_model(1, 1.0);
  const Dataset a = generate(m, 5), b = generate(m, 5), c = generate(m, 6);
  CHECK(a.n() == 300);
  CHECK(a.p() == 600);
  CHECK(a.X == b.X);
  CHECK(a.y == b.y);
  CHECK(a.X != c.X);
  CHECK(a.column_names[0] == "x1");
  CHECK(a.column_names[599] == "x600");
}

TEST_CASE("equicorrelated columns") {
  const EquicorrelatedSampler s(2, 0.2);
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd X = s.sample(100000, rng);
  const Eigen::VectorXd a = X.col(0).array() - X.col(0).mean();
  const Eigen::VectorXd b = X.col(1).array() - X.col(1).mean();
  const double r = a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
  CHECK(std::abs(r - 0.2) <= 0.01);
  CHECK(a.squaredNorm() / 1e5 == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("oracle method uses the true support") {
  const SimModel m = make_model(1, 1.0);
  const Dataset d = generate(m, 12);
  for (std::size_t b = 0; b < 3; ++b) {
    const auto run = run_method(d, m, b, SimMethod::oracle);
    CHECK(run.sensitivity == 1.0);
    CHECK(run.specificity == 1.0);
    CHECK(run.df == 3);
    CHECK(run.estimate.h_hat > 0.0);
  }
}

TEST_CASE("both screening methods see one screened set") {
  const SimModel m = make_model(1, 1.2);
  const Dataset d = generate(m, 31);
  const auto s1 = sim_screening(d, m), s2 = sim_screening(d, m);
  CHECK(s1.selected == s2.selected);
  CHECK(s1.gamma == s2.gamma);
  const auto scad = run_method(d, m, 0, SimMethod::sis_scad);
  const auto refit = run_method(d, m, 0, SimMethod::sis_refit);
  CHECK(scad.df == refit.df);
  CHECK(scad.df == static_cast<Index>(set_intersection(s1.selected, m.modalities[0].columns).size()));
}

TEST_CASE("zero penalties reproduce the refit") {
  const SimModel m = make_model(1, 1.0);
  const Dataset d = generate(m, 44);
  const auto stage = sim_screening(d, m);
  AnalysisOptions zero;
  zero.lambda1_grid = {0.0};
  zero.lambda2_grid = {0.0};
  AnalysisOptions refit;
  refit.refit = true;
  const auto a = analyze_modality(d, m.family, stage, m.modalities[0].columns, zero);
  const auto b = analyze_modality(d, m.family, stage, m.modalities[0].columns, refit);
  CHECK((a.full.beta - b.full.beta).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK((a.reduced.beta - b.reduced.beta).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(a.estimate.h_hat == doctest::Approx(b.estimate.h_hat).epsilon(1e-8));
}

TEST_CASE("noncentrality oracle") {
  const SimModel nul = with_null_block(make_model(1, 1.0), 0);
  CHECK(oracle_noncentrality(nul, 0, 1000, 1) == 0.0);

  SimModel ind = make_model(1, 1.0, 300, 60);
  ind.rho = 0.0;
  const IndexSet& block = ind.modalities[1].columns;
  const double expect = 300.0 * ind.beta_star(block).squaredNorm();
  const double got = oracle_noncentrality(ind, 1, 200000, 3);
  CHECK(got == doctest::Approx(expect).epsilon(0.02));

  // the logistic weights shrink the information below the Gaussian one
  const SimModel m2 = make_model(2, 1.0, 300, 60);
  CHECK(oracle_noncentrality(m2, 0, 50000, 2) > 0.0);
}

TEST_CASE("one replication") {
  CoverageConfig c;
  c.model = 1;
  c.n = 120;
  c.p = 60;
  c.deltas = {1.0};
  c.reps = 1;
  const auto rows = run_coverage(c);
  CHECK(rows.size() == 3 * 3);
  for (const auto& r : rows) {
    CHECK((r.coverage == 0.0 || r.coverage == 1.0));
    CHECK(r.reps + r.failures == 1);
    CHECK(r.sensitivity >= 0.0);
    CHECK(r.sensitivity <= 1.0);
    CHECK(r.specificity >= 0.0);
    CHECK(r.specificity <= 1.0);
  }
}

TEST_CASE("CSV table shape and determinism across thread counts") {
  CoverageConfig c;
  c.model = 1;
  c.n = 120;
  c.p = 60;
  c.deltas = {0.8, 1.6};
  c.methods = {SimMethod::oracle, SimMethod::sis_refit};
  c.reps = 6;
  c.threads = 1;
  const std::string one = coverage_csv(run_coverage(c));
  c.threads = 4;
  const std::string four = coverage_csv(run_coverage(c));
  CHECK(one == four);
  std::istringstream in(one);
  std::string line;
  std::getline(in, line);
  CHECK(line == "model,delta,method,modality,coverage,sensitivity,specificity,mean_h_hat,true_h,reps");
  int count = 0;
  while (std::getline(in, line)) ++count;
  CHECK(count == 2 * 2 * 3);
}

TEST_CASE("second design: ground truth increases with delta") {
  for (std::size_t b = 0; b < 2; ++b) {
    const auto lo = ground_truth(make_model(2, 1.0), b, 11);
    const auto hi = ground_truth(make_model(2, 2.3), b, 11);
    CHECK(lo.method == GroundTruthMethod::monte_carlo);
    CHECK(lo.mc_samples == 10000);
    CHECK(hi.h > lo.h);
  }
  const auto g = ground_truth(make_model(1, 1.0), 0, 1);
  CHECK(g.method == GroundTruthMethod::closed_form_linear);
}

TEST_CASE("block ordering of the first design") {
  const SimModel m = make_model(1, 1.0);
  const double h1 = ground_truth(m, 0, 1).h, h2 = ground_truth(m, 1, 1).h;
  REQUIRE(h1 > h2);
  double s1 = 0.0, s2 = 0.0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Dataset d = generate(m, 300 + seed);
    s1 += run_method(d, m, 0, SimMethod::oracle).estimate.h_hat;
    s2 += run_method(d, m, 1, SimMethod::oracle).estimate.h_hat;
  }
  CHECK(s1 > s2);
}

TEST_CASE("method names") {
  CHECK(parse_method("oracle") == SimMethod::oracle);
  CHECK(parse_method("sis_scad") == SimMethod::sis_scad);
  CHECK(method_name(SimMethod::sis_refit) == "sis_refit");
  CHECK_THROWS_AS(parse_method("lasso"), ConfigError);
}

TEST_CASE("parallel_for propagates errors") {
  CHECK_THROWS_AS(parallel_for(10, 3, [](Index i) { if (i == 7) throw DataError("boom"); }), DataError);
  std::vector<int> hit(50, 0);
  parallel_for(50, 4, [&](Index i) { hit[static_cast<std::size_t>(i)] += 1; });
  for (int h : hit) CHECK(h == 1);
}

}
