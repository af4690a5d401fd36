#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "conclab/functionals.hpp"
#include "conclab/rates.hpp"

using namespace conclab;

namespace {

double kl_bernoulli(double q, double p) {
  auto term = [](double a, double b) { return a > 0 ? a * std::log(a / b) : 0.0; };
  return term(q, p) + term(1 - q, 1 - p);
}

}  // namespace

TEST_CASE("rate function closed form on two points") {
  // uniform{0,1}, W_1 threshold: minimizer is (1/2 - t, 1/2 + t),
  // value KL(1/2 + t || 1/2)
  DiscreteMeasure u = make_measure_1d({0, 1}, {0.5, 0.5});
  ThresholdSpec spec = ThresholdSpec::w_p(1.0);
  for (double t : {0.1, 0.2, 0.3}) {
    RateResult r = rate_function(u, spec, t);
    double expect = kl_bernoulli(0.5 + t, 0.5);
    CHECK(r.value == doctest::Approx(expect).epsilon(2e-3));
    CHECK(r.attained);
    // minimizer is feasible
    CHECK(spec.eval(r.minimizer, u) >= t);
  }
  // the 0.2 threshold reproduces KL(0.7||0.5)
  RateResult r = rate_function(u, spec, 0.2);
  CHECK(r.value == doctest::Approx(0.0822828).epsilon(2e-3));
}

TEST_CASE("rate function edge cases") {
  DiscreteMeasure u = make_measure_1d({0, 1}, {0.5, 0.5});
  ThresholdSpec spec = ThresholdSpec::w_p(1.0);
  // t = 0: infimum over nu != mu is 0, not attained
  RateResult zero = rate_function(u, spec, 0.0);
  CHECK(zero.value == doctest::Approx(0.0));
  CHECK(!zero.attained);
  // t beyond the reachable maximum is infeasible
  CHECK_THROWS_AS(rate_function(u, spec, 0.75), Infeasible);
}

TEST_CASE("optimizer matches the grid oracle") {
  DiscreteMeasure mu = make_measure_1d({0, 0.5, 1}, {0.5, 0.25, 0.25});
  ThresholdSpec spec = ThresholdSpec::raw(CostSpec::quadratic());
  for (double t : {0.05, 0.1, 0.2}) {
    OracleResult oracle = rate_function_oracle(mu, spec, t, 2e-3);
    RateOptions opt;
    opt.warm_start = oracle.best_weights;
    RateResult fast = rate_function(mu, spec, t, opt);
    CHECK(std::abs(fast.value - oracle.value) <= oracle.error_bound + 1e-6);
    // optimizer must never report a value below any feasible certificate
    CHECK(fast.value <= oracle.value + 1e-6);
  }
}

TEST_CASE("rate curve is monotone with attained minimizers") {
  DiscreteMeasure mu = make_measure_1d({0, 1, 2}, {0.6, 0.3, 0.1});
  ThresholdSpec spec = ThresholdSpec::w_p(2.0);
  RateCurve curve = compute_rate_curve(mu, spec, {0.05, 0.1, 0.2, 0.3, 0.4}, false);
  REQUIRE(curve.rates.size() == 5);
  for (std::size_t i = 1; i < curve.rates.size(); ++i)
    CHECK(curve.rates[i] >= curve.rates[i - 1] - 1e-9);
  for (std::size_t i = 0; i < curve.rates.size(); ++i) {
    CHECK(relative_entropy(curve.minimizers[i], mu) ==
          doctest::Approx(curve.rates[i]).epsilon(1e-6));
    CHECK(spec.eval(curve.minimizers[i], mu) >= curve.thresholds[i] - 1e-9);
  }
}

TEST_CASE("ds change-of-measure inequality, exact enumeration") {
  DiscreteMeasure mu = make_measure_1d({0, 1}, {0.5, 0.5});
  DiscreteMeasure nu = make_measure_1d({0, 1}, {0.25, 0.75});
  DsReport rep = ds_lower_bound_check(mu, nu, 6, 0.15, 1.0);
  CHECK(rep.slack >= -1e-12);
  CHECK(rep.mu_prob > 0);
  CHECK(rep.mu_prob < 1);
  CHECK(rep.nu_prob > 0);
  CHECK(rep.entropy == doctest::Approx(kl_bernoulli(0.25, 0.5)).epsilon(1e-12));

  // empty event must be rejected
  CHECK_THROWS_AS(ds_lower_bound_check(mu, nu, 4, 10.0, 1.0), EventEmpty);
  // enumeration cap respected
  DiscreteMeasure wide = make_measure_1d({0, 1, 2, 3, 4, 5, 6, 7, 8, 9},
                                         {0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1});
  CHECK_THROWS_AS(ds_lower_bound_check(wide, wide, 9, 0.1, 1.0), EnumerationCapExceeded);
}

TEST_CASE("exact binomial tails dominate the sanov rate from above") {
  // P(W_1(L_n, u) > t) for uniform{0,1} equals a binomial tail; the exact
  // -(1/n) log P must sit above the rate function and converge toward it
  DiscreteMeasure u = make_measure_1d({0, 1}, {0.5, 0.5});
  double rate = kl_bernoulli(0.7, 0.5);  // rate at t = 0.2
  double prev = 1e9;
  for (int n : {10, 20, 40, 80}) {
    std::vector<double> pmf = binomial_pmf(n, 0.5);
    double tail = 0;
    for (int k = 0; k <= n; ++k)
      if (std::abs(static_cast<double>(k) / n - 0.5) > 0.2) tail += pmf[k];
    double hat = -std::log(tail) / n;
    CHECK(hat >= rate - 1e-9);
    CHECK(hat <= prev + 1e-9);
    prev = hat;
  }
}

TEST_CASE("binomial pmf sums to one and matches closed forms") {
  std::vector<double> pmf = binomial_pmf(10, 0.3);
  double s = 0;
  for (double v : pmf) s += v;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pmf[0] == doctest::Approx(std::pow(0.7, 10)).epsilon(1e-12));
  CHECK(pmf[10] == doctest::Approx(std::pow(0.3, 10)).epsilon(1e-12));
  CHECK(pmf[1] == doctest::Approx(10 * 0.3 * std::pow(0.7, 9)).epsilon(1e-12));
}

TEST_CASE("wilson interval brackets the point estimate") {
  auto [lo, hi] = wilson_interval(30, 100);
  CHECK(lo < 0.3);
  CHECK(hi > 0.3);
  CHECK(lo > 0.2);
  CHECK(hi < 0.41);
  auto [l0, h0] = wilson_interval(0, 100);
  CHECK(l0 == doctest::Approx(0.0));
  CHECK(h0 > 0.0);
  auto [l1, h1] = wilson_interval(100, 100);
  CHECK(h1 == doctest::Approx(1.0));
  CHECK(l1 < 1.0);
}

TEST_CASE("mc tails are deterministic per stream and consistent with exact tails") {
  DiscreteMeasure u = make_measure_1d({0, 1}, {0.5, 0.5});
  // threshold off the atoms of the W_1 distribution (multiples of 1/20), so
  // the strict-inequality count is float-robust
  McTailResult a = mc_tail(u, 1.0, 20, {0.21}, 4000, {77, 1});
  McTailResult b = mc_tail(u, 1.0, 20, {0.21}, 4000, {77, 1});
  CHECK(a.tails[0].hits == b.tails[0].hits);
  CHECK(a.median == b.median);

  // exact tail: P(|k/20 - 1/2| > 0.21)
  std::vector<double> pmf = binomial_pmf(20, 0.5);
  double exact = 0;
  for (int k = 0; k <= 20; ++k)
    if (std::abs(k / 20.0 - 0.5) > 0.21) exact += pmf[k];
  CHECK(a.tails[0].p_hat == doctest::Approx(exact).epsilon(0.35));
  CHECK(a.tails[0].ci_lo <= exact);
  CHECK(a.tails[0].ci_hi >= exact);
}

TEST_CASE("empirical mean convergence is decreasing in n") {
  DiscreteMeasure u = make_measure_1d({0, 1}, {0.5, 0.5});
  std::vector<MeanRow> rows = empirical_mean_convergence(u, 2.0, {5, 20, 80}, 2000, {78, 2});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].mean > rows[1].mean);
  CHECK(rows[1].mean > rows[2].mean);
  for (const auto& r : rows) CHECK(r.std_error > 0);
}

TEST_CASE("certified constants on the two-point family") {
  // sup W_1^2 / H over small-threshold minimizers approaches the Pinsker 1/2
  DiscreteMeasure u = make_measure_1d({0, 1}, {0.5, 0.5});
  ConstantEstimate ce = best_constant(u, CostSpec::power(1.0), true,
                                      {0.02, 0.05, 0.1, 0.2, 0.3, 0.4}, 200, {79, 3});
  double C = std::max(ce.from_minimizers, ce.from_tilts);
  CHECK(C == doctest::Approx(0.5).epsilon(0.02));
  CHECK(C <= 0.5 + 1e-6);
}
