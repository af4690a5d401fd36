#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "conclab/functionals.hpp"
#include "conclab/measure.hpp"
#include "conclab/rates.hpp"
#include "conclab/rng.hpp"

using namespace conclab;

TEST_CASE("relative entropy closed forms") {
  DiscreteMeasure u = make_measure_1d({0, 1}, {0.5, 0.5});
  DiscreteMeasure nu = make_measure_1d({0, 1}, {0.9, 0.1});
  // 0.9 log 1.8 + 0.1 log 0.2
  double expect = 0.9 * std::log(1.8) + 0.1 * std::log(0.2);
  CHECK(relative_entropy(nu, u) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(expect == doctest::Approx(0.368074).epsilon(1e-4));
  CHECK(relative_entropy(u, u) == doctest::Approx(0.0));

  // support escape -> +infinity
  DiscreteMeasure off = make_measure_1d({0, 2}, {0.5, 0.5});
  CHECK(std::isinf(relative_entropy(off, u)));

  // sub-support is fine
  DiscreteMeasure sub = point_mass({1.0});
  CHECK(relative_entropy(sub, u) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("relative entropy is nonnegative and vanishes only at mu") {
  Prng pr(StreamId{201, 1});
  DiscreteMeasure mu = make_measure_1d({0, 1, 2, 3}, {0.1, 0.2, 0.3, 0.4});
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> w(4);
    double s = 0;
    for (auto& v : w) s += (v = 0.05 + pr.u01());
    for (auto& v : w) v /= s;
    DiscreteMeasure nu = make_measure_1d({0, 1, 2, 3}, w);
    double h = relative_entropy(nu, mu);
    CHECK(h >= 0.0);
    if (!same_measure(nu, mu, 1e-6)) CHECK(h > 0.0);
  }
}

TEST_CASE("variance and entropy functional") {
  DiscreteMeasure u = make_measure_1d({0, 1}, {0.5, 0.5});
  FunctionOnSupport f = {0.0, 1.0};
  CHECK(variance(u, f) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(integrate(u, f) == doctest::Approx(0.5).epsilon(1e-15));
  // Ent(f) for f = (1, 3) under uniform: E f log f - E f log E f
  FunctionOnSupport g = {1.0, 3.0};
  double ef = 2.0;
  double expect = 0.5 * (1 * std::log(1.0) + 3 * std::log(3.0)) - ef * std::log(ef);
  CHECK(entropy_functional(u, g) == doctest::Approx(expect).epsilon(1e-12));
  // Ent >= 0 with equality iff f constant
  CHECK(entropy_functional(u, {2.0, 2.0}) == doctest::Approx(0.0));
  CHECK(entropy_functional(u, g) > 0);
}

TEST_CASE("gradient models") {
  DiscreteMeasure m = make_measure_1d({0, 1, 2}, {0.25, 0.5, 0.25});
  FunctionOnSupport f = {0.0, 1.0, 4.0};
  // grid: one-sided at the ends, centered inside
  FunctionOnSupport g = grad_length(m, f, GradientModel::grid_1d());
  CHECK(g[0] == doctest::Approx(1.0));
  CHECK(g[1] == doctest::Approx(2.0));
  CHECK(g[2] == doctest::Approx(3.0));
  // graph model on the path: max neighbor slope
  FunctionOnSupport gg = grad_length(m, f, GradientModel::path_graph(3));
  CHECK(gg[0] == doctest::Approx(1.0));
  CHECK(gg[1] == doctest::Approx(3.0));
  CHECK(gg[2] == doctest::Approx(3.0));
  // one-sided minus model keeps only increases toward neighbors
  FunctionOnSupport gm = grad_length(m, f, GradientModel::path_graph(3, GradientKind::GraphMinus));
  CHECK(gm[0] == doctest::Approx(1.0));
  CHECK(gm[1] == doctest::Approx(3.0));
  CHECK(gm[2] == doctest::Approx(0.0));
}

TEST_CASE("inf convolution basics") {
  DiscreteMeasure m = make_measure_1d({0, 1, 2}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  FunctionOnSupport f = {0.0, 5.0, 1.0};
  FunctionOnSupport qf = inf_convolution(f, m, CostSpec::quadratic(), 1.0);
  // Qf <= f always (y = x admissible)
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(qf[i] <= f[i] + 1e-15);
  // at x=1: min(0+1, 5+0, 1+1) = 1
  CHECK(qf[1] == doctest::Approx(1.0));
  // scale -> infinity recovers f; scale -> 0 recovers min f
  FunctionOnSupport q0 = inf_convolution(f, m, CostSpec::quadratic(), 1e-12);
  for (double v : q0) CHECK(v == doctest::Approx(0.0).epsilon(1e-9));
  // order preservation: f <= g pointwise implies Qf <= Qg
  FunctionOnSupport g = {1.0, 6.0, 1.5};
  FunctionOnSupport qg = inf_convolution(g, m, CostSpec::quadratic(), 1.0);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(qf[i] <= qg[i] + 1e-15);
}

TEST_CASE("bg dual and tau hold at a certified scale on a four-atom measure") {
  // scale = 1 / (certified primal constant); the check is falsification-style:
  // random f at O(1) oscillation should find no violation at this scale
  DiscreteMeasure mu = make_measure_1d({0, 0.7, 1.5, 2.4}, {0.3, 0.3, 0.2, 0.2});
  ConstantEstimate ce = best_constant(mu, CostSpec::quadratic(), false,
                                      {0.02, 0.05, 0.1, 0.2, 0.3, 0.5}, 200, {20260825, 404});
  double C = std::max(ce.from_minimizers, ce.from_tilts);
  REQUIRE(C > 0);
  double scale = 1.0 / C;
  Prng pr(StreamId{202, 2});
  for (int rep = 0; rep < 200; ++rep) {
    FunctionOnSupport f(mu.size());
    for (auto& v : f) v = pr.uniform(-1, 1);
    DualCheck bg = check_bg_dual(mu, CostSpec::quadratic(), scale, f);
    CHECK(bg.satisfied);
    CHECK(bg.lhs <= bg.rhs * (1 + 1e-9));
    DualCheck tau = check_tau(mu, CostSpec::quadratic(), scale, f);
    CHECK(tau.satisfied);
    // tau implies bg for the same f
    if (tau.satisfied) CHECK(bg.satisfied);
  }
}

TEST_CASE("bg dual detects violation beyond the sharp scale") {
  // scale far above the sharp 1/C makes Qf approach f, where Jensen reverses
  DiscreteMeasure u = make_measure_1d({0, 1}, {0.5, 0.5});
  bool violated = false;
  Prng pr(StreamId{203, 3});
  for (int rep = 0; rep < 500 && !violated; ++rep) {
    FunctionOnSupport f = {pr.uniform(-4, 4), pr.uniform(-4, 4)};
    DualCheck bg = check_bg_dual(u, CostSpec::quadratic(), 50.0, f);
    violated = !bg.satisfied;
  }
  CHECK(violated);
}

TEST_CASE("poincare constant on two points is exactly 1/4") {
  DiscreteMeasure u = make_measure_1d({0, 1}, {0.5, 0.5});
  FunctionOnSupport extremal;
  double c = poincare_constant_grid(u, GradientModel::path_graph(2), &extremal);
  CHECK(c == doctest::Approx(0.25).epsilon(1e-12));
  // extremal realizes the ratio
  double num = variance(u, extremal);
  double den = dirichlet_energy(u, extremal, GradientModel::path_graph(2));
  CHECK(num / den == doctest::Approx(c).epsilon(1e-9));
}

TEST_CASE("poincare constant is the sup of the variance-energy ratio") {
  DiscreteMeasure m = make_measure_1d({0, 0.5, 1.3, 2.0}, {0.3, 0.2, 0.1, 0.4});
  GradientModel model = GradientModel::path_graph(4);
  double c = poincare_constant_grid(m, model);
  Prng pr(StreamId{204, 4});
  for (int rep = 0; rep < 200; ++rep) {
    FunctionOnSupport f(4);
    for (auto& v : f) v = pr.uniform(-1, 1);
    double e = dirichlet_energy(m, f, model);
    if (e < 1e-12) continue;
    CHECK(variance(m, f) <= c * e * (1 + 1e-6));
  }
}

TEST_CASE("poincare rejects disconnected graphs") {
  DiscreteMeasure m = make_measure_1d({0, 1, 2, 3}, {0.25, 0.25, 0.25, 0.25});
  GradientModel model;
  model.kind = GradientKind::Graph;
  model.neighbors = {{1}, {0}, {3}, {2}};  // two components
  CHECK_THROWS_AS(poincare_constant_grid(m, model), DisconnectedGraph);
}

TEST_CASE("small-t expansion recovers the poincare-type variance bound") {
  DiscreteMeasure u = make_measure_1d({0, 1}, {0.5, 0.5});
  FunctionOnSupport f = {0.0, 1.0};
  SmallTReport rep = small_t_poincare_check(u, CostSpec::quadratic(), 2.0, f,
                                            {1e-1, 5e-2, 2e-2, 1e-2, 5e-3});
  CHECK(rep.variance_bound_ok);
  CHECK(rep.variance <= rep.c2 / 2.0 * rep.energy + 1e-12);
  // g(t) stays bounded near 0 (no spurious divergence)
  for (double g : rep.g_values) CHECK(std::abs(g) < 10.0);
}
