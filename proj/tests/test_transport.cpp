#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "conclab/measure.hpp"
#include "conclab/rng.hpp"
#include "conclab/transport.hpp"

using namespace conclab;

namespace {

EmpiricalMeasure random_empirical(Prng& pr, int n, int d) {
  EmpiricalMeasure e;
  e.dim = d;
  for (int i = 0; i < n; ++i) {
    Vec x(d);
    for (auto& c : x) c = pr.uniform(-1.0, 1.0);
    e.sample.push_back(std::move(x));
  }
  return e;
}

DiscreteMeasure random_rational_measure(Prng& pr, int support, int denom, int d) {
  std::vector<int> parts(support, 1);
  for (int k = support; k < denom; ++k) parts[pr.uniform_index(support)]++;
  std::vector<Vec> pts;
  std::vector<double> ws;
  for (int i = 0; i < support; ++i) {
    Vec x(d);
    for (auto& c : x) c = pr.uniform(-1.0, 1.0);
    pts.push_back(std::move(x));
    ws.push_back(static_cast<double>(parts[i]) / denom);
  }
  return make_measure(std::move(pts), std::move(ws));
}

}  // namespace

TEST_CASE("two-atom quadratic transport") {
  // a = {0, 1} uniform, b = {0, 2} uniform: keep 0 in place, move 1 -> 2
  DiscreteMeasure a = make_measure_1d({0, 1}, {0.5, 0.5});
  DiscreteMeasure b = make_measure_1d({0, 2}, {0.5, 0.5});
  CouplingPlan plan = solve_general(a, b, CostSpec::quadratic());
  CHECK(plan.total_cost == doctest::Approx(0.5).epsilon(1e-12));
  plan.validate(a.weights, b.weights, CostSpec::quadratic());
}

TEST_CASE("transport to self is free") {
  DiscreteMeasure m = make_measure_1d({-1, 0, 2}, {0.2, 0.3, 0.5});
  CHECK(t_cost(m, m, CostSpec::quadratic()) == doctest::Approx(0.0));
  CHECK(w_p(m, m, 2.0) == doctest::Approx(0.0));
}

TEST_CASE("point masses transport at the ground cost") {
  DiscreteMeasure a = point_mass({0.0, 0.0});
  DiscreteMeasure b = point_mass({3.0, 4.0});
  CHECK(t_cost(a, b, CostSpec::quadratic()) == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(w_p(a, b, 2.0) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(w_p(a, b, 1.0) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("two-point marginals: closed-form total variation flow") {
  // nu = (q, 1-q) vs uniform on the same support, quadratic cost with unit
  // distance: exactly |q - 1/2| mass must move
  DiscreteMeasure u = make_measure_1d({0, 1}, {0.5, 0.5});
  for (double q : {0.1, 0.35, 0.5, 0.62, 0.9}) {
    DiscreteMeasure nu = make_measure_1d({0, 1}, {q, 1 - q});
    CHECK(t_cost(nu, u, CostSpec::quadratic()) ==
          doctest::Approx(std::abs(q - 0.5)).epsilon(1e-12));
  }
}

TEST_CASE("assignment solver matches brute force on random instances") {
  Prng pr(StreamId{101, 1});
  for (int rep = 0; rep < 30; ++rep) {
    int n = 2 + static_cast<int>(pr.uniform_index(5));  // up to 6
    int d = 1 + static_cast<int>(pr.uniform_index(3));
    EmpiricalMeasure a = random_empirical(pr, n, d);
    EmpiricalMeasure b = random_empirical(pr, n, d);
    CostSpec cost = rep % 2 == 0 ? CostSpec::quadratic() : CostSpec::alpha(1.5);
    CouplingPlan fast = solve_assignment(a, b, cost);
    CouplingPlan slow = assignment_brute_force(a, b, cost);
    CHECK(fast.total_cost == doctest::Approx(slow.total_cost).epsilon(1e-10));
    CHECK(fast.certificate == Certificate::Permutation);
    CHECK(fast.entries.size() == static_cast<std::size_t>(n));
  }
}

TEST_CASE("general solver matches the atom-splitting oracle") {
  Prng pr(StreamId{102, 2});
  for (int rep = 0; rep < 30; ++rep) {
    int denom = 3 + static_cast<int>(pr.uniform_index(4));  // 3..6
    int sa = 2 + static_cast<int>(pr.uniform_index(2));
    int sb = 2 + static_cast<int>(pr.uniform_index(2));
    DiscreteMeasure a = random_rational_measure(pr, sa, denom, 2);
    DiscreteMeasure b = random_rational_measure(pr, sb, denom, 2);
    CostSpec cost = rep % 2 == 0 ? CostSpec::quadratic() : CostSpec::power(1.0);
    double fast = t_cost(a, b, cost);
    double slow = atom_splitting_cost(a, b, cost, denom);
    CHECK(fast == doctest::Approx(slow).epsilon(1e-10));
  }
}

TEST_CASE("monotone 1-d route agrees with the forced simplex") {
  Prng pr(StreamId{103, 3});
  for (int rep = 0; rep < 25; ++rep) {
    int sa = 2 + static_cast<int>(pr.uniform_index(5));
    int sb = 2 + static_cast<int>(pr.uniform_index(5));
    std::vector<double> xa, xb, wa(sa), wb(sb);
    for (int i = 0; i < sa; ++i) xa.push_back(pr.uniform(-2, 2));
    for (int i = 0; i < sb; ++i) xb.push_back(pr.uniform(-2, 2));
    double s = 0;
    for (auto& w : wa) s += (w = 0.1 + pr.u01());
    for (auto& w : wa) w /= s;
    s = 0;
    for (auto& w : wb) s += (w = 0.1 + pr.u01());
    for (auto& w : wb) w /= s;
    DiscreteMeasure a = make_measure_1d(xa, wa);
    DiscreteMeasure b = make_measure_1d(xb, wb);
    for (double p : {1.0, 2.0, 3.0}) {
      CouplingPlan mono = solve_general(a, b, CostSpec::power(p));
      CouplingPlan simplex = solve_simplex(a, b, CostSpec::power(p));
      CHECK(mono.total_cost == doctest::Approx(simplex.total_cost).epsilon(1e-9));
    }
  }
}

TEST_CASE("simplex dual potentials certify optimality") {
  Prng pr(StreamId{104, 4});
  DiscreteMeasure a = make_measure({{0.0, 0.0}, {1.0, 0.5}, {0.2, -1.0}}, {0.2, 0.5, 0.3});
  DiscreteMeasure b = make_measure({{0.5, 0.5}, {-1.0, 1.0}}, {0.6, 0.4});
  CouplingPlan plan = solve_simplex(a, b, CostSpec::quadratic());
  REQUIRE(plan.row_potential.size() == a.size());
  REQUIRE(plan.col_potential.size() == b.size());
  // dual feasibility u_i + v_j <= c_ij and strong duality
  double dual = 0;
  for (std::size_t i = 0; i < a.size(); ++i) dual += a.weights[i] * plan.row_potential[i];
  for (std::size_t j = 0; j < b.size(); ++j) dual += b.weights[j] * plan.col_potential[j];
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      CHECK(plan.row_potential[i] + plan.col_potential[j] <=
            eval_cost(CostSpec::quadratic(), a.points[i], b.points[j]) + 1e-9);
  CHECK(dual == doctest::Approx(plan.total_cost).epsilon(1e-9));
}

TEST_CASE("metric properties of w_p on random 1-d measures") {
  Prng pr(StreamId{105, 5});
  for (int rep = 0; rep < 20; ++rep) {
    auto rand_measure = [&] {
      int s = 2 + static_cast<int>(pr.uniform_index(3));
      std::vector<double> xs, ws(s);
      for (int i = 0; i < s; ++i) xs.push_back(pr.uniform(-1, 1));
      double t = 0;
      for (auto& w : ws) t += (w = 0.1 + pr.u01());
      for (auto& w : ws) w /= t;
      return make_measure_1d(xs, ws);
    };
    DiscreteMeasure a = rand_measure(), b = rand_measure(), c = rand_measure();
    double ab = w_p(a, b, 2.0), ba = w_p(b, a, 2.0);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-9));           // symmetry
    CHECK(w_p(a, b, 2.0) + w_p(b, c, 2.0) >= w_p(a, c, 2.0) - 1e-9);  // triangle
    CHECK(w_p(a, b, 1.0) <= w_p(a, b, 2.0) + 1e-9);           // p-monotonicity
    if (!same_measure(a, b)) CHECK(ab > 0);
  }
}

TEST_CASE("empirical transport functional") {
  DiscreteMeasure u = make_measure_1d({0, 1}, {0.5, 0.5});
  // all-zeros tuple: L_n = delta_0, W_2(delta_0, u) = sqrt(1/2)
  CHECK(empirical_transport_fn(u, {{0.0}, {0.0}}) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  // balanced tuple: L_n = u
  CHECK(empirical_transport_fn(u, {{0.0}, {1.0}}) == doctest::Approx(0.0));
}

TEST_CASE("plan validation rejects tampering") {
  DiscreteMeasure a = make_measure_1d({0, 1}, {0.5, 0.5});
  DiscreteMeasure b = make_measure_1d({0, 2}, {0.5, 0.5});
  CouplingPlan plan = solve_general(a, b, CostSpec::quadratic());
  plan.entries[0].mass += 0.01;
  CHECK_THROWS_AS(plan.validate(a.weights, b.weights, CostSpec::quadratic()), Error);
}

TEST_CASE("hungarian on an explicit matrix") {
  // classic 3x3 with known optimum 5: rows pick 1, 0, 2 -> costs 2+2+1
  std::vector<double> cost = {4, 2, 8, 2, 3, 7, 3, 1, 1};
  std::vector<int> sigma = hungarian(cost, 3);
  double total = 0;
  for (int i = 0; i < 3; ++i) total += cost[i * 3 + sigma[i]];
  CHECK(total == doctest::Approx(5.0));
}
