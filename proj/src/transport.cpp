#include "conclab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace conclab {

void CouplingPlan::validate(const std::vector<double>& row_weights,
                            const std::vector<double>& col_weights,
                            const CostSpec& cost, double tol) const {
  std::vector<double> rs(row_weights.size(), 0.0), cs(col_weights.size(), 0.0);
  double c = 0;
  for (const auto& e : entries) {
    if (e.mass < -tol) throw Error("CouplingPlan: negative mass");
    rs[e.i] += e.mass;
    cs[e.j] += e.mass;
    c += e.mass * eval_cost(cost, rows[e.i], cols[e.j]);
  }
  for (std::size_t i = 0; i < rs.size(); ++i)
    if (std::abs(rs[i] - row_weights[i]) > tol)
      throw Error("CouplingPlan: row marginal mismatch");
  for (std::size_t j = 0; j < cs.size(); ++j)
    if (std::abs(cs[j] - col_weights[j]) > tol)
      throw Error("CouplingPlan: column marginal mismatch");
  if (std::abs(c - total_cost) > std::max(tol, tol * std::abs(c)))
    throw Error("CouplingPlan: cost inconsistent with plan");
}

std::vector<int> hungarian(const std::vector<double>& a, int n) {
  const double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j)
        if (!used[j]) {
          double cur = a[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
          if (minv[j] < delta) {
            delta = minv[j];
            j1 = j;
          }
        }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> sigma(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j]) sigma[p[j] - 1] = j - 1;
  return sigma;
}

CouplingPlan solve_assignment(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                              const CostSpec& cost) {
  if (a.n() != b.n()) throw SizeMismatch("solve_assignment: atom counts differ");
  if (a.dim != b.dim) throw DimensionMismatch("solve_assignment: dimensions differ");
  const int n = static_cast<int>(a.n());
  std::vector<double> c(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c[i * n + j] = eval_cost(cost, a.sample[i], b.sample[j]);
  std::vector<int> sigma = hungarian(c, n);

  CouplingPlan plan;
  plan.rows = a.sample;
  plan.cols = b.sample;
  plan.certificate = Certificate::Permutation;
  double total = 0;
  for (int i = 0; i < n; ++i) {
    plan.entries.push_back({i, sigma[i], 1.0 / n});
    total += c[i * n + sigma[i]];
  }
  plan.total_cost = total / n;
  return plan;
}

CouplingPlan assignment_brute_force(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                                    const CostSpec& cost) {
  if (a.n() != b.n()) throw SizeMismatch("assignment_brute_force: atom counts differ");
  const int n = static_cast<int>(a.n());
  std::vector<int> perm(n), best(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double c = 0;
    for (int i = 0; i < n; ++i) c += eval_cost(cost, a.sample[i], b.sample[perm[i]]);
    if (c < best_cost) {
      best_cost = c;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  CouplingPlan plan;
  plan.rows = a.sample;
  plan.cols = b.sample;
  plan.certificate = Certificate::Enumerated;
  for (int i = 0; i < n; ++i) plan.entries.push_back({i, best[i], 1.0 / n});
  plan.total_cost = best_cost / n;
  return plan;
}

namespace {

// Monotone (north-west) coupling on sorted 1-d supports.  Exact for costs
// h(x - y) with h convex, which covers quadratic and power_p ground costs.
CouplingPlan monotone_1d(const DiscreteMeasure& nu1, const DiscreteMeasure& nu2,
                         const CostSpec& cost) {
  CouplingPlan plan;
  plan.rows = nu1.points;
  plan.cols = nu2.points;
  plan.certificate = Certificate::BasicFeasible;
  std::size_t i = 0, j = 0;
  double ai = nu1.weights[0], bj = nu2.weights[0];
  double total = 0;
  while (true) {
    double m = std::min(ai, bj);
    if (m > 0) {
      total += m * eval_cost(cost, nu1.points[i], nu2.points[j]);
      plan.entries.push_back({static_cast<int>(i), static_cast<int>(j), m});
    }
    ai -= m;
    bj -= m;
    bool row_done = ai <= 0 && i + 1 == nu1.size();
    bool col_done = bj <= 0 && j + 1 == nu2.size();
    if (row_done && col_done) break;
    // Advance the exhausted side; on exact ties prefer the row so the final
    // atom pair still meets.
    if (ai <= 0 && i + 1 < nu1.size()) {
      ++i;
      ai = nu1.weights[i];
    } else if (bj <= 0 && j + 1 < nu2.size()) {
      ++j;
      bj = nu2.weights[j];
    } else {
      break;  // residual is floating-point dust
    }
  }
  plan.total_cost = total;
  return plan;
}

struct SimplexArc {
  int i;
  int j;
  double mass;
};

}  // namespace

CouplingPlan solve_simplex(const DiscreteMeasure& nu1, const DiscreteMeasure& nu2,
                           const CostSpec& cost) {
  const int m = static_cast<int>(nu1.size());
  const int n = static_cast<int>(nu2.size());
  if (static_cast<std::size_t>(m) * n > kCostMatrixCap)
    throw SizeCapExceeded("solve_simplex: cost matrix exceeds size cap");

  std::vector<double> c(static_cast<std::size_t>(m) * n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) c[i * n + j] = eval_cost(cost, nu1.points[i], nu2.points[j]);

  // North-west corner start: m+n-1 basic arcs forming a staircase tree.
  std::vector<SimplexArc> basis;
  basis.reserve(m + n - 1);
  {
    int i = 0, j = 0;
    double ai = nu1.weights[0], bj = nu2.weights[0];
    while (true) {
      double t = std::min(ai, bj);
      basis.push_back({i, j, t});
      ai -= t;
      bj -= t;
      if (i == m - 1 && j == n - 1) break;
      // Rounding can leave a residual on either side; never step past the
      // last row/column, the final arc absorbs the leftover.
      if (j == n - 1 || (ai <= bj && i + 1 < m)) {
        ++i;
        ai = nu1.weights[i];
      } else {
        ++j;
        bj = nu2.weights[j];
      }
    }
  }

  const double kPivotTol = 1e-12;  // the solver's single numerical knob
  std::vector<double> u(m), v(n);
  std::vector<std::vector<int>> row_arcs(m), col_arcs(n);

  auto rebuild_adjacency = [&] {
    for (auto& r : row_arcs) r.clear();
    for (auto& cc : col_arcs) cc.clear();
    for (int k = 0; k < static_cast<int>(basis.size()); ++k) {
      row_arcs[basis[k].i].push_back(k);
      col_arcs[basis[k].j].push_back(k);
    }
  };

  // Potentials by tree traversal from row 0.
  std::vector<int> stack;
  std::vector<char> row_seen(m), col_seen(n);
  auto compute_potentials = [&] {
    std::fill(row_seen.begin(), row_seen.end(), 0);
    std::fill(col_seen.begin(), col_seen.end(), 0);
    u[0] = 0;
    row_seen[0] = 1;
    stack.assign(1, 0);  // encoded: row r -> r, col cnode -> m + cnode
    while (!stack.empty()) {
      int node = stack.back();
      stack.pop_back();
      if (node < m) {
        for (int k : row_arcs[node]) {
          int cn = basis[k].j;
          if (!col_seen[cn]) {
            col_seen[cn] = 1;
            v[cn] = c[node * n + cn] - u[node];
            stack.push_back(m + cn);
          }
        }
      } else {
        int cn = node - m;
        for (int k : col_arcs[cn]) {
          int rn = basis[k].i;
          if (!row_seen[rn]) {
            row_seen[rn] = 1;
            u[rn] = c[rn * n + cn] - v[cn];
            stack.push_back(rn);
          }
        }
      }
    }
  };

  // Unique tree path between row ei and column ej (alternating arcs).
  std::vector<int> parent_arc(m + n);
  auto find_cycle = [&](int ei, int ej) {
    std::fill(row_seen.begin(), row_seen.end(), 0);
    std::fill(col_seen.begin(), col_seen.end(), 0);
    std::fill(parent_arc.begin(), parent_arc.end(), -1);
    stack.assign(1, ei);
    row_seen[ei] = 1;
    while (!stack.empty()) {
      int node = stack.back();
      stack.pop_back();
      if (node == m + ej) break;
      if (node < m) {
        for (int k : row_arcs[node]) {
          int cn = basis[k].j;
          if (!col_seen[cn]) {
            col_seen[cn] = 1;
            parent_arc[m + cn] = k;
            stack.push_back(m + cn);
          }
        }
      } else {
        for (int k : col_arcs[node - m]) {
          int rn = basis[k].i;
          if (!row_seen[rn]) {
            row_seen[rn] = 1;
            parent_arc[rn] = k;
            stack.push_back(rn);
          }
        }
      }
    }
    // Walk back from column ej to row ei, collecting arc indices.
    std::vector<int> path;
    int node = m + ej;
    while (node != ei) {
      int k = parent_arc[node];
      path.push_back(k);
      node = (node >= m) ? basis[k].i : m + basis[k].j;
    }
    return path;
  };

  const long max_pivots = 200L * (m + n) * std::max(m, n) + 1000;
  for (long pivot = 0;; ++pivot) {
    if (pivot > max_pivots) throw Error("solve_simplex: pivot limit exceeded");
    rebuild_adjacency();
    compute_potentials();
    int ei = -1, ej = -1;
    double best = -kPivotTol;
    for (int i = 0; i < m; ++i) {
      const double ui = u[i];
      const double* ci = &c[static_cast<std::size_t>(i) * n];
      for (int j = 0; j < n; ++j) {
        double red = ci[j] - ui - v[j];
        if (red < best) {
          best = red;
          ei = i;
          ej = j;
        }
      }
    }
    if (ei < 0) break;  // optimal

    std::vector<int> path = find_cycle(ei, ej);
    // Arcs alternate -,+,-,... starting from the arc incident to column ej.
    double theta = std::numeric_limits<double>::infinity();
    int leave = -1;
    for (std::size_t t = 0; t < path.size(); t += 2) {
      int k = path[t];
      // Ties broken toward the smallest basis index (deterministic pivoting).
      if (basis[k].mass < theta || (basis[k].mass == theta && k < leave)) {
        theta = basis[k].mass;
        leave = k;
      }
    }
    for (std::size_t t = 0; t < path.size(); ++t) {
      if (t % 2 == 0)
        basis[path[t]].mass -= theta;
      else
        basis[path[t]].mass += theta;
    }
    basis[leave] = {ei, ej, theta};
  }

  CouplingPlan plan;
  plan.rows = nu1.points;
  plan.cols = nu2.points;
  plan.certificate = Certificate::BasicFeasible;
  plan.row_potential = u;
  plan.col_potential = v;
  double total = 0;
  for (const auto& arc : basis) {
    if (arc.mass > 0) {
      plan.entries.push_back({arc.i, arc.j, arc.mass});
      total += arc.mass * c[arc.i * n + arc.j];
    }
  }
  plan.total_cost = total;
  return plan;
}

CouplingPlan solve_general(const DiscreteMeasure& nu1, const DiscreteMeasure& nu2,
                           const CostSpec& cost) {
  if (nu1.dim != nu2.dim) throw DimensionMismatch("solve_general: dimensions differ");
  if (nu1.size() == 0 || nu2.size() == 0) throw EmptySupport("solve_general: empty support");
  if (nu1.dim == 1 && (cost.kind == CostKind::Quadratic || cost.kind == CostKind::PowerP))
    return monotone_1d(nu1, nu2, cost);
  return solve_simplex(nu1, nu2, cost);
}

double t_cost(const DiscreteMeasure& nu1, const DiscreteMeasure& nu2, const CostSpec& cost) {
  return solve_general(nu1, nu2, cost).total_cost;
}

double w_p(const DiscreteMeasure& nu1, const DiscreteMeasure& nu2, double p) {
  if (p < 1) throw Error("w_p: p must be >= 1");
  double t = t_cost(nu1, nu2, CostSpec::power(p));
  return (p == 1.0) ? t : (p == 2.0 ? std::sqrt(t) : std::pow(t, 1.0 / p));
}

double empirical_transport_fn(const DiscreteMeasure& mu, const std::vector<Vec>& tuple) {
  EmpiricalMeasure em;
  em.dim = mu.dim;
  em.sample = tuple;
  return w_p(em.to_measure(), mu, 2.0);
}

double atom_splitting_cost(const DiscreteMeasure& nu1, const DiscreteMeasure& nu2,
                           const CostSpec& cost, int denom) {
  auto split = [&](const DiscreteMeasure& nu) {
    EmpiricalMeasure em;
    em.dim = nu.dim;
    for (std::size_t i = 0; i < nu.size(); ++i) {
      long k = std::lround(nu.weights[i] * denom);
      if (std::abs(nu.weights[i] * denom - static_cast<double>(k)) > 1e-9)
        throw Error("atom_splitting_cost: weight is not a multiple of 1/denom");
      for (long t = 0; t < k; ++t) em.sample.push_back(nu.points[i]);
    }
    return em;
  };
  EmpiricalMeasure a = split(nu1), b = split(nu2);
  if (a.n() != b.n()) throw Error("atom_splitting_cost: split sizes differ");
  return solve_assignment(a, b, cost).total_cost;
}

}  // namespace conclab
