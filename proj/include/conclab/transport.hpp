#pragma once

#include <vector>

#include "conclab/cost.hpp"
#include "conclab/measure.hpp"

namespace conclab {

enum class Certificate { Permutation, BasicFeasible, Enumerated };

struct PlanEntry {
  int i;
  int j;
  double mass;
};

struct CouplingPlan {
  std::vector<Vec> rows;             // support of nu1
  std::vector<Vec> cols;             // support of nu2
  std::vector<PlanEntry> entries;    // nonzero masses
  double total_cost = 0;
  Certificate certificate = Certificate::BasicFeasible;
  // Dual potentials (u_i + v_j <= c_ij, equality on the support); filled by
  // the simplex and monotone solvers, used for rate-function gradients.
  std::vector<double> row_potential;
  std::vector<double> col_potential;

  // Exact re-check of marginal feasibility and cost consistency.
  void validate(const std::vector<double>& row_weights,
                const std::vector<double>& col_weights,
                const CostSpec& cost, double tol = 1e-10) const;
};

// Default cap on dense cost matrices (entries).
inline constexpr std::size_t kCostMatrixCap = 40'000'000;

// Optimal assignment between two n-sample empirical measures; the plan is a
// permutation with mass 1/n per atom.  Duplicate atoms stay distinct.
CouplingPlan solve_assignment(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                              const CostSpec& cost);

// Exact optimal transport between two discrete measures.  Dispatches to the
// monotone coupling for 1-d convex power costs, the dense transportation
// simplex otherwise.
CouplingPlan solve_general(const DiscreteMeasure& nu1, const DiscreteMeasure& nu2,
                           const CostSpec& cost);

// Forced dense simplex route (for cross-checks against the monotone path).
CouplingPlan solve_simplex(const DiscreteMeasure& nu1, const DiscreteMeasure& nu2,
                           const CostSpec& cost);

double t_cost(const DiscreteMeasure& nu1, const DiscreteMeasure& nu2, const CostSpec& cost);
double w_p(const DiscreteMeasure& nu1, const DiscreteMeasure& nu2, double p);

// F_n(x) = W_2(L_n^x, mu)
double empirical_transport_fn(const DiscreteMeasure& mu, const std::vector<Vec>& tuple);

// Exhaustive-permutation oracle (n <= ~9).
CouplingPlan assignment_brute_force(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                                    const CostSpec& cost);

// Atom-splitting oracle for rational-weight measures: each atom of weight
// k/m becomes k unit atoms, then the assignment solver runs on the split.
// denom must be a common denominator of all weights.
double atom_splitting_cost(const DiscreteMeasure& nu1, const DiscreteMeasure& nu2,
                           const CostSpec& cost, int denom);

// Optimal permutation for an explicit cost matrix (row-major n x n);
// returns the assignment sigma with minimal total cost.
std::vector<int> hungarian(const std::vector<double>& cost, int n);

}  // namespace conclab
