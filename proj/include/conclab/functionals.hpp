#pragma once

#include <vector>

#include "conclab/cost.hpp"
#include "conclab/measure.hpp"

namespace conclab {

// Values aligned with a DiscreteMeasure's (sorted) support.
using FunctionOnSupport = std::vector<double>;

enum class GradientKind {
  Grid1d,      // central differences, one-sided at the boundary
  Graph,       // |grad f|(x) = max over neighbors y of |f(x)-f(y)| / rho(x,y)
  GraphMinus,  // same with [f(y)-f(x)]_+
};

struct GradientModel {
  GradientKind kind = GradientKind::Grid1d;
  // Neighbor lists for the graph kinds (indices into the support).
  std::vector<std::vector<int>> neighbors;

  static GradientModel grid_1d() { return {GradientKind::Grid1d, {}}; }
  static GradientModel path_graph(std::size_t size, GradientKind kind = GradientKind::Graph);
  static GradientModel complete_graph(std::size_t size, GradientKind kind = GradientKind::Graph);
};

// H(nu | mu); +infinity unless support(nu) is contained in support(mu).
double relative_entropy(const DiscreteMeasure& nu, const DiscreteMeasure& mu);

// Ent_mu(f) = int f log f dmu - int f dmu log(int f dmu), f >= 0.
double entropy_functional(const DiscreteMeasure& mu, const FunctionOnSupport& f);
double variance(const DiscreteMeasure& mu, const FunctionOnSupport& f);
double integrate(const DiscreteMeasure& mu, const FunctionOnSupport& f);

// Pointwise gradient length under the chosen model.
FunctionOnSupport grad_length(const DiscreteMeasure& mu, const FunctionOnSupport& f,
                              const GradientModel& model);
// sum_x mu(x) |grad f|^2(x)
double dirichlet_energy(const DiscreteMeasure& mu, const FunctionOnSupport& f,
                        const GradientModel& model);

// Qf(x) = min over support y of f(y) + scale * cost(x, y).
FunctionOnSupport inf_convolution(const FunctionOnSupport& f, const DiscreteMeasure& domain,
                                  const CostSpec& cost, double scale);

struct DualCheck {
  double lhs = 0;
  double rhs = 0;
  bool satisfied = false;
};

// Bobkov-Goetze dual: int e^{Qf} dmu <= e^{int f dmu}.
DualCheck check_bg_dual(const DiscreteMeasure& mu, const CostSpec& cost, double scale,
                        const FunctionOnSupport& f);
// (tau) property: int e^{Q_c f} dmu * int e^{-f} dmu <= 1, c = scale * cost.
DualCheck check_tau(const DiscreteMeasure& mu, const CostSpec& cost, double scale,
                    const FunctionOnSupport& f);

// Sharp Poincare constant: smallest C with Var_mu(f) <= C * energy(f) for all
// f, solved as a generalized eigenproblem.  For Grid1d the Dirichlet form is
// built from edge differences (the pure central-difference form has an
// alternating null mode and no finite sharp constant).  Returns 0 for a
// single-point support; extremal (if non-null) receives a maximizing f.
double poincare_constant_grid(const DiscreteMeasure& mu, const GradientModel& model,
                              FunctionOnSupport* extremal = nullptr);

struct SmallTReport {
  std::vector<double> t_values;
  std::vector<double> g_values;  // (int e^{Q(tf)} dmu - e^{t int f dmu}) / t^2
  double fitted_coeff = 0;       // extrapolated t -> 0 limit of g
  double variance = 0;
  double energy = 0;             // int |grad f|^2 dmu  (Grid1d model)
  double c2 = 0;                 // 1 / scale
  bool variance_bound_ok = false;  // Var <= (C2/2) * energy
};

SmallTReport small_t_poincare_check(const DiscreteMeasure& mu, const CostSpec& cost,
                                    double scale, const FunctionOnSupport& f,
                                    const std::vector<double>& t_list);

}  // namespace conclab
