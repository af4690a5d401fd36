#pragma once

#include <string>
#include <vector>

#include "conclab/measure.hpp"
#include "conclab/rates.hpp"
#include "conclab/transport.hpp"

namespace conclab {

struct MartonProfile {
  double a = 0;
  double b = 1;
  double r0 = 0;
};

// From a certified T1-type constant C: a = 1/C, b = 1, r0 = sqrt(C log 2).
MartonProfile marton_profile(double C);

enum class SetFamily { RandomHalf, SublevelFn };

enum class EnlargeKind {
  Rho2,           // A^r under rho_2^n <= r
  TwoLevelAlpha,  // A + B_{2,p}(r)
  D21,            // A + D_{2,1}(r)
};

struct EnlargeSpec {
  EnlargeKind kind = EnlargeKind::Rho2;
  double p = 1.0;  // for TwoLevelAlpha
};

struct ConcentrationProfile {
  std::vector<double> r_values;
  std::vector<double> guaranteed;  // 1 - b e^{-a (r-r0)^2} (or e^{-a r}), clipped to [0,1]
  std::vector<double> observed;    // exact (worst-case over sets) or estimated mu^n(A^r)
  std::string family;
  double a = 0, b = 0, r0 = 0;
};

struct ExactConcentrationResult {
  ConcentrationProfile profile;
  long violations = 0;  // observed < guaranteed occurrences over all sets and r
  std::size_t sets_tested = 0;
};

// Exact mu^n(A) and mu^n(A^r) by full enumeration of the product space.
// The guaranteed column uses `bound` with the (r-r0)^2 exponent for Rho2 and
// the e^{-a r} exponent for the two-level/D21 kinds.
ExactConcentrationResult exact_product_concentration(const DiscreteMeasure& mu, int n,
                                                     const EnlargeSpec& enlarge,
                                                     SetFamily family,
                                                     std::size_t set_count,
                                                     const std::vector<double>& r_list,
                                                     const MartonProfile& bound,
                                                     StreamId stream);

struct TailProfile {
  double median = 0;  // m_n of F_n = W_p(L_n, mu)
  std::vector<double> r_values;
  std::vector<TailEstimate> tails;  // P(F_n > m_n + r/sqrt(n)) per r
};

// Monte Carlo profile of the sublevel-of-F_n family.
TailProfile mc_concentration_profile(const DiscreteMeasure& mu, int n, double p,
                                     const std::vector<double>& r_list, long trials,
                                     StreamId stream);

// Exact version for two-point supports (binomial enumeration, no MC).
TailProfile exact_two_point_profile(const DiscreteMeasure& mu, int n, double p,
                                    const std::vector<double>& r_list);

struct GaussianFit {
  double a = 0;
  double b = 1;   // clamped to [1/2, 2e]
  double r0 = 0;  // fitted jointly
};

// Weighted least squares of log tail against (r - r0)^2 (or r when
// `exponential` is set); censored tails are dropped.
GaussianFit fit_tail_profile(const std::vector<double>& r, const std::vector<double>& tail,
                             const std::vector<double>& weight, bool exponential = false);

struct EquivalenceConfig {
  std::vector<int> n_list{20, 40, 80};
  long trials = 100000;       // used when exact tails are unavailable
  double slack = 0.30;
  std::vector<double> r_list;  // defaults to 0.25 : 3.0 : 0.25
  std::vector<double> t_list;  // thresholds for the rate-curve sup ratio
  StreamId stream{20260825, 300};
};

struct EquivalenceReport {
  double c_t2 = 0;       // sup T_2 / H certified by the rates module
  double a_marton = 0;   // 1 / c_t2
  double a_fit = 0;      // fitted concentration rate at the largest n
  double c_implied = 0;  // 1 / a_fit
  double agreement = 0;  // |c_implied - c_t2| / c_t2
  long profile_violations = 0;
  bool pass = false;
  std::vector<double> a_fit_per_n;
};

enum class Direction { T2ToConcentration, ConcentrationToT2, Both };

EquivalenceReport equivalence_experiment(const DiscreteMeasure& mu, Direction dir,
                                         const EquivalenceConfig& config);

struct TwoLevelReport {
  double a_fit = 0;
  double b_fit = 0;
  double c_chain = 0;          // 288 / a_fit
  double c_certified = 0;      // sup T_{2,p} / H from the rates module
  long chain_violations = 0;   // T_{2,p} > (288/a_fit) H over the minimizer family
  long profile_violations = 0; // profile vs b = 2, a = 1/(2 c_certified)
  bool pass = false;
};

TwoLevelReport two_level_experiment(const DiscreteMeasure& mu, double p, int n,
                                    const std::vector<double>& r_list, long trials,
                                    StreamId stream);

}  // namespace conclab
