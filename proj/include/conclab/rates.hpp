#pragma once

#include <optional>
#include <vector>

#include "conclab/functionals.hpp"
#include "conclab/measure.hpp"
#include "conclab/transport.hpp"

namespace conclab {

// Threshold functional for the rate function: g(nu) = t_cost(nu, mu) under
// spec, optionally rooted (W_p = T_p^{1/p} for power costs).
struct ThresholdSpec {
  CostSpec cost;
  bool wasserstein_root = false;

  static ThresholdSpec w_p(double p) { return {CostSpec::power(p), true}; }
  static ThresholdSpec raw(const CostSpec& c) { return {c, false}; }

  double eval(const DiscreteMeasure& nu, const DiscreteMeasure& mu) const;
};

struct RateResult {
  double value = 0;
  DiscreteMeasure minimizer;
  bool attained = true;   // false for t = 0 (infimum over nu != mu, not attained)
};

struct RateOptions {
  int starts = 8;
  int penalty_rounds = 7;
  int inner_iters = 200;
  double strict_delta = 1e-9;  // W > t implemented as W >= t + delta
  StreamId stream{20260825, 101};
  // Optional warm start (e.g. the oracle's best grid point).
  std::optional<std::vector<double>> warm_start;
};

// inf { H(nu|mu) : g(nu) >= t + delta } over the simplex on support(mu).
RateResult rate_function(const DiscreteMeasure& mu, const ThresholdSpec& spec, double t,
                         const RateOptions& opt = {});

struct OracleResult {
  double value = 0;
  double error_bound = 0;  // conservative grid-resolution bound
  std::vector<double> best_weights;
};

// Exhaustive simplex-grid minimum; support size <= 4.
OracleResult rate_function_oracle(const DiscreteMeasure& mu, const ThresholdSpec& spec,
                                  double t, double grid_resolution);

struct RateCurve {
  std::vector<double> thresholds;
  std::vector<double> rates;
  std::vector<DiscreteMeasure> minimizers;
  std::string method;
  std::vector<double> gap_to_oracle;  // empty unless both methods ran
};

RateCurve compute_rate_curve(const DiscreteMeasure& mu, const ThresholdSpec& spec,
                             const std::vector<double>& t_list, bool with_oracle,
                             double oracle_resolution = 1e-4);

// ---- appendix change-of-measure inequality ---------------------------------

inline constexpr double kEnumerationCap = 1e6;

struct DsReport {
  double lhs = 0;       // (1/n) log mu^n(A) + H(nu|mu)
  double rhs = 0;       // -H * nu^n(A^c)/nu^n(A) + (1/n) log nu^n(A) - 1/(n e nu^n(A))
  double slack = 0;     // lhs - rhs
  double mu_prob = 0;   // mu^n(L_n in A)
  double nu_prob = 0;   // nu^n(L_n in A)
  double entropy = 0;   // H(nu|mu)
};

// Exact evaluation by enumerating all |support|^n outcomes;
// A = { W_p(L_n, mu) > t }.
DsReport ds_lower_bound_check(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int n,
                              double t, double p);

// ---- Monte Carlo tails -----------------------------------------------------

struct TailEstimate {
  int n = 0;
  double t = 0;
  long trials = 0;
  long hits = 0;
  double p_hat = 0;
  double ci_lo = 0;   // Wilson 95%
  double ci_hi = 0;
  double rate_hat = 0;  // -(1/n) log p_hat; a lower bound when censored
  bool censored = false;
};

struct McTailResult {
  std::vector<TailEstimate> tails;
  double median = 0;  // empirical median of W_p(L_n, mu)
  double mean = 0;
  std::vector<double> values;  // the sampled W_p(L_n, mu) values
};

McTailResult mc_tail(const DiscreteMeasure& mu, double p, int n,
                     const std::vector<double>& t_list, long trials, StreamId stream);

struct MeanRow {
  int n = 0;
  double mean = 0;
  double std_error = 0;
};

std::vector<MeanRow> empirical_mean_convergence(const DiscreteMeasure& mu, double p,
                                                const std::vector<int>& n_list, long trials,
                                                StreamId stream);

// Wilson 95% score interval.
std::pair<double, double> wilson_interval(long hits, long trials);

// ---- certified transport-inequality constants ------------------------------

// sup over the rate-curve minimizer family of t_cost(nu,mu)/H(nu|mu)
// (numerator squared-root form handled by `square_numerator` for T_1-type
// constants, where the certified quantity is W^2 <= C H).
struct ConstantEstimate {
  double from_minimizers = 0;
  double from_tilts = 0;
};

ConstantEstimate best_constant(const DiscreteMeasure& mu, const CostSpec& cost,
                               bool square_numerator, const std::vector<double>& t_list,
                               int tilt_count = 200, StreamId stream = {20260825, 55});

// Exact pmf of Binomial(n, q).
std::vector<double> binomial_pmf(int n, double q);

}  // namespace conclab
