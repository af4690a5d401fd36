#include "conclab/rates.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

namespace conclab {

double ThresholdSpec::eval(const DiscreteMeasure& nu, const DiscreteMeasure& mu) const {
  double t = t_cost(nu, mu, cost);
  if (!wasserstein_root) return t;
  if (cost.kind != CostKind::PowerP && cost.kind != CostKind::Quadratic)
    throw Error("ThresholdSpec: wasserstein_root needs a power cost");
  double p = (cost.kind == CostKind::Quadratic) ? 2.0 : cost.p;
  return std::pow(t, 1.0 / p);
}

namespace {

DiscreteMeasure on_support(const DiscreteMeasure& mu, const std::vector<double>& w) {
  DiscreteMeasure nu;
  nu.dim = mu.dim;
  nu.points = mu.points;
  nu.weights = w;
  return nu;
}

std::vector<double> project_simplex(std::vector<double> v) {
  // Euclidean projection onto the probability simplex.
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0, theta = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cum += u[k];
    double cand = (cum - 1.0) / static_cast<double>(k + 1);
    if (u[k] > cand)
      theta = cand;  // valid pivots form a prefix; keep the last one
    else
      break;
  }
  for (double& x : v) x = std::max(0.0, x - theta);
  double s = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= s;
  return v;
}

double entropy_on(const std::vector<double>& w, const DiscreteMeasure& mu) {
  double h = 0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] > 0) h += w[i] * std::log(w[i] / mu.weights[i]);
  return std::max(h, 0.0);
}

// g(w) and its gradient from the simplex dual potentials.
struct ThresholdEval {
  double value;
  std::vector<double> grad;
};

ThresholdEval eval_threshold(const DiscreteMeasure& mu, const ThresholdSpec& spec,
                             const std::vector<double>& w) {
  CouplingPlan plan = solve_simplex(on_support(mu, w), mu, spec.cost);
  ThresholdEval out;
  out.value = plan.total_cost;
  out.grad = plan.row_potential;
  if (spec.wasserstein_root) {
    double p = (spec.cost.kind == CostKind::Quadratic) ? 2.0 : spec.cost.p;
    double t = std::max(out.value, 1e-300);
    double root = std::pow(t, 1.0 / p);
    double factor = root / (p * t);  // d/dT T^{1/p}
    for (double& g : out.grad) g *= factor;
    out.value = root;
  }
  return out;
}

double vertex_threshold(const DiscreteMeasure& mu, const ThresholdSpec& spec, std::size_t i) {
  double t = 0;
  for (std::size_t j = 0; j < mu.size(); ++j)
    t += mu.weights[j] * eval_cost(spec.cost, mu.points[i], mu.points[j]);
  if (!spec.wasserstein_root) return t;
  double p = (spec.cost.kind == CostKind::Quadratic) ? 2.0 : spec.cost.p;
  return std::pow(t, 1.0 / p);
}

}  // namespace

RateResult rate_function(const DiscreteMeasure& mu, const ThresholdSpec& spec, double t,
                         const RateOptions& opt) {
  const std::size_t k = mu.size();
  if (t <= 0) return {0.0, mu, false};

  // The threshold functional is concave on the simplex, so its maximum sits
  // at a vertex; that bounds the feasible range of t.
  std::size_t best_vertex = 0;
  double gmax = -1;
  for (std::size_t i = 0; i < k; ++i) {
    double g = vertex_threshold(mu, spec, i);
    if (g > gmax) {
      gmax = g;
      best_vertex = i;
    }
  }
  const double target = t + opt.strict_delta;
  if (target > gmax * (1 + 1e-12))
    throw Infeasible("rate_function: t exceeds the simplex maximum of the threshold");

  auto g_of = [&](const std::vector<double>& w) {
    return spec.eval(on_support(mu, w), mu);
  };

  // Minimal blend (1-s) mu + s delta_{v} reaching the target; g is concave
  // along the segment, so bisection on s finds the boundary point.
  auto blend_to_target = [&](const std::vector<double>& w) {
    double lo = 0, hi = 1;
    std::vector<double> cand(k);
    for (int it = 0; it < 60; ++it) {
      double s = 0.5 * (lo + hi);
      for (std::size_t i = 0; i < k; ++i)
        cand[i] = (1 - s) * w[i] + (i == best_vertex ? s : 0.0);
      if (g_of(cand) >= target)
        hi = s;
      else
        lo = s;
    }
    for (std::size_t i = 0; i < k; ++i)
      cand[i] = (1 - hi) * w[i] + (i == best_vertex ? hi : 0.0);
    return cand;
  };

  std::vector<std::vector<double>> starts;
  starts.push_back(blend_to_target(mu.weights));
  if (opt.warm_start) starts.push_back(project_simplex(*opt.warm_start));
  Prng rng(opt.stream);
  for (int s = 0; s < opt.starts; ++s) {
    std::vector<double> w(k);
    double sum = 0;
    for (std::size_t i = 0; i < k; ++i) {
      w[i] = -std::log(rng.u01_open());
      sum += w[i];
    }
    for (double& x : w) x /= sum;
    starts.push_back(std::move(w));
  }

  double best_h = std::numeric_limits<double>::infinity();
  std::vector<double> best_w;
  for (auto& w0 : starts) {
    std::vector<double> w = w0;
    double beta = 10.0;
    for (int round = 0; round < opt.penalty_rounds; ++round, beta *= 10.0) {
      auto objective = [&](const std::vector<double>& x) {
        double viol = std::max(0.0, target - g_of(x));
        return entropy_on(x, mu) + beta * viol * viol;
      };
      double f_cur = objective(w);
      double eta = 0.05;
      for (int it = 0; it < opt.inner_iters; ++it) {
        ThresholdEval ge = eval_threshold(mu, spec, w);
        double viol = std::max(0.0, target - ge.value);
        std::vector<double> grad(k);
        for (std::size_t i = 0; i < k; ++i) {
          double wi = std::max(w[i], 1e-15);
          grad[i] = std::log(wi / mu.weights[i]) + 1.0 - 2.0 * beta * viol * ge.grad[i];
        }
        bool accepted = false;
        for (int bt = 0; bt < 25; ++bt) {
          std::vector<double> cand(k);
          for (std::size_t i = 0; i < k; ++i) cand[i] = w[i] - eta * grad[i];
          cand = project_simplex(std::move(cand));
          double f_new = objective(cand);
          if (f_new < f_cur - 1e-15) {
            w = std::move(cand);
            f_cur = f_new;
            eta *= 1.3;
            accepted = true;
            break;
          }
          eta *= 0.5;
        }
        if (!accepted) break;
      }
    }
    // restore strict feasibility, then score
    if (g_of(w) < target) w = blend_to_target(w);
    double h = entropy_on(w, mu);
    if (h < best_h) {
      best_h = h;
      best_w = w;
    }
  }
  return {best_h, on_support(mu, best_w), true};
}

OracleResult rate_function_oracle(const DiscreteMeasure& mu, const ThresholdSpec& spec,
                                  double t, double grid_resolution) {
  const std::size_t k = mu.size();
  if (k > 4) throw SupportTooLarge("rate_function_oracle: support size > 4");
  if (t <= 0) return {0.0, 0.0, mu.weights};
  const double target = t + 1e-9;
  const long m = std::lround(1.0 / grid_resolution);
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_w;

  std::vector<long> c(k, 0);
  std::vector<double> w(k);
  // enumerate compositions of m into k parts
  std::function<void(std::size_t, long)> rec = [&](std::size_t idx, long rem) {
    if (idx + 1 == k) {
      c[idx] = rem;
      for (std::size_t i = 0; i < k; ++i) w[i] = static_cast<double>(c[i]) / m;
      if (spec.eval(on_support(mu, w), mu) >= target) {
        double h = entropy_on(w, mu);
        if (h < best) {
          best = h;
          best_w = w;
        }
      }
      return;
    }
    for (long v = 0; v <= rem; ++v) {
      c[idx] = v;
      rec(idx + 1, rem - v);
    }
  };
  rec(0, m);
  if (!std::isfinite(best))
    throw Infeasible("rate_function_oracle: no feasible grid point");
  double mu_min = *std::min_element(mu.weights.begin(), mu.weights.end());
  // entropy modulus of continuity on the simplex at step 1/m, conservative
  double err = static_cast<double>(k) / m *
               (std::log(static_cast<double>(m)) + std::log(1.0 / mu_min) + 2.0);
  return {best, err, best_w};
}

RateCurve compute_rate_curve(const DiscreteMeasure& mu, const ThresholdSpec& spec,
                             const std::vector<double>& t_list, bool with_oracle,
                             double oracle_resolution) {
  RateCurve curve;
  curve.thresholds = t_list;
  curve.method = with_oracle ? "penalty_optimizer+grid_oracle" : "penalty_optimizer";
  for (double t : t_list) {
    RateOptions opt;
    if (with_oracle && mu.size() <= 4) {
      OracleResult oracle = rate_function_oracle(mu, spec, t, oracle_resolution);
      opt.warm_start = oracle.best_weights;
      RateResult r = rate_function(mu, spec, t, opt);
      curve.rates.push_back(r.value);
      curve.minimizers.push_back(r.minimizer);
      curve.gap_to_oracle.push_back(std::abs(r.value - oracle.value));
    } else {
      RateResult r = rate_function(mu, spec, t, opt);
      curve.rates.push_back(r.value);
      curve.minimizers.push_back(r.minimizer);
    }
  }
  return curve;
}

DsReport ds_lower_bound_check(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int n,
                              double t, double p) {
  const std::size_t k = mu.size();
  if (std::pow(static_cast<double>(k), n) > kEnumerationCap)
    throw EnumerationCapExceeded("ds_lower_bound_check: |support|^n beyond cap");
  double h = relative_entropy(nu, mu);
  if (!std::isfinite(h))
    throw Error("ds_lower_bound_check: nu not absolutely continuous w.r.t. mu");
  // nu must live on mu's support (absolute continuity), so outcome
  // probabilities multiply over the shared atom indices.
  std::vector<double> nu_on(k, 0.0);
  for (std::size_t i = 0; i < nu.size(); ++i) {
    auto it = std::lower_bound(mu.points.begin(), mu.points.end(), nu.points[i]);
    nu_on[it - mu.points.begin()] = nu.weights[i];
  }

  // enumerate by multinomial type: counts c with sum n
  double mu_a = 0, nu_a = 0;
  std::vector<long> c(k, 0);
  std::vector<double> lgamma_cache(n + 2);
  for (int i = 0; i <= n + 1; ++i) lgamma_cache[i] = std::lgamma(i + 1.0);

  std::function<void(std::size_t, long)> rec = [&](std::size_t idx, long rem) {
    if (idx + 1 == k) {
      c[idx] = rem;
      // W_p(L_n, mu) for the empirical measure with these counts
      std::vector<Vec> pts;
      std::vector<double> w;
      for (std::size_t i = 0; i < k; ++i)
        if (c[i] > 0) {
          pts.push_back(mu.points[i]);
          w.push_back(static_cast<double>(c[i]) / n);
        }
      DiscreteMeasure ln;
      ln.dim = mu.dim;
      ln.points = std::move(pts);
      ln.weights = std::move(w);
      if (w_p(ln, mu, p) > t) {
        double log_coeff = lgamma_cache[n] ;
        double log_mu = 0, log_nu = 0;
        bool nu_zero = false;
        for (std::size_t i = 0; i < k; ++i) {
          log_coeff -= lgamma_cache[c[i]];
          if (c[i] > 0) {
            log_mu += c[i] * std::log(mu.weights[i]);
            if (nu_on[i] == 0)
              nu_zero = true;
            else
              log_nu += c[i] * std::log(nu_on[i]);
          }
        }
        mu_a += std::exp(log_coeff + log_mu);
        if (!nu_zero) nu_a += std::exp(log_coeff + log_nu);
      }
      return;
    }
    for (long v = 0; v <= rem; ++v) {
      c[idx] = v;
      rec(idx + 1, rem - v);
    }
  };
  rec(0, n);

  if (mu_a == 0) throw EventEmpty("ds_lower_bound_check: event has mu-probability zero");
  if (nu_a == 0) throw EventEmpty("ds_lower_bound_check: event has nu-probability zero");

  DsReport rep;
  rep.entropy = h;
  rep.mu_prob = mu_a;
  rep.nu_prob = nu_a;
  rep.lhs = std::log(mu_a) / n + h;
  rep.rhs = -h * (1.0 - nu_a) / nu_a + std::log(nu_a) / n - 1.0 / (n * std::exp(1.0) * nu_a);
  rep.slack = rep.lhs - rep.rhs;
  return rep;
}

std::pair<double, double> wilson_interval(long hits, long trials) {
  const double z = 1.959963984540054;
  double n = static_cast<double>(trials);
  double p = static_cast<double>(hits) / n;
  double z2 = z * z;
  double denom = 1 + z2 / n;
  double center = (p + z2 / (2 * n)) / denom;
  double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

McTailResult mc_tail(const DiscreteMeasure& mu, double p, int n,
                     const std::vector<double>& t_list, long trials, StreamId stream) {
  if (trials < 1) throw Error("mc_tail: trials must be >= 1");
  McTailResult out;
  out.values.assign(trials, 0.0);
  parallel_for(trials, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t trial = lo; trial < hi; ++trial) {
      EmpiricalMeasure em = sample_empirical(mu, n, stream.sub(trial));
      out.values[trial] = w_p(em.to_measure(), mu, p);
    }
  });
  std::vector<double> sorted = out.values;
  std::sort(sorted.begin(), sorted.end());
  out.median = (trials % 2 == 1)
                   ? sorted[trials / 2]
                   : 0.5 * (sorted[trials / 2 - 1] + sorted[trials / 2]);
  // pairwise-stable summation is overkill here; sorted accumulation is
  // deterministic and order-independent
  double mean = 0;
  for (double v : sorted) mean += v;
  out.mean = mean / trials;
  for (double t : t_list) {
    TailEstimate te;
    te.n = n;
    te.t = t;
    te.trials = trials;
    te.hits = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
    te.p_hat = static_cast<double>(te.hits) / trials;
    auto [lo, hi] = wilson_interval(te.hits, trials);
    te.ci_lo = lo;
    te.ci_hi = hi;
    te.censored = (te.hits == 0);
    te.rate_hat = te.censored ? std::log(static_cast<double>(trials)) / n
                              : -std::log(te.p_hat) / n;
    out.tails.push_back(te);
  }
  return out;
}

std::vector<MeanRow> empirical_mean_convergence(const DiscreteMeasure& mu, double p,
                                                const std::vector<int>& n_list, long trials,
                                                StreamId stream) {
  std::vector<MeanRow> rows;
  for (std::size_t idx = 0; idx < n_list.size(); ++idx) {
    McTailResult r = mc_tail(mu, p, n_list[idx], {}, trials, stream.sub(1000 + idx));
    double var = 0;
    for (double v : r.values) var += sqr(v - r.mean);
    var /= std::max<long>(1, trials - 1);
    rows.push_back({n_list[idx], r.mean, std::sqrt(var / trials)});
  }
  return rows;
}

ConstantEstimate best_constant(const DiscreteMeasure& mu, const CostSpec& cost,
                               bool square_numerator, const std::vector<double>& t_list,
                               int tilt_count, StreamId stream) {
  auto numerator = [&](const DiscreteMeasure& nu) {
    double t = t_cost(nu, mu, cost);
    return square_numerator ? t * t : t;
  };
  ConstantEstimate est;
  ThresholdSpec spec = ThresholdSpec::raw(cost);
  for (double t : t_list) {
    RateResult r;
    try {
      r = rate_function(mu, spec, t);
    } catch (const Infeasible&) {
      continue;
    }
    if (r.value > 1e-12)
      est.from_minimizers = std::max(est.from_minimizers, numerator(r.minimizer) / r.value);
  }
  Prng rng(stream);
  const double sigmas[] = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  for (int i = 0; i < tilt_count; ++i) {
    Vec lambda(mu.dim);
    double sigma = sigmas[i % 6];
    for (double& l : lambda) l = sigma * rng.normal();
    DiscreteMeasure nu = tilt(mu, lambda);
    double h = relative_entropy(nu, mu);
    if (h > 1e-10)
      est.from_tilts = std::max(est.from_tilts, numerator(nu) / h);
  }
  return est;
}

std::vector<double> binomial_pmf(int n, double q) {
  std::vector<double> pmf(n + 1);
  for (int k = 0; k <= n; ++k) {
    double lg = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                k * std::log(std::max(q, 1e-300)) +
                (n - k) * std::log(std::max(1 - q, 1e-300));
    pmf[k] = std::exp(lg);
  }
  return pmf;
}

}  // namespace conclab
