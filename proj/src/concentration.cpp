#include "conclab/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <numeric>

#include "conclab/functionals.hpp"

namespace conclab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double guaranteed_mass(const MartonProfile& bound, double r, bool exponential) {
  double e = exponential ? bound.a * r : bound.a * sqr(std::max(r - bound.r0, 0.0));
  return std::max(0.0, 1.0 - bound.b * std::exp(-e));
}

// Per-coordinate switching cost between two base atoms under the enlargement.
double switch_cost(const DiscreteMeasure& mu, const EnlargeSpec& enlarge, int s, int t) {
  const Vec& x = mu.points[s];
  const Vec& y = mu.points[t];
  switch (enlarge.kind) {
    case EnlargeKind::Rho2:
      return sqr(euclid(x, y));
    case EnlargeKind::TwoLevelAlpha: {
      double c = 0;
      for (int j = 0; j < mu.dim; ++j) c += alpha_p(x[j] - y[j], enlarge.p);
      return c;
    }
    case EnlargeKind::D21:
      return alpha_p(euclid(x, y), 1.0);
  }
  return 0;
}

// Membership threshold: the additive level L(x) = min_{a in A} sum_i c(x_i,a_i)
// enters A^r iff level_in(L, r).
bool level_in(const EnlargeSpec& enlarge, double level, double r) {
  if (enlarge.kind == EnlargeKind::Rho2) return std::sqrt(level) <= r + 1e-9;
  return level <= r + 1e-9;
}

struct ProductSpace {
  int k = 0;
  int n = 0;
  std::size_t total = 0;
  std::vector<double> prob;  // mu^n per outcome; outcome = base-k digit string
};

ProductSpace enumerate_product(const DiscreteMeasure& mu, int n) {
  ProductSpace sp;
  sp.k = static_cast<int>(mu.size());
  sp.n = n;
  double count = std::pow(static_cast<double>(sp.k), n);
  if (count > ProductSpec::kMaterializeCap) throw EnumerationCapExceeded("product space too large to enumerate");
  sp.total = static_cast<std::size_t>(count + 0.5);
  sp.prob.assign(sp.total, 1.0);
  std::size_t stride = 1;
  for (int i = 0; i < n; ++i) {
    for (std::size_t o = 0; o < sp.total; ++o) sp.prob[o] *= mu.weights[(o / stride) % sp.k];
    stride *= sp.k;
  }
  return sp;
}

// F_n per outcome, memoized over count vectors (F depends on counts only).
std::vector<double> empirical_fn_values(const DiscreteMeasure& mu, const ProductSpace& sp) {
  std::vector<double> f(sp.total, 0.0);
  std::map<std::vector<int>, double> memo;
  std::vector<int> counts(sp.k);
  for (std::size_t o = 0; o < sp.total; ++o) {
    std::fill(counts.begin(), counts.end(), 0);
    std::size_t rest = o;
    for (int i = 0; i < sp.n; ++i) {
      ++counts[rest % sp.k];
      rest /= sp.k;
    }
    auto it = memo.find(counts);
    if (it == memo.end()) {
      std::vector<Vec> tuple;
      tuple.reserve(sp.n);
      for (int s = 0; s < sp.k; ++s)
        for (int c = 0; c < counts[s]; ++c) tuple.push_back(mu.points[s]);
      it = memo.emplace(counts, empirical_transport_fn(mu, tuple)).first;
    }
    f[o] = it->second;
  }
  return f;
}

// Smallest prefix of `order` reaching cumulative mass `target`.
std::vector<char> prefix_set(const ProductSpace& sp, const std::vector<std::size_t>& order,
                             double target) {
  std::vector<char> in(sp.total, 0);
  double cum = 0;
  for (std::size_t o : order) {
    if (cum >= target) break;
    in[o] = 1;
    cum += sp.prob[o];
  }
  return in;
}

// min_{a in A} sum_i c(x_i, a_i) per outcome.  Two-point supports use a
// multi-source BFS over the hypercube (cost is kappa * hamming); otherwise a
// capped pairwise scan.
std::vector<double> enlargement_levels(const DiscreteMeasure& mu, const EnlargeSpec& enlarge,
                                       const ProductSpace& sp, const std::vector<char>& in_set) {
  std::vector<double> level(sp.total, kInf);
  if (sp.k == 2) {
    double kappa = switch_cost(mu, enlarge, 0, 1);
    std::vector<int> ham(sp.total, -1);
    std::deque<std::size_t> queue;
    for (std::size_t o = 0; o < sp.total; ++o)
      if (in_set[o]) {
        ham[o] = 0;
        queue.push_back(o);
      }
    while (!queue.empty()) {
      std::size_t o = queue.front();
      queue.pop_front();
      for (int i = 0; i < sp.n; ++i) {
        std::size_t nb = o ^ (std::size_t{1} << i);
        if (ham[nb] < 0) {
          ham[nb] = ham[o] + 1;
          queue.push_back(nb);
        }
      }
    }
    for (std::size_t o = 0; o < sp.total; ++o)
      if (ham[o] >= 0) level[o] = kappa * ham[o];
    return level;
  }
  std::vector<std::size_t> members;
  for (std::size_t o = 0; o < sp.total; ++o)
    if (in_set[o]) members.push_back(o);
  if (static_cast<double>(members.size()) * static_cast<double>(sp.total) > 2e8)
    throw EnumerationCapExceeded("pairwise enlargement scan too large");
  std::vector<double> base(sp.k * sp.k, 0.0);
  for (int s = 0; s < sp.k; ++s)
    for (int t = 0; t < sp.k; ++t) base[s * sp.k + t] = switch_cost(mu, enlarge, s, t);
  std::vector<int> digits(sp.n);
  parallel_for(sp.total, [&](std::size_t lo, std::size_t hi) {
    std::vector<int> dig(sp.n);
    for (std::size_t o = lo; o < hi; ++o) {
      std::size_t rest = o;
      for (int i = 0; i < sp.n; ++i) {
        dig[i] = static_cast<int>(rest % sp.k);
        rest /= sp.k;
      }
      double best = kInf;
      for (std::size_t a : members) {
        double c = 0;
        std::size_t ra = a;
        for (int i = 0; i < sp.n && c < best; ++i) {
          c += base[dig[i] * sp.k + static_cast<int>(ra % sp.k)];
          ra /= sp.k;
        }
        best = std::min(best, c);
      }
      level[o] = best;
    }
  });
  return level;
}

}  // namespace

MartonProfile marton_profile(double C) {
  if (C <= 0) throw NegativeInput("constant must be positive");
  return {1.0 / C, 1.0, std::sqrt(C * std::log(2.0))};
}

ExactConcentrationResult exact_product_concentration(const DiscreteMeasure& mu, int n,
                                                     const EnlargeSpec& enlarge,
                                                     SetFamily family,
                                                     std::size_t set_count,
                                                     const std::vector<double>& r_list,
                                                     const MartonProfile& bound,
                                                     StreamId stream) {
  if (n < 1) throw NegativeInput("n must be >= 1");
  if (set_count == 0) throw NegativeInput("set_count must be >= 1");
  ProductSpace sp = enumerate_product(mu, n);
  bool exponential = enlarge.kind != EnlargeKind::Rho2;

  ExactConcentrationResult out;
  out.profile.r_values = r_list;
  out.profile.family = family == SetFamily::RandomHalf ? "random-half" : "sublevel-fn";
  out.profile.a = bound.a;
  out.profile.b = bound.b;
  out.profile.r0 = bound.r0;
  out.profile.guaranteed.reserve(r_list.size());
  for (double r : r_list) out.profile.guaranteed.push_back(guaranteed_mass(bound, r, exponential));
  out.profile.observed.assign(r_list.size(), 1.0);

  std::vector<double> fvals;
  if (family == SetFamily::SublevelFn) fvals = empirical_fn_values(mu, sp);

  std::vector<std::size_t> order(sp.total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (family == SetFamily::SublevelFn)
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });

  for (std::size_t s = 0; s < set_count; ++s) {
    std::vector<char> in_set;
    if (family == SetFamily::RandomHalf) {
      Prng pr(stream.sub(1000 + s));
      std::vector<double> score(sp.total);
      for (auto& v : score) v = pr.u01();
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
      in_set = prefix_set(sp, order, 0.5);
    } else {
      double q = set_count == 1 ? 0.5 : 0.5 + 0.45 * static_cast<double>(s) / (set_count - 1);
      in_set = prefix_set(sp, order, q);
    }
    std::vector<double> level = enlargement_levels(mu, enlarge, sp, in_set);
    for (std::size_t ri = 0; ri < r_list.size(); ++ri) {
      double mass = 0;
      for (std::size_t o = 0; o < sp.total; ++o)
        if (level_in(enlarge, level[o], r_list[ri])) mass += sp.prob[o];
      out.profile.observed[ri] = std::min(out.profile.observed[ri], mass);
      if (mass < out.profile.guaranteed[ri] - 1e-12) ++out.violations;
    }
    ++out.sets_tested;
  }
  return out;
}

TailProfile mc_concentration_profile(const DiscreteMeasure& mu, int n, double p,
                                     const std::vector<double>& r_list, long trials,
                                     StreamId stream) {
  McTailResult mc = mc_tail(mu, p, n, {}, trials, stream);
  std::sort(mc.values.begin(), mc.values.end());
  TailProfile out;
  out.median = mc.median;
  out.r_values = r_list;
  double root_n = std::sqrt(static_cast<double>(n));
  for (double r : r_list) {
    double t = mc.median + r / root_n;
    TailEstimate e;
    e.n = n;
    e.t = t;
    e.trials = trials;
    auto it = std::upper_bound(mc.values.begin(), mc.values.end(), t);
    e.hits = static_cast<long>(mc.values.end() - it);
    e.p_hat = static_cast<double>(e.hits) / static_cast<double>(trials);
    auto [lo, hi] = wilson_interval(e.hits, trials);
    e.ci_lo = lo;
    e.ci_hi = hi;
    e.censored = e.hits == 0;
    e.rate_hat = e.censored ? std::log(static_cast<double>(trials)) / n
                            : -std::log(e.p_hat) / n;
    out.tails.push_back(e);
  }
  return out;
}

TailProfile exact_two_point_profile(const DiscreteMeasure& mu, int n, double p,
                                    const std::vector<double>& r_list) {
  if (mu.size() != 2) throw SupportTooLarge("exact profile needs a two-point support");
  std::vector<double> pmf = binomial_pmf(n, mu.weights[1]);
  std::vector<double> fk(n + 1);
  for (int k = 0; k <= n; ++k) {
    DiscreteMeasure ln;
    if (k == 0)
      ln = point_mass(mu.points[0]);
    else if (k == n)
      ln = point_mass(mu.points[1]);
    else
      ln = make_measure({mu.points[0], mu.points[1]},
                        {static_cast<double>(n - k) / n, static_cast<double>(k) / n});
    fk[k] = w_p(ln, mu, p);
  }
  std::vector<int> order(n + 1);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fk[a] < fk[b]; });
  TailProfile out;
  double cum = 0;
  for (int k : order) {
    cum += pmf[k];
    out.median = fk[k];
    if (cum >= 0.5) break;
  }
  out.r_values = r_list;
  double root_n = std::sqrt(static_cast<double>(n));
  for (double r : r_list) {
    double t = out.median + r / root_n;
    TailEstimate e;
    e.n = n;
    e.t = t;
    double mass = 0;
    for (int k = 0; k <= n; ++k)
      if (fk[k] > t) mass += pmf[k];
    e.p_hat = mass;
    e.ci_lo = e.ci_hi = mass;
    e.censored = mass <= 0;
    e.rate_hat = e.censored ? 0.0 : -std::log(mass) / n;
    out.tails.push_back(e);
  }
  return out;
}

GaussianFit fit_tail_profile(const std::vector<double>& r, const std::vector<double>& tail,
                             const std::vector<double>& weight, bool exponential) {
  if (r.size() != tail.size() || (!weight.empty() && weight.size() != r.size()))
    throw SizeMismatch("profile fit inputs disagree");
  std::vector<double> rs, ys, ws;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (tail[i] <= 0) continue;
    rs.push_back(r[i]);
    ys.push_back(std::log(tail[i]));
    ws.push_back(weight.empty() ? 1.0 : std::max(weight[i], 1e-12));
  }
  if (rs.size() < 2) throw Infeasible("not enough uncensored tail points to fit");
  const double b_lo = 0.5, b_hi = 2.0 * std::exp(1.0);

  // Hinge model log tail = log b - a * z, z = max(r - r0, 0)^2 (or z = r for
  // the exponential kind), fit over ALL uncensored points so the r0 search
  // cannot win by discarding data.
  auto solve = [&](double r0) -> std::pair<GaussianFit, double> {
    double sw = 0, sz = 0, sy = 0, szz = 0, szy = 0;
    for (std::size_t i = 0; i < rs.size(); ++i) {
      double z = exponential ? rs[i] : sqr(std::max(rs[i] - r0, 0.0));
      sw += ws[i];
      sz += ws[i] * z;
      sy += ws[i] * ys[i];
      szz += ws[i] * z * z;
      szy += ws[i] * z * ys[i];
    }
    GaussianFit bad;
    double det = sw * szz - sz * sz;
    if (std::abs(det) < 1e-30) return {bad, kInf};
    double c0 = (szz * sy - sz * szy) / det;
    double a = -(sw * szy - sz * sy) / det;
    if (a <= 0) return {bad, kInf};
    double b = std::exp(c0);
    if (b < b_lo || b > b_hi) {
      b = std::clamp(b, b_lo, b_hi);
      // refit the slope with the intercept pinned at the clamp
      double num = 0, den = 0;
      for (std::size_t i = 0; i < rs.size(); ++i) {
        double z = exponential ? rs[i] : sqr(std::max(rs[i] - r0, 0.0));
        num += ws[i] * z * (std::log(b) - ys[i]);
        den += ws[i] * z * z;
      }
      if (den <= 0 || num <= 0) return {bad, kInf};
      a = num / den;
    }
    double sse = 0;
    for (std::size_t i = 0; i < rs.size(); ++i) {
      double z = exponential ? rs[i] : sqr(std::max(rs[i] - r0, 0.0));
      sse += ws[i] * sqr(ys[i] - (std::log(b) - a * z));
    }
    return {GaussianFit{a, b, r0}, sse};
  };

  GaussianFit best;
  double best_sse = kInf;
  if (exponential) {
    auto [fit, sse] = solve(0.0);
    best = fit;
    best_sse = sse;
  } else {
    double r_max = *std::max_element(rs.begin(), rs.end());
    for (int g = 0; g <= 60; ++g) {
      double r0 = r_max * 0.8 * g / 60.0;
      auto [fit, sse] = solve(r0);
      if (sse < best_sse) {
        best = fit;
        best_sse = sse;
      }
    }
  }
  if (!std::isfinite(best_sse)) throw Infeasible("tail profile fit failed");
  return best;
}

EquivalenceReport equivalence_experiment(const DiscreteMeasure& mu, Direction dir,
                                         const EquivalenceConfig& config) {
  std::vector<double> r_list = config.r_list;
  if (r_list.empty())
    for (int i = 1; i <= 12; ++i) r_list.push_back(0.25 * i);
  std::vector<double> t_list = config.t_list;
  if (t_list.empty()) t_list = {0.02, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45};

  EquivalenceReport rep;
  // T1-type certified constant: sup W_1^2 / H over the tested family.  On
  // tilt families of log-concave-like measures this coincides with the sharp
  // quadratic-transport constant; on discrete measures the raw quadratic
  // ratio diverges near mu, so the T1 form is the one that tensorizes.
  ConstantEstimate ce = best_constant(mu, CostSpec::power(1.0), true, t_list, 200,
                                      config.stream.sub(1));
  rep.c_t2 = std::max(ce.from_minimizers, ce.from_tilts);
  rep.a_marton = rep.c_t2 > 0 ? 1.0 / rep.c_t2 : 0.0;

  double r0 = rep.c_t2 > 0 ? std::sqrt(rep.c_t2 * std::log(2.0)) : 0.0;
  for (std::size_t ni = 0; ni < config.n_list.size(); ++ni) {
    int n = config.n_list[ni];
    TailProfile prof =
        mu.size() == 2 ? exact_two_point_profile(mu, n, 2.0, r_list)
                       : mc_concentration_profile(mu, n, 2.0, r_list, config.trials,
                                                  config.stream.sub(10 + ni));
    std::vector<double> tails, ws;
    for (const auto& e : prof.tails) {
      tails.push_back(e.p_hat);
      ws.push_back(std::max(e.p_hat, 1e-12));
    }
    double a_n = kInf;  // fully censored tails mean perfect concentration
    try {
      a_n = fit_tail_profile(r_list, tails, ws, false).a;
    } catch (const Error&) {
    }
    rep.a_fit_per_n.push_back(a_n);
    if (ni + 1 == config.n_list.size()) rep.a_fit = a_n;
    if (dir != Direction::ConcentrationToT2) {
      for (std::size_t ri = 0; ri < r_list.size(); ++ri) {
        double bound = std::exp(-rep.a_marton * sqr(std::max(r_list[ri] - r0, 0.0)));
        if (prof.tails[ri].ci_lo > bound + 1e-12) ++rep.profile_violations;
      }
    }
  }
  rep.c_implied = rep.a_fit > 0 ? 1.0 / rep.a_fit : kInf;
  double scale = std::max(rep.c_t2, rep.c_implied);
  rep.agreement = scale > 0 ? std::abs(rep.c_implied - rep.c_t2) / scale : 0.0;

  bool pass_forward = rep.profile_violations == 0;
  bool pass_back = rep.agreement <= config.slack;
  switch (dir) {
    case Direction::T2ToConcentration: rep.pass = pass_forward; break;
    case Direction::ConcentrationToT2: rep.pass = pass_back; break;
    case Direction::Both: rep.pass = pass_forward && pass_back; break;
  }
  return rep;
}

TwoLevelReport two_level_experiment(const DiscreteMeasure& mu, double p, int n,
                                    const std::vector<double>& r_list, long trials,
                                    StreamId stream) {
  std::vector<double> t_list = {0.02, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40};
  TwoLevelReport rep;
  ConstantEstimate ce = best_constant(mu, CostSpec::alpha(p), false, t_list, 200, stream.sub(1));
  rep.c_certified = std::max(ce.from_minimizers, ce.from_tilts);

  EnlargeSpec enlarge{EnlargeKind::TwoLevelAlpha, p};
  MartonProfile bound{rep.c_certified > 0 ? 1.0 / (2.0 * rep.c_certified) : 0.0, 2.0, 0.0};
  std::size_t set_count = static_cast<std::size_t>(std::clamp<long>(trials, 1, 200));
  ExactConcentrationResult exact = exact_product_concentration(
      mu, n, enlarge, SetFamily::SublevelFn, set_count, r_list, bound, stream.sub(2));
  rep.profile_violations = exact.violations;

  std::vector<double> tails, ws;
  std::vector<double> rs;
  for (std::size_t ri = 0; ri < r_list.size(); ++ri) {
    double tl = 1.0 - exact.profile.observed[ri];
    if (tl <= 0) continue;
    rs.push_back(r_list[ri]);
    tails.push_back(tl);
    ws.push_back(std::max(tl, 1e-12));
  }
  if (rs.size() >= 2) {
    GaussianFit fit = fit_tail_profile(rs, tails, ws, true);
    rep.a_fit = fit.a;
    rep.b_fit = fit.b;
    rep.c_chain = 288.0 / fit.a;
  } else {
    // everything already absorbed at the smallest radius; the chain constant
    // from any positive slope would be vacuous, use the certified route
    rep.a_fit = 1.0 / (2.0 * rep.c_certified);
    rep.b_fit = 2.0;
    rep.c_chain = 288.0 / rep.a_fit;
  }

  RateCurve curve = compute_rate_curve(mu, ThresholdSpec::raw(CostSpec::alpha(p)), t_list, false);
  for (std::size_t i = 0; i < curve.minimizers.size(); ++i) {
    const DiscreteMeasure& nu = curve.minimizers[i];
    double h = relative_entropy(nu, mu);
    if (h <= 0) continue;
    if (t_cost(nu, mu, CostSpec::alpha(p)) > rep.c_chain * h * (1.0 + 1e-9)) ++rep.chain_violations;
  }
  rep.pass = rep.chain_violations == 0 && rep.profile_violations == 0;
  return rep;
}

}  // namespace conclab
