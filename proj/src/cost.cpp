#include "conclab/cost.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace conclab {

double alpha_p(double u, double p) {
  double a = std::abs(u);
  double sq = a * a;
  double pw = (p == 2.0) ? sq : (p == 1.0 ? a : std::pow(a, p));
  return std::min(sq, pw);
}

double euclid(const Vec& x, const Vec& y) {
  double s = 0;
  for (std::size_t j = 0; j < x.size(); ++j) s += sqr(x[j] - y[j]);
  return std::sqrt(s);
}

double eval_cost(const CostSpec& spec, const Vec& x, const Vec& y) {
  if (x.size() != y.size()) throw DimensionMismatch("eval_cost: point dimension mismatch");
  switch (spec.kind) {
    case CostKind::Quadratic: {
      double s = 0;
      for (std::size_t j = 0; j < x.size(); ++j) s += sqr(x[j] - y[j]);
      return s;
    }
    case CostKind::PowerP: {
      double d = euclid(x, y);
      if (spec.p == 2.0) return d * d;
      if (spec.p == 1.0) return d;
      return std::pow(d, spec.p);
    }
    case CostKind::AlphaP: {
      double s = 0;
      for (std::size_t j = 0; j < x.size(); ++j) s += alpha_p(x[j] - y[j], spec.p);
      return s;
    }
    case CostKind::SG:
      return alpha_p(euclid(x, y), 1.0);
  }
  return 0;
}

double rho_p_n(const std::vector<Vec>& x, const std::vector<Vec>& y, double p) {
  if (x.size() != y.size()) throw DimensionMismatch("rho_p_n: tuple length mismatch");
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double d = euclid(x[i], y[i]);
    s += (p == 2.0) ? d * d : (p == 1.0 ? d : std::pow(d, p));
  }
  return (p == 1.0) ? s : (p == 2.0 ? std::sqrt(s) : std::pow(s, 1.0 / p));
}

double product_cost(const CostSpec& spec, const std::vector<Vec>& x, const std::vector<Vec>& y) {
  if (x.size() != y.size()) throw DimensionMismatch("product_cost: tuple length mismatch");
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += eval_cost(spec, x[i], y[i]);
  return s;
}

CostSpec parse_cost(const std::string& s) {
  if (s == "quadratic") return CostSpec::quadratic();
  if (s == "sg") return CostSpec::sg();
  auto parse_p = [&](const std::string& prefix) {
    std::string tail = s.substr(prefix.size());
    std::size_t pos = 0;
    double p = std::stod(tail, &pos);
    if (pos != tail.size()) throw Error("parse_cost: trailing characters in '" + s + "'");
    return p;
  };
  try {
    if (s.rfind("power:p=", 0) == 0) {
      double p = parse_p("power:p=");
      if (p < 1) throw Error("parse_cost: power cost needs p >= 1");
      return CostSpec::power(p);
    }
    if (s.rfind("alpha:p=", 0) == 0) {
      double p = parse_p("alpha:p=");
      if (p < 1 || p > 2) throw Error("parse_cost: alpha cost needs p in [1,2]");
      return CostSpec::alpha(p);
    }
  } catch (const std::invalid_argument&) {
    // fall through to the grammar error below
  }
  throw Error("parse_cost: '" + s +
              "' does not match grammar: quadratic | power:p=<f> | alpha:p=<f> | sg");
}

namespace {

std::string format_p(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p);
  return buf;
}

}  // namespace

std::string format_cost(const CostSpec& spec) {
  switch (spec.kind) {
    case CostKind::Quadratic: return "quadratic";
    case CostKind::PowerP: return "power:p=" + format_p(spec.p);
    case CostKind::AlphaP: return "alpha:p=" + format_p(spec.p);
    case CostKind::SG: return "sg";
  }
  return "?";
}

Vec flatten(const std::vector<Vec>& x) {
  Vec v;
  for (const auto& xi : x) v.insert(v.end(), xi.begin(), xi.end());
  return v;
}

bool in_two_level_ball(const std::vector<Vec>& x, const TwoLevelBallSpec& spec) {
  double s = 0;
  for (const auto& xi : x)
    for (double c : xi) s += alpha_p(c, spec.p);
  return s <= spec.r;
}

bool in_d21_ball(const std::vector<Vec>& x, double r) {
  double s = 0;
  Vec zero;
  for (const auto& xi : x) {
    zero.assign(xi.size(), 0.0);
    s += alpha_p(euclid(xi, zero), 1.0);
  }
  return s <= r;
}

namespace {

double lp_norm_pow(const Vec& v, double p) {
  // sum |v_i|^p with fast paths for the battery's p values
  double s = 0;
  if (p == 1.0) {
    for (double c : v) s += std::abs(c);
  } else if (p == 2.0) {
    for (double c : v) s += c * c;
  } else if (p == 1.5) {
    for (double c : v) {
      double a = std::abs(c);
      s += a * std::sqrt(a);
    }
  } else {
    for (double c : v) s += std::pow(std::abs(c), p);
  }
  return s;
}

double pow_pm1(double v, double p) {
  // v^{p-1} for v >= 0
  if (p == 1.0) return 1.0;
  if (p == 2.0) return v;
  if (p == 1.5) return std::sqrt(v);
  return std::pow(v, p - 1.0);
}

// argmin over [0,a] of (a-v)^2/2 + lambda*v^p; a >= 0, 1 < p < 2
double shrink_coord(double a, double lambda, double p) {
  if (a <= 0) return 0;
  // root of g(v) = v - a + lambda*p*v^{p-1}, increasing concave on (0,a]
  double lo = 0, hi = a, v = a;
  for (int it = 0; it < 48; ++it) {
    double g = v - a + lambda * p * pow_pm1(v, p);
    if (g > 0)
      hi = v;
    else
      lo = v;
    // Newton step safeguarded by the bracket
    double dg = 1.0 + lambda * p * (p - 1.0) * ((p < 2.0 && v > 0) ? pow_pm1(v, p) / v : 1.0);
    double vn = v - g / dg;
    v = (vn > lo && vn < hi) ? vn : 0.5 * (lo + hi);
  }
  return v;
}

}  // namespace

double dist_to_lp_ball(const Vec& x, double p, double rad, Vec* proj) {
  if (rad < 0) rad = 0;
  double target = (p == 1.0) ? rad : std::pow(rad, p);
  if (lp_norm_pow(x, p) <= target || rad == 0) {
    Vec v = (rad == 0) ? Vec(x.size(), 0.0) : x;
    double d = (rad == 0) ? std::sqrt(lp_norm_pow(x, 2.0)) : 0.0;
    if (proj) *proj = std::move(v);
    return d;
  }
  Vec v(x.size());
  if (p == 2.0) {
    double nrm = std::sqrt(lp_norm_pow(x, 2.0));
    for (std::size_t i = 0; i < x.size(); ++i) v[i] = x[i] * rad / nrm;
  } else if (p == 1.0) {
    // soft threshold; lambda from the sorted magnitudes
    Vec a(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) a[i] = std::abs(x[i]);
    Vec srt = a;
    std::sort(srt.begin(), srt.end(), std::greater<>());
    double cum = 0, lambda = 0;
    for (std::size_t k = 0; k < srt.size(); ++k) {
      cum += srt[k];
      double lam = (cum - rad) / static_cast<double>(k + 1);
      if (k + 1 == srt.size() || lam >= srt[k + 1]) {
        lambda = std::max(0.0, lam);
        break;
      }
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      double m = std::max(0.0, a[i] - lambda);
      v[i] = (x[i] >= 0) ? m : -m;
    }
  } else {
    // bisect the multiplier so the projection lands on the sphere
    double lo = 0, hi = 1;
    auto norm_at = [&](double lambda) {
      double s = 0;
      for (double c : x) {
        double w = shrink_coord(std::abs(c), lambda, p);
        s += (p == 1.5) ? w * std::sqrt(w) : std::pow(w, p);
      }
      return s;
    };
    while (norm_at(hi) > target) hi *= 2;
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      if (norm_at(mid) > target)
        lo = mid;
      else
        hi = mid;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      double w = shrink_coord(std::abs(x[i]), hi, p);
      v[i] = (x[i] >= 0) ? w : -w;
    }
  }
  double d2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += sqr(x[i] - v[i]);
  if (proj) *proj = std::move(v);
  return std::sqrt(d2);
}

bool in_minkowski_sum(const std::vector<Vec>& x, double r, double p) {
  if (r < 0) return false;
  Vec flat = flatten(x);
  double d = dist_to_lp_ball(flat, p, std::pow(r, 1.0 / p));
  return d <= std::sqrt(r) + 1e-9;
}

}  // namespace conclab
