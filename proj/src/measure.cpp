#include "conclab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace conclab {

int worker_count() {
  if (const char* env = std::getenv("CONC_LAB_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

void parallel_for(std::int64_t count, const std::function<void(std::int64_t, std::int64_t)>& chunk_fn) {
  int workers = worker_count();
  if (workers <= 1 || count < 2) {
    if (count > 0) chunk_fn(0, count);
    return;
  }
  std::vector<std::thread> pool;
  std::int64_t chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    std::int64_t lo = w * chunk;
    std::int64_t hi = std::min<std::int64_t>(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([=] { chunk_fn(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

Vec DiscreteMeasure::mean() const {
  Vec m(dim, 0.0);
  for (std::size_t i = 0; i < points.size(); ++i)
    for (int j = 0; j < dim; ++j) m[j] += weights[i] * points[i][j];
  return m;
}

double DiscreteMeasure::total_mass() const {
  double s = 0;
  for (double w : weights) s += w;
  return s;
}

double ProductSpec::outcome_count() const {
  return std::pow(static_cast<double>(base.size()), n);
}

DiscreteMeasure make_measure(std::vector<Vec> points, std::vector<double> weights) {
  if (points.empty()) throw EmptySupport("make_measure: empty support");
  if (points.size() != weights.size())
    throw DimensionMismatch("make_measure: points/weights length mismatch");
  const std::size_t d = points[0].size();
  if (d == 0) throw DimensionMismatch("make_measure: zero-dimensional points");
  double sum = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != d)
      throw DimensionMismatch("make_measure: inconsistent point dimensions");
    if (weights[i] < 0) throw NegativeWeight("make_measure: negative weight");
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > kWeightSumTol)
    throw NegativeWeight("make_measure: weights sum to " + std::to_string(sum) +
                         ", beyond tolerance " + std::to_string(kWeightSumTol));

  // Merge bitwise-equal points, keep support sorted.
  std::map<Vec, double> merged;
  for (std::size_t i = 0; i < points.size(); ++i) merged[points[i]] += weights[i];

  DiscreteMeasure mu;
  mu.dim = static_cast<int>(d);
  mu.points.reserve(merged.size());
  mu.weights.reserve(merged.size());
  for (auto& [p, w] : merged) {
    if (w == 0) continue;  // zero atoms carry no mass and would blur support identity
    mu.points.push_back(p);
    mu.weights.push_back(w / sum);
  }
  if (mu.points.empty()) throw EmptySupport("make_measure: all weights zero");
  return mu;
}

DiscreteMeasure make_measure_1d(const std::vector<double>& xs, const std::vector<double>& weights) {
  std::vector<Vec> pts;
  pts.reserve(xs.size());
  for (double x : xs) pts.push_back({x});
  return make_measure(std::move(pts), weights);
}

DiscreteMeasure point_mass(const Vec& x) {
  return make_measure({x}, {1.0});
}

DiscreteMeasure uniform_on(const std::vector<Vec>& points) {
  return make_measure(points, std::vector<double>(points.size(), 1.0 / points.size()));
}

bool same_measure(const DiscreteMeasure& a, const DiscreteMeasure& b, double tol) {
  if (a.dim != b.dim || a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.points[i] != b.points[i]) return false;
    if (std::abs(a.weights[i] - b.weights[i]) > tol) return false;
  }
  return true;
}

DiscreteMeasure EmpiricalMeasure::to_measure() const {
  std::map<Vec, double> merged;
  for (const auto& x : sample) merged[x] += 1.0 / static_cast<double>(sample.size());
  DiscreteMeasure mu;
  mu.dim = dim;
  for (auto& [p, w] : merged) {
    mu.points.push_back(p);
    mu.weights.push_back(w);
  }
  return mu;
}

EmpiricalMeasure sample_empirical(const DiscreteMeasure& mu, int n, StreamId stream) {
  if (n < 1) throw Error("sample_empirical: n must be >= 1");
  std::vector<double> cdf(mu.size());
  double acc = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    acc += mu.weights[i];
    cdf[i] = acc;
  }
  cdf.back() = 1.0;

  Prng rng(stream);
  EmpiricalMeasure em;
  em.dim = mu.dim;
  em.sample.reserve(n);
  for (int k = 0; k < n; ++k) {
    double u = rng.u01();
    std::size_t idx = std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
    if (idx >= mu.size()) idx = mu.size() - 1;
    em.sample.push_back(mu.points[idx]);
  }
  return em;
}

DiscreteMeasure discretize_gaussian(double grid_halfwidth, double step) {
  if (grid_halfwidth <= 0 || step <= 0)
    throw Error("discretize_gaussian: halfwidth and step must be positive");
  auto count = static_cast<std::size_t>(std::llround(2.0 * grid_halfwidth / step)) + 1;
  if (count > kSupportCap)
    throw GridTooLarge("discretize_gaussian: grid of " + std::to_string(count) +
                       " nodes exceeds support cap");
  std::vector<double> xs(count), ws(count);
  double sum = 0;
  for (std::size_t i = 0; i < count; ++i) {
    // Symmetric node placement: node i and node count-1-i are exact negatives.
    double x = (static_cast<double>(i) - static_cast<double>(count - 1) / 2.0) * step;
    xs[i] = x;
    ws[i] = std::exp(-0.5 * x * x);
    sum += ws[i];
  }
  for (double& w : ws) w /= sum;
  return make_measure_1d(xs, ws);
}

DiscreteMeasure translate(const DiscreteMeasure& mu, const Vec& shift) {
  if (static_cast<int>(shift.size()) != mu.dim)
    throw DimensionMismatch("translate: shift dimension mismatch");
  DiscreteMeasure out = mu;
  for (auto& p : out.points)
    for (int j = 0; j < mu.dim; ++j) p[j] += shift[j];
  // Translation is injective, so no re-merge is needed; re-sort to keep the
  // representation canonical (negative shifts preserve order anyway).
  return make_measure(out.points, out.weights);
}

DiscreteMeasure tilt(const DiscreteMeasure& mu, const Vec& lambda) {
  if (static_cast<int>(lambda.size()) != mu.dim)
    throw DimensionMismatch("tilt: lambda dimension mismatch");
  DiscreteMeasure out = mu;
  // Stabilized: subtract max exponent before exponentiating.
  std::vector<double> expo(mu.size());
  double mx = -1e300;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    double s = 0;
    for (int j = 0; j < mu.dim; ++j) s += lambda[j] * mu.points[i][j];
    expo[i] = s;
    mx = std::max(mx, s);
  }
  double z = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    out.weights[i] = mu.weights[i] * std::exp(expo[i] - mx);
    z += out.weights[i];
  }
  for (double& w : out.weights) w /= z;
  return out;
}

DiscreteMeasure pushforward_omega(const DiscreteMeasure& mu) {
  auto omega = [](double u) {
    double m = std::max(std::abs(u), u * u);
    return u >= 0 ? m : -m;
  };
  std::vector<Vec> pts = mu.points;
  for (auto& p : pts)
    for (double& c : p) c = omega(c);
  return make_measure(std::move(pts), mu.weights);
}

DiscreteMeasure load_measure_csv(const std::string& path, std::ostream* warn) {
  std::ifstream in(path);
  if (!in) throw Error("load_measure_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error("load_measure_csv: empty file " + path);
  // header "x1,...,xd,weight"
  int cols = 1 + static_cast<int>(std::count(line.begin(), line.end(), ','));
  int d = cols - 1;
  if (d < 1) throw Error("load_measure_csv: bad header in " + path);

  std::vector<Vec> pts;
  std::vector<double> ws;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Vec p;
    while (std::getline(ss, cell, ',')) p.push_back(std::stod(cell));
    if (static_cast<int>(p.size()) != cols)
      throw Error("load_measure_csv: row with " + std::to_string(p.size()) +
                  " fields, expected " + std::to_string(cols));
    ws.push_back(p.back());
    p.pop_back();
    pts.push_back(std::move(p));
  }
  if (pts.empty()) throw EmptySupport("load_measure_csv: no atoms in " + path);
  double sum = 0;
  for (double w : ws) {
    if (w < 0) throw NegativeWeight("load_measure_csv: negative weight in " + path);
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    std::ostream& os = warn ? *warn : std::cerr;
    os << "warning: weights in " << path << " sum to " << sum << "; renormalizing\n";
  }
  for (double& w : ws) w /= sum;
  return make_measure(std::move(pts), std::move(ws));
}

void save_measure_csv(const DiscreteMeasure& mu, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("save_measure_csv: cannot open " + path);
  out.precision(17);
  for (int j = 1; j <= mu.dim; ++j) out << "x" << j << ",";
  out << "weight\n";
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (int j = 0; j < mu.dim; ++j) out << mu.points[i][j] << ",";
    out << mu.weights[i] << "\n";
  }
}

}  // namespace conclab
