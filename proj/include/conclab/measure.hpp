#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "conclab/common.hpp"
#include "conclab/rng.hpp"

namespace conclab {

// Finite-support probability measure on R^d.  Support points are kept sorted
// lexicographically and duplicate points (bitwise equality) are merged at
// construction, so two equal measures have identical representations.
struct DiscreteMeasure {
  std::vector<Vec> points;
  std::vector<double> weights;
  int dim = 0;

  std::size_t size() const { return points.size(); }
  Vec mean() const;
  double total_mass() const;
};

// n atoms of weight 1/n each; duplicates kept distinct (the assignment solver
// needs the permutation structure).
struct EmpiricalMeasure {
  std::vector<Vec> sample;
  int dim = 0;

  std::size_t n() const { return sample.size(); }
  DiscreteMeasure to_measure() const;  // merges duplicates to weight k/n
};

// mu^n described implicitly; materialization only under the cap.
struct ProductSpec {
  DiscreteMeasure base;
  int n = 1;
  static constexpr double kMaterializeCap = 2e6;

  double outcome_count() const;
};

inline constexpr std::size_t kSupportCap = 2'000'000;
inline constexpr double kWeightSumTol = 1e-9;

DiscreteMeasure make_measure(std::vector<Vec> points, std::vector<double> weights);

// Convenience for 1-d supports.
DiscreteMeasure make_measure_1d(const std::vector<double>& xs, const std::vector<double>& weights);
DiscreteMeasure point_mass(const Vec& x);
DiscreteMeasure uniform_on(const std::vector<Vec>& points);

bool same_measure(const DiscreteMeasure& a, const DiscreteMeasure& b, double tol = 1e-12);

EmpiricalMeasure sample_empirical(const DiscreteMeasure& mu, int n, StreamId stream);

// Uniform grid on [-halfwidth, halfwidth] with weights proportional to the
// standard normal density at the grid nodes.
DiscreteMeasure discretize_gaussian(double grid_halfwidth, double step);

DiscreteMeasure translate(const DiscreteMeasure& mu, const Vec& shift);

// Reweight by exp(<lambda, x>) and renormalize; support unchanged.
DiscreteMeasure tilt(const DiscreteMeasure& mu, const Vec& lambda);

// Coordinatewise image under omega(u) = sign(u) * max(|u|, u^2).
DiscreteMeasure pushforward_omega(const DiscreteMeasure& mu);

// CSV format: header "x1,...,xd,weight", one atom per row.  Weights are
// renormalized on load; deviation beyond 1e-6 emits a warning on the given
// stream (stderr by default).
DiscreteMeasure load_measure_csv(const std::string& path, std::ostream* warn = nullptr);
void save_measure_csv(const DiscreteMeasure& mu, const std::string& path);

}  // namespace conclab
