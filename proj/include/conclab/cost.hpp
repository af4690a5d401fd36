#pragma once

#include <string>
#include <vector>

#include "conclab/common.hpp"

namespace conclab {

// Ground costs on R^d x R^d.
//   quadratic : |x-y|_2^2
//   power_p   : |x-y|_2^p                  (p >= 1)
//   alpha_p   : sum_j alpha_p(x_j - y_j)   (p in [1,2], coordinatewise)
//   sg        : alpha_1(|x-y|_2)
// Product spaces extend additively over factors.
enum class CostKind { Quadratic, PowerP, AlphaP, SG };

struct CostSpec {
  CostKind kind = CostKind::Quadratic;
  double p = 2.0;

  static CostSpec quadratic() { return {CostKind::Quadratic, 2.0}; }
  static CostSpec power(double p) { return {CostKind::PowerP, p}; }
  static CostSpec alpha(double p) { return {CostKind::AlphaP, p}; }
  static CostSpec sg() { return {CostKind::SG, 1.0}; }
};

// alpha_p(u) = min(u^2, |u|^p)
double alpha_p(double u, double p);

double euclid(const Vec& x, const Vec& y);
double eval_cost(const CostSpec& spec, const Vec& x, const Vec& y);

// l_p aggregate of coordinate Euclidean distances over an n-tuple.
double rho_p_n(const std::vector<Vec>& x, const std::vector<Vec>& y, double p);

// Additive extension of a ground cost over an n-tuple of factors.
double product_cost(const CostSpec& spec, const std::vector<Vec>& x, const std::vector<Vec>& y);

// Serialization grammar: quadratic | power:p=<f> | alpha:p=<f> | sg
CostSpec parse_cost(const std::string& s);
std::string format_cost(const CostSpec& spec);

// ---- two-level set geometry ------------------------------------------------
//
// Point tuples live in (R^d)^n, flattened to nd coordinates where a ball of
// l_p type is meant (matches the double sum in B_{2,p}).

struct TwoLevelBallSpec {
  int n = 1;
  int d = 1;
  double p = 1.0;   // in [1,2]
  double r = 0.0;
};

// sum_{i,j} alpha_p(x^i_j) <= r
bool in_two_level_ball(const std::vector<Vec>& x, const TwoLevelBallSpec& spec);

// sum_i alpha_1(|x^i|_2) <= r
bool in_d21_ball(const std::vector<Vec>& x, double r);

// Membership in sqrt(r) B_2 + r^{1/p} B_p on the flattened coordinates,
// decided by projecting onto the l_p ball (tolerance 1e-9 certificate).
bool in_minkowski_sum(const std::vector<Vec>& x, double r, double p);

// Euclidean distance from flat vector v to the l_p ball of radius rad
// (p in [1,2]); also returns the projection if proj != nullptr.
double dist_to_lp_ball(const Vec& v, double p, double rad, Vec* proj = nullptr);

Vec flatten(const std::vector<Vec>& x);

}  // namespace conclab
