// conclab: discrete transport / entropy-rate / concentration laboratory CLI.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "conclab/concentration.hpp"
#include "conclab/functionals.hpp"
#include "conclab/measure.hpp"
#include "conclab/rates.hpp"
#include "conclab/transport.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace conclab;

namespace {

// ---- exit-code plumbing ----------------------------------------------------

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfigInvalid = 2;
constexpr int kExitInputMissing = 3;

struct InputMissingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- formatting ------------------------------------------------------------

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string timestamp_utc() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::vector<double> parse_grid(const std::string& s) {
  double a = 0, b = 0, step = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(s);
  if (!(in >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0 || b < a)
    throw CLI::ValidationError("grid", "expected a:b:step with step > 0, b >= a");
  std::vector<double> out;
  for (double v = a; v <= b + 1e-12; v += step) out.push_back(v);
  return out;
}

DiscreteMeasure load_measure_checked(const std::string& path) {
  if (!fs::exists(path)) throw InputMissingError("measure file not found: " + path);
  return load_measure_csv(path, &std::cerr);
}

// ---- summary envelope ------------------------------------------------------

struct Summary {
  std::string command;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, bool>> checks;
  std::map<std::string, double> metrics;
  json extra = json::object();

  bool all_pass() const {
    for (const auto& [name, ok] : checks)
      if (!ok) return false;
    return true;
  }

  void write(const fs::path& dir) const {
    json j;
    j["command"] = command;
    j["seed"] = seed;
    j["pass"] = all_pass();
    j["checks"] = json::array();
    for (const auto& [name, ok] : checks) j["checks"].push_back({{"name", name}, {"pass", ok}});
    j["metrics"] = json::object();
    for (const auto& [k, v] : metrics) j["metrics"][k] = v;
    j["metadata"] = {{"timestamp", timestamp_utc()}, {"threads", worker_count()}};
    for (auto& [k, v] : extra.items()) j[k] = v;
    fs::create_directories(dir);
    std::ofstream out(dir / "summary.json");
    out << j.dump(2) << "\n";
  }
};

void write_plot(const fs::path& dir, const std::string& name, const std::vector<double>& x,
                const std::vector<double>& y) {
  fs::create_directories(dir);
  std::ofstream out(dir / (name + ".dat"));
  for (std::size_t i = 0; i < x.size(); ++i) out << fmt17(x[i]) << " " << fmt17(y[i]) << "\n";
}

// ---- subcommand state ------------------------------------------------------

struct CommonOpts {
  std::string output_dir = ".";
  std::uint64_t seed = 20260825;
  std::string config_file;
};

// transport ------------------------------------------------------------------

struct TransportOpts : CommonOpts {
  std::string file_a, file_b, cost = "quadratic", plan_csv;
};

int run_transport(const TransportOpts& o) {
  CostSpec cost = parse_cost(o.cost);
  DiscreteMeasure a = load_measure_checked(o.file_a);
  DiscreteMeasure b = load_measure_checked(o.file_b);
  CouplingPlan plan = solve_general(a, b, cost);
  plan.validate(a.weights, b.weights, cost);

  Summary s;
  s.command = "transport";
  s.seed = o.seed;
  s.metrics["cost"] = plan.total_cost;
  s.metrics["plan_nnz"] = static_cast<double>(plan.entries.size());
  s.extra["certificate"] = plan.certificate == Certificate::Permutation ? "permutation"
                                                                        : "basic-feasible";
  s.checks.emplace_back("plan-feasible", true);
  if (!o.plan_csv.empty()) {
    std::ofstream out(o.plan_csv);
    out << "i,j,mass\n";
    for (const auto& e : plan.entries)
      out << e.i << "," << e.j << "," << fmt17(e.mass) << "\n";
  }
  s.write(o.output_dir);
  return s.all_pass() ? kExitOk : kExitCheckFailed;
}

// rate -----------------------------------------------------------------------

struct RateOpts : CommonOpts {
  std::string measure, cost = "quadratic", t_grid = "0.05:0.5:0.05", method = "optimize";
  bool root = false;
  double oracle_res = 1e-3;
};

int run_rate(const RateOpts& o) {
  CostSpec cost = parse_cost(o.cost);
  DiscreteMeasure mu = load_measure_checked(o.measure);
  std::vector<double> ts = parse_grid(o.t_grid);
  if (o.method != "optimize" && o.method != "oracle" && o.method != "both")
    throw CLI::ValidationError("--method", "must be optimize, oracle, or both");
  ThresholdSpec spec = o.root ? ThresholdSpec{cost, true} : ThresholdSpec::raw(cost);

  RateCurve curve;
  if (o.method == "oracle") {
    curve.method = "oracle";
    for (double t : ts) {
      OracleResult r = rate_function_oracle(mu, spec, t, o.oracle_res);
      curve.thresholds.push_back(t);
      curve.rates.push_back(r.value);
    }
  } else {
    curve = compute_rate_curve(mu, spec, ts, o.method == "both", o.oracle_res);
  }

  fs::path dir(o.output_dir);
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "curve.csv");
    out << "t,rate" << (curve.gap_to_oracle.empty() ? "" : ",gap_to_oracle") << "\n";
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
      out << fmt17(curve.thresholds[i]) << "," << fmt17(curve.rates[i]);
      if (!curve.gap_to_oracle.empty()) out << "," << fmt17(curve.gap_to_oracle[i]);
      out << "\n";
    }
  }
  write_plot(dir, "plot_rate", curve.thresholds, curve.rates);

  bool monotone = true;
  for (std::size_t i = 1; i < curve.rates.size(); ++i)
    if (curve.rates[i] < curve.rates[i - 1] - 1e-9) monotone = false;
  double worst_gap = 0;
  for (double g : curve.gap_to_oracle) worst_gap = std::max(worst_gap, std::abs(g));

  Summary s;
  s.command = "rate";
  s.seed = o.seed;
  s.metrics["worst_gap"] = worst_gap;
  s.metrics["points"] = static_cast<double>(curve.thresholds.size());
  s.checks.emplace_back("rate-monotone", monotone);
  if (!curve.gap_to_oracle.empty())
    s.checks.emplace_back("oracle-gap", worst_gap <= 10 * o.oracle_res + 1e-6);
  s.write(dir);
  return s.all_pass() ? kExitOk : kExitCheckFailed;
}

// sanov-check ----------------------------------------------------------------

int run_sanov(const CommonOpts& o) {
  struct Config {
    DiscreteMeasure mu, nu;
    int n;
    double t, p;
  };
  DiscreteMeasure two = make_measure_1d({0, 1}, {0.5, 0.5});
  DiscreteMeasure two_skew = make_measure_1d({0, 1}, {0.7, 0.3});
  DiscreteMeasure three = make_measure_1d({0, 0.5, 1}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  std::vector<Config> battery = {
      {two, make_measure_1d({0, 1}, {0.3, 0.7}), 6, 0.15, 1},
      {two, make_measure_1d({0, 1}, {0.2, 0.8}), 8, 0.2, 1},
      {two_skew, make_measure_1d({0, 1}, {0.5, 0.5}), 6, 0.15, 2},
      {three, make_measure_1d({0, 0.5, 1}, {0.5, 0.3, 0.2}), 5, 0.15, 2},
      {three, make_measure_1d({0, 0.5, 1}, {0.2, 0.2, 0.6}), 6, 0.2, 1},
  };
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& c : battery) {
    DsReport rep = ds_lower_bound_check(c.mu, c.nu, c.n, c.t, c.p);
    worst = std::min(worst, rep.slack);
  }
  Summary s;
  s.command = "sanov-check";
  s.seed = o.seed;
  s.metrics["worst_slack"] = worst;
  s.metrics["battery_size"] = static_cast<double>(battery.size());
  s.checks.emplace_back("ds-lower-bound", worst >= -1e-12);
  s.write(o.output_dir);
  return s.all_pass() ? kExitOk : kExitCheckFailed;
}

// concentrate ----------------------------------------------------------------

struct ConcentrateOpts : CommonOpts {
  std::string measure, cost = "quadratic", family = "sublevel", r_grid = "0.25:3:0.25";
  int n = 10;
  long trials = 10000;
};

int run_concentrate(const ConcentrateOpts& o) {
  DiscreteMeasure mu = load_measure_checked(o.measure);
  CostSpec cost = parse_cost(o.cost);
  std::vector<double> rs = parse_grid(o.r_grid);
  if (o.family != "random" && o.family != "sublevel")
    throw CLI::ValidationError("--family", "must be random or sublevel");

  StreamId stream{o.seed, 7};
  std::vector<double> t_list = {0.02, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45};
  ConstantEstimate ce = best_constant(mu, CostSpec::power(1.0), true, t_list, 200, stream.sub(1));
  double C = std::max(ce.from_minimizers, ce.from_tilts);
  MartonProfile bound = marton_profile(C);

  EnlargeSpec enlarge;
  switch (cost.kind) {
    case CostKind::Quadratic:
    case CostKind::PowerP: enlarge = {EnlargeKind::Rho2, 2.0}; break;
    case CostKind::AlphaP: enlarge = {EnlargeKind::TwoLevelAlpha, cost.p}; break;
    case CostKind::SG: enlarge = {EnlargeKind::D21, 1.0}; break;
  }
  bool exponential = enlarge.kind != EnlargeKind::Rho2;
  if (exponential) bound = {1.0 / (2.0 * C), 2.0, 0.0};

  std::vector<double> observed(rs.size()), guaranteed(rs.size()), lo(rs.size()), hi(rs.size());
  long violations = 0;
  bool exact = std::pow(static_cast<double>(mu.size()), o.n) <= ProductSpec::kMaterializeCap;
  if (exact) {
    SetFamily fam = o.family == "random" ? SetFamily::RandomHalf : SetFamily::SublevelFn;
    std::size_t sets = o.family == "random" ? static_cast<std::size_t>(std::min<long>(o.trials, 1000)) : 16;
    ExactConcentrationResult res =
        exact_product_concentration(mu, o.n, enlarge, fam, sets, rs, bound, stream.sub(2));
    observed = res.profile.observed;
    guaranteed = res.profile.guaranteed;
    lo = observed;
    hi = observed;
    violations = res.violations;
  } else {
    if (o.family == "random")
      throw CLI::ValidationError("--family", "random family needs an enumerable product space");
    TailProfile prof = mc_concentration_profile(mu, o.n, 2.0, rs, o.trials, stream.sub(3));
    for (std::size_t i = 0; i < rs.size(); ++i) {
      observed[i] = 1.0 - prof.tails[i].p_hat;
      lo[i] = 1.0 - prof.tails[i].ci_hi;
      hi[i] = 1.0 - prof.tails[i].ci_lo;
      double e = exponential ? bound.a * rs[i] : bound.a * sqr(std::max(rs[i] - bound.r0, 0.0));
      guaranteed[i] = std::max(0.0, 1.0 - bound.b * std::exp(-e));
      if (hi[i] < guaranteed[i] - 1e-12) ++violations;
    }
  }

  fs::path dir(o.output_dir);
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "profile.csv");
    out << "r,observed,guaranteed,ci_low,ci_high\n";
    for (std::size_t i = 0; i < rs.size(); ++i)
      out << fmt17(rs[i]) << "," << fmt17(observed[i]) << "," << fmt17(guaranteed[i]) << ","
          << fmt17(lo[i]) << "," << fmt17(hi[i]) << "\n";
  }
  write_plot(dir, "plot_profile", rs, observed);

  Summary s;
  s.command = "concentrate";
  s.seed = o.seed;
  s.metrics["constant"] = C;
  s.metrics["violations"] = static_cast<double>(violations);
  try {
    std::vector<double> tails, ws;
    for (double v : observed) {
      tails.push_back(1.0 - v);
      ws.push_back(std::max(1.0 - v, 1e-12));
    }
    GaussianFit fit = fit_tail_profile(rs, tails, ws, exponential);
    s.metrics["a"] = fit.a;
    s.metrics["b"] = fit.b;
    s.metrics["r0"] = fit.r0;
  } catch (const Error&) {
    // all tails censored: nothing to fit, profile is saturated
    s.metrics["a"] = 0;
    s.metrics["b"] = 0;
    s.metrics["r0"] = 0;
  }
  s.extra["mode"] = exact ? "exact" : "mc";
  s.checks.emplace_back("profile-bound", violations == 0);
  s.write(dir);
  return s.all_pass() ? kExitOk : kExitCheckFailed;
}

// dual-check -----------------------------------------------------------------

struct DualOpts : CommonOpts {
  std::string measure, cost = "quadratic";
  double scale = 0.5;
  int count = 100;
};

int run_dual(const DualOpts& o) {
  DiscreteMeasure mu = load_measure_checked(o.measure);
  CostSpec cost = parse_cost(o.cost);
  if (o.scale <= 0) throw CLI::ValidationError("--scale", "must be positive");
  StreamId stream{o.seed, 9};
  double worst_bg = 0, worst_tau = 0;
  std::vector<double> bad_f;
  for (int k = 0; k < o.count; ++k) {
    Prng pr(stream.sub(k));
    FunctionOnSupport f(mu.size());
    for (auto& v : f) v = pr.uniform(-1.0, 1.0);
    DualCheck bg = check_bg_dual(mu, cost, o.scale, f);
    DualCheck tau = check_tau(mu, cost, o.scale, f);
    double rbg = bg.lhs / bg.rhs;
    double rtau = bg.rhs > 0 ? tau.lhs : 0;  // tau lhs is already the product vs 1
    if (rbg > worst_bg) {
      worst_bg = rbg;
      if (rbg > 1 + 1e-9) bad_f = f;
    }
    worst_tau = std::max(worst_tau, rtau);
  }
  Summary s;
  s.command = "dual-check";
  s.seed = o.seed;
  s.metrics["worst_bg_ratio"] = worst_bg;
  s.metrics["worst_tau_product"] = worst_tau;
  s.metrics["count"] = o.count;
  s.checks.emplace_back("bg-dual", worst_bg <= 1 + 1e-9);
  s.checks.emplace_back("tau-property", worst_tau <= 1 + 1e-9);
  if (!bad_f.empty()) s.extra["violating_f"] = bad_f;
  s.write(o.output_dir);
  return s.all_pass() ? kExitOk : kExitCheckFailed;
}

// equivalence ----------------------------------------------------------------

struct EquivalenceOpts : CommonOpts {
  std::string measure, direction = "both";
  std::vector<int> n_list{20, 40, 80};
  long trials = 100000;
  double slack = 0.30;
};

int run_equivalence(const EquivalenceOpts& o) {
  DiscreteMeasure mu = load_measure_checked(o.measure);
  Direction dir;
  if (o.direction == "t2-to-concentration")
    dir = Direction::T2ToConcentration;
  else if (o.direction == "concentration-to-t2")
    dir = Direction::ConcentrationToT2;
  else if (o.direction == "both")
    dir = Direction::Both;
  else
    throw CLI::ValidationError("--direction",
                               "must be t2-to-concentration, concentration-to-t2, or both");
  EquivalenceConfig cfg;
  cfg.n_list = o.n_list;
  cfg.trials = o.trials;
  cfg.slack = o.slack;
  cfg.stream = StreamId{o.seed, 11};
  EquivalenceReport rep = equivalence_experiment(mu, dir, cfg);

  fs::path out(o.output_dir);
  std::vector<double> ns(o.n_list.begin(), o.n_list.end());
  write_plot(out, "plot_a_fit", ns, rep.a_fit_per_n);

  Summary s;
  s.command = "equivalence";
  s.seed = o.seed;
  s.metrics["c_certified"] = rep.c_t2;
  s.metrics["a_marton"] = rep.a_marton;
  s.metrics["a_fit"] = rep.a_fit;
  s.metrics["c_implied"] = rep.c_implied;
  s.metrics["agreement"] = rep.agreement;
  s.metrics["profile_violations"] = static_cast<double>(rep.profile_violations);
  if (dir != Direction::ConcentrationToT2)
    s.checks.emplace_back("profile-bound", rep.profile_violations == 0);
  if (dir != Direction::T2ToConcentration)
    s.checks.emplace_back("constant-agreement", rep.agreement <= o.slack);
  s.write(out);
  return s.all_pass() ? kExitOk : kExitCheckFailed;
}

// two-level ------------------------------------------------------------------

struct TwoLevelOpts : CommonOpts {
  std::string measure, r_grid = "0.05:1:0.05";
  double p = 1.0;
  int n = 10;
  long trials = 16;
};

int run_two_level(const TwoLevelOpts& o) {
  DiscreteMeasure mu = load_measure_checked(o.measure);
  if (o.p < 1 || o.p > 2) throw CLI::ValidationError("--p", "p must lie in [1,2]");
  std::vector<double> rs = parse_grid(o.r_grid);
  TwoLevelReport rep = two_level_experiment(mu, o.p, o.n, rs, o.trials, StreamId{o.seed, 13});

  Summary s;
  s.command = "two-level";
  s.seed = o.seed;
  s.metrics["a_fit"] = rep.a_fit;
  s.metrics["b_fit"] = rep.b_fit;
  s.metrics["c_chain"] = rep.c_chain;
  s.metrics["c_certified"] = rep.c_certified;
  s.checks.emplace_back("chain-constant", rep.chain_violations == 0);
  s.checks.emplace_back("profile-bound", rep.profile_violations == 0);
  s.write(o.output_dir);
  return s.all_pass() ? kExitOk : kExitCheckFailed;
}

// report ---------------------------------------------------------------------

struct ReportOpts : CommonOpts {
  std::vector<std::string> run_dirs;
};

int run_report(const ReportOpts& o) {
  fs::path out(o.output_dir);
  fs::create_directories(out);
  std::ofstream md(out / "report.md");
  std::ofstream csv(out / "report.csv");
  md << "# conclab run report\n\n";
  csv << "run,command,check,pass\n";
  bool all_pass = true;
  if (!o.run_dirs.empty()) {
    md << "| run | command | check | pass |\n|---|---|---|---|\n";
    for (const auto& d : o.run_dirs) {
      fs::path sp = fs::path(d) / "summary.json";
      if (!fs::exists(sp)) throw InputMissingError("no summary.json in " + d);
      std::ifstream in(sp);
      json j = json::parse(in);
      for (const auto& c : j.at("checks")) {
        bool ok = c.at("pass").get<bool>();
        all_pass = all_pass && ok;
        md << "| " << d << " | " << j.at("command").get<std::string>() << " | "
           << c.at("name").get<std::string>() << " | " << (ok ? "pass" : "FAIL") << " |\n";
        csv << d << "," << j.at("command").get<std::string>() << ","
            << c.at("name").get<std::string>() << "," << (ok ? "1" : "0") << "\n";
      }
    }
  }
  return all_pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conclab: discrete transport, entropy rates, and concentration profiles"};
  app.require_subcommand(1);

  auto add_common = [](CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("-o,--output-dir", o.output_dir, "output directory");
    cmd->add_option("--seed", o.seed, "64-bit random seed");
    cmd->add_option("--config", o.config_file, "key = value config file; flags override");
  };

  TransportOpts to;
  auto* ct = app.add_subcommand("transport", "optimal transport between two measures");
  ct->add_option("a", to.file_a, "first measure CSV")->required();
  ct->add_option("b", to.file_b, "second measure CSV")->required();
  ct->add_option("--cost", to.cost, "cost spec: quadratic | power:p=<f> | alpha:p=<f> | sg");
  ct->add_option("--plan", to.plan_csv, "write the plan as CSV (i, j, mass)");
  add_common(ct, to);

  RateOpts ro;
  auto* cr = app.add_subcommand("rate", "entropy rate function over a threshold grid");
  cr->add_option("--measure", ro.measure, "reference measure CSV")->required();
  cr->add_option("--cost", ro.cost, "cost spec string");
  cr->add_option("--t-grid", ro.t_grid, "threshold grid a:b:step");
  cr->add_option("--method", ro.method, "optimize | oracle | both");
  cr->add_option("--oracle-res", ro.oracle_res, "oracle grid resolution");
  cr->add_flag("--root", ro.root, "threshold on W_p instead of raw transport cost");
  add_common(cr, ro);

  CommonOpts so;
  auto* cs = app.add_subcommand("sanov-check", "change-of-measure lower-bound battery");
  add_common(cs, so);

  ConcentrateOpts co;
  auto* cc = app.add_subcommand("concentrate", "product-measure concentration profile");
  cc->add_option("--measure", co.measure, "base measure CSV")->required();
  cc->add_option("--n", co.n, "number of factors")->required();
  cc->add_option("--cost", co.cost, "cost spec selecting the enlargement kind");
  cc->add_option("--family", co.family, "random | sublevel");
  cc->add_option("--r-grid", co.r_grid, "radius grid a:b:step");
  cc->add_option("--trials", co.trials, "MC trials (or random-set count when exact)");
  add_common(cc, co);

  DualOpts duo;
  auto* cd = app.add_subcommand("dual-check", "inf-convolution dual inequalities");
  cd->add_option("--measure", duo.measure, "measure CSV")->required();
  cd->add_option("--cost", duo.cost, "cost spec string");
  cd->add_option("--scale", duo.scale, "cost scale (1/C)");
  cd->add_option("--count", duo.count, "number of random test functions");
  add_common(cd, duo);

  EquivalenceOpts eo;
  auto* ce = app.add_subcommand("equivalence", "transport-inequality / concentration round trip");
  ce->add_option("--measure", eo.measure, "measure CSV")->required();
  ce->add_option("--direction", eo.direction,
                 "t2-to-concentration | concentration-to-t2 | both");
  ce->add_option("--n-list", eo.n_list, "product sizes")->delimiter(',');
  ce->add_option("--trials", eo.trials, "MC trials per n");
  ce->add_option("--slack", eo.slack, "agreement slack");
  add_common(ce, eo);

  TwoLevelOpts tlo;
  auto* ctl = app.add_subcommand("two-level", "two-level cost concentration experiment");
  ctl->add_option("--measure", tlo.measure, "measure CSV")->required();
  ctl->add_option("--p", tlo.p, "two-level exponent in [1,2]");
  ctl->add_option("--n", tlo.n, "number of factors");
  ctl->add_option("--r-grid", tlo.r_grid, "radius grid a:b:step");
  ctl->add_option("--trials", tlo.trials, "set count for the enumerated family");
  add_common(ctl, tlo);

  ReportOpts rpo;
  auto* crp = app.add_subcommand("report", "consolidate run summaries");
  crp->add_option("dirs", rpo.run_dirs, "run directories containing summary.json");
  add_common(crp, rpo);

  // Expand --config files into flags up front; explicit flags win because
  // config-derived tokens are only added for options absent from the line.
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    std::string cfg_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size())
        cfg_path = args[i + 1];
      else if (args[i].rfind("--config=", 0) == 0)
        cfg_path = args[i].substr(9);
    }
    if (!cfg_path.empty()) {
      std::ifstream in(cfg_path);
      if (!in) throw InputMissingError("config file not found: " + cfg_path);
      auto trim = [](std::string s) {
        s.erase(0, s.find_first_not_of(" \t"));
        s.erase(s.find_last_not_of(" \t\r") + 1);
        return s;
      };
      std::string line;
      while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
          throw CLI::ValidationError("config", "expected key = value, got: " + line);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        std::string flag = "--" + key;
        bool present = false;
        for (const auto& a : args)
          if (a == flag || a.rfind(flag + "=", 0) == 0) present = true;
        if (present) continue;
        if (value == "true") {
          args.push_back(flag);
        } else if (value != "false") {
          args.push_back(flag);
          args.push_back(value);
        }
      }
    }
  } catch (const InputMissingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputMissing;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigInvalid;
  }

  try {
    std::reverse(args.begin(), args.end());  // CLI11's vector overload convention
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigInvalid;
  }

  try {
    if (ct->parsed()) return run_transport(to);
    if (cr->parsed()) return run_rate(ro);
    if (cs->parsed()) return run_sanov(so);
    if (cc->parsed()) return run_concentrate(co);
    if (cd->parsed()) return run_dual(duo);
    if (ce->parsed()) return run_equivalence(eo);
    if (ctl->parsed()) return run_two_level(tlo);
    if (crp->parsed()) return run_report(rpo);
  } catch (const InputMissingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputMissing;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigInvalid;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigInvalid;
  }
  return kExitConfigInvalid;
}
