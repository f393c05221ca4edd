#pragma once

// Command-line driver:
//   ddw <verify-lemmas|build-barrier|verify-barrier|simulate|compare|transform|report>
//       --config <path> [--out <dir>] [--kind super|sub]
//
// Exit codes: 0 success, 1 failed check, 2 configuration error, 3 grid too small.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ddw/barriers.hpp"
#include "ddw/envelope.hpp"
#include "ddw/errors.hpp"
#include "ddw/io.hpp"
#include "ddw/residual.hpp"
#include "ddw/solver.hpp"
#include "ddw/transform.hpp"
#include "ddw/weights.hpp"

namespace ddw::cli {

enum ExitCode : int { kOk = 0, kFailed = 1, kConfig = 2, kGridTooSmall = 3 };

struct RunConfig {
  json raw;
  ProblemSpec problem;
  std::filesystem::path dir;
};

namespace detail {

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {"N",       "p",         "m",         "weight",  "lemmas",
                                             "barrier", "params_file", "residual", "grid",    "t_end",
                                             "t_end_t0_multiple", "cfl", "initial", "checkpoints", "comparison",
                                             "transform", "measure", "out_dir"};
  return keys;
}

inline const std::set<std::string>& section_keys() {
  static const std::set<std::string> keys = {"lemmas", "barrier", "residual", "grid", "initial", "comparison", "transform", "measure"};
  return keys;
}

inline const json& section(const RunConfig& cfg, const char* name) {
  static const json empty = json::object();
  return cfg.raw.contains(name) ? cfg.raw.at(name) : empty;
}

inline double num(const json& sec, const char* key, double fallback) {
  return ddw::detail::optional_number(sec, key, fallback, key);
}

inline int integer(const json& sec, const char* key, int fallback) {
  if (!sec.contains(key)) return fallback;
  if (!sec.at(key).is_number_integer()) throw ConfigError(std::string("field '") + key + "' must be an integer");
  return sec.at(key).get<int>();
}

inline std::string str(const json& sec, const char* key, const std::string& fallback) {
  if (!sec.contains(key)) return fallback;
  if (!sec.at(key).is_string()) throw ConfigError(std::string("field '") + key + "' must be a string");
  return sec.at(key).get<std::string>();
}

inline SlackFactors slack_from(const json& barrier) {
  SlackFactors s;
  if (barrier.contains("slack")) {
    s.enlarge = num(barrier.at("slack"), "enlarge", s.enlarge);
    s.shrink = num(barrier.at("slack"), "shrink", s.shrink);
  }
  if (!(s.enlarge > 1.0) || !(s.shrink > 0.0 && s.shrink < 1.0)) throw ConfigError("slack: need enlarge > 1 and 0 < shrink < 1");
  return s;
}

}  // namespace detail

/// Parses and schema-checks a config file; throws ConfigError on any problem.
inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  RunConfig cfg;
  try {
    cfg.raw = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!cfg.raw.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : cfg.raw.items()) {
    if (!detail::known_keys().count(key)) throw ConfigError("config: unknown field '" + key + "'");
    if (detail::section_keys().count(key) && !value.is_object()) throw ConfigError("config: '" + key + "' must be an object");
  }
  cfg.problem = problem_from_json(cfg.raw);
  cfg.dir = std::filesystem::absolute(path).parent_path();
  return cfg;
}

class Runner {
 public:
  Runner(RunConfig cfg, std::filesystem::path out_dir, std::ostream& out)
      : cfg_(std::move(cfg)), out_dir_(std::move(out_dir)), out_(out), calc_(cfg_.problem) {}

  int verify_lemmas() {
    const json& sec = detail::section(cfg_, "lemmas");
    const double lo = detail::num(sec, "lo", 1e-3);
    const double hi = detail::num(sec, "hi", 1e3);
    const int per_decade = detail::integer(sec, "per_decade", 40);
    const double tol = detail::num(sec, "tol", default_lemma_tolerance(cfg_.problem));
    const double doubling_tol = detail::num(sec, "doubling_tol", 1e-10);
    if (!(lo > 0.0) || !(hi > lo) || per_decade < 1) throw ConfigError("lemmas: need 0 < lo < hi and per_decade >= 1");
    const auto n = static_cast<std::size_t>(std::ceil(std::log10(hi / lo) * per_decade)) + 1;
    const std::vector<double> grid = log_grid(lo, hi, n);
    const LemmaReport lemmas = lemma_suite(calc_, grid, tol);
    const ValidationReport doubling = validate_doubling(cfg_.problem.weight, grid, doubling_tol);
    const bool pass = lemmas.pass && doubling.pass;
    write_json(out_dir_ / "lemma_report.json", {{"problem", problem_to_json(cfg_.problem)},
                                                {"constants", {{"eta1", calc_.eta1()}, {"eta2", calc_.eta2()}, {"c1", calc_.c1()}, {"c2", calc_.c2()}}},
                                                {"lemmas", to_json(lemmas)},
                                                {"doubling", to_json(doubling)},
                                                {"pass", pass}});
    for (const auto& r : lemmas.records)
      out_ << (r.pass ? "ok   " : "FAIL ") << r.name << " max_violation=" << r.max_violation << '\n';
    out_ << (doubling.pass ? "ok   " : "FAIL ") << "doubling derivative=" << doubling.max_derivative_violation
         << " scaling=" << doubling.max_scaling_violation << '\n';
    return pass ? kOk : kFailed;
  }

  int build_barrier(const std::string& kind_override) {
    const BarrierParams bp = construct(kind_override);
    const BarrierValidation v = validate_barrier(bp, calc_);
    write_json(out_dir_ / "barrier_params.json",
               {{"problem", problem_to_json(cfg_.problem)}, {"params", to_json(bp)}, {"validation", to_json(v)}, {"pass", v.pass}});
    echo(bp, v);
    return v.pass ? kOk : kFailed;
  }

  int verify_barrier(const std::string& kind_override) {
    BarrierParams bp;
    if (cfg_.raw.contains("params_file")) {
      if (!cfg_.raw.at("params_file").is_string()) throw ConfigError("params_file must be a string");
      std::filesystem::path p = cfg_.raw.at("params_file").get<std::string>();
      if (p.is_relative()) p = cfg_.dir / p;
      std::ifstream in(p);
      if (!in) throw ConfigError("cannot read params_file " + p.string());
      json j;
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        throw ConfigError(std::string("params_file is not valid JSON: ") + e.what());
      }
      bp = barrier_from_json(j.contains("params") ? j.at("params") : j);
    } else {
      bp = construct(kind_override);
    }
    const json& bsec = detail::section(cfg_, "barrier");
    bp.C_star *= detail::num(bsec, "corrupt_C_star", 1.0);

    const json& sec = detail::section(cfg_, "residual");
    ResidualGrid grid;
    grid.n_radii = detail::integer(sec, "n_radii", grid.n_radii);
    grid.n_times = detail::integer(sec, "n_times", grid.n_times);
    grid.t_span = detail::num(sec, "t_span", grid.t_span);
    grid.delta = detail::num(sec, "delta", grid.delta);
    grid.r_min_factor = detail::num(sec, "r_min_factor", grid.r_min_factor);
    grid.tol = detail::num(sec, "tol", grid.tol);
    grid.keep_samples = !sec.contains("csv") || sec.at("csv").get<bool>();
    const ResidualReport rep = verify(bp, calc_, grid);
    json j = to_json(rep);
    j["params"] = to_json(bp);
    write_json(out_dir_ / "residual_report.json", j);
    if (grid.keep_samples) atomic_write(out_dir_ / "residual.csv", residual_csv(rep));
    out_ << (rep.pass ? "ok   " : "FAIL ") << to_string(rep.kind) << " residual worst=" << rep.worst_value << " at r="
         << rep.worst_r << " t=" << rep.worst_t << " points=" << rep.n_points << '\n';
    return rep.pass ? kOk : kFailed;
  }

  int simulate_cmd(bool compare) {
    Setup s = setup();
    const RadialSolution sol = simulate(cfg_.problem, s.u0, s.grid, s.t_end, s.cfl, s.options);
    const std::size_t every = std::max<std::size_t>(1, sol.times.size() / 20);
    atomic_write(out_dir_ / "trajectory.csv", trajectory_csv(sol, every));
    const double drift = sol.mass_history.front() > 0.0 ? sol.mass_history.back() / sol.mass_history.front() - 1.0 : 0.0;
    write_json(out_dir_ / "simulation.json", {{"problem", problem_to_json(cfg_.problem)},
                                              {"grid", {{"r_max", s.grid.r_max}, {"n_cells", s.grid.n_cells}}},
                                              {"t_end", s.t_end},
                                              {"cfl", s.cfl},
                                              {"steps", sol.steps},
                                              {"theta_supp", sol.theta_supp},
                                              {"relative_mass_drift", drift},
                                              {"final_supnorm", sol.supnorm_history.back()},
                                              {"final_support", sol.support_history.back()},
                                              {"pass", true}});
    out_ << "simulated to t=" << s.t_end << " on " << s.grid.n_cells << " cells, r_max=" << s.grid.r_max << '\n';
    bool pass = true;
    if (s.sup0 > 0.0) {
      try {
        const DecayReport decay = measure_decay(sol, calc_);
        const SupportReport support = measure_support(sol, calc_);
        const json& msec = detail::section(cfg_, "measure");
        const bool dpass = decay.series.band <= detail::num(msec, "decay_band", 10.0);
        const bool spass = support.series.band <= detail::num(msec, "support_band", 5.0);
        json dj = to_json(decay);
        dj["pass"] = dpass;
        json sj = to_json(support);
        sj["pass"] = spass;
        write_json(out_dir_ / "decay_report.json", dj);
        write_json(out_dir_ / "support_report.json", sj);
        out_ << (dpass ? "ok   " : "FAIL ") << "decay band=" << decay.series.band << '\n';
        out_ << (spass ? "ok   " : "FAIL ") << "support band=" << support.series.band << '\n';
        pass = dpass && spass;
      } catch (const DomainError& e) {
        out_ << "skip measurements: " << e.what() << '\n';
      }
    }
    if (compare) pass = run_comparison(sol, s) && pass;
    return pass ? kOk : kFailed;
  }

  int transform_cmd() {
    const json& sec = detail::section(cfg_, "transform");
    TransformOptions opt;
    opt.s_min = detail::num(sec, "s_min", opt.s_min);
    opt.s_max = detail::num(sec, "s_max", opt.s_max);
    opt.per_decade = detail::integer(sec, "per_decade", opt.per_decade);
    const double bound = detail::num(sec, "bound_factor", 10.0);
    const TransformResult res = build_transform(cfg_.problem, opt);
    const AsymptoticsReport asy = asymptotics_report(res, calc_, bound);
    const double shoot_residual = std::abs(blowup_time(cfg_.problem, res.r_star) - 1.0 / res.beta) * res.beta;
    const bool checks = std::abs(res.rho_at_zero - 1.0) <= 1e-3 && res.plugback_max <= 1e-6 &&
                        res.round_trip_max <= 1e-3 && res.der_ratio_violation <= 1e-10 && shoot_residual <= 1e-8;
    const bool pass = checks && asy.pass;
    atomic_write(out_dir_ / "transform.csv", transform_csv(res));
    json j = {{"problem", problem_to_json(cfg_.problem)},
              {"diagnostics", transform_diagnostics(res)},
              {"shooting_relative_residual", shoot_residual},
              {"asymptotics", to_json(asy)},
              {"pass", pass}};
    write_json(out_dir_ / "asymptotics.json", j);
    out_ << "r_star=" << res.r_star << " r_hat(1)=" << res.anchor << " rho(0+)=" << res.rho_at_zero << '\n';
    for (const auto& r : asy.ratios) out_ << (r.pass ? "ok   " : "FAIL ") << r.name << " band=" << r.band << '\n';
    return pass ? kOk : kFailed;
  }

  int report() {
    static const char* files[] = {"lemma_report.json",  "barrier_params.json", "residual_report.json",
                                  "simulation.json",    "decay_report.json",   "support_report.json",
                                  "comparison_report.json", "asymptotics.json"};
    json summary = json::object();
    bool all = true;
    std::size_t found = 0;
    for (const char* f : files) {
      const auto path = out_dir_ / f;
      if (!std::filesystem::exists(path)) continue;
      std::ifstream in(path);
      json j;
      try {
        j = json::parse(in);
      } catch (const json::exception&) {
        throw ConfigError(std::string("report: unreadable ") + f);
      }
      const bool pass = j.contains("pass") && j.at("pass").is_boolean() && j.at("pass").get<bool>();
      summary[f] = pass;
      all = all && pass;
      ++found;
      out_ << (pass ? "ok   " : "FAIL ") << f << '\n';
    }
    write_json(out_dir_ / "report.json", {{"reports", summary}, {"pass", all && found > 0}});
    if (found == 0) out_ << "no reports found in " << out_dir_.string() << '\n';
    return all && found > 0 ? kOk : kFailed;
  }

 private:
  struct Setup {
    RadialProfile u0;
    double sup0 = 0.0;
    double support0 = 0.0;
    RadialGrid grid;
    double t_end = 0.0;
    double cfl = 0.4;
    SimulationOptions options;
  };

  BarrierParams construct(const std::string& kind_override) {
    const json& sec = detail::section(cfg_, "barrier");
    const std::string kind = kind_override.empty() ? detail::str(sec, "kind", "super") : kind_override;
    if (kind != "super" && kind != "sub") throw ConfigError("barrier kind must be super or sub");
    const SlackFactors slack = detail::slack_from(sec);
    const json fit = sec.contains("fit") ? sec.at("fit") : json();
    if (kind == "super") {
      if (fit.is_object()) return fit_super_above(cfg_.problem, calc_, detail::num(fit, "M", 1.0), detail::num(fit, "L", 1.0), slack);
      return select_super(cfg_.problem, calc_, slack);
    }
    if (fit.is_object()) return fit_sub_below(cfg_.problem, calc_, detail::num(fit, "eps", 1.0), detail::num(fit, "ell", 1.0), slack);
    return select_sub(cfg_.problem, calc_, detail::num(sec, "lambda", 1.0), slack);
  }

  void echo(const BarrierParams& bp, const BarrierValidation& v) {
    out_ << "kind    = " << to_string(bp.kind) << '\n'
         << "C_star  = " << bp.C_star << '\n'
         << "Gamma   = " << bp.Gamma << '\n'
         << "log_t0  = " << bp.log_t0 << '\n'
         << "r0      = " << bp.r0 << '\n'
         << "nu0     = " << bp.nu0 << '\n';
    if (bp.kind == BarrierKind::Sub) out_ << "lambda  = " << bp.lambda << '\n';
    for (const auto& c : v.checks)
      out_ << (c.holds ? "ok   " : "FAIL ") << c.name << "  [" << c.lhs << " vs " << c.rhs << "]\n";
  }

  Setup setup() {
    Setup s;
    const json& init = detail::section(cfg_, "initial");
    const std::string kind = detail::str(init, "kind", "bump");
    if (kind == "bump") {
      const double A = detail::num(init, "amplitude", 1.0);
      const double R = detail::num(init, "radius", 1.0);
      if (!(A >= 0.0) || !(R > 0.0)) throw ConfigError("initial: bump needs amplitude >= 0 and radius > 0");
      s.u0 = [A, R](double r) { return A * std::max(0.0, 1.0 - (r / R) * (r / R)); };
      s.sup0 = A;
      s.support0 = R;
    } else if (kind == "zero") {
      s.u0 = [](double) { return 0.0; };
    } else if (kind == "constant") {
      const double c = detail::num(init, "value", 1.0);
      if (!(c >= 0.0)) throw ConfigError("initial: constant value must be >= 0");
      s.u0 = [c](double) { return c; };
      s.sup0 = c;
    } else {
      throw ConfigError("initial: unknown kind '" + kind + "'");
    }
    s.cfl = detail::num(cfg_.raw, "cfl", 0.4);
    s.options.n_checkpoints = detail::integer(cfg_.raw, "checkpoints", s.options.n_checkpoints);

    const bool compact = kind == "bump" && s.sup0 > 0.0;
    double t0_ref = 1.0;
    if (compact) t0_ref = fit_super_above(cfg_.problem, calc_, s.sup0, s.support0).t0();
    if (cfg_.raw.contains("t_end")) {
      s.t_end = detail::num(cfg_.raw, "t_end", 0.0);
    } else if (cfg_.raw.contains("t_end_t0_multiple")) {
      s.t_end = detail::num(cfg_.raw, "t_end_t0_multiple", 0.0) * t0_ref;
    } else {
      throw ConfigError("simulate: missing field 't_end' (or 't_end_t0_multiple')");
    }

    const json& g = detail::section(cfg_, "grid");
    const int n_cells = detail::integer(g, "n_cells", 4000);
    const double r_max = detail::num(g, "r_max", 0.0);
    const bool automatic = !g.contains("auto") || g.at("auto").get<bool>();
    if (compact && automatic) {
      s.grid = auto_grid(calc_, s.sup0, s.support0, s.t_end, n_cells, r_max);
    } else {
      if (!(r_max > 0.0)) throw ConfigError("grid: r_max is required unless the grid is sized automatically");
      s.grid = {r_max, n_cells};
    }
    return s;
  }

  bool run_comparison(const RadialSolution& sol, const Setup& s) {
    const json& sec = detail::section(cfg_, "comparison");
    const double C = detail::num(sec, "tol_constant", 0.1);
    json j = {{"tol_constant", C}};
    bool pass = true;
    if (s.sup0 > 0.0 && s.support0 > 0.0) {
      const BarrierParams sup = fit_super_above(cfg_.problem, calc_, s.sup0, s.support0);
      const double ell = detail::num(sec, "ell", 0.5 * s.support0);
      double eps = detail::num(sec, "eps", 0.0);
      if (!(eps > 0.0)) {
        eps = s.sup0;
        for (int k = 0; k <= 1000; ++k) eps = std::min(eps, s.u0(ell * k / 1000.0));
      }
      const BarrierParams sub = fit_sub_below(cfg_.problem, calc_, eps, ell);
      const ComparisonReport cs = compare_to_barrier(sol, sup, calc_, C);
      const ComparisonReport cb = compare_to_barrier(sol, sub, calc_, C);
      j["super"] = to_json(cs);
      j["super"]["params"] = to_json(sup);
      j["sub"] = to_json(cb);
      j["sub"]["params"] = to_json(sub);
      pass = cs.pass && cb.pass;
      out_ << (cs.pass ? "ok   " : "FAIL ") << "super ordering worst_excess=" << cs.worst_excess << '\n';
      out_ << (cb.pass ? "ok   " : "FAIL ") << "sub ordering worst_excess=" << cb.worst_excess << '\n';
    } else {
      j["trivial"] = true;
      out_ << "ok   trivial data, nothing to compare\n";
    }
    j["pass"] = pass;
    write_json(out_dir_ / "comparison_report.json", j);
    return pass;
  }

  RunConfig cfg_;
  std::filesystem::path out_dir_;
  std::ostream& out_;
  EnvelopeCalculus calc_;
};

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  static const std::vector<std::string> commands = {"verify-lemmas", "build-barrier", "verify-barrier", "simulate",
                                                    "compare",       "transform",     "report"};
  CLI::App app{"Barrier, solver and transform laboratory for weighted doubly degenerate parabolic equations"};
  std::string command;
  std::string config;
  std::string out_dir;
  std::string kind;
  app.add_option("command", command, "Subcommand")->required()->check(CLI::IsMember(commands));
  app.add_option("--config", config, "Path to the JSON run config")->required();
  app.add_option("--out", out_dir, "Output directory (default: the config's directory)");
  app.add_option("--kind", kind, "Barrier kind for build-barrier / verify-barrier")->check(CLI::IsMember({"super", "sub"}));
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kConfig;
  }

  try {
    RunConfig cfg = load_config(config);
    std::filesystem::path out_path;
    if (!out_dir.empty()) {
      out_path = out_dir;
    } else if (cfg.raw.contains("out_dir")) {
      out_path = detail::str(cfg.raw, "out_dir", "");
      if (out_path.is_relative()) out_path = cfg.dir / out_path;
    } else {
      out_path = cfg.dir;
    }
    std::filesystem::create_directories(out_path);
    Runner runner(std::move(cfg), out_path, out);
    if (command == "verify-lemmas") return runner.verify_lemmas();
    if (command == "build-barrier") return runner.build_barrier(kind);
    if (command == "verify-barrier") return runner.verify_barrier(kind);
    if (command == "simulate") return runner.simulate_cmd(false);
    if (command == "compare") return runner.simulate_cmd(true);
    if (command == "transform") return runner.transform_cmd();
    return runner.report();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const GridTooSmall& e) {
    err << "grid too small: " << e.what() << '\n';
    return kGridTooSmall;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailed;
  }
}

}  // namespace ddw::cli
