#pragma once

// JSON and CSV serialization of problems, parameters and reports, plus atomic file writes.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>

#include "json.hpp"

#include "ddw/barriers.hpp"
#include "ddw/envelope.hpp"
#include "ddw/errors.hpp"
#include "ddw/residual.hpp"
#include "ddw/solver.hpp"
#include "ddw/transform.hpp"
#include "ddw/weights.hpp"

namespace ddw {

using json = nlohmann::json;

/// Writes `content` to a sibling temp file and renames it over `path`.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("rename failed: " + path.string() + ": " + ec.message());
}

inline void write_json(const std::filesystem::path& path, const json& j) { atomic_write(path, j.dump(2) + "\n"); }

/// Shortest round-trip representation of a double for CSV cells.
inline std::string csv_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------- problem

inline json weight_to_json(const WeightSpec& w) {
  json j;
  if (const auto* pw = std::get_if<PowerWeight>(&w.kind())) {
    j = {{"kind", "power"}, {"alpha", pw->alpha}};
  } else {
    const auto& z = std::get<ZygmundWeight>(w.kind());
    j = {{"kind", "zygmund"}, {"alpha", z.alpha}, {"beta", z.beta}, {"c", z.c}};
  }
  if (!w.exponents_are_nominal()) {
    j["alpha1"] = w.alpha1();
    j["alpha2"] = w.alpha2();
  }
  return j;
}

inline json problem_to_json(const ProblemSpec& pr) {
  return {{"N", pr.N}, {"p", pr.p}, {"m", pr.m}, {"weight", weight_to_json(pr.weight)}};
}

namespace detail {

inline double require_number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  if (!j.at(key).is_number()) throw ConfigError(where + ": field '" + key + "' must be a number");
  return j.at(key).get<double>();
}

inline double optional_number(const json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(where + ": field '" + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace detail

inline WeightSpec weight_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("weight: must be an object");
  if (!j.contains("kind") || !j.at("kind").is_string()) throw ConfigError("weight: missing string field 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  try {
    WeightSpec w = WeightSpec::power(1.0);
    if (kind == "power") {
      w = WeightSpec::power(detail::require_number(j, "alpha", "weight"));
    } else if (kind == "zygmund") {
      w = WeightSpec::zygmund(detail::require_number(j, "alpha", "weight"), detail::require_number(j, "beta", "weight"),
                              detail::require_number(j, "c", "weight"));
    } else {
      throw ConfigError("weight: unknown kind '" + kind + "' (expected power or zygmund)");
    }
    if (j.contains("alpha1") || j.contains("alpha2")) {
      w = WeightSpec::with_exponents(w, detail::optional_number(j, "alpha1", w.alpha1(), "weight"),
                                     detail::optional_number(j, "alpha2", w.alpha2(), "weight"));
    }
    return w;
  } catch (const DomainError& e) {
    throw ConfigError(std::string("weight: ") + e.what());
  }
}

/// Reads N, p, m and weight from the top level of `j` and validates the assumptions.
inline ProblemSpec problem_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("problem: expected a JSON object");
  if (!j.contains("N")) throw ConfigError("problem: missing field 'N'");
  if (!j.at("N").is_number_integer()) throw ConfigError("problem: field 'N' must be an integer");
  if (!j.contains("weight")) throw ConfigError("problem: missing field 'weight'");
  ProblemSpec pr{j.at("N").get<int>(), detail::require_number(j, "p", "problem"), detail::require_number(j, "m", "problem"),
                 weight_from_json(j.at("weight"))};
  validate_problem(pr);
  return pr;
}

// ---------------------------------------------------------------- reports

inline json to_json(const ValidationReport& r) {
  return {{"tol", r.tol},
          {"max_derivative_violation", r.max_derivative_violation},
          {"derivative_argmax", r.derivative_argmax},
          {"max_scaling_violation", r.max_scaling_violation},
          {"scaling_argmax_r", r.scaling_argmax_r},
          {"scaling_argmax_lambda", r.scaling_argmax_lambda},
          {"pass", r.pass}};
}

inline json to_json(const LemmaReport& r) {
  json recs = json::array();
  for (const auto& rec : r.records)
    recs.push_back({{"name", rec.name}, {"max_violation", rec.max_violation}, {"argmax_r", rec.argmax_r}, {"pass", rec.pass}});
  return {{"tol", r.tol}, {"records", recs}, {"pass", r.pass}};
}

inline json to_json(const BarrierParams& bp) {
  json mus;
  if (const auto* k = std::get_if<SuperConstants>(&bp.mus)) {
    mus = {{"mu1", k->mu1}, {"mu2", k->mu2}, {"mu3", k->mu3}, {"d", k->d}};
  } else {
    const auto& k2 = std::get<SubConstants>(bp.mus);
    mus = {{"mu1t", k2.mu1t}, {"mu2t", k2.mu2t}, {"mu3t", k2.mu3t}, {"mu4t", k2.mu4t}, {"dt", k2.dt}};
  }
  json j = {{"kind", to_string(bp.kind)},
            {"C_star", bp.C_star},
            {"Gamma", bp.Gamma},
            {"log_t0", bp.log_t0},
            {"t0", bp.log_t0 < 700.0 ? json(std::exp(bp.log_t0)) : json(nullptr)},
            {"r0", bp.r0},
            {"nu0", bp.nu0},
            {"mus", mus},
            {"slack", {{"enlarge", bp.slack.enlarge}, {"shrink", bp.slack.shrink}}}};
  if (bp.kind == BarrierKind::Sub) j["lambda"] = bp.lambda;
  return j;
}

inline BarrierParams barrier_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("barrier params: expected an object");
  BarrierParams bp;
  if (!j.contains("kind") || !j.at("kind").is_string()) throw ConfigError("barrier params: missing 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind != "super" && kind != "sub") throw ConfigError("barrier params: kind must be super or sub");
  bp.kind = kind == "super" ? BarrierKind::Super : BarrierKind::Sub;
  const std::string where = "barrier params";
  bp.C_star = detail::require_number(j, "C_star", where);
  bp.Gamma = detail::require_number(j, "Gamma", where);
  bp.log_t0 = detail::require_number(j, "log_t0", where);
  bp.r0 = detail::require_number(j, "r0", where);
  bp.nu0 = detail::require_number(j, "nu0", where);
  bp.lambda = detail::optional_number(j, "lambda", 0.0, where);
  if (j.contains("slack")) {
    bp.slack.enlarge = detail::optional_number(j.at("slack"), "enlarge", 1.05, where);
    bp.slack.shrink = detail::optional_number(j.at("slack"), "shrink", 0.95, where);
  }
  if (j.contains("mus")) {
    const json& m = j.at("mus");
    if (bp.kind == BarrierKind::Super) {
      bp.mus = SuperConstants{detail::optional_number(m, "mu1", 0.0, where), detail::optional_number(m, "mu2", 0.0, where),
                              detail::optional_number(m, "mu3", 0.0, where), detail::optional_number(m, "d", 0.0, where)};
    } else {
      bp.mus = SubConstants{detail::optional_number(m, "mu1t", 0.0, where), detail::optional_number(m, "mu2t", 0.0, where),
                            detail::optional_number(m, "mu3t", 0.0, where), detail::optional_number(m, "mu4t", 0.0, where),
                            detail::optional_number(m, "dt", 0.0, where)};
    }
  } else if (bp.kind == BarrierKind::Sub) {
    bp.mus = SubConstants{};
  }
  return bp;
}

inline json to_json(const BarrierValidation& v) {
  json checks = json::array();
  for (const auto& c : v.checks) checks.push_back({{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"holds", c.holds}});
  return {{"checks", checks}, {"pass", v.pass}};
}

inline json to_json(const ResidualReport& r) {
  json bands = json::array();
  for (const auto& b : r.excluded_bands) bands.push_back({{"t", b.t}, {"r_lo", b.r_lo}, {"r_hi", b.r_hi}});
  return {{"kind", to_string(r.kind)},
          {"tol", r.tol},
          {"grid", {{"n_radii_per_zone", r.n_radii}, {"n_times", r.n_times}, {"t_max", r.t_max}, {"n_points", r.n_points}}},
          {"worst_value", r.worst_value},
          {"worst_location", {{"r", r.worst_r}, {"t", r.worst_t}}},
          {"excluded_bands", bands},
          {"sign_disagreements", r.sign_disagreements},
          {"time_derivative_sandwich_failures", r.sandwich_failures},
          {"pass", r.pass}};
}

inline std::string residual_csv(const ResidualReport& r) {
  std::ostringstream out;
  out << "r,t,residual\n";
  for (const auto& s : r.samples) out << csv_num(s.r) << ',' << csv_num(s.t) << ',' << csv_num(s.value) << '\n';
  return out.str();
}

inline json to_json(const RatioWindow& w) {
  json series = json::array();
  for (std::size_t k = 0; k < w.t.size(); ++k) series.push_back({w.t[k], w.ratio[k]});
  return {{"window_lo", w.window_lo}, {"window_min", w.window_min}, {"window_max", w.window_max},
          {"band", std::isfinite(w.band) ? json(w.band) : json(nullptr)}, {"series", series}};
}

inline json to_json(const DecayReport& r) {
  json j = to_json(r.series);
  j["fitted_exponent"] = r.fitted_exponent;
  return j;
}

inline json to_json(const SupportReport& r) {
  json j = to_json(r.series);
  j["initial_radius"] = r.initial_radius;
  j["monotone"] = r.monotone;
  return j;
}

inline json to_json(const ComparisonReport& r) {
  return {{"kind", to_string(r.kind)},
          {"tol_constant", r.tol_constant},
          {"worst_excess", r.worst_excess},
          {"worst_tol", r.worst_tol},
          {"worst_location", {{"r", r.worst_r}, {"t", r.worst_t}}},
          {"worst_ratio", r.worst_ratio},
          {"n_checked", r.n_checked},
          {"pass", r.pass}};
}

inline std::string trajectory_csv(const RadialSolution& sol, std::size_t every = 1) {
  std::ostringstream out;
  out << "t,r,U\n";
  if (every == 0) every = 1;
  for (std::size_t k = 0; k < sol.fields.size(); ++k) {
    if (k % every != 0 && k + 1 != sol.fields.size()) continue;
    for (int i = 0; i < sol.grid.n_cells; ++i)
      out << csv_num(sol.times[k]) << ',' << csv_num(sol.grid.center(i)) << ',' << csv_num(sol.fields[k][i]) << '\n';
  }
  return out.str();
}

inline std::string transform_csv(const TransformResult& r) {
  std::ostringstream out;
  out << "s,r_hat,r_hat_s,rho\n";
  for (const auto& s : r.samples)
    out << csv_num(s.s) << ',' << csv_num(s.r_hat) << ',' << csv_num(s.r_hat_s) << ',' << csv_num(s.rho) << '\n';
  return out.str();
}

inline json to_json(const AsymptoticsReport& r) {
  json ratios = json::array();
  for (const auto& a : r.ratios)
    ratios.push_back({{"name", a.name}, {"min", a.min}, {"max", a.max}, {"band", a.band}, {"pass", a.pass}});
  return {{"s_lo", r.s_lo}, {"s_hi", r.s_hi}, {"bound_factor", r.bound_factor}, {"ratios", ratios}, {"pass", r.pass}};
}

inline json transform_diagnostics(const TransformResult& r) {
  return {{"r_star", r.r_star},
          {"beta", r.beta},
          {"anchor_r_hat_1", r.anchor},
          {"rho_at_zero", r.rho_at_zero},
          {"plugback_max", r.plugback_max},
          {"round_trip_max", r.round_trip_max},
          {"der_ratio_violation", r.der_ratio_violation},
          {"n_samples", r.samples.size()},
          {"ode_steps", r.ode_steps}};
}

}  // namespace ddw
