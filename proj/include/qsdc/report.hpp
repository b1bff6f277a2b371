#pragma once

// Serialization of run reports (JSON), batch execution with per-trial seed
// streams, and analysis sweeps (CSV).
//
// Run document fields:
//   config         echo of the protocol configuration, including the seed
//   checks[]       {leg, samples_used, errors, error_rate, multiphoton_flags,
//                   protocol_violation, abort}
//   abort_leg      "E1" | "E2" | "E3" | null
//   message_length, delivered, mismatches, erasures, efficiency,
//   eve_measurements
//   wall_time_s    only when timing output is requested
//
// Floating-point values are rounded to 12 significant digits.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "qsdc/analysis.hpp"
#include "qsdc/config.hpp"
#include "qsdc/protocol.hpp"
#include "qsdc/rng.hpp"

namespace qsdc {

inline double round12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

inline std::string fmt12(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", round12(x));
  return buf;
}

inline nlohmann::json attack_to_json(const LegAttack& a) {
  nlohmann::json j{{"kind", std::string(attack_kind_name(a))}};
  if (const auto* ir = std::get_if<InterceptResend>(&a)) {
    j["basis"] = std::string(policy_name(ir->policy));
  } else if (const auto* tj = std::get_if<TrojanInject>(&a)) {
    j["k"] = tj->extra_photons;
  } else if (const auto* ca = std::get_if<CollectiveAttack>(&a)) {
    j["F"] = round12(ca->params.fidelity());
  }
  return j;
}

inline nlohmann::json config_to_json(const ProtocolConfig& c) {
  nlohmann::json attack = nlohmann::json::object();
  for (auto leg : kAllLegs) attack[std::string(leg_name(leg))] = attack_to_json(c.attack.on(leg));
  return {{"photons", c.photons},
          {"seed", c.seed},
          {"f_s", round12(c.f_s)},
          {"f_d", round12(c.f_d)},
          {"f_b", round12(c.f_b)},
          {"abort_threshold", round12(c.abort_threshold)},
          {"multiphoton_tolerance", c.multiphoton_tolerance},
          {"P0", round12(c.p0)},
          {"bob_self_measures", c.bob_self_measures},
          {"noise", {{"p", round12(c.noise.depolarize)}, {"loss", round12(c.noise.loss)}}},
          {"attack", attack}};
}

inline nlohmann::json check_to_json(const CheckOutcome& o) {
  return {{"leg", std::string(leg_name(o.leg))},
          {"samples_used", o.samples_used},
          {"errors", o.errors},
          {"error_rate", round12(o.error_rate)},
          {"multiphoton_flags", o.multiphoton_flags},
          {"protocol_violation", o.protocol_violation},
          {"abort", o.abort}};
}

inline nlohmann::json report_to_json(const RunReport& r, bool include_timing = false) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) checks.push_back(check_to_json(c));
  nlohmann::json j{{"config", config_to_json(r.config)},
                   {"checks", checks},
                   {"abort_leg", r.abort_leg ? nlohmann::json(std::string(leg_name(*r.abort_leg))) : nlohmann::json()},
                   {"message_length", r.message_length},
                   {"delivered", r.delivered},
                   {"mismatches", r.mismatches},
                   {"erasures", r.erasures},
                   {"efficiency", round12(r.efficiency)},
                   {"eve_measurements", r.eve_measurements}};
  if (include_timing) j["wall_time_s"] = r.wall_time_s;
  return j;
}

// ---------------------------------------------------------------------------
// Batches
// ---------------------------------------------------------------------------

struct LegStats {
  std::size_t runs = 0;
  double mean_error_rate = 0.0;
  double stddev_error_rate = 0.0;
  std::size_t aborts = 0;
};

struct BatchSummary {
  std::size_t trials = 0;
  std::size_t aborted = 0;
  double abort_frequency = 0.0;
  std::map<Leg, LegStats> legs;
  double mean_efficiency = 0.0;
  std::size_t total_mismatches = 0;
};

struct BatchResult {
  std::vector<RunReport> runs;
  BatchSummary summary;
};

inline BatchSummary summarize(const std::vector<RunReport>& runs) {
  BatchSummary s;
  s.trials = runs.size();
  std::map<Leg, std::vector<double>> rates;
  for (const auto& r : runs) {
    if (r.aborted()) ++s.aborted;
    s.mean_efficiency += r.efficiency;
    s.total_mismatches += r.mismatches;
    for (const auto& c : r.checks) {
      rates[c.leg].push_back(c.error_rate);
      if (c.abort) ++s.legs[c.leg].aborts;
    }
  }
  if (s.trials) {
    s.abort_frequency = static_cast<double>(s.aborted) / static_cast<double>(s.trials);
    s.mean_efficiency /= static_cast<double>(s.trials);
  }
  for (auto& [leg, v] : rates) {
    LegStats& ls = s.legs[leg];
    ls.runs = v.size();
    double sum = 0.0;
    for (double x : v) sum += x;
    ls.mean_error_rate = sum / static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - ls.mean_error_rate) * (x - ls.mean_error_rate);
    ls.stddev_error_rate = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
  }
  return s;
}

// Trial i runs with seed derive_seed(cfg.seed, i). Trials run on up to
// `workers` threads; results are ordered by trial index.
inline BatchResult run_batch(const ProtocolConfig& cfg, std::size_t trials, std::size_t workers = 1) {
  if (trials == 0) throw ContractViolation("run_batch: trials must be >= 1");
  cfg.validate();
  BatchResult out;
  out.runs.resize(trials);
  workers = std::clamp<std::size_t>(workers, 1, trials);

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](std::size_t w) {
    try {
      for (std::size_t i = next++; i < trials; i = next++) {
        ProtocolConfig c = cfg;
        c.seed = derive_seed(cfg.seed, i);
        out.runs[i] = run_subsystem(c);
      }
    } catch (...) {
      errors[w] = std::current_exception();
      next = trials;
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  out.summary = summarize(out.runs);
  return out;
}

inline nlohmann::json summary_to_json(const BatchSummary& s) {
  nlohmann::json legs = nlohmann::json::object();
  for (const auto& [leg, ls] : s.legs) {
    legs[std::string(leg_name(leg))] = {{"runs", ls.runs},
                                        {"mean_error_rate", round12(ls.mean_error_rate)},
                                        {"stddev_error_rate", round12(ls.stddev_error_rate)},
                                        {"aborts", ls.aborts}};
  }
  return {{"trials", s.trials},
          {"aborted", s.aborted},
          {"abort_frequency", round12(s.abort_frequency)},
          {"legs", legs},
          {"mean_efficiency", round12(s.mean_efficiency)},
          {"total_mismatches", s.total_mismatches}};
}

inline nlohmann::json batch_to_json(const ProtocolConfig& master, const BatchResult& b, bool include_timing = false) {
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t i = 0; i < b.runs.size(); ++i) {
    nlohmann::json r = report_to_json(b.runs[i], include_timing);
    r["trial"] = i;
    runs.push_back(std::move(r));
  }
  return {{"master_seed", master.seed}, {"summary", summary_to_json(b.summary)}, {"runs", runs}};
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

inline constexpr const char* kSweepHeader = "D,I_max_formula,I_max_computed,err_sigma_z,err_sigma_x";

struct SweepRow {
  double d = 0.0;
  double i_max_formula = 0.0;
  double i_max_computed = 0.0;
  double err_sigma_z = 0.0;
  double err_sigma_x = 0.0;
};

// imax_vs_D: one row per budget D with the best attack found.
// holevo_vs_geometry: for each D, one row per preset geometry at F = 1 - D,
// in the order orthonormal, basis_copy, phase_covariant.
inline std::vector<SweepRow> sweep_curve(const SweepSpec& spec, AttackSearchOptions opt = {}) {
  if (spec.grid.empty()) throw ContractViolation("sweep_curve: grid is empty");
  opt.weight_x = spec.weight_x;
  std::vector<SweepRow> rows;
  if (spec.kind == SweepKind::ImaxVsD) {
    std::vector<double> grid = spec.grid;
    if (!std::is_sorted(grid.begin(), grid.end())) throw ContractViolation("sweep_curve: grid must be ascending");
    for (double d : grid)
      if (!(d >= 0.0 && d <= 0.5)) throw ContractViolation("sweep_curve: imax_vs_D grid must lie in [0, 0.5]");
    const auto best = attack_curve(grid, spec.family, opt);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      rows.push_back({grid[i], imax_curve(grid[i]), best[i].i_max, best[i].rates.sigma_z, best[i].rates.sigma_x});
    }
  } else {
    for (double d : spec.grid) {
      if (!(d >= 0.0 && d <= 1.0)) throw ContractViolation("sweep_curve: D must lie in [0, 1]");
      for (auto g : kPresetGeometries) {
        const auto p = CollectiveParams::preset(g, 1.0 - d);
        const auto r = detection_rates(p);
        rows.push_back({d, imax_curve(d), holevo_bound(p).i_max, r.sigma_z, r.sigma_x});
      }
    }
  }
  return rows;
}

inline void write_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << kSweepHeader << '\n';
  for (const auto& r : rows) {
    os << fmt12(r.d) << ',' << fmt12(r.i_max_formula) << ',' << fmt12(r.i_max_computed) << ','
       << fmt12(r.err_sigma_z) << ',' << fmt12(r.err_sigma_x) << '\n';
  }
}

}  // namespace qsdc
