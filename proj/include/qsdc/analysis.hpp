#pragma once

// Information-theoretic side of the security analysis: the Holevo bound on
// what a collective attack on leg E2 can learn about Bob's encoding, the
// binary-entropy reference curve, a heuristic search for strong attacks at
// a given detection budget, and single-qubit quantum privacy amplification.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include "qsdc/channel.hpp"
#include "qsdc/qubit.hpp"
#include "qsdc/rng.hpp"

namespace qsdc {

// ---------------------------------------------------------------------------
// Holevo bound
// ---------------------------------------------------------------------------

struct EncodedEnsemble {
  // Photon (x) ancilla operators, photon = qubit 0.
  DensityOperator total;
  DensityOperator under_u0;
  DensityOperator under_u1;
};

inline void check_priors(double p0, double p1) {
  if (!(p0 >= 0.0 && p0 <= 1.0 && p1 >= 0.0 && p1 <= 1.0) || std::abs(p0 + p1 - 1.0) > kAlgebraTol) {
    throw ContractViolation("encoding priors must be probabilities summing to 1");
  }
}

// The photon Charlie sends is I/2 to anyone ignorant of C_C, i.e. an equal
// mixture of the |0> and |1> trajectories. Each trajectory passes through
// the probe unitary, then Bob's U_i; the three operators are
//   eps_Ui = 1/2 sum_x  U_i E |x><x| E^+ U_i^+,   eps = P0 eps_U0 + P1 eps_U1.
inline EncodedEnsemble encoded_ensemble(const CollectiveParams& params, double p0, double p1) {
  check_priors(p0, p1);
  const std::array<PureState, 2> probed{collective_attack(PureState::zero(), params),
                                        collective_attack(PureState::one(), params)};
  const std::array<double, 2> half{0.5, 0.5};
  auto under = [&](const Gate& u) {
    const std::array<PureState, 2> traj{apply_gate(u, probed[0], 0), apply_gate(u, probed[1], 0)};
    return mix(std::span<const PureState>(traj), half);
  };
  DensityOperator e0 = under(Gate::u0());
  DensityOperator e1 = under(Gate::u1());
  const std::array<DensityOperator, 2> parts{e0, e1};
  const std::array<double, 2> w{p0, p1};
  DensityOperator total = mix(std::span<const DensityOperator>(parts), w);
  return {std::move(total), std::move(e0), std::move(e1)};
}

struct HolevoResult {
  double s_total = 0.0;
  double s_u0 = 0.0;
  double s_u1 = 0.0;
  // P0 S(eps_U0) + P1 S(eps_U1)
  double s_cond = 0.0;
  double i_max = 0.0;
  double fidelity = 1.0;
};

inline HolevoResult holevo_bound(const CollectiveParams& params, double p0 = 0.5, double p1 = 0.5) {
  const EncodedEnsemble ens = encoded_ensemble(params, p0, p1);
  HolevoResult r;
  r.s_total = von_neumann_entropy(ens.total);
  r.s_u0 = von_neumann_entropy(ens.under_u0);
  r.s_u1 = von_neumann_entropy(ens.under_u1);
  r.s_cond = p0 * r.s_u0 + p1 * r.s_u1;
  r.i_max = r.s_total - r.s_cond;
  r.fidelity = params.fidelity();
  return r;
}

// Reference curve -D log2 D - (1 - D) log2(1 - D).
inline double imax_curve(double d) {
  if (!(d >= 0.0 && d <= 1.0)) throw ContractViolation("imax_curve: D must lie in [0, 1]");
  return entropy_term(d) + entropy_term(1.0 - d);
}

// ---------------------------------------------------------------------------
// Attack search
// ---------------------------------------------------------------------------

enum class AttackFamily { Orthonormal, BasisCopy, PhaseCovariant, Presets, Free };

inline std::string_view family_name(AttackFamily f) {
  switch (f) {
    case AttackFamily::Orthonormal: return "orthonormal";
    case AttackFamily::BasisCopy: return "basis_copy";
    case AttackFamily::PhaseCovariant: return "phase_covariant";
    case AttackFamily::Presets: return "presets";
    case AttackFamily::Free: return "free";
  }
  return "?";
}

inline std::optional<AttackFamily> parse_family(std::string_view s) {
  for (auto f : {AttackFamily::Orthonormal, AttackFamily::BasisCopy, AttackFamily::PhaseCovariant,
                 AttackFamily::Presets, AttackFamily::Free}) {
    if (family_name(f) == s) return f;
  }
  if (const auto g = parse_geometry(s)) return static_cast<AttackFamily>(static_cast<int>(*g));
  return std::nullopt;
}

struct AttackSearchOptions {
  // Weight of the decoy (sigma_x) error rate in the detection probability;
  // the sigma_z sample rate gets 1 - weight_x. 0.5 matches the default
  // sampling plan, where half the leg-2 samples are decoys.
  double weight_x = 0.5;
  std::size_t grid_points = 201;
  std::size_t random_restarts = 4;
  std::size_t max_iterations = 4000;
  double tolerance = 1e-6;
  std::uint64_t seed = 0x5eed;
};

struct AttackOptimum {
  CollectiveParams params = CollectiveParams::phase_covariant(1.0);
  double i_max = 0.0;
  DetectionRates rates;
  double detection = 0.0;
  // False when no candidate met the budget and the no-attack point was returned.
  bool feasible = true;
};

namespace detail {

// Free real geometry from 17 unconstrained coordinates:
//   x[0]         F = sin^2 x[0]
//   x[1..4]      e00 (normalized)
//   x[5..8]      e01 (normalized)
//   x[9..12]     e11 (normalized)
//   x[13..16]    w; e10 = g e00 + sqrt(1 - g^2) u, g = -<e01|e11>, u = w
//                orthogonalized against e00. This enforces <e00|e10> + <e01|e11> = 0.
inline constexpr std::size_t kFreeDims = 17;

inline std::array<double, 4> unit4(const double* x) {
  std::array<double, 4> v{x[0], x[1], x[2], x[3]};
  double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
  if (n < 1e-12) return {1.0, 0.0, 0.0, 0.0};
  for (auto& a : v) a /= n;
  return v;
}

inline double dot4(const std::array<double, 4>& a, const std::array<double, 4>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

inline CollectiveParams free_params(std::span<const double> x) {
  const double s = std::sin(x[0]);
  const double f = std::clamp(s * s, 0.0, 1.0);
  const auto e00 = unit4(&x[1]);
  const auto e01 = unit4(&x[5]);
  const auto e11 = unit4(&x[9]);
  std::array<double, 4> u{x[13], x[14], x[15], x[16]};
  double proj = dot4(u, e00);
  for (std::size_t i = 0; i < 4; ++i) u[i] -= proj * e00[i];
  double un = std::sqrt(dot4(u, u));
  if (un < 1e-9) {
    // w parallel to e00: take the basis axis least aligned with e00.
    std::size_t k = 0;
    for (std::size_t i = 1; i < 4; ++i)
      if (std::abs(e00[i]) < std::abs(e00[k])) k = i;
    u = {0.0, 0.0, 0.0, 0.0};
    u[k] = 1.0;
    proj = e00[k];
    for (std::size_t i = 0; i < 4; ++i) u[i] -= proj * e00[i];
    un = std::sqrt(dot4(u, u));
  }
  for (auto& a : u) a /= un;
  const double g = std::clamp(-dot4(e01, e11), -1.0, 1.0);
  const double r = std::sqrt(std::max(0.0, 1.0 - g * g));
  std::array<double, 4> e10{};
  for (std::size_t i = 0; i < 4; ++i) e10[i] = g * e00[i] + r * u[i];
  // Renormalize away round-off.
  const double n10 = std::sqrt(dot4(e10, e10));
  for (auto& a : e10) a /= n10;

  auto to_c = [](const std::array<double, 4>& v) {
    return AncillaVector{v[0], v[1], v[2], v[3]};
  };
  return CollectiveParams(f, {to_c(e00), to_c(e01), to_c(e10), to_c(e11)});
}

// Inverse of free_params for real geometries.
inline std::array<double, kFreeDims> free_coords(const CollectiveParams& p) {
  std::array<double, kFreeDims> x{};
  x[0] = std::asin(std::sqrt(p.fidelity()));
  const CollectiveParams::Slot slots[4] = {CollectiveParams::k00, CollectiveParams::k01,
                                           CollectiveParams::k11, CollectiveParams::k10};
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t i = 0; i < 4; ++i) x[1 + 4 * k + i] = p.direction(slots[k])[i].real();
  return x;
}

struct Candidate {
  std::vector<double> x;
  double i_max = -1.0;
  double detection = 0.0;
  bool feasible = false;
};

using Objective = std::function<double(std::span<const double>)>;

inline double gsl_objective(const gsl_vector* v, void* raw) {
  const auto& f = *static_cast<const Objective*>(raw);
  return f(std::span<const double>(v->data, v->size));
}

// Minimizes `objective` with GSL's Nelder-Mead simplex from `x0`.
inline std::vector<double> simplex_minimize(const Objective& objective, const std::vector<double>& x0,
                                            double step, std::size_t max_iterations, double tol) {
  const std::size_t n = x0.size();
  gsl_multimin_function fn;
  fn.n = n;
  fn.f = &gsl_objective;
  fn.params = const_cast<Objective*>(&objective);
  gsl_vector* start = gsl_vector_alloc(n);
  gsl_vector* steps = gsl_vector_alloc(n);
  for (std::size_t i = 0; i < n; ++i) {
    gsl_vector_set(start, i, x0[i]);
    gsl_vector_set(steps, i, step);
  }
  gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
  gsl_multimin_fminimizer_set(m, &fn, start, steps);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    if (gsl_multimin_fminimizer_iterate(m) != 0) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), tol) == GSL_SUCCESS) break;
  }
  std::vector<double> best(m->x->data, m->x->data + n);
  gsl_multimin_fminimizer_free(m);
  gsl_vector_free(start);
  gsl_vector_free(steps);
  return best;
}

}  // namespace detail

// Searches for the attack with the largest Holevo quantity whose weighted
// detection probability stays within `d_target`. Preset families search the
// fidelity only; `Free` searches every real ancilla geometry. The result is
// a lower bound on Eve's optimum, not a certified maximum.
inline AttackOptimum optimize_attack(double d_target, AttackFamily family, const AttackSearchOptions& opt = {},
                                     std::span<const CollectiveParams> warm_starts = {}) {
  if (!(d_target >= 0.0 && d_target <= 0.5)) throw ContractViolation("optimize_attack: D_target must lie in [0, 0.5]");
  if (!(opt.weight_x >= 0.0 && opt.weight_x <= 1.0)) throw ContractViolation("optimize_attack: weight_x outside [0, 1]");

  std::vector<AncillaGeometry> presets;
  switch (family) {
    case AttackFamily::Orthonormal: presets = {AncillaGeometry::Orthonormal}; break;
    case AttackFamily::BasisCopy: presets = {AncillaGeometry::BasisCopy}; break;
    case AttackFamily::PhaseCovariant: presets = {AncillaGeometry::PhaseCovariant}; break;
    case AttackFamily::Presets:
    case AttackFamily::Free: presets.assign(kPresetGeometries.begin(), kPresetGeometries.end()); break;
  }

  AttackOptimum best;
  best.rates = detection_rates(best.params);
  best.detection = best.rates.weighted(opt.weight_x);
  best.i_max = std::max(0.0, holevo_bound(best.params).i_max);
  best.feasible = false;

  auto consider = [&](const CollectiveParams& p) {
    const DetectionRates r = detection_rates(p);
    const double det = r.weighted(opt.weight_x);
    if (det > d_target) return;
    const double i = holevo_bound(p).i_max;
    if (!best.feasible || i > best.i_max + 1e-15 || (std::abs(i - best.i_max) <= 1e-15 && det < best.detection)) {
      best = {p, i, r, det, true};
    }
  };

  // The identity probe is always a feasible fallback.
  consider(CollectiveParams::phase_covariant(1.0));
  for (const auto& w : warm_starts) consider(w);

  for (auto g : presets) {
    // Grid over F followed by simplex refinement of the best feasible point.
    double best_f = -1.0;
    double best_i = -1.0;
    for (std::size_t k = 0; k < opt.grid_points; ++k) {
      const double f = opt.grid_points > 1 ? static_cast<double>(k) / static_cast<double>(opt.grid_points - 1) : 1.0;
      const auto p = CollectiveParams::preset(g, f);
      consider(p);
      if (detection_rates(p).weighted(opt.weight_x) <= d_target) {
        const double i = holevo_bound(p).i_max;
        if (i > best_i) {
          best_i = i;
          best_f = f;
        }
      }
    }
    if (best_f < 0.0) continue;
    auto objective = [&](std::span<const double> x) {
      const double s = std::sin(x[0]);
      const auto p = CollectiveParams::preset(g, std::clamp(s * s, 0.0, 1.0));
      if (detection_rates(p).weighted(opt.weight_x) > d_target) return 1e3;
      return -holevo_bound(p).i_max;
    };
    const auto x = detail::simplex_minimize(objective, {std::asin(std::sqrt(best_f))}, 0.02, opt.max_iterations,
                                            opt.tolerance * 1e-3);
    const double s = std::sin(x[0]);
    consider(CollectiveParams::preset(g, std::clamp(s * s, 0.0, 1.0)));
  }

  if (family == AttackFamily::Free) {
    auto objective = [&](std::span<const double> x) {
      const auto p = detail::free_params(x);
      if (detection_rates(p).weighted(opt.weight_x) > d_target) return 1e3;
      return -holevo_bound(p).i_max;
    };
    std::vector<std::vector<double>> starts;
    {
      const auto c = detail::free_coords(best.params);
      starts.emplace_back(c.begin(), c.end());
    }
    for (auto g : kPresetGeometries) {
      for (double f : {1.0, 1.0 - d_target, 1.0 - 0.5 * d_target}) {
        const auto p = CollectiveParams::preset(g, std::clamp(f, 0.0, 1.0));
        if (detection_rates(p).weighted(opt.weight_x) > d_target) continue;
        const auto c = detail::free_coords(p);
        starts.emplace_back(c.begin(), c.end());
      }
    }
    Rng rng(opt.seed);
    for (std::size_t r = 0; r < opt.random_restarts; ++r) {
      // Random geometry with F picked so the sigma_z rate alone stays in budget.
      std::vector<double> x(detail::kFreeDims);
      for (std::size_t i = 1; i < x.size(); ++i) x[i] = 2.0 * rng.uniform() - 1.0;
      x[0] = std::asin(std::sqrt(1.0 - d_target * rng.uniform()));
      if (detection_rates(detail::free_params(x)).weighted(opt.weight_x) <= d_target) starts.push_back(x);
    }
    for (const auto& s : starts) {
      const auto x = detail::simplex_minimize(objective, s, 0.1, opt.max_iterations, opt.tolerance);
      consider(detail::free_params(x));
    }
  }

  if (!best.feasible) {
    // Infeasible budget: report the no-attack point.
    best.params = CollectiveParams::phase_covariant(1.0);
    best.rates = detection_rates(best.params);
    best.detection = best.rates.weighted(opt.weight_x);
    best.i_max = std::max(0.0, holevo_bound(best.params).i_max);
  }
  return best;
}

// optimize_attack over an ascending grid of budgets, seeding each point with
// the previous optimum so the reported curve is nondecreasing.
inline std::vector<AttackOptimum> attack_curve(std::span<const double> budgets, AttackFamily family,
                                               const AttackSearchOptions& opt = {}) {
  std::vector<AttackOptimum> out;
  std::vector<CollectiveParams> warm;
  for (double d : budgets) {
    out.push_back(optimize_attack(d, family, opt, warm));
    warm.assign(1, out.back().params);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quantum privacy amplification on two single photons
// ---------------------------------------------------------------------------

struct QpaInput {
  cplx a1{1.0}, b1{0.0}, a2{1.0}, b2{0.0};

  void validate() const {
    if (std::abs(std::norm(a1) + std::norm(b1) - 1.0) > kAlgebraTol ||
        std::abs(std::norm(a2) + std::norm(b2) - 1.0) > kAlgebraTol) {
      throw ContractViolation("QpaInput: each photon must be normalized");
    }
  }
};

// Closed-form output before qubit 2 is read (qubit 1 = photon 1 = MSB):
//   1/sqrt2 [(a1a2 + b1b2)|0> + (a1b2 - b1a2)|1>]_1 |0>_2
// + 1/sqrt2 [(a1b2 + b1a2)|0> + (a1a2 - b1b2)|1>]_1 |1>_2
inline PureState qpa_closed_form(const QpaInput& in) {
  in.validate();
  const double h = std::numbers::sqrt2 / 2.0;
  return PureState(std::vector<cplx>{h * (in.a1 * in.a2 + in.b1 * in.b2), h * (in.a1 * in.b2 + in.b1 * in.a2),
                                     h * (in.a1 * in.b2 - in.b1 * in.a2), h * (in.a1 * in.a2 - in.b1 * in.b2)});
}

// Gate-level circuit: CNOT(1 -> 2), H on photon 1, CNOT(1 -> 2).
inline PureState qpa_circuit(const QpaInput& in) {
  in.validate();
  PureState s = tensor(PureState{in.a1, in.b1}, PureState{in.a2, in.b2});
  s = apply_gate(Gate::cnot(), s, 0, 1);
  s = apply_gate(Gate::hadamard(), s, 0);
  s = apply_gate(Gate::cnot(), s, 0, 1);
  return s;
}

struct QpaResult {
  int outcome;
  // Photon 1 after photon 2 is read in sigma_z.
  PureState photon1;
  PureState pre_measurement;
  std::array<double, 2> branch_probability;
};

inline QpaResult qpa_combine(const QpaInput& in, Rng& rng) {
  const PureState pre = qpa_circuit(in);
  const std::array<double, 2> probs{outcome_probability(pre, MeasureBasis::Z, 1, 0),
                                    outcome_probability(pre, MeasureBasis::Z, 1, 1)};
  const Measurement m = measure(pre, MeasureBasis::Z, 1, rng);
  const std::size_t offset = static_cast<std::size_t>(m.outcome);
  PureState photon1 = PureState::normalized({m.collapsed[offset], m.collapsed[2 + offset]});
  return {m.outcome, std::move(photon1), pre, probs};
}

// Fraction of combined outputs Eve fully knows when she independently knows
// each input photon with probability r.
inline double qpa_leakage_sim(double r, std::size_t trials, Rng& rng) {
  if (!(r >= 0.0 && r <= 1.0)) throw ContractViolation("qpa_leakage_sim: r must lie in [0, 1]");
  if (trials == 0) throw ContractViolation("qpa_leakage_sim: trials must be >= 1");
  std::size_t compromised = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const bool k1 = rng.bernoulli(r);
    const bool k2 = rng.bernoulli(r);
    if (k1 && k2) ++compromised;
  }
  return static_cast<double>(compromised) / static_cast<double>(trials);
}

// Extension point for purifying depolarized photons before amplification.
// Not modeled; returns its input.
inline PhotonSignal purify_polarization(const PhotonSignal& sig) { return sig; }

}  // namespace qsdc
