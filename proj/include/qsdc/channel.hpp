#pragma once

// Quantum channel legs of the three-party subsystem and the eavesdropping
// strategies that can be placed on them.
//
//   E1: Alice (server) -> Charlie (receiver)
//   E2: Charlie -> Bob (sender)
//   E3: Bob -> Alice

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qsdc/qubit.hpp"
#include "qsdc/rng.hpp"

namespace qsdc {

enum class Leg { E1 = 0, E2 = 1, E3 = 2 };

inline constexpr std::array<Leg, 3> kAllLegs{Leg::E1, Leg::E2, Leg::E3};

inline std::string_view leg_name(Leg l) {
  switch (l) {
    case Leg::E1: return "E1";
    case Leg::E2: return "E2";
    case Leg::E3: return "E3";
  }
  return "?";
}

inline std::optional<Leg> parse_leg(std::string_view s) {
  if (s == "E1" || s == "e1" || s == "1") return Leg::E1;
  if (s == "E2" || s == "e2" || s == "2") return Leg::E2;
  if (s == "E3" || s == "e3" || s == "3") return Leg::E3;
  return std::nullopt;
}

enum class SignalRole { Message, SigmaZSample, PbsSample, Decoy, CheckSample, BobCheck, Idle };

inline std::string_view role_name(SignalRole r) {
  switch (r) {
    case SignalRole::Message: return "message";
    case SignalRole::SigmaZSample: return "sigma_z_sample";
    case SignalRole::PbsSample: return "pbs_sample";
    case SignalRole::Decoy: return "decoy";
    case SignalRole::CheckSample: return "check_sample";
    case SignalRole::BobCheck: return "bob_check";
    case SignalRole::Idle: return "idle";
  }
  return "?";
}

// One transmitted pulse. photons[0] is the legitimate photon; any further
// entries are injected fake-signal photons. Each photon may carry an
// entangled probe register (qubits 1.. of its state); qubit 0 is always the
// photon's polarization.
struct PhotonSignal {
  std::vector<PureState> photons{PureState::zero()};
  bool lost = false;
  // Set once a party has measured the signal; it is no longer in flight.
  bool consumed = false;
  SignalRole role = SignalRole::Message;

  std::size_t photon_count() const { return lost ? 0 : photons.size(); }
  bool in_flight() const { return !lost && !consumed; }
};

// Applies a single-qubit gate to the polarization of every photon in the
// signal. Local operations act on the optical mode, so injected photons are
// transformed along with the legitimate one.
inline void apply_to_signal(const Gate& g, PhotonSignal& sig) {
  if (sig.lost) return;
  for (auto& p : sig.photons) p = apply_gate(g, p, 0);
}

// ---------------------------------------------------------------------------
// Collective attack
// ---------------------------------------------------------------------------

using AncillaVector = std::array<cplx, 4>;

enum class AncillaGeometry { Orthonormal, BasisCopy, PhaseCovariant };

inline constexpr std::array<AncillaGeometry, 3> kPresetGeometries{
    AncillaGeometry::Orthonormal, AncillaGeometry::BasisCopy, AncillaGeometry::PhaseCovariant};

inline std::string_view geometry_name(AncillaGeometry g) {
  switch (g) {
    case AncillaGeometry::Orthonormal: return "orthonormal";
    case AncillaGeometry::BasisCopy: return "basis_copy";
    case AncillaGeometry::PhaseCovariant: return "phase_covariant";
  }
  return "?";
}

inline std::optional<AncillaGeometry> parse_geometry(std::string_view s) {
  for (auto g : kPresetGeometries)
    if (geometry_name(g) == s) return g;
  if (s == "basis-copy") return AncillaGeometry::BasisCopy;
  if (s == "phase-covariant") return AncillaGeometry::PhaseCovariant;
  return std::nullopt;
}

// Parameters of the probe unitary E acting on photon (x) |0>_ancilla:
//
//   E|0>|0> = sqrt(F)|0>|e00> + sqrt(D)|1>|e01>
//   E|1>|0> = sqrt(D)|0>|e10> + sqrt(F)|1>|e11>
//
// with D = 1 - F and unit directions e_ij in a 4-dimensional ancilla space.
// Unitarity of E on the span of its inputs requires
//   sqrt(F D) (<e00|e10> + <e01|e11>) = 0.
class CollectiveParams {
 public:
  enum Slot { k00 = 0, k01 = 1, k10 = 2, k11 = 3 };

  CollectiveParams(double fidelity, std::array<AncillaVector, 4> directions)
      : fidelity_(fidelity), dirs_(directions) {
    if (!(fidelity >= 0.0 && fidelity <= 1.0)) {
      throw ContractViolation("CollectiveParams: fidelity must lie in [0, 1]");
    }
    for (const auto& v : dirs_) {
      double n2 = 0.0;
      for (const auto& a : v) n2 += std::norm(a);
      if (std::abs(n2 - 1.0) > kAlgebraTol) {
        throw ContractViolation("CollectiveParams: ancilla directions must be unit vectors");
      }
    }
    if (std::abs(cross_overlap()) > kAlgebraTol) {
      throw ContractViolation("CollectiveParams: <e00|e10> + <e01|e11> != 0, map is not unitary");
    }
  }

  // All four directions mutually orthogonal.
  static CollectiveParams orthonormal(double fidelity) {
    return CollectiveParams(fidelity, {unit(0), unit(1), unit(2), unit(3)});
  }
  // The ancilla records the incoming sigma_z value: e00 = e01 = |0>, e10 = e11 = |1>.
  static CollectiveParams basis_copy(double fidelity) {
    return CollectiveParams(fidelity, {unit(0), unit(0), unit(1), unit(1)});
  }
  // e00 = e11, so at F = 1 the probe is untouched and the photon passes unchanged.
  static CollectiveParams phase_covariant(double fidelity) {
    return CollectiveParams(fidelity, {unit(0), unit(1), unit(2), unit(0)});
  }
  static CollectiveParams preset(AncillaGeometry g, double fidelity) {
    switch (g) {
      case AncillaGeometry::Orthonormal: return orthonormal(fidelity);
      case AncillaGeometry::BasisCopy: return basis_copy(fidelity);
      case AncillaGeometry::PhaseCovariant: return phase_covariant(fidelity);
    }
    throw ContractViolation("CollectiveParams::preset: unknown geometry");
  }

  double fidelity() const { return fidelity_; }
  double disturbance() const { return 1.0 - fidelity_; }
  const AncillaVector& direction(Slot s) const { return dirs_[s]; }

  // Scaled vector e_ij, including the sqrt(F) or sqrt(D) weight.
  AncillaVector vector(Slot s) const {
    const double w = (s == k00 || s == k11) ? std::sqrt(fidelity_) : std::sqrt(disturbance());
    AncillaVector v = dirs_[s];
    for (auto& a : v) a *= w;
    return v;
  }

  // <e00|e10> + <e01|e11> with the scaled vectors.
  cplx cross_overlap() const {
    const auto dot = [](const AncillaVector& a, const AncillaVector& b) {
      cplx s = 0.0;
      for (std::size_t i = 0; i < 4; ++i) s += std::conj(a[i]) * b[i];
      return s;
    };
    return dot(vector(k00), vector(k10)) + dot(vector(k01), vector(k11));
  }

 private:
  static AncillaVector unit(std::size_t i) {
    AncillaVector v{};
    v[i] = 1.0;
    return v;
  }

  double fidelity_;
  std::array<AncillaVector, 4> dirs_;
};

// Applies E to a 1-qubit photon; returns photon (x) ancilla (3 qubits,
// photon = qubit 0) by linear extension of E|0>|0>, E|1>|0>.
inline PureState collective_attack(const PureState& photon, const CollectiveParams& params) {
  if (photon.qubits() != 1) throw ContractViolation("collective_attack: photon must be a single qubit");
  const cplx alpha = photon[0];
  const cplx beta = photon[1];
  const auto e00 = params.vector(CollectiveParams::k00);
  const auto e01 = params.vector(CollectiveParams::k01);
  const auto e10 = params.vector(CollectiveParams::k10);
  const auto e11 = params.vector(CollectiveParams::k11);
  std::vector<cplx> out(8);
  for (std::size_t k = 0; k < 4; ++k) {
    out[k] = alpha * e00[k] + beta * e10[k];
    out[4 + k] = alpha * e01[k] + beta * e11[k];
  }
  return PureState(std::move(out));
}

// Exact sample error probabilities the attack induces on the two check
// families: sigma_z samples (|0> or -|1>, read in Z) and decoys (|+x> or
// -|-x>, read in X). Each is averaged over the two equally likely inputs.
struct DetectionRates {
  double sigma_z = 0.0;
  double sigma_x = 0.0;

  double weighted(double weight_x) const { return (1.0 - weight_x) * sigma_z + weight_x * sigma_x; }
};

inline DetectionRates detection_rates(const CollectiveParams& params) {
  auto flip = [&](MeasureBasis b, int bit) {
    const PureState out = collective_attack(basis_state(b, bit), params);
    return outcome_probability(out, b, 0, 1 - bit);
  };
  return {0.5 * (flip(MeasureBasis::Z, 0) + flip(MeasureBasis::Z, 1)),
          0.5 * (flip(MeasureBasis::X, 0) + flip(MeasureBasis::X, 1))};
}

// ---------------------------------------------------------------------------
// Attack model
// ---------------------------------------------------------------------------

enum class BasisPolicy { AlwaysZ, AlwaysX, Random };

inline std::string_view policy_name(BasisPolicy p) {
  switch (p) {
    case BasisPolicy::AlwaysZ: return "z";
    case BasisPolicy::AlwaysX: return "x";
    case BasisPolicy::Random: return "random";
  }
  return "?";
}

struct NoAttack {};
struct InterceptResend {
  BasisPolicy policy = BasisPolicy::Random;
};
struct TrojanInject {
  std::size_t extra_photons = 1;
  PureState probe = PureState::zero();
};
struct CollectiveAttack {
  CollectiveParams params = CollectiveParams::phase_covariant(1.0);
};

using LegAttack = std::variant<NoAttack, InterceptResend, TrojanInject, CollectiveAttack>;

inline std::string_view attack_kind_name(const LegAttack& a) {
  switch (a.index()) {
    case 0: return "none";
    case 1: return "intercept_resend";
    case 2: return "trojan";
    case 3: return "collective";
  }
  return "?";
}

// At most one strategy per leg.
struct AttackModel {
  std::array<LegAttack, 3> legs{};

  const LegAttack& on(Leg l) const { return legs[static_cast<std::size_t>(l)]; }
  AttackModel& set(Leg l, LegAttack a) {
    legs[static_cast<std::size_t>(l)] = std::move(a);
    return *this;
  }
  bool any() const {
    for (const auto& a : legs)
      if (!std::holds_alternative<NoAttack>(a)) return true;
    return false;
  }
};

// Noise on a leg: each photon is lost with probability `loss`; surviving
// photons are depolarized with probability `depolarize` (a uniformly random
// Pauli from {I, X, Y, Z} is applied to the polarization).
struct ChannelNoise {
  double depolarize = 0.0;
  double loss = 0.0;

  void validate() const {
    if (!(depolarize >= 0.0 && depolarize <= 1.0)) throw ContractViolation("ChannelNoise: p outside [0, 1]");
    if (!(loss >= 0.0 && loss <= 1.0)) throw ContractViolation("ChannelNoise: loss outside [0, 1]");
  }
  bool silent() const { return depolarize == 0.0 && loss == 0.0; }
};

// What an eavesdropper recorded while measuring one photon.
struct EveRecord {
  MeasureBasis basis;
  int outcome;
};

struct InterceptResult {
  PhotonSignal resent;
  std::vector<EveRecord> records;
};

inline MeasureBasis choose_basis(BasisPolicy policy, Rng& rng) {
  switch (policy) {
    case BasisPolicy::AlwaysZ: return MeasureBasis::Z;
    case BasisPolicy::AlwaysX: return MeasureBasis::X;
    case BasisPolicy::Random: return rng.bit() ? MeasureBasis::X : MeasureBasis::Z;
  }
  return MeasureBasis::Z;
}

// Eve measures every photon of the signal in a basis chosen by `policy` and
// resends a fresh eigenstate matching her outcome.
inline InterceptResult intercept_resend(const PhotonSignal& sig, BasisPolicy policy, Rng& rng) {
  InterceptResult r{sig, {}};
  if (sig.lost) return r;
  for (auto& p : r.resent.photons) {
    const MeasureBasis b = choose_basis(policy, rng);
    const int bit = measure(p, b, 0, rng).outcome;
    r.records.push_back({b, bit});
    p = basis_state(b, bit);
  }
  return r;
}

inline PhotonSignal trojan_inject(const PhotonSignal& sig, std::size_t k, const PureState& probe) {
  if (k == 0) throw ContractViolation("trojan_inject: at least one probe photon is required");
  if (probe.qubits() != 1) throw ContractViolation("trojan_inject: probe must be a single photon");
  PhotonSignal out = sig;
  if (out.lost) return out;
  out.photons.insert(out.photons.end(), k, probe);
  return out;
}

inline PhotonSignal apply_noise(const PhotonSignal& sig, const ChannelNoise& noise, Rng& rng) {
  PhotonSignal out = sig;
  if (out.lost || noise.silent()) return out;
  std::vector<PureState> kept;
  kept.reserve(out.photons.size());
  for (auto& p : out.photons) {
    if (rng.bernoulli(noise.loss)) continue;
    if (rng.bernoulli(noise.depolarize)) {
      switch (rng.below(4)) {
        case 1: p = apply_gate(Gate::pauli_x(), p, 0); break;
        case 2: p = apply_gate(Gate::pauli_y(), p, 0); break;
        case 3: p = apply_gate(Gate::pauli_z(), p, 0); break;
        default: break;
      }
    }
    kept.push_back(std::move(p));
  }
  if (kept.empty()) {
    out.lost = true;
  } else {
    out.photons = std::move(kept);
  }
  return out;
}

// Collective attack on every photon of a signal. A probe register left by
// an earlier leg is first measured out by Eve, which leaves the photon's
// reduced state unchanged on average and keeps states within three qubits.
inline PhotonSignal collective_attack(const PhotonSignal& sig, const CollectiveParams& params, Rng& rng) {
  PhotonSignal out = sig;
  if (out.lost) return out;
  for (auto& p : out.photons) {
    const PureState photon = p.qubits() == 1 ? p : measure_out_others(p, 0, rng);
    p = collective_attack(photon, params);
  }
  return out;
}

// Sends one in-flight signal across a leg: the attack configured for the
// leg acts first, then channel noise.
inline PhotonSignal transmit(const PhotonSignal& sig, const LegAttack& attack, const ChannelNoise& noise,
                             Rng& rng, std::vector<EveRecord>* eve_log = nullptr) {
  if (!sig.in_flight()) return sig;
  PhotonSignal cur = sig;
  if (const auto* ir = std::get_if<InterceptResend>(&attack)) {
    auto r = intercept_resend(cur, ir->policy, rng);
    if (eve_log) eve_log->insert(eve_log->end(), r.records.begin(), r.records.end());
    cur = std::move(r.resent);
  } else if (const auto* tj = std::get_if<TrojanInject>(&attack)) {
    cur = trojan_inject(cur, tj->extra_photons, tj->probe);
  } else if (const auto* ca = std::get_if<CollectiveAttack>(&attack)) {
    cur = collective_attack(cur, ca->params, rng);
  }
  return apply_noise(cur, noise, rng);
}

}  // namespace qsdc
