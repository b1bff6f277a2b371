#pragma once

// Eavesdropping checks: the sigma_z check on the server's |0> photons, the
// beam-splitter tree against multiphoton fake signals, and the comparison of
// announced sample outcomes with Charlie's recorded operations.

#include <bitset>
#include <cmath>
#include <cstddef>
#include <span>
#include <unordered_map>
#include <vector>

#include "qsdc/channel.hpp"
#include "qsdc/ledger.hpp"
#include "qsdc/qubit.hpp"
#include "qsdc/rng.hpp"

namespace qsdc {

// Three ideal 50/50 splitters: a root splitter feeding two leaf splitters,
// each leaf feeding two single-photon detectors D1..D4.
struct PbsTree {
  static constexpr std::size_t kDetectors = 4;

  // Detector index (0-based) reached by one photon.
  static std::size_t route(Rng& rng) {
    const std::size_t root = static_cast<std::size_t>(rng.bit());
    const std::size_t leaf = static_cast<std::size_t>(rng.bit());
    return 2 * root + leaf;
  }
};

using ClickSet = std::bitset<PbsTree::kDetectors>;

// A lost signal produces no click.
inline ClickSet pbs_split(const PhotonSignal& sig, Rng& rng) {
  ClickSet clicks;
  for (std::size_t i = 0; i < sig.photon_count(); ++i) clicks.set(PbsTree::route(rng));
  return clicks;
}

inline bool multiphoton(const ClickSet& clicks) { return clicks.count() >= 2; }

struct CheckPolicy {
  double abort_threshold = 0.05;
  std::size_t multiphoton_tolerance = 0;
};

struct CheckOutcome {
  Leg leg = Leg::E1;
  std::size_t samples_used = 0;
  std::size_t errors = 0;
  double error_rate = 0.0;
  std::size_t multiphoton_flags = 0;
  // A requested announcement was missing.
  bool protocol_violation = false;
  bool abort = false;
};

inline CheckOutcome make_outcome(Leg leg, std::size_t samples, std::size_t errors, std::size_t flags,
                                 const CheckPolicy& policy) {
  CheckOutcome o;
  o.leg = leg;
  o.samples_used = samples;
  o.errors = errors;
  o.error_rate = samples ? static_cast<double>(errors) / static_cast<double>(samples) : 0.0;
  o.multiphoton_flags = flags;
  o.abort = o.error_rate > policy.abort_threshold || flags > policy.multiphoton_tolerance;
  return o;
}

struct SampleCount {
  std::size_t samples = 0;
  std::size_t errors = 0;

  double rate() const { return samples ? static_cast<double>(errors) / static_cast<double>(samples) : 0.0; }
};

// Every sample should still be the server's |0>; any 1 in sigma_z is an error.
inline SampleCount sigma_z_state_count(std::span<const PureState> samples, Rng& rng) {
  SampleCount c;
  for (const auto& s : samples) {
    ++c.samples;
    if (measure(s, MeasureBasis::Z, 0, rng).outcome != 0) ++c.errors;
  }
  return c;
}

inline double sigma_z_state_check(std::span<const PureState> samples, Rng& rng) {
  return sigma_z_state_count(samples, rng).rate();
}

// Bob's published result for one requested sample position.
struct Announcement {
  std::size_t position;
  MeasureBasis basis;
  AnnouncedBit outcome;
};

// Outcome Charlie expects at `pos` when the photon is read in `basis`, from
// |0> and his recorded U (and H for decoys). Returns -1 when the outcome is
// not determined (basis does not match the state's eigenbasis).
inline int expected_outcome(const PartyLedger& ledger, std::size_t pos, MeasureBasis basis) {
  PureState s = apply_gate(Gate::encoding(ledger.charlie_ops.at(pos)), PureState::zero(), 0);
  if (ledger.is_decoy(pos)) s = apply_gate(Gate::hadamard(), s, 0);
  const double p1 = outcome_probability(s, basis, 0, 1);
  if (p1 > 1.0 - kChainTol) return 1;
  if (p1 < kChainTol) return 0;
  return -1;
}

// Compares Bob's announcements with what Charlie's operations predict.
// Erasures are excluded from the sample count; a position with no
// announcement at all is a protocol violation and aborts immediately.
inline CheckOutcome announced_outcome_check(std::span<const std::size_t> positions,
                                            std::span<const Announcement> announcements,
                                            const PartyLedger& ledger, const CheckPolicy& policy,
                                            std::size_t multiphoton_flags = 0, Leg leg = Leg::E2) {
  std::unordered_map<std::size_t, const Announcement*> by_pos;
  by_pos.reserve(announcements.size());
  for (const auto& a : announcements) by_pos.emplace(a.position, &a);

  std::size_t samples = 0;
  std::size_t errors = 0;
  for (auto pos : positions) {
    const auto it = by_pos.find(pos);
    if (it == by_pos.end()) {
      CheckOutcome o = make_outcome(leg, samples, errors, multiphoton_flags, policy);
      o.protocol_violation = true;
      o.abort = true;
      return o;
    }
    const Announcement& a = *it->second;
    if (a.outcome == AnnouncedBit::Erasure) continue;
    const int want = expected_outcome(ledger, pos, a.basis);
    if (want < 0) continue;
    ++samples;
    if (static_cast<int>(a.outcome) != want) ++errors;
  }
  return make_outcome(leg, samples, errors, multiphoton_flags, policy);
}

}  // namespace qsdc
