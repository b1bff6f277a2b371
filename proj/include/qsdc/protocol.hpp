#pragma once

// The three-party subsystem: a server (Alice) prepares |0> photons, the
// receiver (Charlie) checks and encrypts them, the sender (Bob) checks and
// encodes the message, and Alice measures and announces C_A = C_C xor C_B so
// that Charlie can decode.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qsdc/channel.hpp"
#include "qsdc/detection.hpp"
#include "qsdc/ledger.hpp"
#include "qsdc/qubit.hpp"
#include "qsdc/rng.hpp"

namespace qsdc {

// ---------------------------------------------------------------------------
// Network routing
// ---------------------------------------------------------------------------

class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class NetworkTopology {
 public:
  void add_server(const std::string& server) { servers_.insert(server); }

  // Each user belongs to exactly one branch.
  void add_user(const std::string& user, const std::string& server) {
    if (!servers_.count(server)) throw LookupError("unknown server '" + server + "'");
    if (branch_.count(user)) throw ContractViolation("user '" + user + "' already has a branch");
    branch_.emplace(user, server);
  }

  const std::string& branch_of(const std::string& user) const {
    const auto it = branch_.find(user);
    if (it == branch_.end()) throw LookupError("unknown user '" + user + "'");
    return it->second;
  }

  const std::set<std::string>& servers() const { return servers_; }

 private:
  std::set<std::string> servers_;
  std::map<std::string, std::string> branch_;
};

struct RouteDecision {
  std::string serving;
  // Servers that only connect the quantum line in this time slot.
  std::vector<std::string> pass_through;
};

// The server of the receiver's branch prepares and measures the photons.
inline RouteDecision route_request(const NetworkTopology& t, const std::string& sender,
                                   const std::string& receiver) {
  if (sender == receiver) throw ContractViolation("route_request: sender and receiver must differ");
  t.branch_of(sender);
  RouteDecision d{t.branch_of(receiver), {}};
  for (const auto& s : t.servers())
    if (s != d.serving) d.pass_through.push_back(s);
  return d;
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

struct ProtocolConfig {
  std::size_t photons = 1000;
  std::uint64_t seed = 0;
  // Leg-1 samples (half sigma_z, half beam-splitter tree).
  double f_s = 0.1;
  // Leg-2 check samples; half of them are H-rotated decoys.
  double f_d = 0.05;
  // Bob's leg-3 check photons.
  double f_b = 0.05;
  double abort_threshold = 0.05;
  std::size_t multiphoton_tolerance = 0;
  // Prior of message bit 0; P1 = 1 - P0.
  double p0 = 0.5;
  // Bob measures the encoded photons himself instead of returning them to
  // the server.
  bool bob_self_measures = false;
  ChannelNoise noise;
  AttackModel attack;
  // Explicit message; when empty a random message filling the capacity is drawn.
  std::optional<Bits> message;

  double p1() const { return 1.0 - p0; }
  CheckPolicy policy() const { return {abort_threshold, multiphoton_tolerance}; }

  void validate() const {
    if (photons == 0) throw ContractViolation("photons must be >= 1");
    for (auto [name, f] : {std::pair{"f_s", f_s}, std::pair{"f_d", f_d}, std::pair{"f_b", f_b}}) {
      if (!(f >= 0.0 && f < 1.0)) throw ContractViolation(std::string(name) + " must lie in [0, 1)");
    }
    if (!(f_s + f_d + f_b < 1.0)) throw ContractViolation("f_s + f_d + f_b must be < 1");
    if (!(abort_threshold >= 0.0 && abort_threshold <= 1.0)) {
      throw ContractViolation("abort_threshold must lie in [0, 1]");
    }
    if (!(p0 >= 0.0 && p0 <= 1.0)) throw ContractViolation("P0 must lie in [0, 1]");
    noise.validate();
  }
};

// Sample counts for a sequence of n photons. Cumulative rounding keeps the
// total overhead within 1/2 photon of (f_s + f_d + f_b) n.
struct SamplingPlan {
  std::size_t leg1 = 0;
  std::size_t leg2 = 0;
  std::size_t bob = 0;

  static SamplingPlan from(const ProtocolConfig& c) {
    const double n = static_cast<double>(c.photons);
    const auto r = [](double x) { return static_cast<std::size_t>(std::llround(x)); };
    SamplingPlan p;
    p.leg1 = r(c.f_s * n);
    p.leg2 = r((c.f_s + c.f_d) * n) - p.leg1;
    p.bob = r((c.f_s + c.f_d + c.f_b) * n) - p.leg1 - p.leg2;
    return p;
  }
  std::size_t overhead() const { return leg1 + leg2 + bob; }
};

// ---------------------------------------------------------------------------
// Protocol steps
// ---------------------------------------------------------------------------

using Sequence = std::vector<PhotonSignal>;

inline Sequence prepare_sequence(std::size_t n) {
  if (n == 0) throw ContractViolation("prepare_sequence: n must be >= 1");
  return Sequence(n);
}

// Removes k uniformly chosen entries from `pool` and returns them sorted.
inline std::vector<std::size_t> draw_positions(std::vector<std::size_t>& pool, std::size_t k, Rng& rng) {
  if (k > pool.size()) throw CapacityError("draw_positions: not enough free positions");
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  std::vector<std::size_t> chosen(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
  pool.erase(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(chosen.begin(), chosen.end());
  std::sort(pool.begin(), pool.end());
  return chosen;
}

inline std::vector<std::size_t> free_positions(const Sequence& seq) {
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < seq.size(); ++i)
    if (!seq[i].consumed && seq[i].role == SignalRole::Message) pool.push_back(i);
  return pool;
}

// Sends every in-flight signal across `leg`.
inline void transmit_sequence(Sequence& seq, Leg leg, const ProtocolConfig& cfg, Rng& rng,
                              std::vector<EveRecord>* eve_log = nullptr) {
  const LegAttack& attack = cfg.attack.on(leg);
  for (auto& s : seq) s = transmit(s, attack, cfg.noise, rng, eve_log);
}

// Charlie picks his leg-1 samples: the first half goes to the sigma_z state
// check, the rest through the beam-splitter tree.
inline void select_leg1_samples(Sequence& seq, PartyLedger& ledger, std::size_t count, Rng& rng) {
  auto pool = free_positions(seq);
  auto chosen = draw_positions(pool, count, rng);
  std::vector<std::size_t> order = chosen;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    std::swap(order[i], order[i + static_cast<std::size_t>(rng.below(order.size() - i))]);
  }
  const std::size_t nz = count / 2;
  ledger.sigma_z_sample_positions.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(nz));
  ledger.pbs_sample_positions.assign(order.begin() + static_cast<std::ptrdiff_t>(nz), order.end());
  std::sort(ledger.sigma_z_sample_positions.begin(), ledger.sigma_z_sample_positions.end());
  std::sort(ledger.pbs_sample_positions.begin(), ledger.pbs_sample_positions.end());
  for (auto p : ledger.sigma_z_sample_positions) seq[p].role = SignalRole::SigmaZSample;
  for (auto p : ledger.pbs_sample_positions) seq[p].role = SignalRole::PbsSample;
}

// Charlie measures his leg-1 samples: sigma_z errors against |0> and
// multi-click events in the splitter tree.
inline CheckOutcome charlie_leg1_check(Sequence& seq, const PartyLedger& ledger, const CheckPolicy& policy,
                                       Rng& rng) {
  std::vector<PureState> arrived;
  for (auto p : ledger.sigma_z_sample_positions) {
    if (!seq[p].lost) arrived.push_back(seq[p].photons.front());
    seq[p].consumed = true;
  }
  const SampleCount z = sigma_z_state_count(arrived, rng);
  std::size_t flags = 0;
  for (auto p : ledger.pbs_sample_positions) {
    if (multiphoton(pbs_split(seq[p], rng))) ++flags;
    seq[p].consumed = true;
  }
  return make_outcome(Leg::E1, z.samples, z.errors, flags, policy);
}

// Charlie applies U0/U1 uniformly to every remaining photon (C_C), then
// chooses the leg-2 check positions and rotates half of them with H.
inline void charlie_encrypt(Sequence& seq, PartyLedger& ledger, std::size_t check_count, Rng& rng) {
  ledger.charlie_ops.assign(seq.size(), 0);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq[i].consumed) continue;
    const int bit = rng.bit();
    ledger.charlie_ops[i] = static_cast<std::uint8_t>(bit);
    apply_to_signal(Gate::encoding(bit), seq[i]);
  }
  auto pool = free_positions(seq);
  ledger.check_positions = draw_positions(pool, check_count, rng);
  auto checks = ledger.check_positions;
  ledger.charlie_decoy_positions = draw_positions(checks, (check_count + 1) / 2, rng);
  for (auto p : ledger.check_positions) seq[p].role = SignalRole::CheckSample;
  for (auto p : ledger.charlie_decoy_positions) {
    seq[p].role = SignalRole::Decoy;
    apply_to_signal(Gate::hadamard(), seq[p]);
  }
}

struct Leg2Measurements {
  std::vector<Announcement> announcements;
  std::size_t multiphoton_flags = 0;
};

// Bob measures the requested samples in the bases Charlie names (sigma_x for
// decoys, sigma_z otherwise) and runs each through his own splitter tree.
inline Leg2Measurements bob_measure_samples(Sequence& seq, const PartyLedger& ledger, Rng& rng) {
  Leg2Measurements m;
  for (auto p : ledger.check_positions) {
    const MeasureBasis b = ledger.is_decoy(p) ? MeasureBasis::X : MeasureBasis::Z;
    auto& sig = seq[p];
    if (sig.lost) {
      m.announcements.push_back({p, b, AnnouncedBit::Erasure});
    } else {
      if (multiphoton(pbs_split(sig, rng))) ++m.multiphoton_flags;
      m.announcements.push_back({p, b, announced(measure(sig.photons.front(), b, 0, rng).outcome)});
    }
    sig.consumed = true;
  }
  return m;
}

// Bob draws his leg-3 check positions from what remains after Charlie's
// requests, applies random U there, and encodes the message on the rest in
// ascending position order (bit 0 -> U0, bit 1 -> U1).
inline void bob_encode(Sequence& seq, const Bits& message, PartyLedger& ledger, std::size_t check_count,
                       Rng& rng) {
  auto pool = free_positions(seq);
  if (check_count > pool.size()) throw CapacityError("bob_encode: not enough positions for Bob's checks");
  if (message.size() > pool.size() - check_count) {
    throw CapacityError("bob_encode: message of " + std::to_string(message.size()) + " bits exceeds capacity " +
                        std::to_string(pool.size() - check_count));
  }
  ledger.bob_check_positions = draw_positions(pool, check_count, rng);
  ledger.bob_check_ops.clear();
  for (auto p : ledger.bob_check_positions) {
    const int bit = rng.bit();
    ledger.bob_check_ops.push_back(static_cast<std::uint8_t>(bit));
    seq[p].role = SignalRole::BobCheck;
    apply_to_signal(Gate::encoding(bit), seq[p]);
  }
  ledger.message_positions.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(message.size()));
  ledger.idle_positions.assign(pool.begin() + static_cast<std::ptrdiff_t>(message.size()), pool.end());
  ledger.bob_message = message;
  for (std::size_t i = 0; i < message.size(); ++i) {
    auto& sig = seq[ledger.message_positions[i]];
    apply_to_signal(Gate::encoding(message[i]), sig);
  }
  for (auto p : ledger.idle_positions) seq[p].role = SignalRole::Idle;
}

// sigma_z readout of every in-flight signal; everything else is an erasure.
inline std::vector<AnnouncedBit> alice_measure_announce(Sequence& seq, Rng& rng) {
  std::vector<AnnouncedBit> out(seq.size(), AnnouncedBit::Erasure);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    auto& sig = seq[i];
    if (!sig.in_flight()) continue;
    out[i] = announced(measure(sig.photons.front(), MeasureBasis::Z, 0, rng).outcome);
    sig.consumed = true;
  }
  return out;
}

// On Bob's check positions the announced bit must equal C_C xor Bob's op.
inline CheckOutcome leg3_check(const PartyLedger& ledger, const CheckPolicy& policy) {
  std::size_t samples = 0;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < ledger.bob_check_positions.size(); ++i) {
    const std::size_t p = ledger.bob_check_positions[i];
    const AnnouncedBit a = ledger.alice_announced.at(p);
    if (a == AnnouncedBit::Erasure) continue;
    ++samples;
    const int want = ledger.charlie_ops.at(p) ^ ledger.bob_check_ops[i];
    if (static_cast<int>(a) != want) ++errors;
  }
  return make_outcome(Leg::E3, samples, errors, 0, policy);
}

// Positionwise C_A xor C_C; erasures pass through.
inline std::vector<AnnouncedBit> xor_decode(std::span<const AnnouncedBit> announced_bits, std::span<const std::uint8_t> key) {
  if (announced_bits.size() != key.size()) throw ContractViolation("xor_decode: length mismatch");
  std::vector<AnnouncedBit> out(key.size());
  for (std::size_t i = 0; i < key.size(); ++i) {
    out[i] = announced_bits[i] == AnnouncedBit::Erasure ? AnnouncedBit::Erasure
                                                        : announced(static_cast<int>(announced_bits[i]) ^ key[i]);
  }
  return out;
}

inline std::vector<AnnouncedBit> charlie_decode(std::span<const AnnouncedBit> c_a, const PartyLedger& ledger) {
  std::vector<AnnouncedBit> on_msg;
  Bits key;
  for (auto p : ledger.message_positions) {
    on_msg.push_back(c_a[p]);
    key.push_back(ledger.charlie_ops.at(p));
  }
  return xor_decode(on_msg, key);
}

// ---------------------------------------------------------------------------
// Full run
// ---------------------------------------------------------------------------

struct RunReport {
  ProtocolConfig config;
  std::vector<CheckOutcome> checks;
  std::optional<Leg> abort_leg;
  std::size_t message_length = 0;
  bool delivered = false;
  std::size_t mismatches = 0;
  std::size_t erasures = 0;
  // Message bits delivered per transmitted photon.
  double efficiency = 0.0;
  // Eve's raw measurement records (intercept-resend only).
  std::size_t eve_measurements = 0;
  double wall_time_s = 0.0;
  PartyLedger ledger;

  bool aborted() const { return abort_leg.has_value(); }
};

inline Bits random_message(std::size_t bits, double p1, Rng& rng) {
  Bits m(bits);
  for (auto& b : m) b = rng.bernoulli(p1) ? 1 : 0;
  return m;
}

inline RunReport run_subsystem(const ProtocolConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(cfg.seed);
  const SamplingPlan plan = SamplingPlan::from(cfg);
  const CheckPolicy policy = cfg.policy();

  RunReport rep;
  rep.config = cfg;
  PartyLedger& ledger = rep.ledger;
  ledger.n = cfg.photons;
  std::vector<EveRecord> eve;

  const std::size_t capacity = cfg.photons - plan.overhead();
  const Bits message = cfg.message ? *cfg.message : random_message(capacity, cfg.p1(), rng);
  rep.message_length = message.size();
  if (message.size() > capacity) {
    throw CapacityError("run_subsystem: message of " + std::to_string(message.size()) +
                        " bits exceeds capacity " + std::to_string(capacity));
  }

  auto finish = [&]() -> RunReport {
    rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.eve_measurements = eve.size();
    return std::move(rep);
  };
  auto record = [&](CheckOutcome o) {
    rep.checks.push_back(o);
    if (o.abort) rep.abort_leg = o.leg;
    return o.abort;
  };

  Sequence seq = prepare_sequence(cfg.photons);
  select_leg1_samples(seq, ledger, plan.leg1, rng);
  transmit_sequence(seq, Leg::E1, cfg, rng, &eve);
  if (record(charlie_leg1_check(seq, ledger, policy, rng))) return finish();

  charlie_encrypt(seq, ledger, plan.leg2, rng);
  transmit_sequence(seq, Leg::E2, cfg, rng, &eve);
  const Leg2Measurements m2 = bob_measure_samples(seq, ledger, rng);
  if (record(announced_outcome_check(ledger.check_positions, m2.announcements, ledger, policy,
                                     m2.multiphoton_flags, Leg::E2))) {
    return finish();
  }

  bob_encode(seq, message, ledger, plan.bob, rng);
  if (!cfg.bob_self_measures) transmit_sequence(seq, Leg::E3, cfg, rng, &eve);
  ledger.alice_announced = alice_measure_announce(seq, rng);
  if (record(leg3_check(ledger, policy))) return finish();

  ledger.decoded = charlie_decode(ledger.alice_announced, ledger);
  rep.delivered = true;
  for (std::size_t i = 0; i < message.size(); ++i) {
    if (ledger.decoded[i] == AnnouncedBit::Erasure) {
      ++rep.erasures;
    } else if (static_cast<int>(ledger.decoded[i]) != message[i]) {
      ++rep.mismatches;
    }
  }
  rep.efficiency = static_cast<double>(message.size()) / static_cast<double>(cfg.photons);
  return finish();
}

}  // namespace qsdc
