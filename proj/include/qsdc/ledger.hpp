#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace qsdc {

// A bit published on the classical channel; lost photons are announced as
// explicit erasures.
enum class AnnouncedBit : std::uint8_t { Zero = 0, One = 1, Erasure = 2 };

inline AnnouncedBit announced(int bit) { return bit ? AnnouncedBit::One : AnnouncedBit::Zero; }

inline char symbol(AnnouncedBit b) {
  switch (b) {
    case AnnouncedBit::Zero: return '0';
    case AnnouncedBit::One: return '1';
    case AnnouncedBit::Erasure: return '?';
  }
  return '?';
}

inline std::string to_string(const std::vector<AnnouncedBit>& bits) {
  std::string s;
  s.reserve(bits.size());
  for (auto b : bits) s.push_back(symbol(b));
  return s;
}

using Bits = std::vector<std::uint8_t>;

// Per-party records for one run over a sequence of n positions.
//
// Position sets are sorted ascending and, once a run has filled them, are
// pairwise disjoint and together cover [0, n).
struct PartyLedger {
  std::size_t n = 0;

  // Charlie: leg-1 samples he measures himself.
  std::vector<std::size_t> sigma_z_sample_positions;
  std::vector<std::size_t> pbs_sample_positions;

  // Charlie's encryption bits C_C, one per position (0 for positions he
  // measured before encrypting).
  Bits charlie_ops;
  // Leg-2 check positions Charlie asks Bob to measure; decoys are the subset
  // he also rotated with H.
  std::vector<std::size_t> check_positions;
  std::vector<std::size_t> charlie_decoy_positions;

  // Bob: message positions and bits C_B, his own leg-3 check positions and
  // the random operations he applied there.
  std::vector<std::size_t> message_positions;
  Bits bob_message;
  std::vector<std::size_t> bob_check_positions;
  Bits bob_check_ops;
  // Positions left over when the message is shorter than the capacity.
  std::vector<std::size_t> idle_positions;

  // Public announcement C_A (one entry per position; non-transmitted
  // positions are erasures) and Charlie's decoded message.
  std::vector<AnnouncedBit> alice_announced;
  std::vector<AnnouncedBit> decoded;

  bool is_decoy(std::size_t pos) const {
    return std::binary_search(charlie_decoy_positions.begin(), charlie_decoy_positions.end(), pos);
  }
};

}  // namespace qsdc
