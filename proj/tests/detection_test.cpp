#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "qsdc/channel.hpp"
#include "qsdc/detection.hpp"
#include "qsdc/ledger.hpp"

using namespace qsdc;

namespace {

PhotonSignal with_photons(std::size_t k) {
  PhotonSignal s;
  s.photons.assign(k, PureState::zero());
  return s;
}

// Ledger of n positions with every Charlie op and decoy flag given explicitly.
PartyLedger ledger_of(const Bits& ops, const std::vector<std::size_t>& decoys) {
  PartyLedger l;
  l.n = ops.size();
  l.charlie_ops = ops;
  l.charlie_decoy_positions = decoys;
  return l;
}

// Number of the 4^k routings that hit two or more detectors.
double enumerated_multiclick(std::size_t k) {
  std::size_t total = 1;
  for (std::size_t i = 0; i < k; ++i) total *= 4;
  std::size_t multi = 0;
  for (std::size_t code = 0; code < total; ++code) {
    unsigned seen = 0;
    std::size_t c = code;
    for (std::size_t i = 0; i < k; ++i, c /= 4) seen |= 1u << (c % 4);
    if (__builtin_popcount(seen) >= 2) ++multi;
  }
  return double(multi) / double(total);
}

}  // namespace

TEST(Pbs, SinglePhotonAlwaysOneClick) {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) EXPECT_EQ(pbs_split(with_photons(1), rng).count(), 1u);
}

TEST(Pbs, DetectorsEquallyLikely) {
  Rng rng(2);
  std::array<int, 4> hits{};
  const int trials = 40000;
  for (int i = 0; i < trials; ++i) ++hits[PbsTree::route(rng)];
  for (int h : hits) EXPECT_NEAR(h / double(trials), 0.25, 0.01);
}

TEST(Pbs, TwoPhotonEnumerationIsThreeQuarters) {
  EXPECT_DOUBLE_EQ(enumerated_multiclick(2), 0.75);
  EXPECT_DOUBLE_EQ(enumerated_multiclick(3), 1.0 - 1.0 / 16.0);
}

TEST(Pbs, TwoPhotonMonteCarlo) {
  Rng rng(3);
  int multi = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) multi += multiphoton(pbs_split(with_photons(2), rng));
  EXPECT_NEAR(multi / double(trials), 0.75, 0.02);
}

TEST(Pbs, ThreePhotonMonteCarlo) {
  Rng rng(4);
  int multi = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) multi += multiphoton(pbs_split(with_photons(3), rng));
  EXPECT_NEAR(multi / double(trials), 0.9375, 0.01);
}

TEST(Pbs, ClickCountBounds) {
  Rng rng(5);
  for (std::size_t k = 1; k <= 7; ++k) {
    for (int i = 0; i < 500; ++i) {
      const auto c = pbs_split(with_photons(k), rng).count();
      EXPECT_GE(c, 1u);
      EXPECT_LE(c, std::min<std::size_t>(4, k));
    }
  }
}

TEST(Pbs, LostSignalHasNoClick) {
  Rng rng(6);
  PhotonSignal s = with_photons(2);
  s.lost = true;
  EXPECT_EQ(pbs_split(s, rng).count(), 0u);
}

TEST(SigmaZCheck, CleanSamplesHaveNoErrors) {
  Rng rng(7);
  std::vector<PureState> samples(1000, PureState::zero());
  EXPECT_EQ(sigma_z_state_check(samples, rng), 0.0);
}

TEST(SigmaZCheck, AfterRandomInterceptResend) {
  Rng rng(8);
  std::vector<PureState> samples;
  for (int i = 0; i < 10000; ++i) {
    PhotonSignal s;
    samples.push_back(intercept_resend(s, BasisPolicy::Random, rng).resent.photons[0]);
  }
  EXPECT_NEAR(sigma_z_state_check(samples, rng), 0.25, 0.02);
}

TEST(SigmaZCheck, AfterDepolarizing) {
  Rng rng(9);
  std::vector<PureState> samples;
  for (int i = 0; i < 10000; ++i) samples.push_back(apply_noise(PhotonSignal{}, {0.2, 0.0}, rng).photons[0]);
  EXPECT_NEAR(sigma_z_state_check(samples, rng), 0.10, 0.02);
}

TEST(AnnouncedCheck, U1WithoutDecoyAnnouncesOne) {
  const PartyLedger l = ledger_of({1}, {});
  const std::vector<std::size_t> pos{0};
  const std::vector<Announcement> ok{{0, MeasureBasis::Z, AnnouncedBit::One}};
  const auto o = announced_outcome_check(pos, ok, l, {});
  EXPECT_EQ(o.samples_used, 1u);
  EXPECT_EQ(o.errors, 0u);
  EXPECT_FALSE(o.abort);
  const std::vector<Announcement> bad{{0, MeasureBasis::Z, AnnouncedBit::Zero}};
  EXPECT_EQ(announced_outcome_check(pos, bad, l, {}).errors, 1u);
}

TEST(AnnouncedCheck, DecoyExpectations) {
  // U0 then H -> |+x> (outcome 0); U1 then H -> -|-x> (outcome 1).
  const PartyLedger l = ledger_of({0, 1}, {0, 1});
  EXPECT_EQ(expected_outcome(l, 0, MeasureBasis::X), 0);
  EXPECT_EQ(expected_outcome(l, 1, MeasureBasis::X), 1);
  EXPECT_EQ(expected_outcome(l, 0, MeasureBasis::Z), -1);
  const std::vector<std::size_t> pos{0, 1};
  const std::vector<Announcement> a{{0, MeasureBasis::X, AnnouncedBit::Zero}, {1, MeasureBasis::X, AnnouncedBit::One}};
  const auto o = announced_outcome_check(pos, a, l, {});
  EXPECT_EQ(o.samples_used, 2u);
  EXPECT_EQ(o.errors, 0u);
}

TEST(AnnouncedCheck, MissingAnnouncementIsViolation) {
  const PartyLedger l = ledger_of({0, 0, 0}, {});
  const std::vector<std::size_t> pos{0, 1, 2};
  const std::vector<Announcement> a{{0, MeasureBasis::Z, AnnouncedBit::Zero}, {2, MeasureBasis::Z, AnnouncedBit::Zero}};
  const auto o = announced_outcome_check(pos, a, l, {});
  EXPECT_TRUE(o.protocol_violation);
  EXPECT_TRUE(o.abort);
}

TEST(AnnouncedCheck, ErasuresAreSkipped) {
  const PartyLedger l = ledger_of({1, 0}, {});
  const std::vector<std::size_t> pos{0, 1};
  const std::vector<Announcement> a{{0, MeasureBasis::Z, AnnouncedBit::Erasure}, {1, MeasureBasis::Z, AnnouncedBit::Zero}};
  const auto o = announced_outcome_check(pos, a, l, {});
  EXPECT_EQ(o.samples_used, 1u);
  EXPECT_EQ(o.errors, 0u);
}

TEST(AnnouncedCheck, DecoysUnderSigmaZInterceptResend) {
  Rng rng(10);
  const std::size_t n = 1000;
  PartyLedger l;
  l.n = n;
  std::vector<std::size_t> pos;
  std::vector<Announcement> ann;
  for (std::size_t i = 0; i < n; ++i) {
    const int c = rng.bit();
    l.charlie_ops.push_back(static_cast<std::uint8_t>(c));
    l.charlie_decoy_positions.push_back(i);
    pos.push_back(i);
  }
  for (std::size_t i = 0; i < n; ++i) {
    PhotonSignal s;
    s.photons = {apply_gate(Gate::hadamard(), apply_gate(Gate::encoding(l.charlie_ops[i]), PureState::zero(), 0), 0)};
    const auto r = intercept_resend(s, BasisPolicy::AlwaysZ, rng);
    ann.push_back({i, MeasureBasis::X, announced(measure(r.resent.photons[0], MeasureBasis::X, 0, rng).outcome)});
  }
  const auto o = announced_outcome_check(pos, ann, l, {});
  EXPECT_NEAR(o.error_rate, 0.5, 0.03);
  EXPECT_TRUE(o.abort);
}

TEST(AnnouncedCheck, Deterministic) {
  const PartyLedger l = ledger_of({1, 0, 1, 1}, {2});
  const std::vector<std::size_t> pos{0, 1, 2, 3};
  const std::vector<Announcement> a{{0, MeasureBasis::Z, AnnouncedBit::One},
                                    {1, MeasureBasis::Z, AnnouncedBit::One},
                                    {2, MeasureBasis::X, AnnouncedBit::One},
                                    {3, MeasureBasis::Z, AnnouncedBit::One}};
  const auto a1 = announced_outcome_check(pos, a, l, {});
  const auto a2 = announced_outcome_check(pos, a, l, {});
  EXPECT_EQ(a1.errors, 1u);
  EXPECT_EQ(a1.errors, a2.errors);
  EXPECT_EQ(a1.error_rate, a2.error_rate);
}

TEST(Outcome, AbortRule) {
  const CheckPolicy p{0.05, 0};
  EXPECT_FALSE(make_outcome(Leg::E1, 100, 5, 0, p).abort);
  EXPECT_TRUE(make_outcome(Leg::E1, 100, 6, 0, p).abort);
  EXPECT_TRUE(make_outcome(Leg::E1, 100, 0, 1, p).abort);
  EXPECT_FALSE(make_outcome(Leg::E1, 100, 0, 1, CheckPolicy{0.05, 1}).abort);
  const auto o = make_outcome(Leg::E2, 40, 10, 0, p);
  EXPECT_DOUBLE_EQ(o.error_rate, 0.25);
  EXPECT_EQ(make_outcome(Leg::E3, 0, 0, 0, p).error_rate, 0.0);
}
