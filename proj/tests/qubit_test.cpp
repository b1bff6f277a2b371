#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "oracle.hpp"
#include "qsdc/qubit.hpp"

using namespace qsdc;

namespace {

void expect_amps(const PureState& s, std::vector<cplx> want, double tol = kAlgebraTol) {
  ASSERT_EQ(s.dim(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_LT(std::abs(s[i] - want[i]), tol) << "amplitude " << i;
}

PureState random_state(std::size_t qubits, Rng& rng) {
  std::vector<cplx> a(std::size_t{1} << qubits);
  for (auto& x : a) x = {2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0};
  return PureState::normalized(std::move(a));
}

double max_unitarity_defect(const Gate& g) {
  double worst = 0.0;
  for (std::size_t r = 0; r < g.dim(); ++r) {
    for (std::size_t c = 0; c < g.dim(); ++c) {
      cplx s = 0.0;
      for (std::size_t k = 0; k < g.dim(); ++k) s += std::conj(g.at(k, r)) * g.at(k, c);
      worst = std::max(worst, std::abs(s - cplx(r == c ? 1.0 : 0.0)));
    }
  }
  return worst;
}

// Random 8x8 density operator: rank-k mixture of random pure states.
DensityOperator random_density(std::size_t qubits, std::size_t rank, Rng& rng) {
  std::vector<PureState> states;
  std::vector<double> w;
  double total = 0.0;
  for (std::size_t i = 0; i < rank; ++i) {
    states.push_back(random_state(qubits, rng));
    w.push_back(rng.uniform() + 0.01);
    total += w.back();
  }
  for (auto& x : w) x /= total;
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) s += w[i];
  w.back() = 1.0 - s;
  return mix(std::span<const PureState>(states), w);
}

}  // namespace

TEST(Gates, U1OnZeroIsMinusOne) { expect_amps(apply_gate(Gate::u1(), PureState::zero(), 0), {0.0, -1.0}); }

TEST(Gates, U0IsIdentity) {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const PureState s = random_state(1, rng);
    const PureState t = apply_gate(Gate::u0(), s, 0);
    expect_amps(t, {s[0], s[1]});
  }
}

TEST(Gates, HadamardOnZeroIsPlusX) {
  const double h = 1.0 / std::sqrt(2.0);
  expect_amps(apply_gate(Gate::hadamard(), PureState::zero(), 0), {h, h});
  EXPECT_TRUE(equal_up_to_phase(apply_gate(Gate::hadamard(), PureState::zero(), 0), PureState::plus_x()));
}

TEST(Gates, EveryGateIsUnitary) {
  for (const auto& g : {Gate::u0(), Gate::u1(), Gate::hadamard(), Gate::pauli_x(), Gate::pauli_y(),
                        Gate::pauli_z(), Gate::cnot()}) {
    EXPECT_LT(max_unitarity_defect(g), 1e-12) << g.name();
  }
}

TEST(Gates, U1TwiceIsMinusIdentity) {
  const Gate u = Gate::u1();
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 2; ++c) {
      cplx s = 0.0;
      for (std::size_t k = 0; k < 2; ++k) s += u.at(r, k) * u.at(k, c);
      EXPECT_LT(std::abs(s - (r == c ? cplx(-1.0) : cplx(0.0))), 1e-12);
    }
  }
}

TEST(Gates, CnotOnProductBasis) {
  // |10> -> |11>, qubit 0 controls qubit 1.
  expect_amps(apply_gate(Gate::cnot(), PureState::basis(2, 2), 0, 1), {0, 0, 0, 1});
  // control on qubit 1: |01> -> |11>
  expect_amps(apply_gate(Gate::cnot(), PureState::basis(2, 1), 1, 0), {0, 0, 0, 1});
  // Untargeted third qubit is carried through: |100> -> |110>.
  expect_amps(apply_gate(Gate::cnot(), PureState::basis(3, 4), 0, 1), {0, 0, 0, 0, 0, 0, 1, 0});
}

TEST(Gates, DimensionMismatchIsContractViolation) {
  EXPECT_THROW(apply_gate(Gate::u1(), PureState::zero(), 1), ContractViolation);
  EXPECT_THROW(apply_gate(Gate::cnot(), PureState::zero(), 0), ContractViolation);
  EXPECT_THROW(apply_gate(Gate::cnot(), PureState::basis(2, 0), 0, 0), ContractViolation);
}

TEST(Gates, NormPreservedOverRandomSequences) {
  Rng rng(2024);
  const std::array<Gate, 7> gates{Gate::u0(), Gate::u1(), Gate::hadamard(), Gate::pauli_x(),
                                  Gate::pauli_y(), Gate::pauli_z(), Gate::cnot()};
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 1 + rng.below(3);
    PureState s = random_state(n, rng);
    for (int step = 0; step < 12; ++step) {
      const Gate& g = gates[rng.below(gates.size())];
      if (g.arity() == 2) {
        if (n < 2) continue;
        const std::size_t c = rng.below(n);
        std::size_t t = rng.below(n - 1);
        if (t >= c) ++t;
        s = apply_gate(g, s, c, t);
      } else {
        s = apply_gate(g, s, rng.below(n));
      }
    }
    worst = std::max(worst, std::abs(s.norm() - 1.0));
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(PureStateTest, RejectsBadInput) {
  EXPECT_THROW(PureState({1.0, 0.0, 0.0}), ContractViolation);
  EXPECT_THROW(PureState({1.0, 1.0}), ContractViolation);
  EXPECT_THROW(PureState(std::vector<cplx>(16, 0.25)), ContractViolation);
  EXPECT_THROW(tensor(PureState::basis(2, 0), PureState::basis(2, 0)), ContractViolation);
}

TEST(PureStateTest, TensorOfZeros) { expect_amps(tensor(PureState::zero(), PureState::zero()), {1, 0, 0, 0}); }

TEST(Measure, ZeroInSigmaZAlwaysZero) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(measure(PureState::zero(), MeasureBasis::Z, 0, rng).outcome, 0);
}

TEST(Measure, PlusXInSigmaZIsFair) {
  Rng rng(4);
  int zeros = 0;
  for (int i = 0; i < 10000; ++i) zeros += measure(PureState::plus_x(), MeasureBasis::Z, 0, rng).outcome == 0;
  EXPECT_NEAR(zeros / 10000.0, 0.5, 0.01);
}

TEST(Measure, MinusXInSigmaXAlwaysMinus) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const auto m = measure(PureState::minus_x(), MeasureBasis::X, 0, rng);
    EXPECT_EQ(m.outcome, 1);
    EXPECT_TRUE(equal_up_to_phase(m.collapsed, PureState::minus_x()));
  }
}

TEST(Measure, CollapseOfBellState) {
  Rng rng(6);
  const double h = 1.0 / std::sqrt(2.0);
  const PureState bell{h, 0.0, 0.0, h};
  for (int i = 0; i < 100; ++i) {
    const auto m = measure(bell, MeasureBasis::Z, 1, rng);
    EXPECT_NEAR(outcome_probability(m.collapsed, MeasureBasis::Z, 0, m.outcome), 1.0, 1e-12);
    EXPECT_NEAR(m.collapsed.norm(), 1.0, 1e-12);
  }
}

TEST(Measure, GlobalPhaseDoesNotChangeStatistics) {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 1 + rng.below(3);
    const PureState s = random_state(n, rng);
    const PureState t = s.with_global_phase(2.0 * std::numbers::pi * rng.uniform());
    for (std::size_t q = 0; q < n; ++q) {
      for (auto b : {MeasureBasis::Z, MeasureBasis::X}) {
        EXPECT_NEAR(outcome_probability(s, b, q, 0), outcome_probability(t, b, q, 0), 1e-12);
      }
    }
    EXPECT_TRUE(equal_up_to_phase(s, t));
  }
}

TEST(Measure, SampledFrequenciesMatchUnderGlobalPhase) {
  const PureState s = PureState::normalized({0.6, cplx(0.0, 0.8)});
  const PureState t = s.with_global_phase(1.234);
  Rng a(8), b(8);
  int sa = 0, sb = 0;
  for (int i = 0; i < 5000; ++i) {
    sa += measure(s, MeasureBasis::X, 0, a).outcome;
    sb += measure(t, MeasureBasis::X, 0, b).outcome;
  }
  EXPECT_EQ(sa, sb);
}

TEST(Density, EntropyExamples) {
  EXPECT_NEAR(von_neumann_entropy(DensityOperator::maximally_mixed(2)), 1.0, 1e-12);
  EXPECT_NEAR(von_neumann_entropy(DensityOperator::maximally_mixed(4)), 2.0, 1e-12);
  EXPECT_NEAR(von_neumann_entropy(DensityOperator::maximally_mixed(8)), 3.0, 1e-12);
  Rng rng(9);
  for (int i = 0; i < 20; ++i) {
    EXPECT_NEAR(von_neumann_entropy(DensityOperator::from_pure(random_state(1 + rng.below(3), rng))), 0.0, 1e-12);
  }
}

TEST(Density, RejectsInvalidOperators) {
  EXPECT_THROW(DensityOperator({0.5, 0.1, 0.2, 0.5}, 2), ContractViolation);               // not Hermitian
  EXPECT_THROW(DensityOperator({0.6, 0.0, 0.0, 0.6}, 2), ContractViolation);               // trace 1.2
  EXPECT_THROW(DensityOperator({1.5, 0.0, 0.0, -0.5}, 2), ContractViolation);              // negative eigenvalue
  EXPECT_THROW(DensityOperator(std::vector<cplx>(9, 1.0 / 3.0), 3), ContractViolation);    // d = 3
}

TEST(Density, PartialTraceOfBellIsMixed) {
  const double h = 1.0 / std::sqrt(2.0);
  const auto rho = partial_trace(DensityOperator::from_pure(PureState{h, 0.0, 0.0, h}), 1);
  ASSERT_EQ(rho.dim(), 2u);
  EXPECT_NEAR(std::abs(rho.at(0, 0) - 0.5), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(rho.at(1, 1) - 0.5), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(rho.at(0, 1)), 0.0, 1e-12);
}

TEST(Density, PartialTraceKeepsOrderOfRemainingQubits) {
  // |0>|1>|+> : tracing the middle qubit leaves |0>|+>.
  const PureState s = tensor(tensor(PureState::zero(), PureState::one()), PureState::plus_x());
  const std::array<std::size_t, 1> mid{1};
  const auto rho = partial_trace(DensityOperator::from_pure(s), mid);
  const auto want = DensityOperator::from_pure(tensor(PureState::zero(), PureState::plus_x()));
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_LT(std::abs(rho.at(r, c) - want.at(r, c)), 1e-12);
}

TEST(Density, MixOfBasisStatesIsHalfIdentity) {
  const std::array<PureState, 2> states{PureState::zero(), PureState::one()};
  const std::array<double, 2> w{0.5, 0.5};
  const auto rho = mix(std::span<const PureState>(states), w);
  EXPECT_NEAR(rho.at(0, 0).real(), 0.5, 1e-12);
  EXPECT_NEAR(rho.at(1, 1).real(), 0.5, 1e-12);
  EXPECT_NEAR(std::abs(rho.at(0, 1)), 0.0, 1e-12);
  EXPECT_NEAR(von_neumann_entropy(rho), 1.0, 1e-12);
}

TEST(Density, MixRejectsBadWeights) {
  const std::array<PureState, 2> states{PureState::zero(), PureState::one()};
  const std::array<double, 2> w{0.5, 0.6};
  EXPECT_THROW(mix(std::span<const PureState>(states), w), ContractViolation);
  const std::array<double, 1> one{1.0};
  EXPECT_THROW(mix(std::span<const PureState>(states), one), ContractViolation);
}

TEST(Density, EntropyBoundedByLogDimension) {
  Rng rng(10);
  for (int i = 0; i < 300; ++i) {
    const std::size_t n = 1 + rng.below(3);
    const auto rho = random_density(n, 1 + rng.below(8), rng);
    const double s = von_neumann_entropy(rho);
    EXPECT_GE(s, -1e-12);
    EXPECT_LE(s, static_cast<double>(n) + 1e-12);
  }
}

TEST(Density, JacobiMatchesEigenSolver) {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto rho = random_density(3, 1 + rng.below(8), rng);
    oracle::Mat m(8, 8);
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c) m(r, c) = rho.at(r, c);
    Eigen::SelfAdjointEigenSolver<oracle::Mat> es(m);
    const auto ours = rho.eigenvalues();
    for (int k = 0; k < 8; ++k) EXPECT_NEAR(ours[k], es.eigenvalues()(k), 1e-12);
    EXPECT_NEAR(von_neumann_entropy(rho), oracle::entropy_bits(m), 1e-10);
  }
}

TEST(Density, MeasureOutOthersLeavesPhotonQubit) {
  Rng rng(12);
  const PureState s = tensor(PureState::plus_x(), PureState::basis(2, 3));
  const PureState p = measure_out_others(s, 0, rng);
  EXPECT_EQ(p.qubits(), 1u);
  EXPECT_TRUE(equal_up_to_phase(p, PureState::plus_x()));
}
