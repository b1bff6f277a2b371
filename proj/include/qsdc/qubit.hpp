#pragma once

// Exact amplitude-level simulation of at most three qubits: pure states,
// the gate set used by the protocol, single-qubit measurement, density
// operators and von Neumann entropy.
//
// Qubit 0 is the most significant bit of a basis index, so the amplitude of
// |q0 q1 q2> sits at index (q0 << 2) | (q1 << 1) | q2.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qsdc/hermitian_eigen.hpp"
#include "qsdc/rng.hpp"

namespace qsdc {

using cplx = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 3;
inline constexpr double kAlgebraTol = 1e-12;
inline constexpr double kChainTol = 1e-10;

// Raised when a caller breaks a documented precondition (bad dimensions,
// unnormalized input, invalid probabilities, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class PureState {
 public:
  // |0>
  PureState() : amps_{cplx{1.0, 0.0}, cplx{0.0, 0.0}}, qubits_(1) {}

  explicit PureState(std::vector<cplx> amps) : amps_(std::move(amps)) {
    const std::size_t d = amps_.size();
    qubits_ = 0;
    while ((std::size_t{1} << qubits_) < d) ++qubits_;
    if (d < 2 || (std::size_t{1} << qubits_) != d || qubits_ > kMaxQubits) {
      throw ContractViolation("PureState: amplitude count must be 2, 4 or 8, got " +
                              std::to_string(d));
    }
    if (std::abs(norm() - 1.0) > kChainTol) {
      throw ContractViolation("PureState: amplitudes are not normalized");
    }
  }

  PureState(std::initializer_list<cplx> amps) : PureState(std::vector<cplx>(amps)) {}

  static PureState zero() { return PureState{1.0, 0.0}; }
  static PureState one() { return PureState{0.0, 1.0}; }
  static PureState plus_x() {
    const double h = std::numbers::sqrt2 / 2.0;
    return PureState{h, h};
  }
  static PureState minus_x() {
    const double h = std::numbers::sqrt2 / 2.0;
    return PureState{h, -h};
  }
  static PureState basis(std::size_t qubits, std::size_t index) {
    std::vector<cplx> a(std::size_t{1} << qubits);
    if (index >= a.size()) throw ContractViolation("PureState::basis: index out of range");
    a[index] = 1.0;
    return PureState(std::move(a));
  }
  // Renormalizes an arbitrary nonzero vector.
  static PureState normalized(std::vector<cplx> amps) {
    double n2 = 0.0;
    for (const auto& a : amps) n2 += std::norm(a);
    if (n2 <= 0.0) throw ContractViolation("PureState::normalized: zero vector");
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& a : amps) a *= inv;
    return PureState(std::move(amps));
  }

  std::size_t qubits() const { return qubits_; }
  std::size_t dim() const { return amps_.size(); }
  std::span<const cplx> amplitudes() const { return amps_; }
  cplx operator[](std::size_t i) const { return amps_[i]; }

  double norm() const {
    double n2 = 0.0;
    for (const auto& a : amps_) n2 += std::norm(a);
    return std::sqrt(n2);
  }

  PureState with_global_phase(double theta) const {
    auto a = amps_;
    const cplx ph = std::polar(1.0, theta);
    for (auto& x : a) x *= ph;
    return PureState(std::move(a));
  }

 private:
  std::vector<cplx> amps_;
  std::size_t qubits_;
};

inline cplx inner(const PureState& a, const PureState& b) {
  if (a.dim() != b.dim()) throw ContractViolation("inner: dimension mismatch");
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

// States are compared only up to a global phase.
inline bool equal_up_to_phase(const PureState& a, const PureState& b, double tol = kChainTol) {
  return a.dim() == b.dim() && std::abs(inner(a, b)) > 1.0 - tol;
}

inline PureState tensor(const PureState& a, const PureState& b) {
  if (a.qubits() + b.qubits() > kMaxQubits) {
    throw ContractViolation("tensor: result would exceed " + std::to_string(kMaxQubits) +
                            " qubits");
  }
  std::vector<cplx> out(a.dim() * b.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < b.dim(); ++j) out[i * b.dim() + j] = a[i] * b[j];
  return PureState(std::move(out));
}

// ---------------------------------------------------------------------------
// Gates
// ---------------------------------------------------------------------------

enum class GateKind { U0, U1, H, X, Y, Z, CNOT };

class Gate {
 public:
  static Gate u0() { return Gate(GateKind::U0, {1, 0, 0, 1}); }
  // |0><1| - |1><0|
  static Gate u1() { return Gate(GateKind::U1, {0, 1, -1, 0}); }
  static Gate hadamard() {
    const double h = std::numbers::sqrt2 / 2.0;
    return Gate(GateKind::H, {h, h, h, -h});
  }
  static Gate pauli_x() { return Gate(GateKind::X, {0, 1, 1, 0}); }
  static Gate pauli_y() { return Gate(GateKind::Y, {0, cplx{0, -1}, cplx{0, 1}, 0}); }
  static Gate pauli_z() { return Gate(GateKind::Z, {1, 0, 0, -1}); }
  // Targets are (control, target).
  static Gate cnot() {
    return Gate(GateKind::CNOT, {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0});
  }
  static Gate encoding(int bit) { return bit ? u1() : u0(); }

  GateKind kind() const { return kind_; }
  std::size_t arity() const { return arity_; }
  std::size_t dim() const { return std::size_t{1} << arity_; }
  cplx at(std::size_t r, std::size_t c) const { return m_[r * dim() + c]; }

  std::string_view name() const {
    switch (kind_) {
      case GateKind::U0: return "U0";
      case GateKind::U1: return "U1";
      case GateKind::H: return "H";
      case GateKind::X: return "X";
      case GateKind::Y: return "Y";
      case GateKind::Z: return "Z";
      case GateKind::CNOT: return "CNOT";
    }
    return "?";
  }

 private:
  Gate(GateKind k, std::initializer_list<cplx> entries) : kind_(k) {
    arity_ = entries.size() == 4 ? 1 : 2;
    std::size_t i = 0;
    for (const auto& e : entries) m_[i++] = e;
  }

  GateKind kind_;
  std::size_t arity_;
  std::array<cplx, 16> m_{};
};

inline PureState apply_gate(const Gate& g, const PureState& s, std::span<const std::size_t> targets) {
  if (targets.size() != g.arity()) {
    throw ContractViolation("apply_gate: " + std::string(g.name()) + " expects " +
                            std::to_string(g.arity()) + " target(s)");
  }
  const std::size_t n = s.qubits();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] >= n) throw ContractViolation("apply_gate: target qubit out of range");
    for (std::size_t j = 0; j < i; ++j)
      if (targets[i] == targets[j]) throw ContractViolation("apply_gate: repeated target qubit");
  }

  std::vector<std::size_t> masks(targets.size());
  std::size_t all = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    masks[i] = std::size_t{1} << (n - 1 - targets[i]);
    all |= masks[i];
  }
  // Sub-index of a basis state within the gate's local space; targets[0] is
  // the most significant local bit.
  auto local = [&](std::size_t idx) {
    std::size_t l = 0;
    for (std::size_t i = 0; i < masks.size(); ++i) l = (l << 1) | ((idx & masks[i]) ? 1 : 0);
    return l;
  };
  auto place = [&](std::size_t base, std::size_t l) {
    std::size_t idx = base;
    for (std::size_t i = 0; i < masks.size(); ++i)
      if (l & (std::size_t{1} << (masks.size() - 1 - i))) idx |= masks[i];
    return idx;
  };

  const auto in = s.amplitudes();
  std::vector<cplx> out(s.dim());
  for (std::size_t idx = 0; idx < s.dim(); ++idx) {
    const std::size_t base = idx & ~all;
    const std::size_t row = local(idx);
    cplx acc = 0.0;
    for (std::size_t col = 0; col < g.dim(); ++col) acc += g.at(row, col) * in[place(base, col)];
    out[idx] = acc;
  }
  return PureState(std::move(out));
}

inline PureState apply_gate(const Gate& g, const PureState& s, std::size_t target) {
  const std::array<std::size_t, 1> t{target};
  return apply_gate(g, s, t);
}

inline PureState apply_gate(const Gate& g, const PureState& s, std::size_t control,
                            std::size_t target) {
  const std::array<std::size_t, 2> t{control, target};
  return apply_gate(g, s, t);
}

// ---------------------------------------------------------------------------
// Measurement
// ---------------------------------------------------------------------------

enum class MeasureBasis { Z, X };

inline std::string_view basis_name(MeasureBasis b) { return b == MeasureBasis::Z ? "z" : "x"; }

// Eigenvector of `b` labelled by `bit`: Z gives |0>,|1>; X gives |+x>,|-x>.
inline PureState basis_state(MeasureBasis b, int bit) {
  if (b == MeasureBasis::Z) return bit ? PureState::one() : PureState::zero();
  return bit ? PureState::minus_x() : PureState::plus_x();
}

struct Measurement {
  int outcome;
  PureState collapsed;
};

namespace detail {

inline double z_probability(const PureState& s, std::size_t target, int bit) {
  const std::size_t mask = std::size_t{1} << (s.qubits() - 1 - target);
  double p = 0.0;
  for (std::size_t i = 0; i < s.dim(); ++i)
    if (((i & mask) != 0) == (bit != 0)) p += std::norm(s[i]);
  return p;
}

inline PureState z_project(const PureState& s, std::size_t target, int bit) {
  const std::size_t mask = std::size_t{1} << (s.qubits() - 1 - target);
  std::vector<cplx> a(s.amplitudes().begin(), s.amplitudes().end());
  for (std::size_t i = 0; i < a.size(); ++i)
    if (((i & mask) != 0) != (bit != 0)) a[i] = 0.0;
  return PureState::normalized(std::move(a));
}

inline void check_target(const PureState& s, std::size_t target) {
  if (target >= s.qubits()) throw ContractViolation("measure: target qubit out of range");
}

}  // namespace detail

// Born-rule probability of reading `bit` on `target` in basis `b`.
inline double outcome_probability(const PureState& s, MeasureBasis b, std::size_t target, int bit) {
  detail::check_target(s, target);
  if (b == MeasureBasis::Z) return detail::z_probability(s, target, bit);
  return detail::z_probability(apply_gate(Gate::hadamard(), s, target), target, bit);
}

inline Measurement measure(const PureState& s, MeasureBasis b, std::size_t target, Rng& rng) {
  detail::check_target(s, target);
  const PureState rotated = b == MeasureBasis::Z ? s : apply_gate(Gate::hadamard(), s, target);
  const double p1 = detail::z_probability(rotated, target, 1);
  int bit;
  if (p1 <= 0.0) {
    bit = 0;
  } else if (p1 >= 1.0) {
    bit = 1;
  } else {
    bit = rng.uniform() < p1 ? 1 : 0;
  }
  PureState collapsed = detail::z_project(rotated, target, bit);
  if (b == MeasureBasis::X) collapsed = apply_gate(Gate::hadamard(), collapsed, target);
  return {bit, std::move(collapsed)};
}

// Measures every qubit except `keep` in Z and returns the remaining 1-qubit
// state of `keep`. Used to discard an eavesdropper's probe register.
inline PureState measure_out_others(const PureState& s, std::size_t keep, Rng& rng) {
  detail::check_target(s, keep);
  PureState cur = s;
  for (std::size_t q = 0; q < s.qubits(); ++q)
    if (q != keep) cur = measure(cur, MeasureBasis::Z, q, rng).collapsed;
  // cur is now a product state; read off the kept qubit's amplitudes.
  const std::size_t n = cur.qubits();
  const std::size_t mask = std::size_t{1} << (n - 1 - keep);
  std::size_t base = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < cur.dim(); ++i) {
    const double w = std::norm(cur[i & ~mask]) + std::norm(cur[i | mask]);
    if (w > best) {
      best = w;
      base = i & ~mask;
    }
  }
  return PureState::normalized({cur[base], cur[base | mask]});
}

// ---------------------------------------------------------------------------
// Density operators
// ---------------------------------------------------------------------------

class DensityOperator {
 public:
  // Row-major d x d entries; validated as Hermitian, unit-trace, PSD.
  DensityOperator(std::vector<cplx> entries, std::size_t d) : m_(std::move(entries)), d_(d) {
    if (d != 2 && d != 4 && d != 8) throw ContractViolation("DensityOperator: dimension must be 2, 4 or 8");
    if (m_.size() != d * d) throw ContractViolation("DensityOperator: entry count != d*d");
    cplx tr = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
      tr += at(r, r);
      for (std::size_t c = r; c < d; ++c) {
        if (std::abs(at(r, c) - std::conj(at(c, r))) > kAlgebraTol) {
          throw ContractViolation("DensityOperator: matrix is not Hermitian");
        }
      }
    }
    if (std::abs(tr - cplx{1.0, 0.0}) > kAlgebraTol) {
      throw ContractViolation("DensityOperator: trace is not 1");
    }
    const auto eig = hermitian_eigenvalues(m_, d_);
    if (eig.front() < -kChainTol) throw ContractViolation("DensityOperator: negative eigenvalue");
  }

  static DensityOperator from_pure(const PureState& s) {
    const std::size_t d = s.dim();
    const double n2 = s.norm() * s.norm();
    std::vector<cplx> m(d * d);
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) m[r * d + c] = s[r] * std::conj(s[c]) / n2;
    return DensityOperator(std::move(m), d);
  }

  static DensityOperator diagonal(std::span<const double> probs) {
    const std::size_t d = probs.size();
    std::vector<cplx> m(d * d);
    for (std::size_t i = 0; i < d; ++i) m[i * d + i] = probs[i];
    return DensityOperator(std::move(m), d);
  }

  static DensityOperator maximally_mixed(std::size_t d) {
    return diagonal(std::vector<double>(d, 1.0 / static_cast<double>(d)));
  }

  std::size_t dim() const { return d_; }
  std::size_t qubits() const { return d_ == 2 ? 1 : d_ == 4 ? 2 : 3; }
  cplx at(std::size_t r, std::size_t c) const { return m_[r * d_ + c]; }
  std::span<const cplx> entries() const { return m_; }

  cplx trace() const {
    cplx t = 0.0;
    for (std::size_t i = 0; i < d_; ++i) t += at(i, i);
    return t;
  }

  std::vector<double> eigenvalues() const { return hermitian_eigenvalues(m_, d_); }

 private:
  std::vector<cplx> m_;
  std::size_t d_;
};

// Convex combination of weighted operators. Weights must be nonnegative and
// sum to 1 within 1e-12.
inline DensityOperator mix(std::span<const DensityOperator> parts, std::span<const double> weights) {
  if (parts.empty() || parts.size() != weights.size()) {
    throw ContractViolation("mix: need one weight per component");
  }
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ContractViolation("mix: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > kAlgebraTol) throw ContractViolation("mix: weights do not sum to 1");
  const std::size_t d = parts.front().dim();
  std::vector<cplx> m(d * d);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (parts[k].dim() != d) throw ContractViolation("mix: dimension mismatch");
    const auto e = parts[k].entries();
    for (std::size_t i = 0; i < d * d; ++i) m[i] += weights[k] * e[i];
  }
  return DensityOperator(std::move(m), d);
}

inline DensityOperator mix(std::span<const PureState> states, std::span<const double> weights) {
  std::vector<DensityOperator> parts;
  parts.reserve(states.size());
  for (const auto& s : states) parts.push_back(DensityOperator::from_pure(s));
  return mix(std::span<const DensityOperator>(parts), weights);
}

// Traces out the listed qubits; the kept qubits retain their relative order.
inline DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::size_t> traced) {
  const std::size_t n = rho.qubits();
  std::vector<bool> gone(n, false);
  for (auto q : traced) {
    if (q >= n || gone[q]) throw ContractViolation("partial_trace: bad qubit list");
    gone[q] = true;
  }
  std::vector<std::size_t> kept, drop;
  for (std::size_t q = 0; q < n; ++q) (gone[q] ? drop : kept).push_back(q);
  if (kept.empty()) throw ContractViolation("partial_trace: cannot trace out every qubit");

  auto compose = [&](std::size_t k_idx, std::size_t d_idx) {
    std::size_t full = 0;
    for (std::size_t i = 0; i < kept.size(); ++i)
      if (k_idx & (std::size_t{1} << (kept.size() - 1 - i))) full |= std::size_t{1} << (n - 1 - kept[i]);
    for (std::size_t i = 0; i < drop.size(); ++i)
      if (d_idx & (std::size_t{1} << (drop.size() - 1 - i))) full |= std::size_t{1} << (n - 1 - drop[i]);
    return full;
  };

  const std::size_t dk = std::size_t{1} << kept.size();
  const std::size_t dd = std::size_t{1} << drop.size();
  std::vector<cplx> m(dk * dk);
  for (std::size_t r = 0; r < dk; ++r)
    for (std::size_t c = 0; c < dk; ++c)
      for (std::size_t e = 0; e < dd; ++e) m[r * dk + c] += rho.at(compose(r, e), compose(c, e));
  return DensityOperator(std::move(m), dk);
}

inline DensityOperator partial_trace(const DensityOperator& rho, std::size_t traced) {
  const std::array<std::size_t, 1> t{traced};
  return partial_trace(rho, t);
}

// Shannon term -p log2 p with 0 log 0 = 0.
inline double entropy_term(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

// S(rho) = -sum_i l_i log2 l_i over the eigenvalues of rho. Eigenvalues within
// 1e-10 below zero are treated as zero.
inline double von_neumann_entropy(const DensityOperator& rho) {
  double s = 0.0;
  for (double l : rho.eigenvalues()) s += entropy_term(std::clamp(l, 0.0, 1.0));
  return s;
}

}  // namespace qsdc
