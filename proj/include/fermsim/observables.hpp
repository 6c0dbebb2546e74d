#pragma once

// Reduced states and the quantities reported for the two-molecule device:
// occupations, cross-populations, two-qubit concurrence, linear entropy and
// sudden-death intervals of the concurrence.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fermsim/error.hpp"
#include "fermsim/operators.hpp"

namespace fermsim {

/// Reduced density matrix on the sites in `keep` (1-based, any order; the
/// result orders them ascending).
inline Operator partial_trace(const Operator& rho, std::vector<int> keep) {
  const int n = site_count(rho);
  if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep set");
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  for (int s : keep) detail::check_site(s, n, "partial_trace");

  const auto kept = static_cast<int>(keep.size());
  std::vector<int> traced;
  for (int s = 1; s <= n; ++s)
    if (!std::binary_search(keep.begin(), keep.end(), s)) traced.push_back(s);

  // Full index from (kept bits, traced bits); site s sits at bit n - s.
  auto compose = [&](Index kept_bits, Index traced_bits) {
    Index full = 0;
    for (int k = 0; k < kept; ++k)
      if ((kept_bits >> (kept - 1 - k)) & 1) full |= Index{1} << (n - keep[static_cast<std::size_t>(k)]);
    const auto nt = static_cast<int>(traced.size());
    for (int k = 0; k < nt; ++k)
      if ((traced_bits >> (nt - 1 - k)) & 1) full |= Index{1} << (n - traced[static_cast<std::size_t>(k)]);
    return full;
  };

  const Index dk = Index{1} << kept;
  const Index dt = Index{1} << traced.size();
  Operator out = Operator::Zero(dk, dk);
  for (Index c = 0; c < dk; ++c)
    for (Index r = 0; r < dk; ++r)
      for (Index e = 0; e < dt; ++e) out(r, c) += rho(compose(r, e), compose(c, e));
  return out;
}

/// ⟨N_i⟩ = Tr(N_i ρ).
inline double occupation(const Operator& rho, int i) {
  const Complex value = (number_op(i, site_count(rho)) * rho).trace();
  if (std::abs(value.imag()) > 1e-10) throw NumericalError("occupation: expectation value is not real");
  return value.real();
}

/// Cross-populations of a 4-site state, in the order P_1001, P_0110, P_1010, P_0101.
struct CrossPopulations {
  double p1001 = 0.0;
  double p0110 = 0.0;
  double p1010 = 0.0;
  double p0101 = 0.0;

  double sum() const { return p1001 + p0110 + p1010 + p0101; }
};

inline CrossPopulations cross_populations(const Operator& rho) {
  if (site_count(rho) != 4) throw std::invalid_argument("cross_populations expects a 4-site density matrix");
  const Operator id = identity_on(4);
  const Operator n1 = number_op(1, 4), n2 = number_op(2, 4), n3 = number_op(3, 4), n4 = number_op(4, 4);
  auto expect = [&](const Operator& proj) { return (proj * rho).trace().real(); };
  return {
      expect(n1 * (id - n2) * (id - n3) * n4),
      expect((id - n1) * n2 * n3 * (id - n4)),
      expect(n1 * (id - n2) * n3 * (id - n4)),
      expect((id - n1) * n2 * (id - n3) * n4),
  };
}

/// Qubit A: |0> = dot 1 occupied, |1> = dot 2 occupied.
/// Qubit B: |0> = dot 3 occupied, |1> = dot 4 occupied.
/// Basis order |00>, |01>, |10>, |11> = |1010>, |1001>, |0110>, |0101>.
inline const std::array<FockLabel, 4>& two_qubit_basis() {
  static const std::array<FockLabel, 4> basis{FockLabel::parse("1010"), FockLabel::parse("1001"),
                                              FockLabel::parse("0110"), FockLabel::parse("0101")};
  return basis;
}

class TwoQubitState {
 public:
  explicit TwoQubitState(Operator m) : matrix_(std::move(m)) {
    if (matrix_.rows() != 4 || matrix_.cols() != 4) throw std::invalid_argument("TwoQubitState must be 4x4");
    if (hermiticity_defect(matrix_) >= 1e-8) throw std::invalid_argument("TwoQubitState is not Hermitian");
    if (std::abs(matrix_.trace() - Complex(1.0)) >= 1e-8) throw std::invalid_argument("TwoQubitState trace differs from 1");
    Eigen::SelfAdjointEigenSolver<Operator> solver(0.5 * (matrix_ + matrix_.adjoint()), Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -1e-7) throw std::invalid_argument("TwoQubitState is not positive");
  }

  const Operator& matrix() const { return matrix_; }

 private:
  Operator matrix_;
};

struct TwoQubitExtraction {
  TwoQubitState state;
  double discarded_weight;
};

inline constexpr double kLeakageThreshold = 1e-6;

/// Restrict a 4-site state to span{|1010>, |1001>, |0110>, |0101>} and
/// renormalize. Throws NumericalError if more than kLeakageThreshold of the
/// weight lies outside that subspace.
inline TwoQubitExtraction extract_two_qubit(const Operator& rho) {
  if (site_count(rho) != 4) throw std::invalid_argument("extract_two_qubit expects a 4-site density matrix");
  const auto& basis = two_qubit_basis();
  Operator block(4, 4);
  for (Index r = 0; r < 4; ++r)
    for (Index c = 0; c < 4; ++c) block(r, c) = rho(basis[static_cast<std::size_t>(r)].index(), basis[static_cast<std::size_t>(c)].index());
  const double inside = block.trace().real();
  const double discarded = rho.trace().real() - inside;
  if (discarded > kLeakageThreshold)
    throw NumericalError("extract_two_qubit: weight " + std::to_string(discarded) + " outside the two-qubit subspace");
  block /= inside;
  block = (0.5 * (block + block.adjoint())).eval();
  return {TwoQubitState(std::move(block)), discarded};
}

/// ρ̃ = (σy ⊗ σy) ρ* (σy ⊗ σy)
inline Operator spin_flip(const Operator& rho) {
  const Operator yy = kron(pauli(Pauli::y), pauli(Pauli::y));
  return yy * rho.conjugate() * yy;
}

namespace detail {

inline double concurrence_from(std::array<double, 4> lambda) {
  std::sort(lambda.begin(), lambda.end(), std::greater<>());
  return std::clamp(lambda[0] - lambda[1] - lambda[2] - lambda[3], 0.0, 1.0);
}

}  // namespace detail

/// Wootters concurrence from the square roots of the eigenvalues of ρρ̃.
inline double concurrence(const TwoQubitState& state) {
  const Operator& rho = state.matrix();
  Eigen::ComplexEigenSolver<Operator> solver(rho * spin_flip(rho), false);
  std::array<double, 4> lambda{};
  for (Index k = 0; k < 4; ++k) lambda[static_cast<std::size_t>(k)] = std::sqrt(std::max(0.0, solver.eigenvalues()(k).real()));
  return detail::concurrence_from(lambda);
}

/// Same quantity from the eigenvalues of R = sqrt(sqrt(ρ) ρ̃ sqrt(ρ)).
inline double concurrence_r_operator(const TwoQubitState& state) {
  const Operator& rho = state.matrix();
  const Operator root = matrix_sqrt_psd(rho, 1e-8);
  Operator inner = root * spin_flip(rho) * root;
  inner = (0.5 * (inner + inner.adjoint())).eval();
  Eigen::SelfAdjointEigenSolver<Operator> solver(inner, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -1e-7)
    throw NumericalError("concurrence_r_operator: negative eigenvalue beyond tolerance");
  std::array<double, 4> lambda{};
  for (Index k = 0; k < 4; ++k) lambda[static_cast<std::size_t>(k)] = std::sqrt(std::max(0.0, solver.eigenvalues()(k)));
  return detail::concurrence_from(lambda);
}

/// S = 1 - Tr ρ².
inline double linear_entropy(const Operator& rho) { return 1.0 - (rho * rho).trace().real(); }

struct DeathInterval {
  double onset = 0.0;
  std::optional<double> rebirth;  // empty: still dead at the end of the series
};

struct SuddenDeathThresholds {
  double dead = 1e-6;
  double reborn = 1e-4;
  int min_steps = 2;  // minimum interval length in grid steps
};

/// Intervals on which an entangled state (C > reborn seen earlier) stays below
/// `dead` for at least `min_steps` grid steps; the interval ends at the first
/// sample exceeding `reborn`.
inline std::vector<DeathInterval> detect_sudden_death(std::span<const double> times, std::span<const double> values,
                                                      const SuddenDeathThresholds& th = {}) {
  if (times.size() != values.size()) throw std::invalid_argument("detect_sudden_death: size mismatch");
  std::vector<DeathInterval> out;
  bool alive = false;
  std::size_t k = 0;
  while (k < values.size()) {
    if (!alive) {
      if (values[k] > th.reborn) alive = true;
      ++k;
      continue;
    }
    if (values[k] >= th.dead) {
      ++k;
      continue;
    }
    std::size_t end = k;
    while (end < values.size() && values[end] < th.dead) ++end;
    if (static_cast<int>(end - k) - 1 < th.min_steps) {
      k = end;
      continue;
    }
    DeathInterval interval{times[k], std::nullopt};
    std::size_t r = end;
    while (r < values.size() && !(values[r] > th.reborn)) ++r;
    if (r < values.size()) interval.rebirth = times[r];
    out.push_back(interval);
    k = r;
  }
  return out;
}

}  // namespace fermsim
