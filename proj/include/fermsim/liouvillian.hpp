#pragma once

// Superoperators on column-stacked density matrices, vec(AXB) = (Bᵀ ⊗ A) vec(X).
//
//   L(t) = L0 - 1/2 Σ_n Γ_ij^(n)(t) [ f_n L⁺_ij + (1 - f_n) L⁻_ij ]
//   L0   = -i (I ⊗ H - Hᵀ ⊗ I)
//
// L⁺_ij / L⁻_ij are assembled directly as Pauli strings over the 2N tensor
// factors of the doubled space (build_dissipator). oracle_dissipator builds
// the same maps column by column from matrix products of the jump operators
// S_i and serves as the independent check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "fermsim/model.hpp"
#include "fermsim/operators.hpp"

namespace fermsim {

enum class Sign { plus, minus };

inline Operator build_coherent(const Operator& h) {
  require_hermitian(h, "build_coherent");
  using namespace std::complex_literals;
  const Operator id = Operator::Identity(h.rows(), h.cols());
  return -1i * (kron(id, h) - kron(h.transpose(), id));
}

namespace detail {

// One Pauli string on the doubled space: positions 1..N form the left
// (transposed) block, N+1..2N the right block.
class DoubledString {
 public:
  explicit DoubledString(int n_sites) : factors_(static_cast<std::size_t>(2 * n_sites), Pauli::identity) {}

  DoubledString& set(int position, Pauli p) {
    factors_.at(static_cast<std::size_t>(position - 1)) = p;
    return *this;
  }

  DoubledString& fill(int from, int to, Pauli p) {
    for (int k = from; k <= to; ++k) set(k, p);
    return *this;
  }

  Operator matrix() const {
    std::vector<Operator> ops;
    ops.reserve(factors_.size());
    for (Pauli p : factors_) ops.push_back(pauli(p));
    return kron_chain(ops);
  }

 private:
  std::vector<Pauli> factors_;
};

}  // namespace detail

/// Explicit tensor-product form of L⁺_ij (sign = plus) or L⁻_ij (sign = minus)
/// for an N-site system; the superoperator acts on 4^N-dimensional vectors.
inline Operator build_dissipator(int i, int j, Sign sign, int n_sites) {
  detail::check_site(i, n_sites, "build_dissipator");
  detail::check_site(j, n_sites, "build_dissipator");
  const int n = n_sites;
  const bool plus = sign == Sign::plus;
  const Pauli up = plus ? Pauli::plus : Pauli::minus;    // σ±
  const Pauli down = plus ? Pauli::minus : Pauli::plus;  // σ∓
  const Operator pair = pauli(down) * pauli(up);         // σ∓σ±

  // I^{⊗(a-1)} ⊗ σ± ⊗ σz^{⊗(N-a)} on block starting at `offset`.
  auto jump_block = [n, up](detail::DoubledString& s, int offset, int a) {
    s.set(offset + a, up).fill(offset + a + 1, offset + n, Pauli::z);
  };

  Operator out;
  if (i == j) {
    std::vector<Operator> right(static_cast<std::size_t>(2 * n), pauli(Pauli::identity));
    right[static_cast<std::size_t>(n + i - 1)] = pair;
    std::vector<Operator> left(static_cast<std::size_t>(2 * n), pauli(Pauli::identity));
    left[static_cast<std::size_t>(i - 1)] = pair;
    detail::DoubledString cross(n);
    jump_block(cross, 0, i);
    jump_block(cross, n, i);
    out = kron_chain(right) + kron_chain(left) - 2.0 * cross.matrix();
    return out;
  }

  // Hopping-like strings: σ at the lower site, σz in between, σ at the upper site.
  const int lo = std::min(i, j);
  const int hi = std::max(i, j);
  const Pauli at_lo = i < j ? down : up;
  const Pauli at_hi = i < j ? up : down;
  const double coeff = plus ? 1.0 : -1.0;

  detail::DoubledString first(n);
  first.set(n + lo, at_lo).fill(n + lo + 1, n + hi - 1, Pauli::z).set(n + hi, at_hi);
  detail::DoubledString second(n);
  second.set(lo, at_lo).fill(lo + 1, hi - 1, Pauli::z).set(hi, at_hi);
  detail::DoubledString cross_ij(n);
  jump_block(cross_ij, 0, i);
  jump_block(cross_ij, n, j);
  detail::DoubledString cross_ji(n);
  jump_block(cross_ji, 0, j);
  jump_block(cross_ji, n, i);

  out = coeff * (first.matrix() + second.matrix()) - cross_ij.matrix() - cross_ji.matrix();
  return out;
}

/// Superoperator of ρ ↦ F/f (plus) or ρ ↦ G/(1-f) (minus) evaluated from
/// explicit products of S_i, S_j† on each matrix unit E_kl:
///   plus : S_i S_j† ρ - S_i† ρ S_j + ρ S_j S_i† - S_j† ρ S_i
///   minus: S_i† S_j ρ - S_i ρ S_j† + ρ S_j† S_i - S_j ρ S_i†
inline Operator oracle_dissipator(int i, int j, Sign sign, int n_sites) {
  const Operator s_i = system_jump(i, n_sites);
  const Operator s_j = system_jump(j, n_sites);
  const Operator a = sign == Sign::plus ? s_i : Operator(s_i.adjoint());
  const Operator b = sign == Sign::plus ? s_j : Operator(s_j.adjoint());
  // plus: a = S_i, b = S_j ; minus: a = S_i†, b = S_j†
  const Operator ab_dag = a * b.adjoint();
  const Operator b_a_dag = b * a.adjoint();
  const Index dim = s_i.rows();
  Operator out = Operator::Zero(dim * dim, dim * dim);
  Operator unit = Operator::Zero(dim, dim);
  for (Index col = 0; col < dim; ++col) {
    for (Index row = 0; row < dim; ++row) {
      unit.setZero();
      unit(row, col) = 1.0;
      const Operator image =
          ab_dag * unit - a.adjoint() * unit * b + unit * b_a_dag - b.adjoint() * unit * a;
      out.col(row + col * dim) = image.reshaped();
    }
  }
  return out;
}

/// Piecewise-constant superoperator: segment k holds on [t_begin, t_end).
struct LiouvillianSegment {
  double t_begin = 0.0;
  double t_end = std::numeric_limits<double>::infinity();
  Operator generator;
};

class Liouvillian {
 public:
  Liouvillian() = default;
  Liouvillian(int n_sites, std::vector<LiouvillianSegment> segments)
      : n_sites_(n_sites), segments_(std::move(segments)) {
    if (segments_.empty()) throw std::invalid_argument("Liouvillian needs at least one segment");
    for (std::size_t k = 0; k < segments_.size(); ++k) {
      const auto& s = segments_[k];
      if (s.generator.rows() != dimension() || s.generator.cols() != dimension())
        throw std::invalid_argument("Liouvillian segment has wrong dimension");
      if (!(s.t_end > s.t_begin)) throw std::invalid_argument("Liouvillian segment has empty time interval");
      if (k > 0 && s.t_begin != segments_[k - 1].t_end)
        throw std::invalid_argument("Liouvillian segments must be contiguous");
    }
  }

  /// Time-independent generator.
  static Liouvillian constant(int n_sites, Operator generator) {
    return Liouvillian(n_sites, {{0.0, std::numeric_limits<double>::infinity(), std::move(generator)}});
  }

  int n_sites() const { return n_sites_; }
  Index dimension() const { return fock_dimension(n_sites_) * fock_dimension(n_sites_); }
  const std::vector<LiouvillianSegment>& segments() const { return segments_; }
  bool time_independent() const { return segments_.size() == 1; }
  double t_begin() const { return segments_.front().t_begin; }
  double t_end() const { return segments_.back().t_end; }

  std::size_t segment_index(double t) const {
    if (!(t >= t_begin() && t < t_end()))
      throw std::out_of_range("time " + std::to_string(t) + " outside Liouvillian coverage");
    for (std::size_t k = 0; k < segments_.size(); ++k)
      if (t < segments_[k].t_end) return k;
    return segments_.size() - 1;
  }

  const Operator& at(double t) const { return segments_[segment_index(t)].generator; }

  /// Largest induced 1-norm (max column sum) over all segments.
  double norm1() const {
    double out = 0.0;
    for (const auto& s : segments_) out = std::max(out, s.generator.cwiseAbs().colwise().sum().maxCoeff());
    return out;
  }

 private:
  int n_sites_ = 0;
  std::vector<LiouvillianSegment> segments_;
};

/// Generator at a single time t.
inline Operator assemble_at(const ModelSpec& spec, const Operator& hamiltonian, double t) {
  const int n = spec.n_sites;
  Operator l = build_coherent(hamiltonian);
  for (const auto& att : spec.reservoirs) {
    const double rate = rate_at(att, t);
    if (rate == 0.0) continue;
    if (att.fermi != 0.0) l -= 0.5 * rate * att.fermi * build_dissipator(att.site_i, att.site_j, Sign::plus, n);
    if (att.fermi != 1.0)
      l -= 0.5 * rate * (1.0 - att.fermi) * build_dissipator(att.site_i, att.site_j, Sign::minus, n);
  }
  return l;
}

inline Operator assemble_at(const ModelSpec& spec, double t) {
  return assemble_at(spec, build_hamiltonian(spec), t);
}

/// One generator per interval between consecutive profile breakpoints.
inline Liouvillian assemble(const ModelSpec& spec) {
  std::set<double> breaks{0.0};
  for (const auto& att : spec.reservoirs)
    for (const auto& step : att.profile) breaks.insert(step.t_start);
  const Operator h = build_hamiltonian(spec);
  std::vector<double> starts(breaks.begin(), breaks.end());
  std::vector<LiouvillianSegment> segments;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const double end = k + 1 < starts.size() ? starts[k + 1] : std::numeric_limits<double>::infinity();
    segments.push_back({starts[k], end, assemble_at(spec, h, starts[k])});
  }
  return Liouvillian(spec.n_sites, std::move(segments));
}

/// max_c |Σ_k L(k + k·d, c)|: how far vec(I)† is from a left null vector.
inline double trace_preservation_defect(const Operator& superop) {
  const auto dim = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(superop.rows()))));
  Eigen::RowVectorXcd trace_row = Eigen::RowVectorXcd::Zero(superop.rows());
  for (Index k = 0; k < dim; ++k) trace_row(k + k * dim) = 1.0;
  const Eigen::RowVectorXcd residual = trace_row * superop;
  return residual.cwiseAbs().maxCoeff();
}

}  // namespace fermsim
