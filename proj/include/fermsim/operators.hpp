#pragma once

// Dense operator algebra on 2^D-dimensional Fock spaces and the Jordan-Wigner
// construction of fermionic operators.
//
// Per-site basis: index 0 = occupied, index 1 = empty. Site 1 is the leftmost
// (slowest varying) tensor factor, so the Fock label "1001" reads left to right
// as sites 1..4.

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <bit>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fermsim/error.hpp"

namespace fermsim {

using Complex = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kPsdTolerance = 1e-9;

enum class Pauli { x, y, z, plus, minus, identity, p_plus };

inline Operator pauli(Pauli which) {
  using namespace std::complex_literals;
  Operator m = Operator::Zero(2, 2);
  switch (which) {
    case Pauli::x:
      m << 0.0, 1.0, 1.0, 0.0;
      break;
    case Pauli::y:
      m << 0.0, -1i, 1i, 0.0;
      break;
    case Pauli::z:
      m << 1.0, 0.0, 0.0, -1.0;
      break;
    case Pauli::plus:  // empty -> occupied
      m << 0.0, 1.0, 0.0, 0.0;
      break;
    case Pauli::minus:  // occupied -> empty
      m << 0.0, 0.0, 1.0, 0.0;
      break;
    case Pauli::identity:
      m << 1.0, 0.0, 0.0, 1.0;
      break;
    case Pauli::p_plus:
      m << 1.0, 0.0, 0.0, 0.0;
      break;
  }
  return m;
}

inline Operator kron(const Operator& a, const Operator& b) {
  Operator out(a.rows() * b.rows(), a.cols() * b.cols());
  out = Eigen::kroneckerProduct(a, b);
  return out;
}

/// Left factor is the lowest site index.
inline Operator kron_chain(std::span<const Operator> factors) {
  if (factors.empty()) throw std::invalid_argument("kron_chain: empty factor list");
  Operator out = factors.front();
  for (std::size_t k = 1; k < factors.size(); ++k) out = kron(out, factors[k]);
  return out;
}

inline Operator kron_chain(std::initializer_list<Operator> factors) {
  return kron_chain(std::span<const Operator>(factors.begin(), factors.size()));
}

inline Index fock_dimension(int n_sites) {
  if (n_sites < 0 || n_sites > 30) throw std::out_of_range("site count out of range: " + std::to_string(n_sites));
  return Index{1} << n_sites;
}

/// Number of sites of a 2^L-dimensional square operator.
inline int site_count(const Operator& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("operator is not square");
  const auto dim = static_cast<std::size_t>(a.rows());
  if (dim < 2 || !std::has_single_bit(dim))
    throw std::invalid_argument("operator dimension " + std::to_string(dim) + " is not a power of two");
  return std::countr_zero(dim);
}

inline Operator identity_on(int n_sites) {
  const Index dim = fock_dimension(n_sites);
  return Operator::Identity(dim, dim);
}

/// Occupation pattern of a Fock basis state; bit k (0-based) is site k+1.
class FockLabel {
 public:
  FockLabel() = default;
  explicit FockLabel(std::vector<bool> occupied) : bits_(std::move(occupied)) {}

  static FockLabel parse(std::string_view text) {
    std::vector<bool> bits;
    bits.reserve(text.size());
    for (char c : text) {
      if (c != '0' && c != '1') throw std::invalid_argument("invalid Fock label '" + std::string(text) + "'");
      bits.push_back(c == '1');
    }
    if (bits.empty()) throw std::invalid_argument("empty Fock label");
    return FockLabel(std::move(bits));
  }

  static FockLabel from_index(Index index, int n_sites) {
    std::vector<bool> bits(static_cast<std::size_t>(n_sites));
    for (int k = 0; k < n_sites; ++k) bits[static_cast<std::size_t>(k)] = ((index >> (n_sites - 1 - k)) & 1) == 0;
    return FockLabel(std::move(bits));
  }

  int size() const { return static_cast<int>(bits_.size()); }
  bool occupied(int site) const { return bits_.at(static_cast<std::size_t>(site - 1)); }

  /// Row index in the tensor basis: site 1 is the most significant bit, and an
  /// occupied site contributes a 0 bit.
  Index index() const {
    Index idx = 0;
    for (bool b : bits_) idx = (idx << 1) | (b ? 0 : 1);
    return idx;
  }

  StateVector ket() const {
    StateVector v = StateVector::Zero(fock_dimension(size()));
    v(index()) = 1.0;
    return v;
  }

  Operator projector() const {
    const StateVector v = ket();
    return v * v.adjoint();
  }

  std::string str() const {
    std::string s;
    for (bool b : bits_) s.push_back(b ? '1' : '0');
    return s;
  }

  friend bool operator==(const FockLabel&, const FockLabel&) = default;

 private:
  std::vector<bool> bits_;
};

namespace detail {

inline void check_site(int site, int n_sites, const char* what) {
  if (n_sites < 1) throw std::out_of_range(std::string(what) + ": system size must be positive");
  if (site < 1 || site > n_sites)
    throw std::out_of_range(std::string(what) + ": site " + std::to_string(site) + " outside 1.." +
                            std::to_string(n_sites));
}

// Chain of single-site factors: `left` on sites < m, `op` on m, `right` on sites > m.
inline Operator site_chain(Pauli left, Pauli op, Pauli right, int m, int n_sites) {
  std::vector<Operator> factors;
  factors.reserve(static_cast<std::size_t>(n_sites));
  for (int k = 1; k <= n_sites; ++k) factors.push_back(pauli(k < m ? left : (k == m ? op : right)));
  return kron_chain(factors);
}

}  // namespace detail

/// d_m = σz^{⊗(m-1)} ⊗ σ₋ ⊗ I^{⊗(D-m)}
inline Operator annihilator(int m, int n_sites) {
  detail::check_site(m, n_sites, "annihilator");
  return detail::site_chain(Pauli::z, Pauli::minus, Pauli::identity, m, n_sites);
}

inline Operator creator(int m, int n_sites) { return annihilator(m, n_sites).adjoint(); }

/// System-side jump operator S_i = I^{⊗(i-1)} ⊗ σ₋ ⊗ σz^{⊗(N-i)}. The parity
/// string runs to the right, the mirror image of annihilator().
inline Operator system_jump(int i, int n_sites) {
  detail::check_site(i, n_sites, "system_jump");
  return detail::site_chain(Pauli::identity, Pauli::minus, Pauli::z, i, n_sites);
}

inline Operator number_op(int i, int n_sites) {
  detail::check_site(i, n_sites, "number_op");
  return detail::site_chain(Pauli::identity, Pauli::p_plus, Pauli::identity, i, n_sites);
}

inline double hermiticity_defect(const Operator& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("operator is not square");
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline void require_hermitian(const Operator& a, std::string_view what, double tol = kHermitianTolerance) {
  const double defect = hermiticity_defect(a);
  if (!(defect < tol))
    throw std::invalid_argument(std::string(what) + ": operator is not Hermitian (defect " + std::to_string(defect) +
                                ")");
}

struct HermitianEigen {
  Eigen::VectorXd values;  // descending
  Operator vectors;        // columns are eigenvectors
};

inline HermitianEigen herm_eig(const Operator& a, double tol = kHermitianTolerance) {
  require_hermitian(a, "herm_eig", tol);
  const Operator h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator> solver(h);
  if (solver.info() != Eigen::Success) throw NumericalError("herm_eig: eigensolver did not converge");
  const Index n = h.rows();
  HermitianEigen out{Eigen::VectorXd(n), Operator(n, n)};
  // Eigen returns ascending order.
  for (Index k = 0; k < n; ++k) {
    out.values(k) = solver.eigenvalues()(n - 1 - k);
    out.vectors.col(k) = solver.eigenvectors().col(n - 1 - k);
  }
  return out;
}

/// Principal square root of a positive semidefinite matrix. Eigenvalues in
/// [-kPsdTolerance, 0) are clipped to zero.
inline Operator matrix_sqrt_psd(const Operator& a, double hermitian_tol = kHermitianTolerance) {
  const HermitianEigen eig = herm_eig(a, hermitian_tol);
  const Index n = a.rows();
  if (n > 0 && eig.values(n - 1) < -kPsdTolerance)
    throw std::invalid_argument("matrix_sqrt_psd: eigenvalue " + std::to_string(eig.values(n - 1)) +
                                " below tolerance");
  const Eigen::VectorXd roots = eig.values.cwiseMax(0.0).cwiseSqrt();
  return eig.vectors * roots.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
}

/// exp(scale * A) by scaling and squaring with Pade approximants.
inline Operator matrix_exp(const Operator& a, Complex scale = 1.0) {
  if (a.rows() != a.cols()) throw std::invalid_argument("matrix_exp: operator is not square");
  const Operator scaled = scale * a;
  Operator out = scaled.exp();
  return out;
}

/// Anticommutator {A, B}.
inline Operator anticommutator(const Operator& a, const Operator& b) { return a * b + b * a; }

}  // namespace fermsim
