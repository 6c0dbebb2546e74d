#pragma once

// Integration of d/dt vec(ρ) = L(t) vec(ρ) for piecewise-constant L.

#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "fermsim/error.hpp"
#include "fermsim/liouvillian.hpp"
#include "fermsim/operators.hpp"

namespace fermsim {

/// Column stacking.
inline StateVector vec(const Operator& rho) {
  if (rho.rows() != rho.cols()) throw std::invalid_argument("vec: matrix is not square");
  return rho.reshaped();
}

inline Operator unvec(const StateVector& v) {
  const auto dim = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (dim * dim != v.size()) throw std::invalid_argument("unvec: length " + std::to_string(v.size()) + " is not a square");
  return v.reshaped(dim, dim);
}

enum class Method { expm, rk4 };

struct TimeGrid {
  std::vector<double> times;

  /// 0, dt, 2dt, ... up to t_max (t_max itself is always the last point).
  static TimeGrid uniform(double t_max, double dt) {
    if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    TimeGrid grid;
    const auto steps = static_cast<long long>(std::floor(t_max / dt + 1e-9));
    for (long long k = 0; k <= steps; ++k) grid.times.push_back(static_cast<double>(k) * dt);
    if (t_max - grid.times.back() > 1e-9 * std::max(1.0, t_max))
      grid.times.push_back(t_max);
    else
      grid.times.back() = std::min(grid.times.back(), t_max);
    return grid;
  }
};

struct Diagnostics {
  double trace_deviation = 0.0;
  double min_eigenvalue = 0.0;
  double hermiticity_defect = 0.0;
};

inline Diagnostics diagnose(const Operator& rho) {
  Diagnostics d;
  d.trace_deviation = std::abs(rho.trace() - Complex(1.0));
  d.hermiticity_defect = hermiticity_defect(rho);
  const Operator h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator> solver(h, Eigen::EigenvaluesOnly);
  d.min_eigenvalue = solver.eigenvalues().minCoeff();
  return d;
}

struct Trajectory {
  int n_sites = 0;
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<Diagnostics> diagnostics;

  std::size_t size() const { return times.size(); }
  Operator density(std::size_t k) const { return unvec(states.at(k)); }
};

struct HealthBounds {
  double trace = 1e-8;
  double min_eigenvalue = -1e-7;
  double hermiticity = 1e-8;
};

/// Empty string when every recorded point satisfies the bounds, otherwise a
/// description of the first violation.
inline std::string health_violation(const Trajectory& traj, const HealthBounds& bounds = {}) {
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& d = traj.diagnostics[k];
    const std::string at = " at t = " + std::to_string(traj.times[k]);
    if (!(d.trace_deviation < bounds.trace)) return "trace deviation " + std::to_string(d.trace_deviation) + at;
    if (!(d.min_eigenvalue > bounds.min_eigenvalue))
      return "negative eigenvalue " + std::to_string(d.min_eigenvalue) + at;
    if (!(d.hermiticity_defect < bounds.hermiticity))
      return "Hermiticity defect " + std::to_string(d.hermiticity_defect) + at;
  }
  return {};
}

/// Throws std::invalid_argument unless rho is a density matrix within tolerance.
inline void validate_density(const Operator& rho, double tol = kPsdTolerance) {
  if (rho.rows() != rho.cols()) throw std::invalid_argument("density matrix is not square");
  if (hermiticity_defect(rho) >= kHermitianTolerance) throw std::invalid_argument("density matrix is not Hermitian");
  if (std::abs(rho.trace() - Complex(1.0)) > tol) throw std::invalid_argument("density matrix trace differs from 1");
  if (herm_eig(rho).values.minCoeff() < -tol) throw std::invalid_argument("density matrix has a negative eigenvalue");
}

struct EvolveOptions {
  Method method = Method::expm;
  /// rk4 step; defaults to min(grid spacing, 0.4 / ||L||_1).
  std::optional<double> rk4_step;
};

inline constexpr double kRk4StabilityFactor = 0.4;

namespace detail {

// Pieces of [t0, t1) lying inside single segments, in chronological order.
inline std::vector<std::pair<std::size_t, double>> split_interval(const Liouvillian& l, double t0, double t1) {
  std::vector<std::pair<std::size_t, double>> pieces;
  double t = t0;
  while (t < t1) {
    const std::size_t k = l.segment_index(t);
    const double end = std::min(t1, l.segments()[k].t_end);
    pieces.emplace_back(k, end - t);
    t = end;
  }
  return pieces;
}

class PropagatorCache {
 public:
  explicit PropagatorCache(const Liouvillian& l) : l_(l) {}

  const Operator& get(std::size_t segment, double tau) {
    const auto key = std::make_pair(segment, std::llround(tau * 1e12));
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, matrix_exp(l_.segments()[segment].generator, tau)).first;
    return it->second;
  }

 private:
  const Liouvillian& l_;
  std::map<std::pair<std::size_t, long long>, Operator> cache_;
};

using SparseOperator = Eigen::SparseMatrix<Complex>;

inline void rk4_advance(const SparseOperator& gen, StateVector& v, double tau, double h_max) {
  const auto steps = static_cast<long long>(std::ceil(tau / h_max - 1e-9));
  const double h = tau / static_cast<double>(std::max(1LL, steps));
  StateVector k1(v.size()), k2(v.size()), k3(v.size()), k4(v.size()), tmp(v.size());
  for (long long s = 0; s < std::max(1LL, steps); ++s) {
    k1.noalias() = gen * v;
    tmp = v + (0.5 * h) * k1;
    k2.noalias() = gen * tmp;
    tmp = v + (0.5 * h) * k2;
    k3.noalias() = gen * tmp;
    tmp = v + h * k3;
    k4.noalias() = gen * tmp;
    v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
}

}  // namespace detail

/// Record ρ(t) on every grid point, starting from rho0 at grid.times.front().
/// With Method::expm each constant piece advances by exp(L τ), applied in
/// chronological order.
inline Trajectory evolve(const Liouvillian& l, const Operator& rho0, const TimeGrid& grid, const EvolveOptions& options = {}) {
  const Index dim = fock_dimension(l.n_sites());
  if (rho0.rows() != dim || rho0.cols() != dim)
    throw std::invalid_argument("initial state dimension does not match the Liouvillian");
  validate_density(rho0);
  if (grid.times.empty()) throw std::invalid_argument("empty time grid");
  for (std::size_t k = 1; k < grid.times.size(); ++k)
    if (!(grid.times[k] > grid.times[k - 1])) throw std::invalid_argument("time grid must be strictly increasing");
  if (grid.times.front() < l.t_begin() || grid.times.back() > l.t_end())
    throw std::out_of_range("time grid escapes the profile coverage");

  double h_max = 0.0;
  if (options.method == Method::rk4) {
    const double bound = kRk4StabilityFactor / std::max(l.norm1(), 1e-300);
    if (options.rk4_step) {
      if (!(*options.rk4_step > 0.0) || *options.rk4_step > bound)
        throw std::invalid_argument("rk4 step " + std::to_string(*options.rk4_step) + " violates h <= 0.4/||L||_1 = " +
                                    std::to_string(bound));
      h_max = *options.rk4_step;
    } else {
      h_max = bound;
    }
  }

  Trajectory traj;
  traj.n_sites = l.n_sites();
  traj.times = grid.times;
  traj.states.reserve(grid.times.size());
  traj.diagnostics.reserve(grid.times.size());

  detail::PropagatorCache cache(l);
  std::vector<detail::SparseOperator> sparse;
  if (options.method == Method::rk4)
    for (const auto& s : l.segments()) sparse.push_back(s.generator.sparseView());
  StateVector v = vec(rho0);
  StateVector next(v.size());
  traj.states.push_back(v);
  traj.diagnostics.push_back(diagnose(rho0));
  for (std::size_t k = 1; k < grid.times.size(); ++k) {
    for (const auto& [segment, tau] : detail::split_interval(l, grid.times[k - 1], grid.times[k])) {
      if (options.method == Method::expm) {
        next.noalias() = cache.get(segment, tau) * v;
        v.swap(next);
      } else {
        detail::rk4_advance(sparse[segment], v, tau, h_max);
      }
    }
    traj.states.push_back(v);
    traj.diagnostics.push_back(diagnose(unvec(v)));
  }
  return traj;
}

/// Unique stationary state of a time-independent generator, normalized to unit
/// trace. When `sector` lists basis indices of an invariant Hilbert subspace,
/// the search is restricted to operators supported on that subspace.
inline Operator steady_state(const Liouvillian& l, std::span<const Index> sector = {}) {
  if (!l.time_independent()) throw std::invalid_argument("steady_state needs a time-independent Liouvillian");
  const Operator& gen = l.segments().front().generator;
  const Index dim = fock_dimension(l.n_sites());

  std::vector<Index> basis;
  if (sector.empty()) {
    for (Index k = 0; k < dim; ++k) basis.push_back(k);
  } else {
    basis.assign(sector.begin(), sector.end());
    for (Index k : basis)
      if (k < 0 || k >= dim) throw std::out_of_range("sector index out of range");
  }
  std::vector<Index> idx;  // vec positions of |a><b| with a, b in the sector
  for (Index b : basis)
    for (Index a : basis) idx.push_back(a + b * dim);

  if (!sector.empty()) {
    std::vector<bool> inside(static_cast<std::size_t>(gen.rows()), false);
    for (Index r : idx) inside[static_cast<std::size_t>(r)] = true;
    double leak = 0.0;
    for (Index c : idx)
      for (Index r = 0; r < gen.rows(); ++r)
        if (!inside[static_cast<std::size_t>(r)]) leak = std::max(leak, std::abs(gen(r, c)));
    if (leak > 1e-12) throw std::invalid_argument("steady_state: sector is not invariant under L");
  }

  const Operator sub = gen(idx, idx);
  Eigen::BDCSVD<Operator> svd(sub, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double threshold = 1e-10 * std::max(1.0, sv(0));
  Index null_dim = 0;
  for (Index k = 0; k < sv.size(); ++k)
    if (sv(k) <= threshold) ++null_dim;
  if (null_dim != 1)
    throw NumericalError("steady_state: null space has dimension " + std::to_string(null_dim) + " (expected 1)");

  StateVector full = StateVector::Zero(dim * dim);
  const StateVector null_vec = svd.matrixV().col(sv.size() - 1);
  for (std::size_t k = 0; k < idx.size(); ++k) full(idx[k]) = null_vec(static_cast<Index>(k));
  Operator rho = unvec(full);
  const Complex tr = rho.trace();
  if (std::abs(tr) < 1e-14) throw NumericalError("steady_state: null vector is traceless");
  rho /= tr;
  rho = (0.5 * (rho + rho.adjoint())).eval();

  const HermitianEigen eig = herm_eig(rho);
  if (eig.values.minCoeff() < -kPsdTolerance)
    throw NumericalError("steady_state: stationary matrix is not positive semidefinite");
  rho = eig.vectors * eig.values.cwiseMax(0.0).cast<Complex>().asDiagonal() * eig.vectors.adjoint();
  rho /= rho.trace();

  const double residual = (gen * vec(rho)).norm();
  if (!(residual < 1e-9)) throw NumericalError("steady_state: residual " + std::to_string(residual) + " too large");
  return rho;
}

}  // namespace fermsim
