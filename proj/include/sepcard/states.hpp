// Copyright 2026 The sepcard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SEPCARD_STATES_HPP
#define SEPCARD_STATES_HPP

#include "sepcard/hilbert_core.hpp"
#include "sepcard/product_bases.hpp"

#include <functional>

namespace sepcard {

inline constexpr double kDensityTol = 1e-9;

/// Relative rank tolerance for every rank that feeds a cardinality claim.
/// Bisection leaves residual "zero" eigenvalues of order 1e-12; the default
/// dim·eps threshold would count those as nonzero.
inline constexpr double kClaimRankTol = 1e-9;

/// Hermitian, positive semidefinite, unit-trace operator.
class DensityMatrix {
 public:
  explicit DensityMatrix(Operator op, double tol = kDensityTol) : op_(std::move(op)), tol_(tol) {
    const Matrix& m = op_.matrix();
    if (hermitian_defect(m) > tol_) throw NotHermitian("DensityMatrix: operator is not hermitian");
    if (std::abs(m.trace() - 1.0) > tol_) {
      throw std::invalid_argument("DensityMatrix: trace is " + std::to_string(m.trace().real()));
    }
    const double lo = eigenvalues_hermitian(m).minCoeff();
    if (lo < -tol_) {
      throw std::invalid_argument("DensityMatrix: negative eigenvalue " + std::to_string(lo));
    }
  }

  DensityMatrix(BipartiteSpace space, Matrix m, double tol = kDensityTol)
      : DensityMatrix(Operator(space, std::move(m)), tol) {}

  static DensityMatrix pure(const StateVector& v) {
    return DensityMatrix(v.space(), v.projector());
  }

  static DensityMatrix maximally_mixed(BipartiteSpace space) {
    return DensityMatrix(space, Matrix::Identity(space.total(), space.total()) /
                                    static_cast<double>(space.total()));
  }

  const Operator& op() const { return op_; }
  const Matrix& matrix() const { return op_.matrix(); }
  const BipartiteSpace& space() const { return op_.space(); }
  double tol() const { return tol_; }

  RealVector eigenvalues() const { return eigenvalues_hermitian(op_.matrix()); }
  int rank(double rel_tol = kClaimRankTol) const { return numerical_rank(eigenvalues(), rel_tol); }

 private:
  Operator op_;
  double tol_;
};

/// (1/√n) Σ_i |ii⟩.
inline StateVector max_entangled(Index n) {
  if (n < 2) throw std::invalid_argument("max_entangled: n must be >= 2");
  const BipartiteSpace s(n, n);
  Vector v = Vector::Zero(s.total());
  for (Index i = 0; i < n; ++i) v(s.index(i, i)) = 1.0 / std::sqrt(static_cast<double>(n));
  return StateVector(s, v);
}

/// f |Ψ⁺⟩⟨Ψ⁺| + (1 − f)/n² · 1 on n ⊗ n.
struct WernerFamily {
  Index n;
  double f;

  WernerFamily(Index n_, double f_) : n(n_), f(f_) {
    if (n < 2) throw std::invalid_argument("WernerFamily: n must be >= 2");
    if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("WernerFamily: f must lie in [0, 1]");
  }

  DensityMatrix state() const {
    const StateVector psi = max_entangled(n);
    const Index d = n * n;
    Matrix m = f * psi.projector() +
               ((1.0 - f) / static_cast<double>(d)) * Matrix::Identity(d, d);
    return DensityMatrix(psi.space(), std::move(m));
  }

  /// Overlap ⟨Ψ⁺|ρ|Ψ⁺⟩ = f + (1 − f)/n².
  double fidelity() const { return f + (1.0 - f) / static_cast<double>(n * n); }
};

inline DensityMatrix werner(Index n, double f) { return WernerFamily(n, f).state(); }

/// Normalized projector onto the orthogonal complement of span(S).
inline DensityMatrix complement_state(const ProductBasis& s) {
  const auto& space = s.space();
  const auto report = verify_orthonormal_product_set(s);
  if (!report.pass) throw std::invalid_argument("complement_state: S is not orthonormal");
  if (static_cast<Index>(s.size()) >= space.total()) {
    throw std::invalid_argument("complement_state: |S| must be below the space dimension");
  }
  Matrix m = Matrix::Identity(space.total(), space.total());
  for (const auto& member : s.members()) {
    const Vector v = member.joint();
    m -= v * v.adjoint();
  }
  m /= static_cast<double>(space.total() - static_cast<Index>(s.size()));
  return DensityMatrix(space, std::move(m));
}

/// −Σ λ log₂ λ with 0·log 0 = 0. Eigenvalues below zero from roundoff are
/// treated as zero.
inline double entropy_bits(const RealVector& eigenvalues) {
  double s = 0.0;
  for (double x : eigenvalues) {
    if (x > 0.0) s -= x * std::log2(x);
  }
  return s;
}

inline double von_neumann_entropy(const Matrix& rho) {
  return entropy_bits(eigenvalues_hermitian(rho));
}

inline double von_neumann_entropy(const DensityMatrix& rho) {
  return entropy_bits(rho.eigenvalues());
}

/// Entropy of one reduction of a pure state, in bits.
inline double pure_entanglement(const StateVector& v, Subsystem reduce_to = Subsystem::A) {
  const Operator proj(v.space(), v.projector());
  return von_neumann_entropy(partial_trace(proj, reduce_to));
}

struct PptResult {
  bool ppt = false;
  double min_eigenvalue = 0.0;
};

inline PptResult is_ppt(const DensityMatrix& rho, double tol = 1e-10) {
  const double lo = eigenvalues_hermitian(partial_transpose(rho.op()).matrix()).minCoeff();
  return {lo >= -tol, lo};
}

struct BoundaryOptions {
  double tol = 1e-12;
  int max_iterations = 200;
};

struct BoundaryResult {
  double parameter = 0.0;
  double bracket_width = 0.0;
  int iterations = 0;
};

/// Bisection on the sign of the minimum eigenvalue of the partial transpose
/// along a one-parameter family. The family must be PPT at one endpoint and
/// NPT at the other.
inline BoundaryResult ppt_boundary(const std::function<DensityMatrix(double)>& family, double lo,
                                   double hi, BoundaryOptions opt = {}) {
  auto min_pt = [&](double t) {
    return eigenvalues_hermitian(partial_transpose(family(t).op()).matrix()).minCoeff();
  };
  const bool lo_ppt = min_pt(lo) >= 0.0;
  const bool hi_ppt = min_pt(hi) >= 0.0;
  if (lo_ppt == hi_ppt) {
    throw std::invalid_argument("ppt_boundary: endpoints have the same PPT status");
  }
  double ppt_side = lo_ppt ? lo : hi;
  double npt_side = lo_ppt ? hi : lo;
  int it = 0;
  while (std::abs(npt_side - ppt_side) > opt.tol && it < opt.max_iterations) {
    const double mid = 0.5 * (ppt_side + npt_side);
    if (mid == ppt_side || mid == npt_side) break;
    (min_pt(mid) >= 0.0 ? ppt_side : npt_side) = mid;
    ++it;
  }
  return {0.5 * (ppt_side + npt_side), std::abs(npt_side - ppt_side), it};
}

inline BoundaryResult werner_ppt_boundary(Index n, BoundaryOptions opt = {}) {
  return ppt_boundary([n](double f) { return werner(n, f); }, 0.0, 1.0, opt);
}

/// Partial transpose of a state, revalidated as a density matrix.
inline DensityMatrix partial_transpose(const DensityMatrix& rho) {
  return DensityMatrix(partial_transpose(rho.op()), rho.tol());
}

}  // namespace sepcard

#endif  // SEPCARD_STATES_HPP
