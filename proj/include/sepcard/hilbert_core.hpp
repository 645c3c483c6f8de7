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

#ifndef SEPCARD_HILBERT_CORE_HPP
#define SEPCARD_HILBERT_CORE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sepcard {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NotHermitian : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Relative asymmetry ‖m − m†‖_F / max(1, ‖m‖_F) tolerated before a matrix is
/// rejected as non-hermitian. Below it, (m + m†)/2 is used.
inline constexpr double kHermitianTol = 1e-9;

/// Tolerance on ‖v‖₂ − 1 for StateVector.
inline constexpr double kUnitNormTol = 1e-10;

enum class Subsystem { A, B };

/// Two-factor split of a finite-dimensional Hilbert space. Basis state
/// |i⟩_A|j⟩_B sits at flat index i·dim_b + j.
class BipartiteSpace {
 public:
  BipartiteSpace(Index dim_a, Index dim_b) : dim_a_(dim_a), dim_b_(dim_b) {
    if (dim_a < 1 || dim_b < 1) {
      throw std::invalid_argument("BipartiteSpace: dimensions must be positive");
    }
  }

  Index dim_a() const { return dim_a_; }
  Index dim_b() const { return dim_b_; }
  Index total() const { return dim_a_ * dim_b_; }
  Index dim(Subsystem s) const { return s == Subsystem::A ? dim_a_ : dim_b_; }
  Index index(Index i, Index j) const { return i * dim_b_ + j; }

  bool operator==(const BipartiteSpace&) const = default;

  std::string to_string() const {
    return std::to_string(dim_a_) + "x" + std::to_string(dim_b_);
  }

 private:
  Index dim_a_;
  Index dim_b_;
};

/// Square matrix on a bipartite space.
class Operator {
 public:
  Operator(BipartiteSpace space, Matrix entries)
      : space_(space), entries_(std::move(entries)) {
    if (entries_.rows() != space_.total() || entries_.cols() != space_.total()) {
      throw DimensionMismatch("Operator: matrix is " + std::to_string(entries_.rows()) +
                              "x" + std::to_string(entries_.cols()) + ", space " +
                              space_.to_string() + " needs " +
                              std::to_string(space_.total()));
    }
  }

  static Operator identity(BipartiteSpace space) {
    return Operator(space, Matrix::Identity(space.total(), space.total()));
  }

  const BipartiteSpace& space() const { return space_; }
  const Matrix& matrix() const { return entries_; }

 private:
  BipartiteSpace space_;
  Matrix entries_;
};

/// Unit vector on a bipartite space.
class StateVector {
 public:
  StateVector(BipartiteSpace space, Vector amplitudes)
      : space_(space), amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() != space_.total()) {
      throw DimensionMismatch("StateVector: length " + std::to_string(amplitudes_.size()) +
                              " does not match space " + space_.to_string());
    }
    if (std::abs(amplitudes_.norm() - 1.0) > kUnitNormTol) {
      throw std::invalid_argument("StateVector: amplitudes are not unit norm");
    }
  }

  /// Rescales a nonzero vector to unit norm.
  static StateVector normalized(BipartiteSpace space, const Vector& v) {
    const double n = v.norm();
    if (n == 0.0) throw std::invalid_argument("StateVector: zero vector");
    return StateVector(space, v / n);
  }

  const BipartiteSpace& space() const { return space_; }
  const Vector& amplitudes() const { return amplitudes_; }
  Matrix projector() const { return amplitudes_ * amplitudes_.adjoint(); }

 private:
  BipartiteSpace space_;
  Vector amplitudes_;
};

/// Kronecker product, A-major: (a ⊗ b)(i·rows_b + k, j·cols_b + l) = a(i,j)·b(k,l).
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> tensor(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                            a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Product vector a ⊗ b in the flat index convention.
inline Vector tensor_vector(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

/// Transpose on the B factor in the computational basis:
/// ⟨i k|out|j l⟩ = ⟨i l|op|j k⟩.
inline Operator partial_transpose(const Operator& op) {
  const auto& s = op.space();
  const Index da = s.dim_a(), db = s.dim_b();
  const Matrix& m = op.matrix();
  Matrix out(s.total(), s.total());
  for (Index i = 0; i < da; ++i) {
    for (Index j = 0; j < da; ++j) {
      out.block(i * db, j * db, db, db) = m.block(i * db, j * db, db, db).transpose();
    }
  }
  return Operator(s, std::move(out));
}

/// Reduced operator on the kept factor.
inline Matrix partial_trace(const Operator& op, Subsystem keep) {
  const auto& s = op.space();
  const Index da = s.dim_a(), db = s.dim_b();
  const Matrix& m = op.matrix();
  if (keep == Subsystem::A) {
    Matrix out = Matrix::Zero(da, da);
    for (Index i = 0; i < da; ++i)
      for (Index j = 0; j < da; ++j) out(i, j) = m.block(i * db, j * db, db, db).trace();
    return out;
  }
  Matrix out = Matrix::Zero(db, db);
  for (Index i = 0; i < da; ++i) out += m.block(i * db, i * db, db, db);
  return out;
}

inline double hermitian_defect(const Matrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.adjoint()).norm() / std::max(1.0, m.norm());
}

struct HermitianEigen {
  RealVector values;  // ascending
  Matrix vectors;     // columns, orthonormal
};

/// Spectral decomposition of a hermitian matrix. Inputs with relative
/// asymmetry below kHermitianTol are symmetrized first.
inline HermitianEigen eig_hermitian(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("eig_hermitian: matrix is not square");
  const double defect = hermitian_defect(m);
  if (defect > kHermitianTol) {
    throw NotHermitian("eig_hermitian: relative asymmetry " + std::to_string(defect));
  }
  const Matrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eig_hermitian: eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline RealVector eigenvalues_hermitian(const Matrix& m) { return eig_hermitian(m).values; }

namespace detail {

inline double rank_threshold(const RealVector& eigenvalues, std::optional<double> rel_tol) {
  if (eigenvalues.size() == 0) return 0.0;
  const double scale = eigenvalues.cwiseAbs().maxCoeff();
  const double rel = rel_tol.value_or(static_cast<double>(eigenvalues.size()) *
                                      std::numeric_limits<double>::epsilon());
  return rel * scale;
}

}  // namespace detail

/// Count of eigenvalues with |λ| > tol·max|λ|. Default tol is
/// dim·machine-epsilon. The zero matrix has rank 0.
inline int numerical_rank(const RealVector& eigenvalues, std::optional<double> rel_tol = {}) {
  const double thr = detail::rank_threshold(eigenvalues, rel_tol);
  if (eigenvalues.size() == 0 || eigenvalues.cwiseAbs().maxCoeff() == 0.0) return 0;
  int r = 0;
  for (double x : eigenvalues) r += std::abs(x) > thr ? 1 : 0;
  return r;
}

inline int numerical_rank(const Matrix& m, std::optional<double> rel_tol = {}) {
  return numerical_rank(eigenvalues_hermitian(m), rel_tol);
}

/// Complement of numerical_rank at the same tolerance.
inline int count_zero_eigenvalues(const RealVector& eigenvalues,
                                  std::optional<double> rel_tol = {}) {
  return static_cast<int>(eigenvalues.size()) - numerical_rank(eigenvalues, rel_tol);
}

struct SchmidtDecomposition {
  RealVector coefficients;  // descending, nonnegative
  Matrix a_basis;           // columns
  Matrix b_basis;           // columns
};

/// v = Σ_k λ_k a_k ⊗ b_k with min(dim_a, dim_b) terms.
inline SchmidtDecomposition schmidt_decompose(const StateVector& v) {
  const Index da = v.space().dim_a(), db = v.space().dim_b();
  Matrix coeffs(da, db);
  for (Index i = 0; i < da; ++i)
    for (Index j = 0; j < db; ++j) coeffs(i, j) = v.amplitudes()(i * db + j);
  Eigen::JacobiSVD<Matrix> svd(coeffs, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Index r = std::min(da, db);
  return {svd.singularValues().head(r), svd.matrixU().leftCols(r),
          svd.matrixV().leftCols(r).conjugate()};
}

// ---------------------------------------------------------------------------
// Tensor powers. The kron of `copies` bipartite operators orders factors as
// A1 B1 A2 B2 ...; the grouped order A1 A2 ... | B1 B2 ... is what partial
// transposition of the power acts on.

inline BipartiteSpace grouped_space(BipartiteSpace per_copy, int copies) {
  Index da = 1, db = 1;
  for (int c = 0; c < copies; ++c) {
    da *= per_copy.dim_a();
    db *= per_copy.dim_b();
  }
  return BipartiteSpace(da, db);
}

/// perm[interleaved flat index] = grouped flat index.
inline std::vector<Index> interleaved_to_grouped(BipartiteSpace per_copy, int copies) {
  if (copies < 1) throw std::invalid_argument("interleaved_to_grouped: copies must be >= 1");
  const Index da = per_copy.dim_a(), db = per_copy.dim_b();
  const BipartiteSpace g = grouped_space(per_copy, copies);
  std::vector<Index> perm(static_cast<std::size_t>(g.total()));
  std::vector<Index> a_digits(copies), b_digits(copies);
  for (Index flat = 0; flat < g.total(); ++flat) {
    Index rem = flat;
    for (int c = copies - 1; c >= 0; --c) {
      b_digits[c] = rem % db;
      rem /= db;
      a_digits[c] = rem % da;
      rem /= da;
    }
    Index ia = 0, ib = 0;
    for (int c = 0; c < copies; ++c) {
      ia = ia * da + a_digits[c];
      ib = ib * db + b_digits[c];
    }
    perm[static_cast<std::size_t>(flat)] = g.index(ia, ib);
  }
  return perm;
}

inline Matrix regroup(const Matrix& interleaved, BipartiteSpace per_copy, int copies) {
  const auto perm = interleaved_to_grouped(per_copy, copies);
  const Index d = static_cast<Index>(perm.size());
  if (interleaved.rows() != d || interleaved.cols() != d) {
    throw DimensionMismatch("regroup: matrix size does not match copies of the space");
  }
  Matrix out(d, d);
  for (Index r = 0; r < d; ++r)
    for (Index c = 0; c < d; ++c) out(perm[r], perm[c]) = interleaved(r, c);
  return out;
}

inline Vector regroup(const Vector& interleaved, BipartiteSpace per_copy, int copies) {
  const auto perm = interleaved_to_grouped(per_copy, copies);
  if (interleaved.size() != static_cast<Index>(perm.size())) {
    throw DimensionMismatch("regroup: vector size does not match copies of the space");
  }
  Vector out(interleaved.size());
  for (Index r = 0; r < interleaved.size(); ++r) out(perm[r]) = interleaved(r);
  return out;
}

/// op^{⊗copies} on the grouped (A1..Ak | B1..Bk) split.
inline Operator tensor_power(const Operator& op, int copies) {
  if (copies < 1) throw std::invalid_argument("tensor_power: copies must be >= 1");
  Matrix acc = op.matrix();
  for (int c = 1; c < copies; ++c) acc = tensor(acc, op.matrix());
  return Operator(grouped_space(op.space(), copies), regroup(acc, op.space(), copies));
}

}  // namespace sepcard

#endif  // SEPCARD_HILBERT_CORE_HPP
