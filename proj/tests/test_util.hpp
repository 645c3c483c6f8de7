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

// Random generators and reference implementations shared by the tests.
// The oracles here deliberately avoid the library's own routines.

#ifndef SEPCARD_TESTS_TEST_UTIL_HPP
#define SEPCARD_TESTS_TEST_UTIL_HPP

#include "sepcard/sepcard.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace sepcard::testing {

using Rng = std::mt19937_64;

inline Vector random_vector(Rng& rng, Index n) {
  std::normal_distribution<double> g;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
  return v;
}

inline Vector random_unit(Rng& rng, Index n) { return random_vector(rng, n).normalized(); }

inline Vector random_real_unit(Rng& rng, Index n) {
  std::normal_distribution<double> g;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = g(rng);
  return v.normalized();
}

inline Matrix random_matrix(Rng& rng, Index r, Index c) {
  std::normal_distribution<double> g;
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

inline Matrix random_hermitian(Rng& rng, Index n) {
  const Matrix m = random_matrix(rng, n, n);
  return 0.5 * (m + m.adjoint());
}

/// Haar-ish unitary from the QR of a Gaussian matrix with phases fixed.
inline Matrix random_unitary(Rng& rng, Index n) {
  const Matrix g = random_matrix(rng, n, n);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

/// k×r isometry (k ≥ r): the first r columns of a random k×k unitary.
inline Matrix random_isometry(Rng& rng, Index k, Index r) {
  return random_unitary(rng, k).leftCols(r);
}

/// Random density matrix of the given rank.
inline DensityMatrix random_density(Rng& rng, BipartiteSpace s, Index rank) {
  const Matrix g = random_matrix(rng, s.total(), rank);
  Matrix m = g * g.adjoint();
  m /= m.trace().real();
  return DensityMatrix(s, m);
}

inline StateVector random_state(Rng& rng, BipartiteSpace s) {
  return StateVector(s, random_unit(rng, s.total()));
}

inline ProductState random_product(Rng& rng, BipartiteSpace s) {
  return ProductState(random_unit(rng, s.dim_a()), random_unit(rng, s.dim_b()));
}

inline std::vector<double> random_weights(Rng& rng, std::size_t k) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> w(k);
  double sum = 0.0;
  for (auto& x : w) sum += (x = u(rng));
  for (auto& x : w) x /= sum;
  return w;
}

inline Ensemble random_product_ensemble(Rng& rng, BipartiteSpace s, std::size_t k) {
  const auto w = random_weights(rng, k);
  std::vector<EnsembleMember> members;
  for (std::size_t i = 0; i < k; ++i) members.push_back({w[i], random_product(rng, s)});
  return Ensemble::of(std::move(members));
}

inline Ensemble random_pure_ensemble(Rng& rng, BipartiteSpace s, std::size_t k) {
  const auto w = random_weights(rng, k);
  std::vector<EnsembleMember> members;
  for (std::size_t i = 0; i < k; ++i) members.push_back({w[i], random_state(rng, s)});
  return Ensemble::of(std::move(members));
}

// ---------------------------------------------------------------------------
// Oracles.

/// Cyclic complex Jacobi eigenvalue iteration; ascending eigenvalues.
inline std::vector<double> jacobi_eigenvalues(Matrix a, int sweeps = 100) {
  const Index n = a.rows();
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double off = 0.0;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    if (off < 1e-30) break;
    for (Index p = 0; p < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag < 1e-300) continue;
        const Complex phase = apq / mag;
        const double app = a(p, p).real(), aqq = a(q, q).real();
        const double theta = 0.5 * std::atan2(2.0 * mag, aqq - app);
        const double c = std::cos(theta), s = std::sin(theta);
        // Columns p, q of the rotation J: J(p,p)=c, J(q,p)=-s·conj(phase),
        // J(p,q)=s·phase, J(q,q)=c.
        for (Index k = 0; k < n; ++k) {
          const Complex akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * std::conj(phase) * akq;
          a(k, q) = s * phase * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const Complex apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * phase * aqk;
          a(q, k) = s * std::conj(phase) * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i).real();
  std::sort(ev.begin(), ev.end());
  return ev;
}

/// Kronecker product by explicit index arithmetic.
inline Matrix kron_oracle(const Matrix& x, const Matrix& y) {
  Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j)
      for (Index k = 0; k < y.rows(); ++k)
        for (Index l = 0; l < y.cols(); ++l) out(i * y.rows() + k, j * y.cols() + l) = x(i, j) * y(k, l);
  return out;
}

/// ρ^{T_B} = Σ_kl (1 ⊗ E_kl) ρ (1 ⊗ E_kl).
inline Matrix partial_transpose_oracle(const Matrix& rho, Index da, Index db) {
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  const Matrix ia = Matrix::Identity(da, da);
  for (Index k = 0; k < db; ++k) {
    for (Index l = 0; l < db; ++l) {
      Matrix e = Matrix::Zero(db, db);
      e(k, l) = 1.0;
      const Matrix x = kron_oracle(ia, e);
      out += x * rho * x;
    }
  }
  return out;
}

/// Eigenvalues of the partial transpose, computed without library code.
inline std::vector<double> pt_spectrum_oracle(const Matrix& rho, Index da, Index db) {
  return jacobi_eigenvalues(partial_transpose_oracle(rho, da, db));
}

/// Rank by counting singular values above a relative threshold.
inline int svd_rank_oracle(const Matrix& m, double rel) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Index i = 0; i < s.size(); ++i) r += s(i) > rel * s(0) ? 1 : 0;
  return r;
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace sepcard::testing

#endif  // SEPCARD_TESTS_TEST_UTIL_HPP
