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

#ifndef SEPCARD_PRODUCT_BASES_HPP
#define SEPCARD_PRODUCT_BASES_HPP

#include "sepcard/hilbert_core.hpp"

#include <array>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace sepcard {

inline constexpr double kFactorNormTol = 1e-12;
inline constexpr double kOrthogonalityTol = 1e-10;

/// Pure product state a ⊗ b with unit-norm factors.
class ProductState {
 public:
  ProductState(Vector a, Vector b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.size() == 0 || b_.size() == 0) {
      throw std::invalid_argument("ProductState: empty factor");
    }
    if (std::abs(a_.norm() - 1.0) > kFactorNormTol ||
        std::abs(b_.norm() - 1.0) > kFactorNormTol) {
      throw std::invalid_argument("ProductState: factors must be unit norm");
    }
  }

  static ProductState normalized(const Vector& a, const Vector& b) {
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw std::invalid_argument("ProductState: zero factor");
    return ProductState(a / na, b / nb);
  }

  const Vector& a() const { return a_; }
  const Vector& b() const { return b_; }
  BipartiteSpace space() const { return BipartiteSpace(a_.size(), b_.size()); }
  Vector joint() const { return tensor_vector(a_, b_); }
  StateVector state() const { return StateVector(space(), joint()); }

  /// ⟨this|other⟩ on the full space, computed factorwise.
  Complex overlap(const ProductState& other) const {
    return a_.dot(other.a_) * b_.dot(other.b_);
  }

 private:
  Vector a_;
  Vector b_;
};

/// Ordered set of product states on one bipartite space. Orthogonality is
/// checked by verify_orthonormal_product_set and enforced by every operation
/// that relies on it.
class ProductBasis {
 public:
  ProductBasis(BipartiteSpace space, std::vector<ProductState> members)
      : space_(space), members_(std::move(members)) {
    for (const auto& m : members_) {
      if (m.a().size() != space_.dim_a() || m.b().size() != space_.dim_b()) {
        throw DimensionMismatch("ProductBasis: member dimensions do not match " +
                                space_.to_string());
      }
    }
  }

  const BipartiteSpace& space() const { return space_; }
  const std::vector<ProductState>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  const ProductState& operator[](std::size_t i) const { return members_[i]; }

  ProductBasis with(const ProductState& extra) const {
    auto m = members_;
    m.push_back(extra);
    return ProductBasis(space_, std::move(m));
  }

 private:
  BipartiteSpace space_;
  std::vector<ProductState> members_;
};

struct GramReport {
  Matrix gram;
  bool pass = false;
  double max_off_diagonal = 0.0;
  double max_diagonal_error = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> offending_pairs;
  std::vector<std::size_t> offending_norms;
};

inline GramReport verify_orthonormal_product_set(const ProductBasis& s,
                                                 double off_tol = kOrthogonalityTol,
                                                 double diag_tol = kFactorNormTol) {
  const std::size_t k = s.size();
  GramReport r;
  r.gram = Matrix(static_cast<Index>(k), static_cast<Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      r.gram(static_cast<Index>(i), static_cast<Index>(j)) = s[i].overlap(s[j]);
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    const double d = std::abs(r.gram(static_cast<Index>(i), static_cast<Index>(i)) - 1.0);
    r.max_diagonal_error = std::max(r.max_diagonal_error, d);
    if (d > diag_tol) r.offending_norms.push_back(i);
    for (std::size_t j = i + 1; j < k; ++j) {
      const double o = std::abs(r.gram(static_cast<Index>(i), static_cast<Index>(j)));
      r.max_off_diagonal = std::max(r.max_off_diagonal, o);
      if (o >= off_tol) r.offending_pairs.emplace_back(i, j);
    }
  }
  r.pass = r.offending_pairs.empty() && r.offending_norms.empty();
  return r;
}

namespace detail {

inline void require_orthonormal(const ProductBasis& s, const char* who) {
  const auto report = verify_orthonormal_product_set(s);
  if (!report.pass) {
    throw std::invalid_argument(std::string(who) + ": members are not mutually orthonormal");
  }
}

/// Phase convention: the first entry of largest magnitude is real positive.
inline Vector fix_phase(const Vector& v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(best)) + 1e-12) best = i;
  }
  const Complex p = v(best);
  if (std::abs(p) == 0.0) return v;
  return v * (std::abs(p) / p);
}

/// Orthonormal basis (columns) of the orthogonal complement of span(vectors)
/// in C^dim. Chosen by pivoted Gram–Schmidt over the computational basis,
/// so coordinate-aligned complements come back as computational vectors.
inline Matrix orthogonal_complement(const std::vector<const Vector*>& vectors, Index dim,
                                    double rank_tol = 1e-9) {
  Index rank = 0;
  Matrix span_basis(dim, 0);
  if (!vectors.empty()) {
    Matrix stacked(dim, static_cast<Index>(vectors.size()));
    for (std::size_t c = 0; c < vectors.size(); ++c) stacked.col(static_cast<Index>(c)) = *vectors[c];
    Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeFullU);
    for (Index i = 0; i < svd.singularValues().size(); ++i) {
      rank += svd.singularValues()(i) > rank_tol ? 1 : 0;
    }
    span_basis = svd.matrixU().leftCols(rank);
  }
  const Index need = dim - rank;
  Matrix residual = Matrix::Identity(dim, dim) - span_basis * span_basis.adjoint();
  Matrix out(dim, need);
  for (Index k = 0; k < need; ++k) {
    Index pick = 0;
    double best = -1.0;
    for (Index c = 0; c < dim; ++c) {
      const double n = residual.col(c).norm();
      if (n > best + 1e-12) {
        best = n;
        pick = c;
      }
    }
    Vector q = residual.col(pick) / residual.col(pick).norm();
    q = fix_phase(q);
    out.col(k) = q;
    residual -= q * (q.adjoint() * residual);
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Pentagon product set on 3 ⊗ 4.

struct PentagonVectors {
  std::array<Eigen::Vector3d, 5> v;
  std::array<Eigen::Vector4d, 5> w;
};

inline PentagonVectors pentagon_vectors() {
  using std::numbers::pi;
  const double s5 = std::sqrt(5.0);
  const double h = 0.5 * std::sqrt(1.0 + s5);
  const double n = 2.0 / std::sqrt(5.0 + s5);
  const double n_prime = std::sqrt(2.0 / s5);
  const double c1 = std::sqrt(std::cos(pi / 5.0));
  const double c2 = std::sqrt(std::cos(2.0 * pi / 5.0));
  PentagonVectors p;
  for (int i = 0; i < 5; ++i) {
    const double t = 2.0 * pi * i / 5.0;
    p.v[i] = n * Eigen::Vector3d(std::cos(t), std::sin(t), h);
    p.w[i] = n_prime * Eigen::Vector4d(c1 * std::cos(t), c1 * std::sin(t), c2 * std::cos(2.0 * t),
                                       c2 * std::sin(2.0 * t));
  }
  return p;
}

/// The five states v_i ⊗ w_i.
inline ProductBasis pentagon_states() {
  const auto p = pentagon_vectors();
  std::vector<ProductState> members;
  for (int i = 0; i < 5; ++i) {
    members.emplace_back(p.v[i].cast<Complex>(), p.w[i].cast<Complex>());
  }
  return ProductBasis(BipartiteSpace(3, 4), std::move(members));
}

// ---------------------------------------------------------------------------
// Extensions by orthogonal product states.

/// One partition branch: members in the mask are killed on the A side, the
/// rest on the B side.
struct ExtensionSubspace {
  std::uint64_t a_side_mask = 0;
  Matrix a_complement;  // columns: basis of (span{a_i : i ∈ mask})^⊥
  Matrix b_complement;  // columns: basis of (span{b_i : i ∉ mask})^⊥
};

/// Every partition whose two orthocomplements are both nontrivial, in
/// increasing mask order.
inline std::vector<ExtensionSubspace> extension_subspaces(const ProductBasis& s) {
  if (s.size() > 40) throw std::invalid_argument("extension_subspaces: too many members");
  const Index da = s.space().dim_a(), db = s.space().dim_b();
  std::vector<ExtensionSubspace> out;
  const std::uint64_t limit = std::uint64_t{1} << s.size();
  for (std::uint64_t mask = 0; mask < limit; ++mask) {
    std::vector<const Vector*> as, bs;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (mask & (std::uint64_t{1} << i)) {
        as.push_back(&s[i].a());
      } else {
        bs.push_back(&s[i].b());
      }
    }
    Matrix ac = detail::orthogonal_complement(as, da);
    if (ac.cols() == 0) continue;
    Matrix bc = detail::orthogonal_complement(bs, db);
    if (bc.cols() == 0) continue;
    out.push_back({mask, std::move(ac), std::move(bc)});
  }
  return out;
}

/// Product states orthogonal to every member of s: one candidate per pair of
/// canonical orthocomplement basis vectors, deduplicated up to global phase.
/// An empty result certifies unextendibility.
inline std::vector<ProductState> orthogonal_product_extensions(const ProductBasis& s) {
  detail::require_orthonormal(s, "orthogonal_product_extensions");
  std::vector<ProductState> out;
  for (const auto& sub : extension_subspaces(s)) {
    for (Index i = 0; i < sub.a_complement.cols(); ++i) {
      for (Index j = 0; j < sub.b_complement.cols(); ++j) {
        ProductState cand(sub.a_complement.col(i), sub.b_complement.col(j));
        const bool dup = std::any_of(out.begin(), out.end(), [&](const ProductState& e) {
          return std::abs(e.overlap(cand)) > 1.0 - 1e-9;
        });
        if (!dup) out.push_back(std::move(cand));
      }
    }
  }
  return out;
}

enum class CompletabilityStatus { CompletableInPlace, Uncompletable, UnknownBudgetExhausted };

inline const char* to_string(CompletabilityStatus s) {
  switch (s) {
    case CompletabilityStatus::CompletableInPlace: return "completable-in-place";
    case CompletabilityStatus::Uncompletable: return "uncompletable";
    case CompletabilityStatus::UnknownBudgetExhausted: return "unknown-budget-exhausted";
  }
  return "?";
}

struct SearchTrace {
  std::size_t nodes_expanded = 0;
  std::size_t dead_ends = 0;
  std::vector<std::size_t> branch_candidates;  // candidate count at each depth along the best branch
  std::vector<std::string> log;              // one line per expanded node, capped
};

struct CompletabilityVerdict {
  CompletabilityStatus status = CompletabilityStatus::UnknownBudgetExhausted;
  std::vector<ProductState> max_extension;
  SearchTrace certificate;
};

namespace detail {

struct CompletionSearch {
  std::size_t budget;
  std::size_t target;
  std::vector<ProductState> best;
  std::vector<std::size_t> best_counts;
  SearchTrace trace;
  bool exhausted = false;
  bool complete = false;

  void run(const ProductBasis& current, std::vector<ProductState>& added,
           std::vector<std::size_t>& counts) {
    if (complete || exhausted) return;
    if (current.size() == target) {
      complete = true;
      best = added;
      best_counts = counts;
      return;
    }
    if (trace.nodes_expanded >= budget) {
      exhausted = true;
      return;
    }
    ++trace.nodes_expanded;
    const auto cands = orthogonal_product_extensions(current);
    if (trace.log.size() < 256) {
      trace.log.push_back("depth=" + std::to_string(added.size()) +
                          " members=" + std::to_string(current.size()) +
                          " candidates=" + std::to_string(cands.size()));
    }
    if (added.size() > best.size()) {
      best = added;
      best_counts = counts;
    }
    if (cands.empty()) {
      ++trace.dead_ends;
      return;
    }
    for (const auto& c : cands) {
      added.push_back(c);
      counts.push_back(cands.size());
      run(current.with(c), added, counts);
      added.pop_back();
      counts.pop_back();
      if (complete || exhausted) return;
    }
  }
};

}  // namespace detail

/// Depth-first search over orthogonal product extensions. Candidates are
/// tried in the order orthogonal_product_extensions emits them; the reported
/// extension is the first maximum-size one met in that order.
inline CompletabilityVerdict is_completable(const ProductBasis& s, std::size_t budget = 100000) {
  detail::require_orthonormal(s, "is_completable");
  detail::CompletionSearch search{budget, static_cast<std::size_t>(s.space().total()), {}, {}, {}};
  std::vector<ProductState> added;
  std::vector<std::size_t> counts;
  search.run(s, added, counts);

  CompletabilityVerdict v;
  v.max_extension = std::move(search.best);
  v.certificate = std::move(search.trace);
  v.certificate.branch_candidates = std::move(search.best_counts);
  if (search.complete) {
    v.status = CompletabilityStatus::CompletableInPlace;
  } else if (search.exhausted) {
    v.status = CompletabilityStatus::UnknownBudgetExhausted;
  } else {
    v.status = CompletabilityStatus::Uncompletable;
  }
  return v;
}

/// Zero-pads every factor into a local extension of the space.
inline ProductBasis embed(const ProductBasis& s, BipartiteSpace extended) {
  if (extended.dim_a() < s.space().dim_a() || extended.dim_b() < s.space().dim_b()) {
    throw std::invalid_argument("embed: extended space is smaller than " + s.space().to_string());
  }
  std::vector<ProductState> members;
  members.reserve(s.size());
  for (const auto& m : s.members()) {
    Vector a = Vector::Zero(extended.dim_a());
    Vector b = Vector::Zero(extended.dim_b());
    a.head(m.a().size()) = m.a();
    b.head(m.b().size()) = m.b();
    members.emplace_back(std::move(a), std::move(b));
  }
  return ProductBasis(extended, std::move(members));
}

// ---------------------------------------------------------------------------
// Completion of the pentagon set in 3 ⊗ 5.

class CompletionFailure : public std::runtime_error {
 public:
  CompletionFailure(const std::string& what, std::vector<double> residuals)
      : std::runtime_error(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const { return residuals_; }

 private:
  std::vector<double> residuals_;
};

struct CompletionOptions {
  int restarts = 32;
  int max_iterations = 400;
  double acceptance_residual = 1e-10;
  std::uint64_t seed = 0;
};

struct Completion {
  ProductBasis basis;              // 15 members on 3 ⊗ 5, embedded S first
  Eigen::Matrix<double, 5, 5> frame;  // rows x_0..x_4
  double residual = 0.0;           // root-sum-square of template violations
  double max_overlap = 0.0;
  int restarts_used = 0;
};

namespace detail {

// Template states for a frame. Rows of `frame` are x_0..x_4.
struct PentagonTemplate {
  std::array<Eigen::Vector3d, 5> v;
  std::array<Eigen::Matrix<double, 5, 1>, 5> w;  // embedded, fifth entry zero
  std::array<Eigen::Vector3d, 5> u;              // (v_{i-1}, v_{i+1})^⊥

  explicit PentagonTemplate(const ProductBasis& s) {
    for (int i = 0; i < 5; ++i) {
      v[i] = s[static_cast<std::size_t>(i)].a().real();
      w[i].setZero();
      w[i].head<4>() = s[static_cast<std::size_t>(i)].b().real();
    }
    for (int i = 0; i < 5; ++i) {
      Eigen::Vector3d c = v[(i + 4) % 5].cross(v[(i + 1) % 5]);
      u[i] = c / c.norm();
    }
  }

  using Frame = Eigen::Matrix<double, 5, 5>;

  static Frame orthonormalize(const Eigen::Matrix<double, 25, 1>& p) {
    Frame m = Eigen::Map<const Frame>(p.data());
    Frame q;
    for (int r = 0; r < 5; ++r) {
      Eigen::Matrix<double, 1, 5> x = m.row(r);
      for (int k = 0; k < r; ++k) x -= x.dot(q.row(k)) * q.row(k);
      q.row(r) = x / x.norm();
    }
    return q;
  }

  // y_i: unit vector in span(x_{i-1}, x_{i+1}) orthogonal to w_i.
  static Eigen::Matrix<double, 5, 1> member_b(const Frame& f, const Eigen::Matrix<double, 5, 1>& wi,
                                              int i) {
    const Eigen::Matrix<double, 5, 1> lo = f.row((i + 4) % 5).transpose();
    const Eigen::Matrix<double, 5, 1> hi = f.row((i + 1) % 5).transpose();
    Eigen::Matrix<double, 5, 1> y = hi.dot(wi) * lo - lo.dot(wi) * hi;
    const double n = y.norm();
    return n > 1e-300 ? Eigen::Matrix<double, 5, 1>(y / n) : Eigen::Matrix<double, 5, 1>(lo);
  }

  std::array<std::pair<Eigen::Vector3d, Eigen::Matrix<double, 5, 1>>, 15> states(
      const Frame& f) const {
    std::array<std::pair<Eigen::Vector3d, Eigen::Matrix<double, 5, 1>>, 15> out;
    for (int i = 0; i < 5; ++i) out[i] = {v[i], w[i]};
    for (int i = 0; i < 5; ++i) out[5 + i] = {u[i], f.row(i).transpose()};
    for (int i = 0; i < 5; ++i) out[10 + i] = {v[i], member_b(f, w[i], i)};
    return out;
  }

  // Pairwise overlaps of the 15 template states plus the y_i degeneracy
  // (|⟨x_{i±1}, w_i⟩| both zero leaves y_i undefined).
  Eigen::VectorXd residuals(const Eigen::Matrix<double, 25, 1>& p) const {
    const Frame f = orthonormalize(p);
    const auto st = states(f);
    Eigen::VectorXd r(105 + 5);
    int k = 0;
    for (int i = 0; i < 15; ++i)
      for (int j = i + 1; j < 15; ++j)
        r(k++) = st[i].first.dot(st[j].first) * st[i].second.dot(st[j].second);
    for (int i = 0; i < 5; ++i) {
      const double a = f.row((i + 4) % 5).dot(w[i].transpose());
      const double b = f.row((i + 1) % 5).dot(w[i].transpose());
      r(k++) = std::max(0.0, 1e-3 - std::hypot(a, b));
    }
    return r;
  }
};

}  // namespace detail

/// Completes the pentagon set to a full orthonormal product basis of 3 ⊗ 5.
/// The ten added states follow the fixed template
///   u_i ⊗ x_i  with u_i = (v_{i-1}, v_{i+1})^⊥,
///   v_i ⊗ y_i  with y_i = w_i^⊥ inside span(x_{i-1}, x_{i+1}),
/// and the orthonormal frame {x_j} of C^5 is found by multi-start
/// Levenberg–Marquardt on the template's orthogonality violations.
inline Completion complete_in_extension(const ProductBasis& s, CompletionOptions opt = {}) {
  if (s.space() != BipartiteSpace(3, 4) || s.size() != 5) {
    throw std::invalid_argument("complete_in_extension: expects the five pentagon states on 3x4");
  }
  detail::require_orthonormal(s, "complete_in_extension");
  for (const auto& m : s.members()) {
    if (m.a().imag().norm() > 1e-12 || m.b().imag().norm() > 1e-12) {
      throw std::invalid_argument("complete_in_extension: pentagon factors must be real");
    }
  }
  const detail::PentagonTemplate tpl(s);
  using Param = Eigen::Matrix<double, 25, 1>;

  std::vector<double> residuals;
  for (int restart = 0; restart < opt.restarts; ++restart) {
    std::seed_seq seq{static_cast<std::uint64_t>(opt.seed), static_cast<std::uint64_t>(restart)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;
    Param p;
    for (int i = 0; i < 25; ++i) p(i) = normal(rng);

    Eigen::VectorXd r = tpl.residuals(p);
    double cost = r.squaredNorm();
    double lambda = 1e-3;
    for (int it = 0; it < opt.max_iterations && std::sqrt(cost) > 0.1 * opt.acceptance_residual;
         ++it) {
      Eigen::MatrixXd jac(r.size(), 25);
      for (int c = 0; c < 25; ++c) {
        const double step = 1e-7 * std::max(1.0, std::abs(p(c)));
        Param hi = p, lo = p;
        hi(c) += step;
        lo(c) -= step;
        jac.col(c) = (tpl.residuals(hi) - tpl.residuals(lo)) / (2.0 * step);
      }
      const Eigen::MatrixXd jtj = jac.transpose() * jac;
      const Eigen::VectorXd g = jac.transpose() * r;
      bool accepted = false;
      while (lambda < 1e12) {
        Eigen::MatrixXd damped = jtj;
        damped.diagonal().array() += lambda * (jtj.diagonal().array() + 1e-12);
        const Param dp = damped.ldlt().solve(-g);
        const Param trial = p + dp;
        const Eigen::VectorXd rt = tpl.residuals(trial);
        if (rt.squaredNorm() < cost) {
          p = trial;
          r = rt;
          cost = rt.squaredNorm();
          lambda = std::max(lambda / 3.0, 1e-12);
          accepted = true;
          break;
        }
        lambda *= 4.0;
      }
      if (!accepted) break;
    }
    const double res = std::sqrt(cost);
    residuals.push_back(res);
    if (res > opt.acceptance_residual) continue;

    const auto frame = detail::PentagonTemplate::orthonormalize(p);
    const auto st = tpl.states(frame);
    std::vector<ProductState> members;
    for (const auto& [a, b] : st) {
      members.push_back(ProductState::normalized(a.cast<Complex>(), b.cast<Complex>()));
    }
    ProductBasis basis(BipartiteSpace(3, 5), std::move(members));
    const auto report = verify_orthonormal_product_set(basis, 1e-9, 1e-12);
    if (!report.pass) continue;
    return Completion{std::move(basis), frame, res, report.max_off_diagonal, restart + 1};
  }
  throw CompletionFailure("complete_in_extension: no restart met the residual target", residuals);
}

struct WeightedProduct {
  double weight = 0.0;
  ProductState state;
};

/// Locally projects the non-S members of a completion back onto `original`,
/// renormalizes them, and weights each by its squared projected norm over
/// (dim original − original_count). The first `original_count` members of
/// the completion must be the embedded S.
inline std::vector<WeightedProduct> project_completion(const ProductBasis& completion,
                                                       BipartiteSpace original,
                                                       std::size_t original_count) {
  if (original.dim_a() > completion.space().dim_a() ||
      original.dim_b() > completion.space().dim_b()) {
    throw std::invalid_argument("project_completion: original space is larger than the completion");
  }
  if (original_count >= static_cast<std::size_t>(original.total()) ||
      original_count > completion.size()) {
    throw std::invalid_argument("project_completion: bad original member count");
  }
  detail::require_orthonormal(completion, "project_completion");
  const double denom = static_cast<double>(original.total()) - static_cast<double>(original_count);
  std::vector<WeightedProduct> out;
  for (std::size_t i = original_count; i < completion.size(); ++i) {
    const Vector a = completion[i].a().head(original.dim_a());
    const Vector b = completion[i].b().head(original.dim_b());
    const double na = a.norm(), nb = b.norm();
    if (na * nb < 1e-12) {
      throw std::runtime_error("project_completion: member " + std::to_string(i) +
                               " vanishes under the local projection");
    }
    out.push_back({na * na * nb * nb / denom, ProductState(a / na, b / nb)});
  }
  return out;
}

}  // namespace sepcard

#endif  // SEPCARD_PRODUCT_BASES_HPP
