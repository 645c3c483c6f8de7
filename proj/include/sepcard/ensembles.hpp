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

#ifndef SEPCARD_ENSEMBLES_HPP
#define SEPCARD_ENSEMBLES_HPP

#include "sepcard/hilbert_core.hpp"
#include "sepcard/product_bases.hpp"
#include "sepcard/states.hpp"

#include <atomic>
#include <cstdint>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <thread>
#include <variant>
#include <vector>

namespace sepcard {

inline constexpr double kWeightSumTol = 1e-10;
inline constexpr double kEnsembleTol = 1e-9;

struct EnsembleMember {
  double weight = 0.0;
  std::variant<StateVector, ProductState> state;

  Vector joint() const {
    return std::visit(
        [](const auto& s) -> Vector {
          if constexpr (std::is_same_v<std::decay_t<decltype(s)>, StateVector>) {
            return s.amplitudes();
          } else {
            return s.joint();
          }
        },
        state);
  }

  BipartiteSpace space() const {
    return std::visit([](const auto& s) { return BipartiteSpace(s.space()); }, state);
  }

  bool is_product() const { return std::holds_alternative<ProductState>(state); }
  const ProductState& product() const { return std::get<ProductState>(state); }

  StateVector pure_state() const { return StateVector(space(), joint()); }
};

/// Σ p_i |ψ_i⟩⟨ψ_i|, unvalidated.
inline Matrix mix_matrix(std::span<const EnsembleMember> members) {
  if (members.empty()) throw std::invalid_argument("mix: empty ensemble");
  const Index d = members.front().space().total();
  Matrix out = Matrix::Zero(d, d);
  for (const auto& m : members) {
    if (m.space().total() != d) throw DimensionMismatch("mix: members live on different spaces");
    const Vector v = m.joint();
    out.noalias() += m.weight * (v * v.adjoint());
  }
  return out;
}

/// Weighted pure states together with the mixed state they decompose.
/// Construction checks positivity of weights, their sum, and that the
/// mixture reproduces the target within `tolerance` (Frobenius).
class Ensemble {
 public:
  Ensemble(std::vector<EnsembleMember> members, DensityMatrix target, double tolerance = kEnsembleTol)
      : members_(std::move(members)), target_(std::move(target)), tolerance_(tolerance) {
    if (members_.empty()) throw std::invalid_argument("Ensemble: no members");
    double sum = 0.0;
    for (const auto& m : members_) {
      if (!(m.weight > 0.0)) throw std::invalid_argument("Ensemble: weights must be positive");
      if (m.space() != target_.space()) {
        throw DimensionMismatch("Ensemble: member space differs from target space");
      }
      sum += m.weight;
    }
    if (std::abs(sum - 1.0) > kWeightSumTol) {
      throw std::invalid_argument("Ensemble: weights sum to " + std::to_string(sum));
    }
    residual_ = (mix_matrix(members_) - target_.matrix()).norm();
    if (residual_ > tolerance_) {
      throw std::invalid_argument("Ensemble: mixture misses target by " + std::to_string(residual_));
    }
  }

  /// Ensemble whose target is its own mixture.
  static Ensemble of(std::vector<EnsembleMember> members, double tolerance = kEnsembleTol) {
    if (members.empty()) throw std::invalid_argument("Ensemble: no members");
    const BipartiteSpace space = members.front().space();
    DensityMatrix target(space, mix_matrix(members));
    return Ensemble(std::move(members), std::move(target), tolerance);
  }

  static Ensemble of_products(std::span<const WeightedProduct> products, DensityMatrix target,
                              double tolerance = kEnsembleTol) {
    std::vector<EnsembleMember> members;
    members.reserve(products.size());
    for (const auto& wp : products) members.push_back({wp.weight, wp.state});
    return Ensemble(std::move(members), std::move(target), tolerance);
  }

  const std::vector<EnsembleMember>& members() const { return members_; }
  const DensityMatrix& target() const { return target_; }
  const BipartiteSpace& space() const { return target_.space(); }
  std::size_t size() const { return members_.size(); }
  double tolerance() const { return tolerance_; }
  double residual() const { return residual_; }

  bool all_products() const {
    return std::all_of(members_.begin(), members_.end(),
                       [](const EnsembleMember& m) { return m.is_product(); });
  }

 private:
  std::vector<EnsembleMember> members_;
  DensityMatrix target_;
  double tolerance_;
  double residual_ = 0.0;
};

inline DensityMatrix mix(const Ensemble& e) {
  return DensityMatrix(e.space(), mix_matrix(e.members()));
}

/// Σ p_i E(ψ_i) in bits.
inline double average_entanglement(const Ensemble& e) {
  double total = 0.0;
  for (const auto& m : e.members()) {
    if (!m.is_product()) total += m.weight * pure_entanglement(m.pure_state());
  }
  return total;
}

/// Equal weights and pairwise orthogonal states: the only way an m-member
/// ensemble reaches entropy log₂ m.
inline bool is_equiprobable_orthonormal(const Ensemble& e, double tol = 1e-9) {
  const double p = 1.0 / static_cast<double>(e.size());
  for (const auto& m : e.members()) {
    if (std::abs(m.weight - p) > tol) return false;
  }
  for (std::size_t i = 0; i < e.size(); ++i) {
    const Vector vi = e.members()[i].joint();
    for (std::size_t j = i + 1; j < e.size(); ++j) {
      if (std::abs(vi.dot(e.members()[j].joint())) > tol) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Generating ensembles.

/// Eigenvectors with eigenvalues above the claim rank threshold.
inline Ensemble spectral_ensemble(const DensityMatrix& rho) {
  const auto eig = eig_hermitian(rho.matrix());
  const double thr = kClaimRankTol * eig.values.cwiseAbs().maxCoeff();
  std::vector<EnsembleMember> members;
  double kept = 0.0;
  for (Index j = eig.values.size() - 1; j >= 0; --j) {
    if (eig.values(j) > thr) kept += eig.values(j);
  }
  for (Index j = eig.values.size() - 1; j >= 0; --j) {
    if (eig.values(j) <= thr) continue;
    members.push_back({eig.values(j) / kept, StateVector::normalized(rho.space(), eig.vectors.col(j))});
  }
  return Ensemble(std::move(members), rho);
}

inline void require_isometry(const Matrix& mixing, double tol = 1e-10) {
  const Matrix gram = mixing.adjoint() * mixing;
  const double defect = (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  if (defect > tol) {
    throw std::invalid_argument("hjw_ensemble: mixing matrix is not an isometry (defect " +
                                std::to_string(defect) + ")");
  }
}

/// Mixes the r members of `base` through a k×r isometry:
/// |ψ̃_i⟩ = Σ_j U_ij √p_j |e_j⟩, with weight ‖ψ̃_i‖². Rows that produce a
/// zero vector contribute no member.
inline Ensemble hjw_ensemble(const Ensemble& base, const Matrix& mixing) {
  if (mixing.cols() != static_cast<Index>(base.size()) || mixing.rows() < mixing.cols()) {
    throw DimensionMismatch("hjw_ensemble: mixing must be k x r with k >= r = " +
                            std::to_string(base.size()));
  }
  require_isometry(mixing);
  const Index d = base.space().total();
  Matrix scaled(d, mixing.cols());
  for (Index j = 0; j < mixing.cols(); ++j) {
    const auto& m = base.members()[static_cast<std::size_t>(j)];
    scaled.col(j) = std::sqrt(m.weight) * m.joint();
  }
  std::vector<EnsembleMember> members;
  for (Index i = 0; i < mixing.rows(); ++i) {
    const Vector v = scaled * mixing.row(i).transpose();
    const double w = v.squaredNorm();
    if (w < 1e-15) continue;
    members.push_back({w, StateVector(base.space(), v / std::sqrt(w))});
  }
  double sum = 0.0;
  for (const auto& m : members) sum += m.weight;
  for (auto& m : members) m.weight /= sum;
  return Ensemble(std::move(members), base.target(), std::max(kEnsembleTol, 10 * base.residual()));
}

inline Ensemble hjw_ensemble(const DensityMatrix& rho, const Matrix& mixing) {
  return hjw_ensemble(spectral_ensemble(rho), mixing);
}

/// Complex-conjugates every B factor. The result decomposes the partial
/// transpose of the original target with the same weights and cardinality.
inline Ensemble conjugate_B(const Ensemble& e) {
  std::vector<EnsembleMember> members;
  members.reserve(e.size());
  for (const auto& m : e.members()) {
    if (!m.is_product()) throw std::invalid_argument("conjugate_B: member is not a product state");
    const auto& p = m.product();
    members.push_back({m.weight, ProductState(p.a(), p.b().conjugate())});
  }
  DensityMatrix target(partial_transpose(e.target().op()), e.target().tol());
  return Ensemble(std::move(members), std::move(target), e.tolerance());
}

// ---------------------------------------------------------------------------
// Cardinality brackets.

enum class LowerProvenance { Rank, PartialTransposeRank, EntropyBound };

inline const char* to_string(LowerProvenance p) {
  switch (p) {
    case LowerProvenance::Rank: return "rank";
    case LowerProvenance::PartialTransposeRank: return "pt-rank-via-lemma1";
    case LowerProvenance::EntropyBound: return "entropy-theorem2";
  }
  return "?";
}

class InvalidCertificate : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Certified lower bound and best known upper bound on the number of pure
/// states an optimal (separable) decomposition needs.
struct CardinalityBracket {
  std::int64_t rank = 0;
  std::int64_t lower = 0;
  std::optional<std::int64_t> upper;
  LowerProvenance lower_provenance = LowerProvenance::Rank;
  std::optional<Ensemble> upper_witness;

  void validate() const {
    if (lower < rank) throw std::logic_error("CardinalityBracket: lower below rank");
    if (upper && *upper < lower) throw std::logic_error("CardinalityBracket: upper below lower");
    if (upper_witness) {
      if (!upper || static_cast<std::int64_t>(upper_witness->size()) != *upper) {
        throw std::logic_error("CardinalityBracket: witness size differs from upper");
      }
    }
  }

  /// Keeps the larger lower bound and the smaller upper bound.
  CardinalityBracket merged(const CardinalityBracket& other) const {
    CardinalityBracket out = *this;
    if (other.lower > out.lower) {
      out.lower = other.lower;
      out.lower_provenance = other.lower_provenance;
    }
    out.rank = std::max(rank, other.rank);
    if (other.upper && (!out.upper || *other.upper < *out.upper)) {
      out.upper = other.upper;
      out.upper_witness = other.upper_witness;
    }
    out.validate();
    return out;
  }

  CardinalityBracket with_witness(const Ensemble& witness) const {
    CardinalityBracket w;
    w.rank = rank;
    w.lower = rank;
    w.upper = static_cast<std::int64_t>(witness.size());
    w.upper_witness = witness;
    return merged(w);
  }
};

namespace detail {

inline void check_certificate(const DensityMatrix& rho, const Ensemble& cert) {
  if (!cert.all_products()) throw InvalidCertificate("certificate has a non-product member");
  if (cert.space() != rho.space()) throw InvalidCertificate("certificate lives on another space");
  const double miss = (mix_matrix(cert.members()) - rho.matrix()).norm();
  if (miss > std::max(kEnsembleTol, cert.tolerance())) {
    throw InvalidCertificate("certificate does not reproduce the state (miss " +
                             std::to_string(miss) + ")");
  }
}

}  // namespace detail

/// lower = rank(ρ). With a product-state certificate, ρ is separable and its
/// partial transpose shares its cardinality, so lower = max(rank ρ, rank ρ^T_B)
/// and the certificate itself is the upper witness.
inline CardinalityBracket cardinality_lower_bound(const DensityMatrix& rho,
                                                  const std::optional<Ensemble>& certificate = {}) {
  CardinalityBracket b;
  b.rank = rho.rank();
  b.lower = b.rank;
  b.lower_provenance = LowerProvenance::Rank;
  if (certificate) {
    detail::check_certificate(rho, *certificate);
    const int pt_rank =
        numerical_rank(eigenvalues_hermitian(partial_transpose(rho.op()).matrix()), kClaimRankTol);
    if (pt_rank > b.lower) {
      b.lower = pt_rank;
      b.lower_provenance = LowerProvenance::PartialTransposeRank;
    }
    b.upper = static_cast<std::int64_t>(certificate->size());
    b.upper_witness = *certificate;
  }
  b.validate();
  return b;
}

/// Entropy route: m-member ensembles have entropy ≤ log₂ m, with equality
/// only for m equiprobable orthogonal states. A normalized projector whose
/// range has no orthogonal product basis therefore needs rank + 1 states.
inline CardinalityBracket entropy_bound(const DensityMatrix& rho,
                                        bool range_has_orthogonal_product_basis) {
  const RealVector ev = rho.eigenvalues();
  const double s = entropy_bits(ev);
  CardinalityBracket b;
  b.rank = numerical_rank(ev, kClaimRankTol);
  b.lower = b.rank;
  const auto from_entropy = static_cast<std::int64_t>(std::ceil(std::exp2(s) - 1e-9));
  if (from_entropy > b.lower) {
    b.lower = from_entropy;
    b.lower_provenance = LowerProvenance::EntropyBound;
  }
  const bool projector = std::abs(s - std::log2(static_cast<double>(b.rank))) < 1e-9;
  if (projector && !range_has_orthogonal_product_basis) {
    b.lower = b.rank + 1;
    b.lower_provenance = LowerProvenance::EntropyBound;
  }
  b.validate();
  return b;
}

// ---------------------------------------------------------------------------
// Numerical search for separable decompositions.

struct DecompositionOptions {
  int restarts = 64;
  int iterations = 5000;
  double residual_target = 1e-6;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  /// Starting point for restart 0; must have exactly k members.
  std::optional<std::vector<WeightedProduct>> initial;
};

struct DecompositionResult {
  std::optional<Ensemble> ensemble;
  std::vector<double> restart_residuals;  // best residual per completed restart, by index
  std::vector<double> residual_trace;     // per outer iteration of the reported restart
  double best_residual = std::numeric_limits<double>::infinity();
  int successful_restart = -1;

  bool success() const { return ensemble.has_value(); }
};

namespace detail {

/// Euclidean projection onto the probability simplex.
inline RealVector project_to_simplex(const RealVector& p) {
  const Index k = p.size();
  std::vector<double> u(p.data(), p.data() + k);
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0.0, theta = 0.0;
  for (Index i = 0; i < k; ++i) {
    css += u[static_cast<std::size_t>(i)];
    const double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[static_cast<std::size_t>(i)] > t) theta = t;
  }
  return (p.array() - theta).cwiseMax(0.0);
}

class SeparableFit {
 public:
  SeparableFit(const Matrix& rho, Index da, Index db, int k)
      : rho_(rho), da_(da), db_(db), k_(k), a_(k), b_(k), p_(RealVector::Constant(k, 1.0 / k)) {}

  void randomize(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    for (int i = 0; i < k_; ++i) {
      a_[i] = Vector(da_);
      b_[i] = Vector(db_);
      for (Index x = 0; x < da_; ++x) a_[i](x) = Complex(g(rng), g(rng));
      for (Index x = 0; x < db_; ++x) b_[i](x) = Complex(g(rng), g(rng));
      a_[i].normalize();
      b_[i].normalize();
    }
    p_.setConstant(1.0 / k_);
  }

  void seed_from(const std::vector<WeightedProduct>& init) {
    for (int i = 0; i < k_; ++i) {
      a_[i] = init[static_cast<std::size_t>(i)].state.a();
      b_[i] = init[static_cast<std::size_t>(i)].state.b();
      p_(i) = init[static_cast<std::size_t>(i)].weight;
    }
    p_ = project_to_simplex(p_);
  }

  Matrix mixture(const std::vector<Vector>& a, const std::vector<Vector>& b) const {
    Matrix s = Matrix::Zero(da_ * db_, da_ * db_);
    for (int i = 0; i < k_; ++i) {
      if (p_(i) == 0.0) continue;
      const Vector v = tensor_vector(a[i], b[i]);
      s.noalias() += p_(i) * (v * v.adjoint());
    }
    return s;
  }

  double residual() const { return (rho_ - mixture(a_, b_)).norm(); }

  /// Projected-gradient NNLS on the weights with factors fixed.
  void update_weights(int steps = 50) {
    Eigen::MatrixXd gram(k_, k_);
    RealVector c(k_);
    for (int i = 0; i < k_; ++i) {
      const Vector v = tensor_vector(a_[i], b_[i]);
      c(i) = (v.adjoint() * rho_ * v)(0).real();
      for (int j = 0; j < k_; ++j) {
        gram(i, j) = std::norm(a_[i].dot(a_[j])) * std::norm(b_[i].dot(b_[j]));
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    const double lip = std::max(es.eigenvalues().maxCoeff(), 1e-12);
    for (int s = 0; s < steps; ++s) p_ = project_to_simplex(p_ - (gram * p_ - c) / lip);
  }

  /// One Levenberg–Marquardt step on all factor vectors with weights fixed.
  /// Returns false once the damping saturates without progress.
  bool update_factors() {
    const Index dd = da_ * db_;
    const Index nres = 2 * dd * dd;
    const Index npar = 2 * k_ * (da_ + db_);
    const Matrix r = rho_ - mixture(a_, b_);
    const double cost = r.squaredNorm();

    Eigen::VectorXd res(nres);
    for (Index c = 0; c < dd; ++c)
      for (Index rr = 0; rr < dd; ++rr) {
        res(2 * (c * dd + rr)) = r(rr, c).real();
        res(2 * (c * dd + rr) + 1) = r(rr, c).imag();
      }

    Eigen::MatrixXd jac(nres, npar);
    Index col = 0;
    auto push_column = [&](const Matrix& dsigma) {
      for (Index c = 0; c < dd; ++c)
        for (Index rr = 0; rr < dd; ++rr) {
          jac(2 * (c * dd + rr), col) = -dsigma(rr, c).real();
          jac(2 * (c * dd + rr) + 1, col) = -dsigma(rr, c).imag();
        }
      ++col;
    };
    for (int i = 0; i < k_; ++i) {
      const Matrix pa = a_[i] * a_[i].adjoint();
      const Matrix pb = b_[i] * b_[i].adjoint();
      for (int side = 0; side < 2; ++side) {
        const Vector& x = side == 0 ? a_[i] : b_[i];
        for (Index e = 0; e < x.size(); ++e) {
          for (int part = 0; part < 2; ++part) {
            Vector dir = Vector::Zero(x.size());
            dir(e) = part == 0 ? Complex(1.0, 0.0) : Complex(0.0, 1.0);
            // Derivative of the normalized factor x/‖x‖ at unit x.
            const Vector dx = dir - x * x.dot(dir).real();
            const Matrix dproj = dx * x.adjoint() + x * dx.adjoint();
            push_column(side == 0 ? Matrix(p_(i) * tensor(dproj, pb))
                                  : Matrix(p_(i) * tensor(pa, dproj)));
          }
        }
      }
    }

    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * res;
    while (lambda_ < 1e14) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal().array() += lambda_ * (jtj.diagonal().array() + 1e-12);
      const Eigen::VectorXd step = damped.ldlt().solve(-g);
      std::vector<Vector> ta = a_, tb = b_;
      Index at = 0;
      for (int i = 0; i < k_; ++i) {
        for (int side = 0; side < 2; ++side) {
          Vector& x = side == 0 ? ta[i] : tb[i];
          for (Index e = 0; e < x.size(); ++e) {
            x(e) += Complex(step(at), step(at + 1));
            at += 2;
          }
          x.normalize();
        }
      }
      const double trial = (rho_ - mixture(ta, tb)).squaredNorm();
      if (trial < cost) {
        a_ = std::move(ta);
        b_ = std::move(tb);
        lambda_ = std::max(lambda_ / 3.0, 1e-12);
        return true;
      }
      lambda_ *= 4.0;
    }
    return false;
  }

  std::vector<WeightedProduct> members() const {
    std::vector<WeightedProduct> out;
    double kept = 0.0;
    for (int i = 0; i < k_; ++i) kept += p_(i) > 1e-12 ? p_(i) : 0.0;
    for (int i = 0; i < k_; ++i) {
      if (p_(i) <= 1e-12) continue;
      out.push_back({p_(i) / kept, ProductState::normalized(a_[i], b_[i])});
    }
    return out;
  }

 private:
  const Matrix& rho_;
  Index da_, db_;
  int k_;
  std::vector<Vector> a_, b_;
  RealVector p_;
  double lambda_ = 1e-3;
};

struct RestartOutcome {
  double residual = std::numeric_limits<double>::infinity();
  std::vector<double> trace;
  std::vector<WeightedProduct> members;
};

inline RestartOutcome run_restart(const DensityMatrix& rho, int k, int restart,
                                  const DecompositionOptions& opt) {
  SeparableFit fit(rho.matrix(), rho.space().dim_a(), rho.space().dim_b(), k);
  if (restart == 0 && opt.initial) {
    fit.seed_from(*opt.initial);
  } else {
    std::seed_seq seq{opt.seed, static_cast<std::uint64_t>(restart)};
    std::mt19937_64 rng(seq);
    fit.randomize(rng);
  }
  RestartOutcome out;
  constexpr int kStallWindow = 200;
  for (int it = 0; it < opt.iterations; ++it) {
    fit.update_weights();
    const double res = fit.residual();
    out.trace.push_back(res);
    if (res < opt.residual_target) break;
    const int n = static_cast<int>(out.trace.size());
    if (n > kStallWindow && res > (1.0 - 1e-6) * out.trace[static_cast<std::size_t>(n - 1 - kStallWindow)]) {
      break;
    }
    if (!fit.update_factors()) break;
  }
  // Spend a few extra alternations polishing a hit below the target.
  if (!out.trace.empty() && out.trace.back() < opt.residual_target) {
    for (int extra = 0; extra < 20 && fit.residual() > 1e-12; ++extra) {
      if (!fit.update_factors()) break;
      fit.update_weights();
    }
  }
  out.members = fit.members();
  Matrix mixed = Matrix::Zero(rho.space().total(), rho.space().total());
  for (const auto& wp : out.members) {
    const Vector v = wp.state.joint();
    mixed.noalias() += wp.weight * (v * v.adjoint());
  }
  out.residual = (rho.matrix() - mixed).norm();
  return out;
}

}  // namespace detail

/// Searches for ρ ≈ Σ_{i≤k} p_i (a_i a_i†) ⊗ (b_i b_i†) by alternating
/// NNLS on the weights with LM steps on the factors, over seeded restarts.
/// Restart r draws its start from seed_seq{seed, r}; the reported success is
/// the lowest-index restart that met the target, independent of threading.
/// Failure carries residuals and never implies that no decomposition exists.
inline DecompositionResult find_separable_decomposition(const DensityMatrix& rho, int k,
                                                        const DecompositionOptions& opt = {}) {
  const int r = rho.rank();
  if (k < r) {
    throw std::invalid_argument("find_separable_decomposition: k = " + std::to_string(k) +
                                " is below rank " + std::to_string(r));
  }
  if (opt.initial && static_cast<int>(opt.initial->size()) != k) {
    throw std::invalid_argument("find_separable_decomposition: initial point needs k members");
  }
  const int restarts = std::max(opt.restarts, 1);
  std::vector<std::optional<detail::RestartOutcome>> outcomes(static_cast<std::size_t>(restarts));
  std::atomic<int> next{0};
  std::atomic<int> first_success{restarts};

  auto worker = [&] {
    for (;;) {
      const int idx = next.fetch_add(1);
      if (idx >= restarts || idx > first_success.load()) return;
      auto out = detail::run_restart(rho, k, idx, opt);
      const bool hit = out.residual < opt.residual_target && !out.members.empty();
      outcomes[static_cast<std::size_t>(idx)] = std::move(out);
      if (hit) {
        int cur = first_success.load();
        while (idx < cur && !first_success.compare_exchange_weak(cur, idx)) {
        }
      }
    }
  };
  const unsigned nthreads = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(restarts)));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  }

  DecompositionResult result;
  const int last = std::min(first_success.load(), restarts - 1);
  int best_idx = -1;
  for (int i = 0; i <= last; ++i) {
    const auto& o = outcomes[static_cast<std::size_t>(i)];
    if (!o) continue;
    result.restart_residuals.push_back(o->residual);
    if (o->residual < result.best_residual) {
      result.best_residual = o->residual;
      best_idx = i;
    }
  }
  if (first_success.load() < restarts) {
    const auto& o = *outcomes[static_cast<std::size_t>(first_success.load())];
    result.successful_restart = first_success.load();
    result.residual_trace = o.trace;
    result.ensemble = Ensemble::of_products(o.members, rho, std::max(kEnsembleTol, o.residual * 1.000001));
  } else if (best_idx >= 0) {
    result.residual_trace = outcomes[static_cast<std::size_t>(best_idx)]->trace;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Analytic product certificates.

/// Product decomposition of the normalized symmetric projector P_sym/dim on
/// n ⊗ n, which is the partial transpose of the Werner state at its PPT
/// boundary. n = 2 uses the four tetrahedral states |aa⟩; n ≥ 3 uses the
/// 3^{n-1} cube-root-of-unity phase states |aa⟩ plus the n states |jj⟩.
inline Ensemble symmetric_product_certificate(Index n) {
  if (n < 2) throw std::invalid_argument("symmetric_product_certificate: n must be >= 2");
  const BipartiteSpace space(n, n);
  std::vector<EnsembleMember> members;
  if (n == 2) {
    const double bloch[4][3] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
    for (const auto& r : bloch) {
      const double z = r[2] / std::sqrt(3.0);
      const double theta = std::acos(z);
      const double phi = std::atan2(r[1], r[0]);
      Vector a(2);
      a << std::cos(theta / 2), std::polar(std::sin(theta / 2), phi);
      members.push_back({0.25, ProductState(a, a)});
    }
  } else {
    const double dim_sym = static_cast<double>(n * (n + 1)) / 2.0;
    Index count = 1;
    for (Index j = 1; j < n; ++j) count *= 3;
    const double phase_weight = static_cast<double>(n * n) / 2.0 / static_cast<double>(count) / dim_sym;
    const Complex omega = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
    for (Index t = 0; t < count; ++t) {
      Vector a(n);
      a(0) = 1.0;
      Index rem = t;
      for (Index j = 1; j < n; ++j) {
        a(j) = std::pow(omega, static_cast<double>(rem % 3));
        rem /= 3;
      }
      a /= std::sqrt(static_cast<double>(n));
      members.push_back({phase_weight, ProductState(a, a)});
    }
    for (Index j = 0; j < n; ++j) {
      Vector e = Vector::Zero(n);
      e(j) = 1.0;
      members.push_back({0.5 / dim_sym, ProductState(e, e)});
    }
  }
  const Index d = space.total();
  Matrix swap = Matrix::Zero(d, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) swap(space.index(i, j), space.index(j, i)) = 1.0;
  const Matrix target = (Matrix::Identity(d, d) + swap) / static_cast<double>(n * (n + 1));
  return Ensemble(std::move(members), DensityMatrix(space, target));
}

/// Product decomposition of werner(n, f) for f ≤ 1/(n+1): a mixture of the
/// conjugated symmetric certificate and the computational product basis.
/// Empty when f lies beyond that range.
inline std::optional<Ensemble> werner_certificate(Index n, double f) {
  const double f_edge = 1.0 / static_cast<double>(n + 1);
  if (f > f_edge + 1e-9) return std::nullopt;
  const double lam = f >= f_edge - 1e-9 ? 1.0 : f / f_edge;
  std::vector<EnsembleMember> members;
  if (lam > 0.0) {
    const Ensemble edge = conjugate_B(symmetric_product_certificate(n));
    for (const auto& m : edge.members()) members.push_back({lam * m.weight, m.state});
  }
  if (lam < 1.0) {
    const double w = (1.0 - lam) / static_cast<double>(n * n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        Vector a = Vector::Zero(n), b = Vector::Zero(n);
        a(i) = 1.0;
        b(j) = 1.0;
        members.push_back({w, ProductState(a, b)});
      }
  }
  return Ensemble(std::move(members), werner(n, std::min(f, f_edge)));
}

// ---------------------------------------------------------------------------
// Tensor powers.

struct TensorPowerBounds {
  int copies = 1;
  std::int64_t rank_bound = 0;     // rank(ρ)^k
  std::int64_t pt_rank_bound = 0;  // rank(ρ^T_B)^k
  CardinalityBracket bracket;
  bool explicitly_verified = false;
  std::optional<int> explicit_rank;
  std::optional<int> explicit_pt_rank;
};

inline std::int64_t int_pow(std::int64_t base, int e) {
  std::int64_t out = 1;
  for (int i = 0; i < e; ++i) out *= base;
  return out;
}

/// Bounds for ρ^{⊗k} on the grouped (A1..Ak | B1..Bk) split. Rank and
/// partial-transpose rank are multiplicative, and the k-fold product of a
/// certificate certifies the power. When the power fits in `explicit_dim_budget`
/// both ranks are recomputed from the explicit matrix.
inline TensorPowerBounds tensor_power_bounds(const DensityMatrix& rho,
                                             const std::optional<Ensemble>& certificate, int copies,
                                             Index explicit_dim_budget = 1024,
                                             std::int64_t explicit_witness_budget = 4096) {
  if (copies < 1) throw std::invalid_argument("tensor_power_bounds: copies must be >= 1");
  if (certificate) detail::check_certificate(rho, *certificate);
  TensorPowerBounds t;
  t.copies = copies;
  const int r = rho.rank();
  const int pr = numerical_rank(eigenvalues_hermitian(partial_transpose(rho.op()).matrix()),
                                kClaimRankTol);
  t.rank_bound = int_pow(r, copies);
  t.pt_rank_bound = int_pow(pr, copies);
  t.bracket.rank = t.rank_bound;
  t.bracket.lower = t.rank_bound;
  if (certificate) {
    if (t.pt_rank_bound > t.bracket.lower) {
      t.bracket.lower = t.pt_rank_bound;
      t.bracket.lower_provenance = LowerProvenance::PartialTransposeRank;
    }
    t.bracket.upper = int_pow(static_cast<std::int64_t>(certificate->size()), copies);
  }

  const BipartiteSpace g = grouped_space(rho.space(), copies);
  if (g.total() <= explicit_dim_budget) {
    const Operator power = tensor_power(rho.op(), copies);
    const int er = numerical_rank(eigenvalues_hermitian(power.matrix()), kClaimRankTol);
    const int epr = numerical_rank(eigenvalues_hermitian(partial_transpose(power).matrix()), kClaimRankTol);
    t.explicit_rank = er;
    t.explicit_pt_rank = epr;
    t.explicitly_verified = er == t.rank_bound && epr == t.pt_rank_bound;
    if (certificate && t.bracket.upper && *t.bracket.upper <= explicit_witness_budget) {
      std::vector<EnsembleMember> members;
      const auto& base = certificate->members();
      const std::int64_t count = *t.bracket.upper;
      for (std::int64_t idx = 0; idx < count; ++idx) {
        std::int64_t rem = idx;
        std::vector<std::size_t> pick(static_cast<std::size_t>(copies));
        for (int c = copies - 1; c >= 0; --c) {
          pick[static_cast<std::size_t>(c)] = static_cast<std::size_t>(rem % static_cast<std::int64_t>(base.size()));
          rem /= static_cast<std::int64_t>(base.size());
        }
        Vector a = base[pick[0]].product().a();
        Vector b = base[pick[0]].product().b();
        double w = base[pick[0]].weight;
        for (int c = 1; c < copies; ++c) {
          const auto& m = base[pick[static_cast<std::size_t>(c)]];
          a = tensor_vector(a, m.product().a());
          b = tensor_vector(b, m.product().b());
          w *= m.weight;
        }
        members.push_back({w, ProductState::normalized(a, b)});
      }
      t.bracket.upper_witness =
          Ensemble(std::move(members), DensityMatrix(power, rho.tol()),
                   std::max(kEnsembleTol, 4.0 * copies * certificate->residual()));
    }
  }
  t.bracket.validate();
  return t;
}

}  // namespace sepcard

#endif  // SEPCARD_ENSEMBLES_HPP
