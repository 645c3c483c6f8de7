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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "test_util.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

namespace {

using namespace sepcard;
using testing::Rng;

// Pinned tolerances and limits.
constexpr double kZeroEigTol = 1e-9;
constexpr double kBoundaryTol = 1e-10;
constexpr double kPentagonTol = 1e-12;
constexpr double kCompletionOverlapTol = 1e-9;
constexpr double kWeightSumTol = 1e-10;
constexpr double kProjectionTol = 1e-9;
constexpr double kEntropyTol = 1e-9;
constexpr double kConjugationTol = 1e-12;
constexpr double kEntropySlack = 1e-9;
constexpr double kEqualityTol = 1e-6;
constexpr double kExponentTol = 1e-12;
constexpr double kOptimizerTarget = 1e-6;
constexpr int kRandomTrials = 1000;
constexpr double kWernerSecondsPerN = 1.0;
constexpr double kBoundarySeconds = 1.0;
constexpr double kCompletabilitySeconds = 10.0;
constexpr double kTensorSeconds = 5.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... xs) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, xs...);
  return buf;
}

Outcome werner_zero_count() {
  bool ok = true;
  std::string d;
  for (Index n = 2; n <= 6; ++n) {
    const auto t0 = std::chrono::steady_clock::now();
    const double f = werner_ppt_boundary(n).parameter;
    const auto pt = eigenvalues_hermitian(partial_transpose(werner(n, f).op()).matrix());
    int zeros = 0;
    for (double x : pt) zeros += std::abs(x) < kZeroEigTol ? 1 : 0;
    const int rank = numerical_rank(pt, kClaimRankTol);
    const double secs = seconds_since(t0);
    const bool row = zeros == n * (n - 1) / 2 && rank == n * (n + 1) / 2 && secs < kWernerSecondsPerN;
    ok = ok && row;
    d += fmt("n=%ld zeros=%d rank=%d %.3fs; ", static_cast<long>(n), zeros, rank, secs);
  }
  return {ok, d};
}

Outcome boundary_location() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string d;
  for (Index n = 2; n <= 6; ++n) {
    const auto r = run_werner(n);
    const double f = r.find("boundary_f_star")->computed.get<double>();
    const Check* note = r.find("boundary_discrepancy");
    const bool annotated = note && note->paper_stated &&
                           std::abs(note->paper_stated->get<double>() - 1.0 / n) < 1e-15;
    const double err = std::abs(f - 1.0 / (n + 1.0));
    ok = ok && err <= kBoundaryTol && annotated;
    d += fmt("n=%ld f*=%.12f (1/n=%.6f) err=%.1e; ", static_cast<long>(n), f, 1.0 / n, err);
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < kBoundarySeconds;
  d += fmt("%.3fs", secs);
  return {ok, d};
}

Outcome bracket_check() {
  bool ok = true;
  std::string d;
  for (Index n = 2; n <= 4; ++n) {
    const double f = werner_ppt_boundary(n).parameter;
    const DensityMatrix rho = partial_transpose(werner(n, f));
    std::optional<Ensemble> cert;
    std::string source;
    if (n == 2) {
      DecompositionOptions opt;
      opt.restarts = 64;
      opt.residual_target = kOptimizerTarget;
      for (int k = 4; k <= 6 && !cert; ++k) {
        const auto res = find_separable_decomposition(rho, k, opt);
        if (res.success()) {
          cert = res.ensemble;
          source = fmt("optimizer k=%d residual=%.1e", k, res.best_residual);
        }
      }
    } else {
      cert = symmetric_product_certificate(n);
      source = "analytic";
    }
    if (!cert) {
      ok = false;
      d += fmt("n=%ld no certificate; ", static_cast<long>(n));
      continue;
    }
    const auto b = cardinality_lower_bound(rho, cert);
    const bool row = b.lower == n * n && b.rank == n * (n + 1) / 2;
    ok = ok && row;
    d += fmt("n=%ld rank=%lld lower=%lld upper=%lld (%s); ", static_cast<long>(n),
             static_cast<long long>(b.rank), static_cast<long long>(b.lower),
             static_cast<long long>(b.upper.value_or(-1)), source.c_str());
  }
  return {ok, d};
}

Outcome pentagon_orthogonality() {
  const auto s = pentagon_states();
  const auto g = verify_orthonormal_product_set(s, kPentagonTol, kPentagonTol);
  const auto p = pentagon_vectors();
  double wn = 0.0, vn = 0.0;
  for (int i = 0; i < 5; ++i) {
    wn = std::max(wn, std::abs(p.w[i].dot(p.w[(i + 1) % 5])));
    vn = std::max(vn, std::abs(p.v[i].dot(p.v[(i + 2) % 5])));
  }
  const bool ok = g.pass && g.max_diagonal_error <= kPentagonTol && g.max_off_diagonal <= kPentagonTol &&
                  wn <= kPentagonTol && vn <= kPentagonTol;
  return {ok, fmt("norm err=%.1e offdiag=%.1e w-neighbor=%.1e v-next=%.1e", g.max_diagonal_error,
                  g.max_off_diagonal, wn, vn)};
}

Outcome uncompletability() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto v = is_completable(pentagon_states());
  const double secs = seconds_since(t0);
  const bool ok = v.status == CompletabilityStatus::Uncompletable && v.max_extension.size() == 3 &&
                  secs < kCompletabilitySeconds;
  return {ok, fmt("verdict=%s max_extension=%zu nodes=%zu %.3fs", to_string(v.status),
                  v.max_extension.size(), v.certificate.nodes_expanded, secs)};
}

Outcome completion_and_projection() {
  const auto s = pentagon_states();
  const Completion c = complete_in_extension(s);
  const auto g = verify_orthonormal_product_set(c.basis, kCompletionOverlapTol);
  const auto proj = project_completion(c.basis, s.space(), s.size());
  double wsum = 0.0;
  Matrix mixed = Matrix::Zero(12, 12);
  for (const auto& wp : proj) {
    wsum += wp.weight;
    mixed += wp.weight * wp.state.joint() * wp.state.joint().adjoint();
  }
  const double miss = (mixed - complement_state(s).matrix()).norm();
  const bool ok = c.basis.size() == 15 && g.pass && g.max_off_diagonal < kCompletionOverlapTol &&
                  proj.size() == 10 && std::abs(wsum - 1.0) <= kWeightSumTol && miss < kProjectionTol;
  return {ok, fmt("completion=%zu max_overlap=%.1e projected=%zu weight_sum-1=%.1e distance=%.1e",
                  c.basis.size(), g.max_off_diagonal, proj.size(), wsum - 1.0, miss)};
}

Outcome entropy_bound_check() {
  const auto s = pentagon_states();
  const DensityMatrix rho = complement_state(s);
  const double ent = von_neumann_entropy(rho);
  const auto verdict = is_completable(s);
  const auto eb = entropy_bound(rho, verdict.status != CompletabilityStatus::Uncompletable);
  const Completion c = complete_in_extension(s);
  DecompositionOptions opt;
  opt.initial = project_completion(c.basis, s.space(), s.size());
  const auto dec = find_separable_decomposition(rho, 10, opt);
  CardinalityBracket bracket = eb;
  if (dec.success()) bracket = eb.with_witness(*dec.ensemble);
  const bool ok = std::abs(ent - std::log2(7.0)) <= kEntropyTol && eb.lower == 8 && bracket.lower == 8 &&
                  bracket.upper == 10;
  return {ok, fmt("S=%.12f log2(7)=%.12f lower=%lld bracket=[%lld, %lld]", ent, std::log2(7.0),
                  static_cast<long long>(eb.lower), static_cast<long long>(bracket.lower),
                  static_cast<long long>(bracket.upper.value_or(-1)))};
}

Outcome conjugation_property() {
  Rng rng(20261014);
  double worst = 0.0;
  bool card_ok = true;
  int trials = 0;
  for (Index dim : {2, 3}) {
    const BipartiteSpace s(dim, dim);
    std::uniform_int_distribution<int> card(1, 12);
    for (int t = 0; t < kRandomTrials; ++t, ++trials) {
      const auto e = testing::random_product_ensemble(rng, s, static_cast<std::size_t>(card(rng)));
      const auto c = conjugate_B(e);
      card_ok = card_ok && c.size() == e.size();
      const Matrix pt = testing::partial_transpose_oracle(mix(e).matrix(), dim, dim);
      worst = std::max(worst, testing::max_abs(mix(c).matrix() - pt));
    }
  }
  return {worst <= kConjugationTol && card_ok,
          fmt("%d ensembles, worst |mix(conj) - PT(mix)|=%.1e, cardinality preserved=%s", trials, worst,
              card_ok ? "yes" : "no")};
}

Outcome entropy_mechanism() {
  Rng rng(7);
  int violations = 0, equality = 0, equality_undetected = 0, constructed = 0;
  double worst = -1.0;
  for (int t = 0; t < kRandomTrials; ++t) {
    std::uniform_int_distribution<int> da(1, 3), db(1, 3);
    const BipartiteSpace s(da(rng), db(rng));
    std::optional<Ensemble> e;
    if (t % 5 == 0) {
      // equiprobable orthonormal members from a random unitary
      std::uniform_int_distribution<int> card(1, static_cast<int>(s.total()));
      const int m = card(rng);
      const Matrix u = testing::random_unitary(rng, s.total());
      std::vector<EnsembleMember> members;
      for (int i = 0; i < m; ++i) members.push_back({1.0 / m, StateVector(s, u.col(i))});
      e = Ensemble::of(std::move(members));
      ++constructed;
    } else {
      std::uniform_int_distribution<int> card(1, 12);
      e = testing::random_pure_ensemble(rng, s, static_cast<std::size_t>(card(rng)));
    }
    const double bound = std::log2(static_cast<double>(e->size()));
    const double ent = von_neumann_entropy(mix(*e));
    worst = std::max(worst, ent - bound);
    if (ent > bound + kEntropySlack) ++violations;
    if (std::abs(ent - bound) <= kEqualityTol) {
      ++equality;
      if (!is_equiprobable_orthonormal(*e)) ++equality_undetected;
    }
  }
  const bool ok = violations == 0 && equality_undetected == 0 && equality >= constructed;
  return {ok, fmt("%d ensembles, max S-log2(m)=%.1e, violations=%d, equality cases=%d (constructed %d, "
                  "not equiprobable-orthonormal %d)",
                  kRandomTrials, worst, violations, equality, constructed, equality_undetected)};
}

Outcome tensor_power_check() {
  const auto t0 = std::chrono::steady_clock::now();
  const DensityMatrix rho = partial_transpose(werner(2, werner_ppt_boundary(2).parameter));
  const auto t = tensor_power_bounds(rho, symmetric_product_certificate(2), 2);
  const auto r = run_tensor_power(2, 2);
  const double exponent = r.find("ratio_exponent")->computed.get<double>();
  const double secs = seconds_since(t0);
  const double dim = static_cast<double>(grouped_space(rho.space(), 2).total());
  const bool ok = t.explicitly_verified && t.explicit_rank == 9 && t.explicit_pt_rank == 16 &&
                  std::abs(exponent - std::log(4.0) / std::log(3.0)) <= kExponentTol && secs < kTensorSeconds;
  return {ok, fmt("explicit dim=%.0f rank=%d pt_rank=%d exponent=%.15f %.3fs", dim, t.explicit_rank.value_or(-1),
                  t.explicit_pt_rank.value_or(-1), exponent, secs)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"werner zero count", werner_zero_count},
      {"boundary location", boundary_location},
      {"cardinality bracket n^2", bracket_check},
      {"pentagon orthogonality", pentagon_orthogonality},
      {"uncompletability", uncompletability},
      {"completion and back-projection", completion_and_projection},
      {"entropy bound", entropy_bound_check},
      {"conjugation property", conjugation_property},
      {"entropy-cardinality mechanism", entropy_mechanism},
      {"tensor power", tensor_power_check},
  };
  int failures = 0;
  int id = 1;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("[%s] criterion %d: %s | %s\n", o.pass ? "PASS" : "FAIL", id++, name, o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
