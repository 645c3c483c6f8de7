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

#ifndef SEPCARD_RUNNERS_HPP
#define SEPCARD_RUNNERS_HPP

// Claim runners behind the command-line subcommands. Each returns a Report
// that is deterministic given its inputs, apart from duration_ms.

#include "sepcard/ensembles.hpp"
#include "sepcard/product_bases.hpp"
#include "sepcard/report.hpp"
#include "sepcard/states.hpp"

#include <chrono>
#include <numbers>
#include <optional>
#include <string>

namespace sepcard {

struct RunOptions {
  std::uint64_t seed = 0;
  std::optional<std::int64_t> budget;
  std::optional<double> tol;
  unsigned threads = 1;
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline Json spectrum_json(const RealVector& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

inline Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (const auto& z : v) a.push_back(Json::array({z.real(), z.imag()}));
  return a;
}

inline Json bracket_json(const CardinalityBracket& b) {
  Json j = Json::object();
  j["rank"] = b.rank;
  j["lower"] = b.lower;
  j["upper"] = b.upper ? Json(*b.upper) : Json(nullptr);
  j["lower_provenance"] = to_string(b.lower_provenance);
  j["has_witness"] = b.upper_witness.has_value();
  return j;
}

inline Json ensemble_json(const Ensemble& e) {
  Json members = Json::array();
  for (const auto& m : e.members()) {
    Json j = Json::object();
    j["weight"] = m.weight;
    if (m.is_product()) {
      j["a"] = vector_json(m.product().a());
      j["b"] = vector_json(m.product().b());
    } else {
      j["state"] = vector_json(m.joint());
    }
    members.push_back(std::move(j));
  }
  Json j = Json::object();
  j["space"] = Json::array({e.space().dim_a(), e.space().dim_b()});
  j["cardinality"] = e.size();
  j["residual"] = e.residual();
  j["members"] = std::move(members);
  return j;
}

}  // namespace detail

/// Werner family: PPT boundary, partial-transpose spectrum and ranks, and
/// the cardinality brackets of ρ and ρ^T_B. Evaluated at the located
/// boundary unless `f` is given.
inline Report run_werner(Index n, std::optional<double> f = std::nullopt, const RunOptions& opt = {}) {
  if (n < 2 || n > 8) throw std::invalid_argument("run_werner: n must lie in 2..8");
  if (f && !(*f >= 0.0 && *f <= 1.0)) throw std::invalid_argument("run_werner: f must lie in [0, 1]");
  detail::Stopwatch clock;
  const double zero_tol = opt.tol.value_or(1e-9);
  const double dn = static_cast<double>(n);
  Report r;
  r.claim = "werner";
  r.inputs["n"] = n;
  r.inputs["f"] = f ? Json(*f) : Json(nullptr);
  r.inputs["tol"] = zero_tol;

  const BoundaryResult boundary = werner_ppt_boundary(n);
  const double f_star = boundary.parameter;
  const bool at_boundary = !f.has_value();
  const double fe = f.value_or(f_star);
  r.inputs["f_evaluated"] = fe;

  r.add("boundary_f_star", f_star, 1e-10, std::abs(f_star - 1.0 / (dn + 1.0)) <= 1e-10);
  {
    Json note = Json::object();
    note["computed_boundary"] = f_star;
    note["stated_boundary"] = 1.0 / dn;
    note["difference"] = f_star - 1.0 / dn;
    note["reading"] =
        "computed PPT crossing is 1/(n+1) in the mixing-weight parametrization; 1/n is the "
        "fidelity <Psi+|rho|Psi+> at that crossing";
    r.add("boundary_discrepancy", note, 0.0, true, 1.0 / dn);
  }
  const WernerFamily fam(n, f_star);
  r.add("fidelity_at_f_star", fam.fidelity(), 1e-10, std::abs(fam.fidelity() - 1.0 / dn) <= 1e-10,
        1.0 / dn);

  const DensityMatrix rho = werner(n, fe);
  const RealVector pt_spec = eigenvalues_hermitian(partial_transpose(rho.op()).matrix());
  {
    // Closed-form branches: f/n + (1−f)/n² (×n(n+1)/2), −f/n + (1−f)/n² (×n(n−1)/2).
    const double up = fe / dn + (1.0 - fe) / (dn * dn);
    const double down = -fe / dn + (1.0 - fe) / (dn * dn);
    const Index n_down = n * (n - 1) / 2;
    bool ok = pt_spec.size() == n * n;
    for (Index i = 0; ok && i < pt_spec.size(); ++i) {
      const double expect = i < n_down ? down : up;
      ok = std::abs(pt_spec(i) - expect) <= 1e-12;
    }
    r.add("pt_spectrum", detail::spectrum_json(pt_spec), 1e-12, ok);
  }

  int zeros = 0;
  for (double x : pt_spec) zeros += std::abs(x) < zero_tol ? 1 : 0;
  const int rank_pt = numerical_rank(pt_spec, kClaimRankTol);
  const int rank_rho = rho.rank();
  if (at_boundary) {
    r.add("pt_zero_eigenvalues", zeros, zero_tol, zeros == n * (n - 1) / 2, n * (n - 1) / 2);
    r.add("rank_pt", rank_pt, kClaimRankTol, rank_pt == n * (n + 1) / 2, n * (n + 1) / 2);
  } else {
    const double down = -fe / dn + (1.0 - fe) / (dn * dn);
    const int expect_zero = std::abs(down) < zero_tol ? static_cast<int>(n * (n - 1) / 2) : 0;
    r.add("pt_zero_eigenvalues", zeros, zero_tol, zeros == expect_zero);
    r.add("rank_pt", rank_pt, kClaimRankTol, rank_pt + expect_zero == n * n);
  }
  r.add("rank_rho", rank_rho, kClaimRankTol, fe < 1.0 ? rank_rho == n * n : rank_rho == 1,
        fe < 1.0 ? Json(n * n) : Json(1));

  const PptResult ppt = is_ppt(rho);
  {
    Json j = Json::object();
    j["ppt"] = ppt.ppt;
    j["min_pt_eigenvalue"] = ppt.min_eigenvalue;
    r.add("ppt", j, 1e-10, ppt.ppt == (fe <= f_star + 1e-10));
  }

  const auto cert = ppt.ppt ? werner_certificate(n, fe) : std::nullopt;
  const CardinalityBracket b_rho = cardinality_lower_bound(rho, cert);
  {
    const std::int64_t expect = cert ? std::max<std::int64_t>(rank_rho, rank_pt) : rank_rho;
    r.add("bracket_rho", detail::bracket_json(b_rho), kClaimRankTol, b_rho.lower == expect,
          at_boundary ? Json(n * n) : Json(nullptr));
  }
  if (cert) {
    const DensityMatrix rho_pt = partial_transpose(rho);
    const CardinalityBracket b_pt = cardinality_lower_bound(rho_pt, conjugate_B(*cert));
    Json stated = Json::object();
    stated["lower"] = n * n;
    stated["rank"] = n * (n + 1) / 2;
    const bool ok = at_boundary ? (b_pt.lower == n * n && b_pt.rank == n * (n + 1) / 2 && b_pt.lower > b_pt.rank)
                                : b_pt.lower == b_rho.lower;
    r.add("bracket_pt", detail::bracket_json(b_pt), kClaimRankTol, ok,
          at_boundary ? std::optional<Json>(stated) : std::nullopt);
  }
  r.duration_ms = clock.ms();
  return r;
}

/// Pentagon product set on 3 ⊗ 4: orthogonality, uncompletability, the
/// 3 ⊗ 5 completion and its back-projection, and the bracket [8, 10].
inline Report run_pentagon(const RunOptions& opt = {}) {
  detail::Stopwatch clock;
  Report r;
  r.claim = "pentagon";
  const auto search_budget = static_cast<std::size_t>(opt.budget.value_or(100000));
  r.inputs["seed"] = opt.seed;
  r.inputs["budget"] = search_budget;

  const ProductBasis s = pentagon_states();
  const auto pv = pentagon_vectors();
  {
    const GramReport g = verify_orthonormal_product_set(s, 1e-12, 1e-12);
    Json j = Json::object();
    j["max_off_diagonal"] = g.max_off_diagonal;
    j["max_diagonal_error"] = g.max_diagonal_error;
    r.add("gram", j, 1e-12, g.pass);
    double wn = 0.0, vn = 0.0;
    for (int i = 0; i < 5; ++i) {
      wn = std::max(wn, std::abs(pv.w[i].dot(pv.w[(i + 1) % 5])));
      vn = std::max(vn, std::abs(pv.v[i].dot(pv.v[(i + 2) % 5])));
    }
    r.add("neighbor_w_overlap", wn, 1e-12, wn <= 1e-12, 0.0);
    r.add("next_neighbor_v_overlap", vn, 1e-12, vn <= 1e-12);
  }

  const auto root = orthogonal_product_extensions(s);
  r.add("extendible", static_cast<int>(root.size()), 0.0, !root.empty(), true);

  const CompletabilityVerdict verdict = is_completable(s, search_budget);
  r.add("completability", to_string(verdict.status), 0.0,
        verdict.status == CompletabilityStatus::Uncompletable, "uncompletable");
  r.add("max_extension", static_cast<int>(verdict.max_extension.size()), 0.0,
        verdict.max_extension.size() == 3, 3);
  r.add("search_nodes", static_cast<std::int64_t>(verdict.certificate.nodes_expanded), 0.0,
        verdict.certificate.nodes_expanded <= search_budget);
  const auto largest = static_cast<int>(s.size() + verdict.max_extension.size());
  r.add("largest_orthogonal_product_set", largest, 0.0, largest < 12);

  const DensityMatrix rho_s = complement_state(s);
  const int rank_s = rho_s.rank();
  r.add("rank_rho_s", rank_s, kClaimRankTol, rank_s == 7, 7);
  {
    const Matrix sq = rho_s.matrix() * rho_s.matrix();
    const double defect = (sq - rho_s.matrix() / static_cast<double>(rank_s)).norm();
    r.add("normalized_projector_defect", defect, 1e-10, defect <= 1e-10);
  }
  const double entropy = von_neumann_entropy(rho_s);
  r.add("entropy_bits", entropy, 1e-9, std::abs(entropy - std::log2(7.0)) <= 1e-9);

  const bool range_has_opb = verdict.status != CompletabilityStatus::Uncompletable;
  const CardinalityBracket eb = entropy_bound(rho_s, range_has_opb);
  r.add("entropy_bound_lower", eb.lower, 1e-9, eb.lower == 8, 8);

  CardinalityBracket bracket = eb;
  try {
    CompletionOptions copt;
    copt.seed = opt.seed;
    const Completion c = complete_in_extension(s, copt);
    r.add("completion_size", static_cast<int>(c.basis.size()), 0.0, c.basis.size() == 15, 15);
    r.add("completion_max_overlap", c.max_overlap, 1e-9, c.max_overlap < 1e-9);
    r.add("completion_residual", c.residual, 1e-10, c.residual <= 1e-10);
    {
      Json frame = Json::array();
      for (int i = 0; i < 5; ++i) {
        Json row = Json::array();
        for (int j = 0; j < 5; ++j) row.push_back(c.frame(i, j));
        frame.push_back(std::move(row));
      }
      r.add("completion_frame", frame, 1e-10, true);
    }

    const auto projected = project_completion(c.basis, s.space(), s.size());
    double wsum = 0.0;
    for (const auto& wp : projected) wsum += wp.weight;
    r.add("projected_size", static_cast<int>(projected.size()), 0.0, projected.size() == 10, 10);
    r.add("projected_weight_sum", wsum, 1e-10, std::abs(wsum - 1.0) <= 1e-10);
    Matrix mixed = Matrix::Zero(12, 12);
    for (const auto& wp : projected) {
      const Vector v = wp.state.joint();
      mixed += wp.weight * (v * v.adjoint());
    }
    const double miss = (mixed - rho_s.matrix()).norm();
    r.add("projected_mixture_residual", miss, 1e-9, miss < 1e-9);

    DecompositionOptions dopt;
    dopt.initial = projected;
    dopt.seed = opt.seed;
    dopt.threads = opt.threads;
    const DecompositionResult dec = find_separable_decomposition(rho_s, 10, dopt);
    r.add("decomposition_residual", dec.best_residual, 1e-9, dec.success() && dec.best_residual < 1e-9);
    if (dec.success()) bracket = eb.with_witness(*dec.ensemble);
  } catch (const CompletionFailure& e) {
    Json j = Json::object();
    j["error"] = e.what();
    j["restart_residuals"] = e.residuals();
    r.add("completion", j, 1e-10, false);
  }
  {
    Json stated = Json::object();
    stated["rank"] = 7;
    stated["upper"] = 10;
    const bool ok = bracket.lower == 8 && bracket.upper && *bracket.upper == 10;
    r.add("bracket", detail::bracket_json(bracket), 0.0, ok, stated);
  }
  r.duration_ms = clock.ms();
  return r;
}

/// Copies 1..k of ρ = PT(werner(n, f*)): multiplicative rank and
/// partial-transpose-rank bounds, explicitly verified where small.
inline Report run_tensor_power(Index n, int copies, const RunOptions& opt = {}) {
  if (n < 2 || n > 8) throw std::invalid_argument("run_tensor_power: n must lie in 2..8");
  if (copies < 1) throw std::invalid_argument("run_tensor_power: copies must be >= 1");
  detail::Stopwatch clock;
  const auto dim_budget = static_cast<Index>(opt.budget.value_or(1024));
  Report r;
  r.claim = "tensor-power";
  r.inputs["n"] = n;
  r.inputs["copies"] = copies;
  r.inputs["budget"] = dim_budget;

  const double f_star = werner_ppt_boundary(n).parameter;
  const DensityMatrix rho = partial_transpose(werner(n, f_star));
  const Ensemble cert = symmetric_product_certificate(n);
  const std::int64_t base_rank = n * (n + 1) / 2;
  const std::int64_t base_lower = n * n;
  Json table = Json::array();
  bool rows_ok = true;
  double last_exponent = 0.0;
  for (int c = 1; c <= copies; ++c) {
    const TensorPowerBounds t = tensor_power_bounds(rho, cert, c, dim_budget);
    const double ratio = static_cast<double>(t.bracket.lower) / static_cast<double>(t.rank_bound);
    const double exponent = std::log(static_cast<double>(t.bracket.lower)) /
                            std::log(static_cast<double>(t.rank_bound));
    last_exponent = exponent;
    Json row = Json::object();
    row["copies"] = c;
    row["rank"] = t.rank_bound;
    row["lower"] = t.bracket.lower;
    row["upper"] = t.bracket.upper ? Json(*t.bracket.upper) : Json(nullptr);
    row["ratio"] = ratio;
    row["exponent"] = exponent;
    row["explicit"] = t.explicit_rank.has_value();
    row["explicitly_verified"] = t.explicitly_verified;
    row["explicit_rank"] = t.explicit_rank ? Json(*t.explicit_rank) : Json(nullptr);
    row["explicit_pt_rank"] = t.explicit_pt_rank ? Json(*t.explicit_pt_rank) : Json(nullptr);
    row["witness_verified"] = t.bracket.upper_witness.has_value();
    table.push_back(row);
    const bool ok = t.rank_bound == int_pow(base_rank, c) && t.bracket.lower == int_pow(base_lower, c) &&
                    (!t.explicit_rank || t.explicitly_verified) &&
                    std::abs(ratio - std::pow(static_cast<double>(base_lower) / static_cast<double>(base_rank), c)) <= 1e-12;
    rows_ok = rows_ok && ok;
  }
  r.add("table", table, 1e-12, rows_ok);
  const double stated = std::log(static_cast<double>(base_lower)) / std::log(static_cast<double>(base_rank));
  r.add("ratio_exponent", last_exponent, 1e-12, std::abs(last_exponent - stated) <= 1e-12,
        n == 2 ? std::optional<Json>(std::log(4.0) / std::log(3.0)) : std::nullopt);
  r.duration_ms = clock.ms();
  return r;
}

/// Parsed state specification for run_decompose.
struct StateSpec {
  std::string text;
  DensityMatrix rho;
  std::optional<std::vector<WeightedProduct>> seed_ensemble;  // pentagon only
};

inline StateSpec parse_state_spec(const std::string& text) {
  auto fields = [&] {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
      if (ch == ':') {
        out.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    out.push_back(cur);
    return out;
  }();
  try {
    if (fields.size() == 1 && fields[0] == "pentagon") {
      const ProductBasis s = pentagon_states();
      const DensityMatrix rho = complement_state(s);
      const Completion c = complete_in_extension(s);
      return {text, rho, project_completion(c.basis, s.space(), s.size())};
    }
    if (fields.size() == 3 && fields[0] == "werner") {
      return {text, werner(std::stol(fields[1]), std::stod(fields[2])), std::nullopt};
    }
    if (fields.size() == 3 && fields[0] == "tensor") {
      const Index n = std::stol(fields[1]);
      const int k = std::stoi(fields[2]);
      const DensityMatrix base = partial_transpose(werner(n, werner_ppt_boundary(n).parameter));
      return {text, DensityMatrix(tensor_power(base.op(), k)), std::nullopt};
    }
  } catch (const std::logic_error& e) {
    throw std::invalid_argument("state spec '" + text + "': " + e.what());
  }
  throw std::invalid_argument("unknown state spec '" + text +
                              "' (expected werner:n:f, pentagon, or tensor:n:k)");
}

/// Separable-decomposition search on a named state.
inline Report run_decompose(const std::string& state, int k, const RunOptions& opt = {}) {
  detail::Stopwatch clock;
  const StateSpec spec = parse_state_spec(state);
  Report r;
  r.claim = "decompose";
  r.inputs["state"] = state;
  r.inputs["k"] = k;
  r.inputs["seed"] = opt.seed;
  DecompositionOptions dopt;
  dopt.seed = opt.seed;
  dopt.threads = opt.threads;
  if (opt.budget) dopt.restarts = static_cast<int>(*opt.budget);
  if (opt.tol) dopt.residual_target = *opt.tol;
  const bool seeded = spec.seed_ensemble && static_cast<int>(spec.seed_ensemble->size()) == k;
  if (seeded) dopt.initial = spec.seed_ensemble;
  r.inputs["restarts"] = dopt.restarts;
  r.inputs["residual_target"] = dopt.residual_target;
  r.inputs["seeded"] = seeded;

  const int rank = spec.rho.rank();
  r.add("rank", rank, kClaimRankTol, k >= rank);
  const PptResult ppt = is_ppt(spec.rho);
  {
    Json j = Json::object();
    j["ppt"] = ppt.ppt;
    j["min_pt_eigenvalue"] = ppt.min_eigenvalue;
    j["npt_flag"] = !ppt.ppt;
    r.add("ppt", j, 1e-10, true);
  }
  if (k < rank) {
    r.duration_ms = clock.ms();
    return r;
  }
  const DecompositionResult dec = find_separable_decomposition(spec.rho, k, dopt);
  r.add("decomposition_found", dec.success(), dopt.residual_target, dec.success());
  r.add("best_residual", dec.best_residual, dopt.residual_target, dec.best_residual < dopt.residual_target);
  r.add("soundness", ppt.ppt || !dec.success(), 0.0, ppt.ppt || !dec.success());
  r.add("restart_residuals", dec.restart_residuals, dopt.residual_target, true);
  r.add("residual_trace", dec.residual_trace, dopt.residual_target, true);
  if (dec.success()) {
    r.add("witness", detail::ensemble_json(*dec.ensemble), dec.ensemble->tolerance(), true);
    r.add("witness_average_entanglement", average_entanglement(*dec.ensemble), 1e-9,
          average_entanglement(*dec.ensemble) <= 1e-9);
  }
  r.duration_ms = clock.ms();
  return r;
}

}  // namespace sepcard

#endif  // SEPCARD_RUNNERS_HPP
