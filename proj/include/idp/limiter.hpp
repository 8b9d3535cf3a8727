#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "idp/errors.hpp"
#include "idp/field.hpp"
#include "idp/splitting.hpp"

namespace idp {

enum class Norm { L1, L2 };

inline const char* to_string(Norm n) { return n == Norm::L1 ? "l1" : "l2"; }

inline Norm parse_norm(const std::string& s) {
  if (s == "l1" || s == "L1") return Norm::L1;
  if (s == "l2" || s == "L2") return Norm::L2;
  throw std::invalid_argument("unknown norm '" + s + "' (expected l1 or l2)");
}

struct LimiterOptions {
  Norm norm = Norm::L2;
  AdmissibleSet set{};
  SolverConfig solver{};
  // Fidelity weight of the l2 model; the minimizer does not depend on it.
  double alpha = 1.0;
  bool restrict_region = false;
  double region_threshold = 1e-10;
  // Push the O(tol) column-sum defect of the solver output into cells with
  // ample admissibility margin so sums match to rounding.
  bool conservation_polish = true;
};

/// Direct l1 minimizer for box bounds: clip, then move every entry along the
/// slack direction so the sum is restored.
inline std::vector<double> clip_and_assured_sum(std::span<const double> u, double m, double M,
                                                double b) {
  detail::check_scalar_feasible(u.size(), m, M, b);
  const double n = static_cast<double>(u.size());
  std::vector<double> x(u.size());
  prox_box(u, m, M, x);
  const double s = pairwise_sum(x);
  if (s == b) return x;
  if (s < b) {
    const double denom = M * n - s;
    if (denom <= 0.0) return x;
    for (double& v : x) v += (b - s) * (M - v) / denom;
  } else {
    const double denom = s - m * n;
    if (denom <= 0.0) return x;
    for (double& v : x) v -= (s - b) * (v - m) / denom;
  }
  for (double& v : x) v = std::min(std::max(v, m), M);
  return x;
}

template <int Dim>
std::vector<std::size_t> detect_violations(const CellAverageField<Dim>& f, const AdmissibleSet& g) {
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < f.n_cells(); ++i)
    if (!in_admissible_set(f.state(i), g)) bad.push_back(i);
  return bad;
}

/// Cells that are inadmissible or carry internal energy at least `threshold`.
template <int Dim>
std::vector<std::size_t> select_limiting_region(const CellAverageField<Dim>& f,
                                                const AdmissibleSet& g, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("select_limiting_region: threshold must be > 0");
  std::vector<std::size_t> region;
  for (std::size_t i = 0; i < f.n_cells(); ++i) {
    const auto s = f.state(i);
    if (!in_admissible_set(s, g) || internal_energy(s) >= threshold) region.push_back(i);
  }
  return region;
}

namespace detail {

// Adds the column-sum defect to the cells with the largest admissibility
// margin, keeping every touched row admissible. Returns false when no
// admissible placement was found (the field is then unchanged).
template <int Dim>
bool polish_conservation(CellAverageField<Dim>& f, const ConservationTarget<Dim>& target,
                         const AdmissibleSet& g) {
  std::array<double, Dim + 2> defect{};
  bool any = false;
  for (int c = 0; c < Dim + 2; ++c) {
    defect[c] = target.totals[c] - f.column_sum(c);
    any = any || defect[c] != 0.0;
  }
  if (!any) return true;
  std::vector<std::size_t> order(f.n_cells());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> margin(f.n_cells());
  for (std::size_t i = 0; i < f.n_cells(); ++i) margin[i] = admissibility_margin(f.state(i), g);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return margin[a] > margin[b]; });

  for (std::size_t k : {std::max<std::size_t>(1, f.n_cells() / 2), std::size_t{1}}) {
    std::vector<ConservedState<Dim>> trial(k);
    bool ok = true;
    for (std::size_t j = 0; j < k && ok; ++j) {
      trial[j] = f.state(order[j]);
      for (int c = 0; c < Dim + 2; ++c) trial[j].q[c] += defect[c] / static_cast<double>(k);
      ok = in_admissible_set(trial[j], g);
    }
    if (!ok) continue;
    for (std::size_t j = 0; j < k; ++j) f.set_state(order[j], trial[j]);
    return true;
  }
  return false;
}

}  // namespace detail

/// Limits cell averages onto G^eps while preserving column sums, in the
/// chosen norm. A field without violations is returned unchanged with a
/// zero-iteration report. With restrict_region, only the selected cells take
/// part and their own sums are the targets, so the other cells stay
/// bit-identical.
template <int Dim>
std::pair<CellAverageField<Dim>, SolveReport> limit_cell_averages(
    const CellAverageField<Dim>& field, const ConservationTarget<Dim>& target,
    const LimiterOptions& opts) {
  if (!(opts.set.epsilon > 0.0)) throw std::invalid_argument("limit_cell_averages: epsilon must be > 0");
  SolveReport none;
  none.converged = true;
  none.tol = opts.solver.tol;
  none.gamma = opts.norm == Norm::L1 ? opts.solver.gamma_step : opts.alpha;
  if (detect_violations(field, opts.set).empty()) return {field, none};

  auto solve = [&](const CellAverageField<Dim>& sub, const ConservationTarget<Dim>& t) {
    auto result = opts.norm == Norm::L2 ? dys_l2_euler(sub, t, opts.set, opts.alpha, opts.solver)
                                        : drs_l1_euler(sub, t, opts.set, opts.solver);
    if (opts.conservation_polish) detail::polish_conservation(result.first, t, opts.set);
    return result;
  };

  if (!opts.restrict_region) return solve(field, target);

  const auto region = select_limiting_region(field, opts.set, opts.region_threshold);
  const CellAverageField<Dim> sub = field.subset(region);
  auto [limited, rep] = solve(sub, ConservationTarget<Dim>::from_field(sub));
  CellAverageField<Dim> out = field;
  for (std::size_t k = 0; k < region.size(); ++k) out.set_state(region[k], limited.state(k));
  return {std::move(out), std::move(rep)};
}

/// Scalar limiter onto [m, M] with the sum of u preserved.
inline std::pair<std::vector<double>, SolveReport> limit_scalar(std::span<const double> u,
                                                                double m, double M, Norm norm,
                                                                const SolverConfig& cfg) {
  const double b = pairwise_sum(u);
  SolveReport none;
  none.converged = true;
  if (std::all_of(u.begin(), u.end(), [&](double v) { return v >= m && v <= M; }))
    return {std::vector<double>(u.begin(), u.end()), none};
  return norm == Norm::L2 ? dys_l2_scalar(u, m, M, b, cfg) : drs_l1_scalar(u, m, M, b, cfg);
}

template <int Dim>
double frobenius_distance(const CellAverageField<Dim>& a, const CellAverageField<Dim>& b) {
  if (a.n_cells() != b.n_cells()) throw std::invalid_argument("frobenius_distance: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    const double d = a.values()[i] - b.values()[i];
    s += d * d;
  }
  return std::sqrt(s);
}

struct AccuracyCheck {
  double distance_limited = 0.0;
  double distance_raw = 0.0;
  bool improved = false;        // strictly closer to the exact averages
  bool within_factor_two = false;
};

/// Compares the limited and raw averages against exact admissible averages.
template <int Dim>
AccuracyCheck accuracy_improvement_check(const CellAverageField<Dim>& limited,
                                         const CellAverageField<Dim>& raw,
                                         const CellAverageField<Dim>& exact) {
  AccuracyCheck c;
  c.distance_limited = frobenius_distance(limited, exact);
  c.distance_raw = frobenius_distance(raw, exact);
  c.improved = c.distance_limited < c.distance_raw;
  c.within_factor_two = c.distance_limited <= 2.0 * c.distance_raw;
  return c;
}

}  // namespace idp
