#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "idp/diagnostics.hpp"
#include "idp/limiter.hpp"
#include "idp/sim/advection1d.hpp"
#include "idp/sim/riemann.hpp"

namespace idp::sim {

/// Per-dataset numbers from one limiting study.
struct DatasetRecord {
  std::size_t index = 0;
  int iterations_l2 = 0, iterations_l1 = 0;
  long long projections_l2 = 0, projections_l1 = 0;
  double fit_r2_l2 = 0.0, fit_r2_l1 = 0.0;
  double fit_rate_l2 = 0.0, fit_rate_l1 = 0.0;
};

struct LimitingStudy {
  std::size_t datasets = 0;           // snapshots or perturbed sets inspected
  std::size_t violating = 0;          // of those, how many needed limiting
  int max_iterations_l2 = 0, max_iterations_l1 = 0;
  long long projections_l2 = 0, projections_l1 = 0;
  bool all_converged = true;
  bool all_admissible = true;         // every output row in the target set
  double worst_conservation = 0.0;    // relative, per column
  double max_diff_l1_l2 = 0.0;        // max entry difference between the two norms
  double max_diff_l2_cas = 0.0;       // scalar only: against ClipAndAssuredSum
  double min_fit_r2_l2 = 1.0, min_fit_r2_l1 = 1.0;
  double wall_time_s = 0.0;
  std::vector<DatasetRecord> records;

  nlohmann::json to_json() const {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& r : records)
      per.push_back({{"index", r.index},
                     {"iterations_l2", r.iterations_l2},
                     {"iterations_l1", r.iterations_l1},
                     {"projections_l2", r.projections_l2},
                     {"projections_l1", r.projections_l1},
                     {"fit_r2_l2", r.fit_r2_l2},
                     {"fit_r2_l1", r.fit_r2_l1},
                     {"fit_rate_l2", r.fit_rate_l2},
                     {"fit_rate_l1", r.fit_rate_l1}});
    return {{"datasets", datasets},
            {"violating", violating},
            {"max_iterations_l2", max_iterations_l2},
            {"max_iterations_l1", max_iterations_l1},
            {"projections_l2", projections_l2},
            {"projections_l1", projections_l1},
            {"all_converged", all_converged},
            {"all_admissible", all_admissible},
            {"worst_conservation", worst_conservation},
            {"max_diff_l1_l2", max_diff_l1_l2},
            {"max_diff_l2_cas", max_diff_l2_cas},
            {"min_fit_r2_l2", min_fit_r2_l2},
            {"min_fit_r2_l1", min_fit_r2_l1},
            {"wall_time_s", wall_time_s},
            {"per_dataset", per}};
  }
};

namespace detail {

inline double relative_defect(double got, double want) { return std::abs(got - want) / (1.0 + std::abs(want)); }

}  // namespace detail

/// Limits every advection snapshot whose averages leave [m, M] with both
/// scalar models and compares them with each other and with ClipAndAssuredSum.
inline LimitingStudy scalar_limiting_study(const AdvectionRun& run, double m, double M,
                                           SolverConfig l2, SolverConfig l1) {
  const auto t0 = std::chrono::steady_clock::now();
  l2.h_mesh = l1.h_mesh = run.h;
  l2.dim = l1.dim = 1;
  LimitingStudy s;
  s.datasets = run.snapshots.size();
  for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
    const auto& u = run.snapshots[k];
    if (std::all_of(u.begin(), u.end(), [&](double v) { return v >= m && v <= M; })) continue;
    ++s.violating;
    const double b = pairwise_sum(u);
    auto [x2, r2] = limit_scalar(u, m, M, Norm::L2, l2);
    auto [x1, r1] = limit_scalar(u, m, M, Norm::L1, l1);
    const auto xc = clip_and_assured_sum(u, m, M, b);
    s.all_converged = s.all_converged && r2.converged && r1.converged;
    DatasetRecord rec{k, r2.iterations, r1.iterations, r2.projections, r1.projections};
    const auto f2 = geometric_tail_fit(r2.residual_history), f1 = geometric_tail_fit(r1.residual_history);
    rec.fit_r2_l2 = f2.r_squared;
    rec.fit_r2_l1 = f1.r_squared;
    rec.fit_rate_l2 = f2.rate;
    rec.fit_rate_l1 = f1.rate;
    s.min_fit_r2_l2 = std::min(s.min_fit_r2_l2, f2.r_squared);
    s.min_fit_r2_l1 = std::min(s.min_fit_r2_l1, f1.r_squared);
    s.records.push_back(rec);
    s.max_iterations_l2 = std::max(s.max_iterations_l2, r2.iterations);
    s.max_iterations_l1 = std::max(s.max_iterations_l1, r1.iterations);
    s.projections_l2 += r2.projections;
    s.projections_l1 += r1.projections;
    for (const auto* x : {&x2, &x1}) {
      s.worst_conservation = std::max(s.worst_conservation, detail::relative_defect(pairwise_sum(*x), b));
      for (double v : *x) s.all_admissible = s.all_admissible && v >= m && v <= M;
    }
    for (std::size_t i = 0; i < u.size(); ++i) {
      s.max_diff_l1_l2 = std::max(s.max_diff_l1_l2, std::abs(x2[i] - x1[i]));
      s.max_diff_l2_cas = std::max(s.max_diff_l2_cas, std::abs(x2[i] - xc[i]));
    }
  }
  s.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return s;
}

/// Limits every perturbed Lax set with both Euler models.
inline LimitingStudy lax_limiting_study(const LaxDataset& d, LimiterOptions l2, LimiterOptions l1) {
  const auto t0 = std::chrono::steady_clock::now();
  l2.norm = Norm::L2;
  l1.norm = Norm::L1;
  for (auto* o : {&l2, &l1}) {
    o->solver.h_mesh = d.base.h();
    o->solver.dim = 1;
  }
  LimitingStudy s;
  s.datasets = d.sets.size();
  for (std::size_t k = 0; k < d.sets.size(); ++k) {
    const auto& f = d.sets[k];
    if (detect_violations(f, l2.set).empty()) continue;
    ++s.violating;
    const auto target = ConservationTarget<1>::from_field(f);
    auto [a, ra] = limit_cell_averages(f, target, l2);
    auto [b, rb] = limit_cell_averages(f, target, l1);
    s.all_converged = s.all_converged && ra.converged && rb.converged;
    DatasetRecord rec{k, ra.iterations, rb.iterations, ra.projections, rb.projections};
    const auto fa = geometric_tail_fit(ra.residual_history), fb = geometric_tail_fit(rb.residual_history);
    rec.fit_r2_l2 = fa.r_squared;
    rec.fit_r2_l1 = fb.r_squared;
    rec.fit_rate_l2 = fa.rate;
    rec.fit_rate_l1 = fb.rate;
    s.min_fit_r2_l2 = std::min(s.min_fit_r2_l2, fa.r_squared);
    s.min_fit_r2_l1 = std::min(s.min_fit_r2_l1, fb.r_squared);
    s.records.push_back(rec);
    s.max_iterations_l2 = std::max(s.max_iterations_l2, ra.iterations);
    s.max_iterations_l1 = std::max(s.max_iterations_l1, rb.iterations);
    s.projections_l2 += ra.projections;
    s.projections_l1 += rb.projections;
    for (const auto* x : {&a, &b}) {
      s.all_admissible = s.all_admissible && detect_violations(*x, l2.set).empty();
      for (int c = 0; c < 3; ++c)
        s.worst_conservation = std::max(s.worst_conservation, detail::relative_defect(x->column_sum(c), target.totals[c]));
    }
    for (std::size_t i = 0; i < a.values().size(); ++i)
      s.max_diff_l1_l2 = std::max(s.max_diff_l1_l2, std::abs(a.values()[i] - b.values()[i]));
  }
  s.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return s;
}

}  // namespace idp::sim
