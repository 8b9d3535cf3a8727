#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "idp/dg/solution.hpp"
#include "idp/errors.hpp"
#include "idp/io.hpp"
#include "idp/limiter.hpp"

namespace idp::sim {

/// One cell-average limiter invocation.
struct AuditRecord {
  long time_step = 0;
  int rk_stage = 0;
  std::size_t n_violations = 0;
  std::size_t region_size = 0;
  Norm norm = Norm::L2;
  int iterations = 0;
  long long projections = 0;
  int inner_iterations = 0;
  bool converged = true;
  std::vector<double> conservation_residuals;  // relative, per component
  bool excluded_untouched = true;
  double wall_time_s = 0.0;

  nlohmann::json to_json() const {
    return {{"time_step", time_step},
            {"rk_stage", rk_stage},
            {"n_violations", n_violations},
            {"region_size", region_size},
            {"norm", idp::to_string(norm)},
            {"iterations", iterations},
            {"inner_iterations", inner_iterations},
            {"projections", projections},
            {"converged", converged},
            {"conservation_residuals", conservation_residuals},
            {"excluded_untouched", excluded_untouched},
            {"wall_time_s", wall_time_s}};
  }
};

/// Per-stage positivity pipeline for 2D Euler DG solutions: limit cell
/// averages when any is inadmissible, re-attach them to the polynomials, then
/// apply the point-value scaling limiter.
class LimiterPipeline {
 public:
  explicit LimiterPipeline(LimiterOptions opts, bool cell_average_limiter = true)
      : opts_(std::move(opts)), enabled_(cell_average_limiter) {}

  void set_audit(JsonlWriter* w) { audit_ = w; }
  void set_step(long step) { step_ = step; }
  const LimiterOptions& options() const { return opts_; }
  const std::vector<AuditRecord>& records() const { return records_; }
  std::size_t zhang_shu_cells() const { return zs_cells_; }
  double worst_conservation() const { return worst_conservation_; }
  bool excluded_always_untouched() const { return excluded_ok_; }
  /// Largest relative change of a column total across one pipeline pass.
  double worst_stage_drift() const { return worst_stage_drift_; }

  void operator()(dg::DGSolution& sol, int stage) {
    const auto avg = dg::cell_averages<2>(sol);
    const auto bad = detect_violations(avg, opts_.set);
    if (!bad.empty()) {
      if (!enabled_)
        throw InfeasibleProblem("cell average left the admissible set and the cell-average limiter is off");
      AuditRecord rec;
      rec.time_step = step_;
      rec.rk_stage = stage;
      rec.n_violations = bad.size();
      rec.norm = opts_.norm;
      const auto target = ConservationTarget<2>::from_field(avg);
      auto [limited, rep] = limit_cell_averages(avg, target, opts_);
      rec.iterations = rep.iterations;
      rec.inner_iterations = rep.inner_iterations;
      rec.projections = rep.projections;
      rec.converged = rep.converged;
      rec.wall_time_s = rep.wall_time_s;
      rec.region_size = opts_.restrict_region
                            ? select_limiting_region(avg, opts_.set, opts_.region_threshold).size()
                            : avg.n_cells();
      for (int c = 0; c < 4; ++c) {
        const double raw = target.totals[c];
        const double r = std::abs(limited.column_sum(c) - raw) / (1.0 + std::abs(raw));
        rec.conservation_residuals.push_back(r);
        worst_conservation_ = std::max(worst_conservation_, r);
      }
      if (opts_.restrict_region) {
        const auto region = select_limiting_region(avg, opts_.set, opts_.region_threshold);
        std::vector<char> in(avg.n_cells(), 0);
        for (auto i : region) in[i] = 1;
        for (std::size_t i = 0; i < avg.n_cells() && rec.excluded_untouched; ++i)
          if (!in[i])
            for (int c = 0; c < 4; ++c)
              if (limited(i, c) != avg(i, c)) rec.excluded_untouched = false;
        excluded_ok_ = excluded_ok_ && rec.excluded_untouched;
      }
      records_.push_back(rec);
      if (audit_) audit_->write(rec.to_json());
      if (!rep.converged) throw SolverFailure("cell-average limiter did not converge at step " +
                                              std::to_string(step_) + ", stage " + std::to_string(stage));
      if (!detect_violations(limited, opts_.set).empty())
        throw SolverFailure("cell-average limiter returned inadmissible averages");
      dg::postprocess_dg(sol, limited);
    }
    const auto st = dg::zhang_shu_scaling<2>(sol, opts_.set);
    zs_cells_ += st.cells_density_scaled + st.cells_energy_scaled;
    const auto after = dg::cell_averages<2>(sol);
    for (int c = 0; c < 4; ++c) {
      const double raw = avg.column_sum(c);
      worst_stage_drift_ = std::max(worst_stage_drift_, std::abs(after.column_sum(c) - raw) / (1.0 + std::abs(raw)));
    }
  }

 private:
  LimiterOptions opts_;
  bool enabled_ = true;
  JsonlWriter* audit_ = nullptr;
  long step_ = 0;
  std::vector<AuditRecord> records_;
  std::size_t zs_cells_ = 0;
  double worst_conservation_ = 0.0;
  double worst_stage_drift_ = 0.0;
  bool excluded_ok_ = true;
};

}  // namespace idp::sim
