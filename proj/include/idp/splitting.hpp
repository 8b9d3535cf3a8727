#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "idp/errors.hpp"
#include "idp/field.hpp"
#include "idp/prox.hpp"

namespace idp {

struct SolverConfig {
  double gamma_step = 1.0;
  double lambda_relax = 1.0;
  double tol = 1e-13;
  int max_iter = 10000;
  double h_mesh = 1.0;
  int dim = 1;

  void validate() const {
    if (!(gamma_step > 0.0)) throw std::invalid_argument("SolverConfig: gamma_step must be > 0");
    if (!(lambda_relax > 0.0 && lambda_relax <= 2.0))
      throw std::invalid_argument("SolverConfig: lambda_relax must lie in (0, 2]");
    if (!(tol > 0.0)) throw std::invalid_argument("SolverConfig: tol must be > 0");
    if (max_iter < 1) throw std::invalid_argument("SolverConfig: max_iter must be >= 1");
    if (!(h_mesh > 0.0)) throw std::invalid_argument("SolverConfig: h_mesh must be > 0");
    if (dim < 1 || dim > 3) throw std::invalid_argument("SolverConfig: dim must be 1, 2 or 3");
  }

  /// h^{d/2} |a - b|_2
  double distance_2h(std::span<const double> a, std::span<const double> b) const {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::pow(h_mesh, 0.5 * dim) * std::sqrt(s);
  }
};

struct SolveReport {
  int iterations = 0;
  // Evaluations of the projection onto the pointwise admissible set.
  std::int64_t projections = 0;
  std::vector<double> residual_history;
  bool converged = false;
  std::uint64_t fallback_events = 0;
  double gamma = 0.0;
  double lambda = 1.0;
  double tol = 0.0;
  double wall_time_s = 0.0;
  std::int64_t inner_iterations = 0;
  double conservation_residual = 0.0;
};

using Vec = std::vector<double>;

namespace detail {

class WallTimer {
 public:
  WallTimer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline double column_residual(std::span<const double> x, std::size_t cols,
                              std::span<const double> b) {
  const std::size_t rows = x.size() / cols;
  double r = 0.0;
  for (std::size_t c = 0; c < cols; ++c)
    r = std::max(r, std::abs(pairwise_sum_strided(x.data() + c, rows, cols) - b[c]));
  return r;
}

}  // namespace detail

/// Generalized Douglas-Rachford:
///   Y+ = lambda prox_g(2X - Y) + Y - lambda X,  X+ = prox_h(Y+),
/// stopping on |Y+ - Y|_2h < tol. X starts at prox_h(y0) unless given.
/// Prox callables have the signature void(const Vec& in, Vec& out).
template <class ProxG, class ProxH>
std::pair<Vec, SolveReport> drs_solve(ProxG&& prox_g, ProxH&& prox_h, Vec y0,
                                      const SolverConfig& cfg, const Vec* x0 = nullptr) {
  cfg.validate();
  if (!(cfg.lambda_relax < 2.0))
    throw std::invalid_argument("drs_solve: lambda_relax must lie in (0, 2)");
  detail::WallTimer timer;
  SolveReport rep;
  rep.gamma = cfg.gamma_step;
  rep.lambda = cfg.lambda_relax;
  rep.tol = cfg.tol;

  const std::size_t n = y0.size();
  Vec y = std::move(y0), x(n), reflected(n), gy(n), y_next(n);
  if (x0) {
    if (x0->size() != n) throw std::invalid_argument("drs_solve: x0 size mismatch");
    x = *x0;
  } else {
    prox_h(y, x);
  }
  const double lam = cfg.lambda_relax;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    for (std::size_t i = 0; i < n; ++i) reflected[i] = 2.0 * x[i] - y[i];
    prox_g(reflected, gy);
    for (std::size_t i = 0; i < n; ++i) y_next[i] = lam * gy[i] + y[i] - lam * x[i];
    const double res = cfg.distance_2h(y_next, y);
    rep.residual_history.push_back(res);
    rep.iterations = k;
    y.swap(y_next);
    prox_h(y, x);
    if (!std::isfinite(res) || !detail::all_finite(x)) break;
    if (res < cfg.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.wall_time_s = timer.seconds();
  return {std::move(x), std::move(rep)};
}

/// Davis-Yin three-operator splitting:
///   X_half = prox_g(Z), X = prox_f(2 X_half - Z - gamma grad_h(X_half)),
///   Z += X - X_half,
/// stopping on |Z+ - Z|_2h < tol. Returns the last X_half. `z` is updated in
/// place so callers can warm start a later solve.
template <class ProxF, class ProxG, class GradH>
std::pair<Vec, SolveReport> dys_solve(ProxF&& prox_f, ProxG&& prox_g, GradH&& grad_h, double L,
                                      Vec& z, const SolverConfig& cfg) {
  cfg.validate();
  const double gamma = cfg.gamma_step;
  if (!(L > 0.0) || !(gamma < 2.0 / L))
    throw std::invalid_argument("dys_solve: step size must lie in (0, 2/L)");
  detail::WallTimer timer;
  SolveReport rep;
  rep.gamma = gamma;
  rep.lambda = 1.0;
  rep.tol = cfg.tol;

  const std::size_t n = z.size();
  Vec x_half(n), grad(n), t(n), x(n);
  for (int k = 1; k <= cfg.max_iter; ++k) {
    prox_g(z, x_half);
    grad_h(x_half, grad);
    for (std::size_t i = 0; i < n; ++i) t[i] = 2.0 * x_half[i] - z[i] - gamma * grad[i];
    prox_f(t, x);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dz = x[i] - x_half[i];
      z[i] += dz;
      s += dz * dz;
    }
    const double res = std::pow(cfg.h_mesh, 0.5 * cfg.dim) * std::sqrt(s);
    rep.residual_history.push_back(res);
    rep.iterations = k;
    if (!std::isfinite(res)) break;
    if (res < cfg.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.wall_time_s = timer.seconds();
  return {std::move(x_half), std::move(rep)};
}

namespace detail {

// l2 model min 1/(2 alpha) |X - ref|^2 over column sums = b and rows in the
// pointwise set, by DYS with gamma = alpha = 1/L. `z` is the warm start.
template <class ProjectRows>
std::pair<Vec, SolveReport> dys_l2_block(std::span<const double> ref, std::size_t cols,
                                         std::span<const double> b, ProjectRows&& project_rows,
                                         double alpha, const SolverConfig& cfg, Vec& z) {
  if (!(alpha > 0.0)) throw std::invalid_argument("dys_l2: alpha must be > 0");
  SolverConfig c = cfg;
  c.gamma_step = alpha;
  const auto fallbacks_before = projection_diagnostics().fallback_events.load();
  std::int64_t projections = 0;
  auto prox_f = [&](const Vec& in, Vec& out) { prox_conservation(in, cols, b, out); };
  auto prox_g = [&](const Vec& in, Vec& out) {
    ++projections;
    project_rows(in, out);
  };
  auto grad_h = [&](const Vec& in, Vec& out) {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = (in[i] - ref[i]) / alpha;
  };
  auto result = dys_solve(prox_f, prox_g, grad_h, 1.0 / alpha, z, c);
  result.second.projections = projections;
  result.second.fallback_events = projection_diagnostics().fallback_events.load() - fallbacks_before;
  result.second.conservation_residual = column_residual(result.first, cols, b);
  return result;
}

// l1 model min |X - u|_1 over the same constraints, by DRS whose h-prox is the
// l2 model above with alpha = gamma, warm started across outer iterations.
template <class ProjectRows>
std::pair<Vec, SolveReport> drs_l1_block(std::span<const double> u, std::size_t cols,
                                         std::span<const double> b, ProjectRows&& project_rows,
                                         const SolverConfig& cfg) {
  const auto fallbacks_before = projection_diagnostics().fallback_events.load();
  const double gamma = cfg.gamma_step;
  Vec z(u.begin(), u.end());
  std::int64_t projections = 0, inner_iterations = 0;
  bool inner_failed = false;

  auto prox_g = [&](const Vec& in, Vec& out) { prox_l1_shift(in, u, gamma, out); };
  auto prox_h = [&](const Vec& in, Vec& out) {
    if (inner_failed) {
      out = in;
      return;
    }
    auto [x, rep] = dys_l2_block(in, cols, b, project_rows, gamma, cfg, z);
    projections += rep.projections;
    inner_iterations += rep.iterations;
    if (!rep.converged) inner_failed = true;
    out = std::move(x);
  };
  Vec y0(u.begin(), u.end());
  auto result = drs_solve(prox_g, prox_h, std::move(y0), cfg);
  auto& rep = result.second;
  rep.projections = projections;
  rep.inner_iterations = inner_iterations;
  if (inner_failed) rep.converged = false;
  rep.fallback_events = projection_diagnostics().fallback_events.load() - fallbacks_before;
  rep.conservation_residual = column_residual(result.first, cols, b);
  return result;
}

inline void check_scalar_feasible(std::size_t n, double m, double M, double b) {
  if (n == 0) throw std::invalid_argument("scalar limiter: empty data");
  if (m > M) throw std::invalid_argument("scalar limiter: m > M");
  const double nd = static_cast<double>(n);
  const double slack = 1e-14 * (std::abs(b) + nd * (std::abs(m) + std::abs(M)));
  if (b < nd * m - slack || b > nd * M + slack)
    throw InfeasibleProblem("scalar limiter: target sum outside [N m, N M]");
}

}  // namespace detail

/// l2 limiter for a scalar: min |x - u|^2 subject to sum x = b, x in [m, M].
/// Z starts at u; the returned iterate is inside the box.
inline std::pair<Vec, SolveReport> dys_l2_scalar(std::span<const double> u, double m, double M,
                                                 double b, const SolverConfig& cfg,
                                                 double alpha = 1.0) {
  detail::check_scalar_feasible(u.size(), m, M, b);
  Vec z(u.begin(), u.end());
  const double bb[1] = {b};
  auto box = [&](const Vec& in, Vec& out) { prox_box(in, m, M, out); };
  return detail::dys_l2_block(u, 1, bb, box, alpha, cfg, z);
}

/// l1 limiter for a scalar by DRS with an inner DYS for the prox of the
/// constraint block.
inline std::pair<Vec, SolveReport> drs_l1_scalar(std::span<const double> u, double m, double M,
                                                 double b, const SolverConfig& cfg) {
  detail::check_scalar_feasible(u.size(), m, M, b);
  const double bb[1] = {b};
  auto box = [&](const Vec& in, Vec& out) { prox_box(in, m, M, out); };
  return detail::drs_l1_block(u, 1, bb, box, cfg);
}

/// Throws InfeasibleProblem unless some field with these column totals lies
/// in G^eps row-wise. By convexity that holds exactly when the mean state
/// b / N is admissible.
template <int Dim>
void check_euler_feasible(std::size_t n_cells, const ConservationTarget<Dim>& target,
                          const AdmissibleSet& g) {
  ConservedState<Dim> mean;
  for (int c = 0; c < Dim + 2; ++c) {
    if (!std::isfinite(target.totals[c]))
      throw InfeasibleProblem("limiter: non-finite conservation target");
    mean.q[c] = target.totals[c] / static_cast<double>(n_cells);
  }
  if (!in_admissible_set(mean, g))
    throw InfeasibleProblem("limiter: mean state of the conservation targets is not admissible");
}

template <int Dim>
std::pair<CellAverageField<Dim>, SolveReport> dys_l2_euler(const CellAverageField<Dim>& U,
                                                           const ConservationTarget<Dim>& target,
                                                           const AdmissibleSet& g, double alpha,
                                                           const SolverConfig& cfg) {
  check_euler_feasible(U.n_cells(), target, g);
  Vec z = U.storage();
  auto rows = [&](const Vec& in, Vec& out) { prox_invariant_set<Dim>(in, g, out); };
  auto [x, rep] = detail::dys_l2_block(U.values(), Dim + 2, target.totals, rows, alpha, cfg, z);
  return {CellAverageField<Dim>(U.n_cells(), U.h(), std::move(x), U.domain_box()), std::move(rep)};
}

template <int Dim>
std::pair<CellAverageField<Dim>, SolveReport> drs_l1_euler(const CellAverageField<Dim>& U,
                                                           const ConservationTarget<Dim>& target,
                                                           const AdmissibleSet& g,
                                                           const SolverConfig& cfg) {
  check_euler_feasible(U.n_cells(), target, g);
  auto rows = [&](const Vec& in, Vec& out) { prox_invariant_set<Dim>(in, g, out); };
  auto [x, rep] = detail::drs_l1_block(U.values(), Dim + 2, target.totals, rows, cfg);
  return {CellAverageField<Dim>(U.n_cells(), U.h(), std::move(x), U.domain_box()), std::move(rep)};
}

/// Picks the grid step with the fewest total DRS iterations over all samples
/// among those that converge on every sample; ties go to the larger step.
inline double tune_gamma(std::span<const std::function<SolveReport(double)>> samples,
                         std::span<const double> grid) {
  if (samples.empty() || grid.empty())
    throw std::invalid_argument("tune_gamma: samples and grid must be nonempty");
  double best_gamma = std::numeric_limits<double>::quiet_NaN();
  std::int64_t best_total = std::numeric_limits<std::int64_t>::max();
  for (double gamma : grid) {
    std::int64_t total = 0;
    bool ok = true;
    for (const auto& solve : samples) {
      try {
        const SolveReport r = solve(gamma);
        if (!r.converged) {
          ok = false;
          break;
        }
        total += r.iterations;
      } catch (const SolverFailure&) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    if (total < best_total || (total == best_total && gamma > best_gamma)) {
      best_total = total;
      best_gamma = gamma;
    }
  }
  if (std::isnan(best_gamma)) throw SolverFailure("tune_gamma: no grid value converged on all samples");
  return best_gamma;
}

}  // namespace idp
