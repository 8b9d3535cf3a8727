#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "idp/dg/quadrature.hpp"
#include "idp/field.hpp"
#include "idp/state.hpp"

namespace idp::sim {

struct Primitive1D {
  double rho = 1.0, u = 0.0, p = 1.0;
};

struct RiemannStates {
  Primitive1D left{0.445, 0.698, 3.528};
  Primitive1D right{0.5, 0.0, 0.571};
  double gamma_gas = 1.4;

  void validate() const {
    if (!(left.rho > 0 && right.rho > 0 && left.p > 0 && right.p > 0))
      throw std::invalid_argument("RiemannStates: densities and pressures must be positive");
    if (!(gamma_gas > 1.0)) throw std::invalid_argument("RiemannStates: gamma must be > 1");
  }
};

/// Exact solution of the 1D Euler Riemann problem for an ideal gas.
class ExactRiemann {
 public:
  explicit ExactRiemann(const RiemannStates& s) : s_(s) {
    s_.validate();
    const double g = s_.gamma_gas;
    cl_ = std::sqrt(g * s_.left.p / s_.left.rho);
    cr_ = std::sqrt(g * s_.right.p / s_.right.rho);
    if (2.0 / (g - 1.0) * (cl_ + cr_) <= s_.right.u - s_.left.u)
      throw std::domain_error("ExactRiemann: the data generate vacuum");
    solve_star();
  }

  double star_pressure() const { return p_star_; }
  double star_velocity() const { return u_star_; }
  /// |f_L(p*) + f_R(p*) + u_R - u_L| at the converged star pressure.
  double residual() const { return std::abs(pressure_function(p_star_)); }

  /// Pressure function whose root is the star pressure.
  double pressure_function(double p) const {
    return side(p, s_.left, cl_).first + side(p, s_.right, cr_).first + s_.right.u - s_.left.u;
  }

  /// Self-similar solution at xi = x / t.
  Primitive1D sample(double xi) const {
    const double g = s_.gamma_gas;
    if (xi <= u_star_) {
      const Primitive1D& L = s_.left;
      if (p_star_ > L.p) {  // left shock
        const double sl = shock_speed(L, cl_, -1.0);
        if (xi <= sl) return L;
        return {star_density(L), u_star_, p_star_};
      }
      const double head = L.u - cl_;
      const double cs = cl_ * std::pow(p_star_ / L.p, (g - 1.0) / (2.0 * g));
      const double tail = u_star_ - cs;
      if (xi <= head) return L;
      if (xi >= tail) return {star_density(L), u_star_, p_star_};
      const double c = 2.0 / (g + 1.0) * (cl_ + 0.5 * (g - 1.0) * (L.u - xi));
      const double u = 2.0 / (g + 1.0) * (cl_ + 0.5 * (g - 1.0) * L.u + xi);
      const double rho = L.rho * std::pow(c / cl_, 2.0 / (g - 1.0));
      return {rho, u, L.p * std::pow(c / cl_, 2.0 * g / (g - 1.0))};
    }
    const Primitive1D& R = s_.right;
    if (p_star_ > R.p) {  // right shock
      const double sr = shock_speed(R, cr_, 1.0);
      if (xi >= sr) return R;
      return {star_density(R), u_star_, p_star_};
    }
    const double head = R.u + cr_;
    const double cs = cr_ * std::pow(p_star_ / R.p, (g - 1.0) / (2.0 * g));
    const double tail = u_star_ + cs;
    if (xi >= head) return R;
    if (xi <= tail) return {star_density(R), u_star_, p_star_};
    const double c = 2.0 / (g + 1.0) * (cr_ - 0.5 * (g - 1.0) * (R.u - xi));
    const double u = 2.0 / (g + 1.0) * (-cr_ + 0.5 * (g - 1.0) * R.u + xi);
    const double rho = R.rho * std::pow(c / cr_, 2.0 / (g - 1.0));
    return {rho, u, R.p * std::pow(c / cr_, 2.0 * g / (g - 1.0))};
  }

  /// Speeds of every wave edge (shock, contact, fan head and tail), sorted.
  std::vector<double> wave_speeds() const {
    const double g = s_.gamma_gas;
    std::vector<double> w{u_star_};
    if (p_star_ > s_.left.p) {
      w.push_back(shock_speed(s_.left, cl_, -1.0));
    } else {
      w.push_back(s_.left.u - cl_);
      w.push_back(u_star_ - cl_ * std::pow(p_star_ / s_.left.p, (g - 1.0) / (2.0 * g)));
    }
    if (p_star_ > s_.right.p) {
      w.push_back(shock_speed(s_.right, cr_, 1.0));
    } else {
      w.push_back(s_.right.u + cr_);
      w.push_back(u_star_ + cr_ * std::pow(p_star_ / s_.right.p, (g - 1.0) / (2.0 * g)));
    }
    std::sort(w.begin(), w.end());
    return w;
  }

  /// Speed of the right-facing shock; throws when the right wave is a fan.
  double right_shock_speed() const {
    if (!(p_star_ > s_.right.p)) throw std::logic_error("right wave is not a shock");
    return shock_speed(s_.right, cr_, 1.0);
  }

  const RiemannStates& states() const { return s_; }

 private:
  // Value and derivative of f_K(p).
  std::pair<double, double> side(double p, const Primitive1D& K, double cK) const {
    const double g = s_.gamma_gas;
    if (p > K.p) {
      const double A = 2.0 / ((g + 1.0) * K.rho), B = (g - 1.0) / (g + 1.0) * K.p;
      const double sq = std::sqrt(A / (p + B));
      return {(p - K.p) * sq, sq * (1.0 - 0.5 * (p - K.p) / (p + B))};
    }
    const double e = (g - 1.0) / (2.0 * g);
    return {2.0 * cK / (g - 1.0) * (std::pow(p / K.p, e) - 1.0), std::pow(p / K.p, e - 1.0) / (K.rho * cK)};
  }

  void solve_star() {
    const double g = s_.gamma_gas;
    const Primitive1D &L = s_.left, &R = s_.right;
    // Two-rarefaction guess is exact when both waves are fans and a good start otherwise.
    const double e = (g - 1.0) / (2.0 * g);
    double p = std::pow((cl_ + cr_ - 0.5 * (g - 1.0) * (R.u - L.u)) /
                            (cl_ / std::pow(L.p, e) + cr_ / std::pow(R.p, e)),
                        1.0 / e);
    p = std::max(p, 1e-14 * std::min(L.p, R.p));
    for (int it = 0; it < 200; ++it) {
      const auto [fl, dl] = side(p, L, cl_);
      const auto [fr, dr] = side(p, R, cr_);
      const double f = fl + fr + R.u - L.u;
      double next = p - f / (dl + dr);
      if (next <= 0.0) next = 0.5 * p;
      const bool done = std::abs(next - p) <= 1e-15 * (next + p);
      p = next;
      if (done) break;
    }
    p_star_ = p;
    u_star_ = 0.5 * (L.u + R.u) + 0.5 * (side(p, R, cr_).first - side(p, L, cl_).first);
  }

  double star_density(const Primitive1D& K) const {
    const double g = s_.gamma_gas;
    if (p_star_ > K.p) {
      const double r = p_star_ / K.p, q = (g - 1.0) / (g + 1.0);
      return K.rho * (r + q) / (q * r + 1.0);
    }
    return K.rho * std::pow(p_star_ / K.p, 1.0 / g);
  }

  double shock_speed(const Primitive1D& K, double cK, double dir) const {
    const double g = s_.gamma_gas;
    return K.u + dir * cK * std::sqrt((g + 1.0) / (2.0 * g) * p_star_ / K.p + (g - 1.0) / (2.0 * g));
  }

  RiemannStates s_;
  double cl_ = 0.0, cr_ = 0.0, p_star_ = 0.0, u_star_ = 0.0;
};

inline ConservedState<1> to_conserved(const Primitive1D& w, double gamma_gas) {
  return ConservedState<1>(w.rho, {w.rho * w.u}, w.p / (gamma_gas - 1.0) + 0.5 * w.rho * w.u * w.u);
}

/// Cell averages of the exact solution at time t on n uniform cells of
/// [x0, x1], interface at x_interface. Each cell is split at the wave edges
/// so the integrand is smooth on every piece.
inline CellAverageField<1> exact_riemann_averages(const ExactRiemann& rs, double t, double x0, double x1,
                                                  std::size_t n, double x_interface = 0.0) {
  if (!(t > 0.0)) throw std::invalid_argument("exact_riemann_averages: t must be > 0");
  const double h = (x1 - x0) / static_cast<double>(n);
  CellAverageField<1> f(n, h, std::array<double, 2>{x0, x1});
  const dg::Rule1D g = dg::gauss_legendre(8);
  std::vector<double> edges;
  for (double s : rs.wave_speeds()) edges.push_back(x_interface + s * t);
  const double gam = rs.states().gamma_gas;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = x0 + i * h, b = a + h;
    std::vector<double> cuts{a};
    for (double e : edges)
      if (e > a && e < b) cuts.push_back(e);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    std::array<double, 3> acc{};
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double lo = cuts[k], hi = cuts[k + 1];
      for (std::size_t q = 0; q < g.size(); ++q) {
        const double x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * g.nodes[q];
        const auto u = to_conserved(rs.sample((x - x_interface) / t), gam);
        for (int c = 0; c < 3; ++c) acc[c] += g.weights[q] * (hi - lo) * u.q[c];
      }
    }
    for (int c = 0; c < 3; ++c) f(i, c) = acc[c] / h;
  }
  return f;
}

struct LaxDataset {
  CellAverageField<1> base;
  std::vector<CellAverageField<1>> sets;
  std::size_t shock_cell = 0;
  std::size_t redraws = 0;  // perturbations that stayed admissible and were redrawn
};

struct LaxDatasetOptions {
  std::size_t n_cells = 400;
  double x0 = -5.0, x1 = 5.0, t = 1.3;
  std::size_t n_sets = 1000;
  std::size_t cells_per_side = 10;
  double amplitude = 1.0;  // multiplies the 0.1 / 0.01 / 0.1 scalings
  std::uint64_t seed = 1;
  double epsilon = 1e-13;
  RiemannStates states{};
};

/// Exact Lax averages with conservative random perturbations: the cells just
/// ahead of the right shock lose mass, momentum and energy, the cells just
/// behind it receive the same amounts. With positive amplitude, draws that
/// stay admissible are redrawn so every dataset violates G^eps.
inline LaxDataset lax_perturbation_dataset(const LaxDatasetOptions& o) {
  const ExactRiemann rs(o.states);
  LaxDataset d;
  d.base = exact_riemann_averages(rs, o.t, o.x0, o.x1, o.n_cells);
  const double xs = rs.right_shock_speed() * o.t;
  d.shock_cell = static_cast<std::size_t>(std::floor((xs - o.x0) / d.base.h()));
  const std::size_t k = o.cells_per_side;
  if (d.shock_cell < k || d.shock_cell + k + 1 > o.n_cells)
    throw std::invalid_argument("lax_perturbation_dataset: shock too close to the boundary");

  std::array<double, 3> maxabs{};
  for (std::size_t i = 0; i < o.n_cells; ++i)
    for (int c = 0; c < 3; ++c) maxabs[c] = std::max(maxabs[c], std::abs(d.base(i, c)));
  const std::array<double, 3> scale{0.1 * maxabs[0] * o.amplitude, 0.01 * maxabs[1] * o.amplitude,
                                    0.1 * maxabs[2] * o.amplitude};
  const AdmissibleSet g(o.epsilon, o.states.gamma_gas);
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> xi(1.0, 2.0);
  d.sets.reserve(o.n_sets);
  while (d.sets.size() < o.n_sets) {
    CellAverageField<1> f = d.base;
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t pre = d.shock_cell + 1 + j;  // ahead of the shock
      const std::size_t post = d.shock_cell - 1 - j;  // behind it
      for (int c = 0; c < 3; ++c) {
        const double delta = scale[c] * xi(rng);
        f(pre, c) -= delta;
        f(post, c) += delta;
      }
    }
    bool violates = false;
    for (std::size_t i = 0; i < o.n_cells && !violates; ++i) violates = !in_admissible_set(f.state(i), g);
    if (!violates && o.amplitude > 0.0) {
      ++d.redraws;
      continue;
    }
    d.sets.push_back(std::move(f));
  }
  return d;
}

}  // namespace idp::sim
