#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace idp {

/// Conserved variables of one cell: density, Dim momentum components, total
/// energy, stored contiguously in that order.
template <int Dim>
struct ConservedState {
  static_assert(Dim == 1 || Dim == 2, "only 1D and 2D states are supported");
  static constexpr int kComponents = Dim + 2;

  std::array<double, Dim + 2> q{};

  ConservedState() = default;
  explicit ConservedState(const std::array<double, Dim + 2>& values) : q(values) {}
  ConservedState(double rho, const std::array<double, Dim>& momentum, double energy) {
    q[0] = rho;
    for (int i = 0; i < Dim; ++i) q[1 + i] = momentum[i];
    q[Dim + 1] = energy;
  }

  double rho() const { return q[0]; }
  double momentum(int i) const { return q[1 + i]; }
  double energy() const { return q[Dim + 1]; }
  double& rho() { return q[0]; }
  double& momentum(int i) { return q[1 + i]; }
  double& energy() { return q[Dim + 1]; }

  double momentum_sq() const {
    double s = 0.0;
    for (int i = 0; i < Dim; ++i) s += q[1 + i] * q[1 + i];
    return s;
  }

  bool finite() const {
    for (double v : q)
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const ConservedState&, const ConservedState&) = default;
};

using State1 = ConservedState<1>;
using State2 = ConservedState<2>;

/// The numerical invariant domain G^eps = {rho >= eps, rho e >= eps}.
struct AdmissibleSet {
  double epsilon = 1e-13;
  double gamma_gas = 1.4;

  AdmissibleSet() = default;
  AdmissibleSet(double eps, double gamma = 1.4) : epsilon(eps), gamma_gas(gamma) {
    if (!(eps >= 0.0) || !std::isfinite(eps))
      throw std::invalid_argument("AdmissibleSet: epsilon must be finite and >= 0");
    if (!(gamma > 1.0)) throw std::invalid_argument("AdmissibleSet: gamma_gas must be > 1");
  }
};

/// rho e = E - |m|^2 / (2 rho).
template <int Dim>
double internal_energy(const ConservedState<Dim>& s) {
  if (s.rho() == 0.0) throw std::domain_error("internal_energy: zero density");
  return s.energy() - s.momentum_sq() / (2.0 * s.rho());
}

/// Exact membership test. Uses 2 rho E - |m|^2 >= 2 rho eps after rho >= eps
/// so no division happens at the boundary.
template <int Dim>
bool in_admissible_set(const ConservedState<Dim>& s, const AdmissibleSet& g) {
  const double rho = s.rho();
  if (!(rho >= g.epsilon) || !(rho > 0.0)) return false;
  return 2.0 * rho * s.energy() - s.momentum_sq() >= 2.0 * rho * g.epsilon;
}

/// Signed distance-like margin min(rho - eps, rho e - eps); negative outside.
template <int Dim>
double admissibility_margin(const ConservedState<Dim>& s, const AdmissibleSet& g) {
  if (!(s.rho() > 0.0)) return s.rho() - g.epsilon;
  return std::min(s.rho() - g.epsilon, internal_energy(s) - g.epsilon);
}

template <int Dim>
double pressure(const ConservedState<Dim>& s, const AdmissibleSet& g) {
  if (!(s.rho() > 0.0)) throw std::domain_error("pressure: non-positive density");
  return (g.gamma_gas - 1.0) * internal_energy(s);
}

template <int Dim>
double sound_speed(const ConservedState<Dim>& s, const AdmissibleSet& g) {
  const double p = pressure(s, g);
  return std::sqrt(g.gamma_gas * std::max(p, 0.0) / s.rho());
}

/// Builds a conserved state from density, velocity and pressure.
template <int Dim>
ConservedState<Dim> from_primitive(double rho, const std::array<double, Dim>& vel,
                                   double p, double gamma_gas) {
  ConservedState<Dim> s;
  s.rho() = rho;
  double ke = 0.0;
  for (int i = 0; i < Dim; ++i) {
    s.momentum(i) = rho * vel[i];
    ke += vel[i] * vel[i];
  }
  s.energy() = p / (gamma_gas - 1.0) + 0.5 * rho * ke;
  return s;
}

}  // namespace idp
