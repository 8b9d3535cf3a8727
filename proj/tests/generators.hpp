#pragma once

// Random instance builders shared by the unit tests and the acceptance run.

#include <array>
#include <cmath>
#include <random>

#include "idp/field.hpp"
#include "idp/limiter.hpp"
#include "idp/state.hpp"

namespace gen {

/// An admissible field paired with a conservative perturbation of it that
/// leaves the admissible set.
template <int Dim>
struct PerturbedPair {
  idp::CellAverageField<Dim> exact;
  idp::CellAverageField<Dim> raw;
};

/// Exact rows are admissible with a few near-vacuum cells; the perturbation
/// has zero column sums and is doubled until some row is inadmissible.
template <int Dim>
PerturbedPair<Dim> perturbed_pair(std::mt19937_64& rng, std::size_t n, const idp::AdmissibleSet& g) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> nrm(0.0, 1.0);
  idp::CellAverageField<Dim> exact(n, 1.0 / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const bool thin = u01(rng) < 0.3;
    const double rho = thin ? 0.05 + 0.1 * u01(rng) : 0.5 + 1.5 * u01(rng);
    std::array<double, Dim> vel{};
    for (auto& v : vel) v = nrm(rng);
    const double p = thin ? 0.01 + 0.05 * u01(rng) : 0.2 + u01(rng);
    exact.set_state(i, idp::from_primitive<Dim>(rho, vel, p, g.gamma_gas));
  }
  std::vector<double> d(exact.values().size());
  for (int c = 0; c < Dim + 2; ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += (d[i * (Dim + 2) + c] = 0.2 * nrm(rng));
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) d[i * (Dim + 2) + c] -= mean;
  }
  for (double scale = 1.0;; scale *= 2.0) {
    idp::CellAverageField<Dim> raw = exact;
    for (std::size_t k = 0; k < d.size(); ++k) raw.values()[k] += scale * d[k];
    if (!idp::detect_violations(raw, g).empty()) return {std::move(exact), std::move(raw)};
  }
}

}  // namespace gen
