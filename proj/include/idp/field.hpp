#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "idp/numerics.hpp"
#include "idp/state.hpp"

namespace idp {

/// N cells x (2 + Dim) cell averages on a uniform mesh. Rows are cells;
/// columns are ordered density, momenta, energy.
template <int Dim>
class CellAverageField {
 public:
  static constexpr int kComponents = Dim + 2;

  CellAverageField() = default;
  CellAverageField(std::size_t n_cells, double h,
                   std::array<double, 2 * Dim> domain_box = {})
      : n_cells_(n_cells), h_(h), box_(domain_box), data_(n_cells * kComponents, 0.0) {
    if (n_cells == 0) throw std::invalid_argument("CellAverageField: need at least one cell");
    if (!(h > 0.0)) throw std::invalid_argument("CellAverageField: mesh spacing must be > 0");
  }
  CellAverageField(std::size_t n_cells, double h, std::vector<double> data,
                   std::array<double, 2 * Dim> domain_box = {})
      : CellAverageField(n_cells, h, domain_box) {
    if (data.size() != n_cells * kComponents)
      throw std::invalid_argument("CellAverageField: data size does not match n_cells");
    data_ = std::move(data);
  }

  std::size_t n_cells() const { return n_cells_; }
  double h() const { return h_; }
  const std::array<double, 2 * Dim>& domain_box() const { return box_; }
  void set_domain_box(const std::array<double, 2 * Dim>& b) { box_ = b; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  std::span<double, kComponents> row(std::size_t i) {
    return std::span<double, kComponents>(data_.data() + i * kComponents, kComponents);
  }
  std::span<const double, kComponents> row(std::size_t i) const {
    return std::span<const double, kComponents>(data_.data() + i * kComponents, kComponents);
  }

  double& operator()(std::size_t cell, int comp) { return data_[cell * kComponents + comp]; }
  double operator()(std::size_t cell, int comp) const {
    return data_[cell * kComponents + comp];
  }

  ConservedState<Dim> state(std::size_t i) const {
    ConservedState<Dim> s;
    for (int c = 0; c < kComponents; ++c) s.q[c] = (*this)(i, c);
    return s;
  }
  void set_state(std::size_t i, const ConservedState<Dim>& s) {
    for (int c = 0; c < kComponents; ++c) (*this)(i, c) = s.q[c];
  }

  double column_sum(int comp) const {
    return pairwise_sum_strided(data_.data() + comp, n_cells_, kComponents);
  }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  /// Cells restricted to `cells`, in the given order; mesh metadata is kept.
  CellAverageField subset(std::span<const std::size_t> cells) const {
    CellAverageField out(cells.size(), h_, box_);
    for (std::size_t k = 0; k < cells.size(); ++k)
      for (int c = 0; c < kComponents; ++c) out(k, c) = (*this)(cells[k], c);
    return out;
  }

 private:
  std::size_t n_cells_ = 0;
  double h_ = 1.0;
  std::array<double, 2 * Dim> box_{};
  std::vector<double> data_;
};

/// Column totals b = A U with A the all-ones row (uniform mesh).
template <int Dim>
struct ConservationTarget {
  std::array<double, Dim + 2> totals{};

  static ConservationTarget from_field(const CellAverageField<Dim>& f) {
    ConservationTarget t;
    for (int c = 0; c < Dim + 2; ++c) t.totals[c] = f.column_sum(c);
    return t;
  }
};

/// Largest per-column |sum(X) - b|.
template <int Dim>
double conservation_residual(const CellAverageField<Dim>& f,
                             const ConservationTarget<Dim>& t) {
  double r = 0.0;
  for (int c = 0; c < Dim + 2; ++c) r = std::max(r, std::abs(f.column_sum(c) - t.totals[c]));
  return r;
}

}  // namespace idp
