#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "idp/field.hpp"
#include "idp/numerics.hpp"
#include "idp/projection.hpp"

// Proximal operators act on row-major blocks of `rows x cols` reals. Scalar
// problems use cols = 1; Euler fields use cols = Dim + 2 and apply the
// column-wise operators per conserved component.

namespace idp {

/// Parameters shared by the closed-form prox operators.
struct ProxContext {
  double gamma_step = 1.0;
  double alpha_fid = 1.0;
  std::optional<std::pair<double, double>> bounds;

  void validate() const {
    if (!(gamma_step > 0.0)) throw std::invalid_argument("ProxContext: gamma_step must be > 0");
    if (!(alpha_fid > 0.0)) throw std::invalid_argument("ProxContext: alpha_fid must be > 0");
    if (bounds && bounds->first > bounds->second)
      throw std::invalid_argument("ProxContext: lower bound exceeds upper bound");
  }
};

/// Projection onto {sum of each column = b[c]}: a uniform shift per column.
inline void prox_conservation(std::span<const double> x, std::size_t cols,
                              std::span<const double> b, std::span<double> out) {
  if (cols == 0 || x.size() % cols != 0 || b.size() != cols || out.size() != x.size())
    throw std::invalid_argument("prox_conservation: inconsistent sizes");
  const std::size_t rows = x.size() / cols;
  for (std::size_t c = 0; c < cols; ++c) {
    const double shift = (b[c] - pairwise_sum_strided(x.data() + c, rows, cols)) /
                         static_cast<double>(rows);
    for (std::size_t i = 0; i < rows; ++i) out[i * cols + c] = x[i * cols + c] + shift;
  }
}

inline std::vector<double> prox_conservation(std::span<const double> x, double b) {
  std::vector<double> out(x.size());
  const double bb[1] = {b};
  prox_conservation(x, 1, bb, out);
  return out;
}

/// prox of gamma * [ (1/(2 alpha)) |z - ref|^2 + indicator(conservation) ]:
/// alpha/(gamma+alpha) P(x) + gamma/(gamma+alpha) P(ref). When ref already
/// has the target sums, P(ref) = ref.
inline void prox_quadratic_affine(std::span<const double> x, std::size_t cols,
                                  std::span<const double> b, std::span<const double> ref,
                                  const ProxContext& ctx, std::span<double> out) {
  ctx.validate();
  if (ref.size() != x.size()) throw std::invalid_argument("prox_quadratic_affine: ref size");
  std::vector<double> px(x.size()), pr(x.size());
  prox_conservation(x, cols, b, px);
  prox_conservation(ref, cols, b, pr);
  const double wx = ctx.alpha_fid / (ctx.gamma_step + ctx.alpha_fid);
  const double wr = ctx.gamma_step / (ctx.gamma_step + ctx.alpha_fid);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = wx * px[i] + wr * pr[i];
}

inline std::vector<double> prox_quadratic_affine(std::span<const double> x, const ProxContext& ctx,
                                                 std::span<const double> ref, double b) {
  std::vector<double> out(x.size());
  const double bb[1] = {b};
  prox_quadratic_affine(x, 1, bb, ref, ctx, out);
  return out;
}

inline void prox_box(std::span<const double> x, double m, double M, std::span<double> out) {
  if (m > M) throw std::invalid_argument("prox_box: m > M");
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::min(std::max(x[i], m), M);
}

inline std::vector<double> prox_box(std::span<const double> x, double m, double M) {
  std::vector<double> out(x.size());
  prox_box(x, m, M, out);
  return out;
}

/// u + S_gamma(x - u), component-wise.
inline void prox_l1_shift(std::span<const double> x, std::span<const double> u, double gamma,
                          std::span<double> out) {
  if (u.size() != x.size()) throw std::invalid_argument("prox_l1_shift: size mismatch");
  if (gamma < 0.0) throw std::invalid_argument("prox_l1_shift: gamma must be >= 0");
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = u[i] + shrinkage(x[i] - u[i], gamma);
}

inline std::vector<double> prox_l1_shift(std::span<const double> x, std::span<const double> u,
                                         double gamma) {
  std::vector<double> out(x.size());
  prox_l1_shift(x, u, gamma, out);
  return out;
}

/// clip(u + S_gamma(x - u), m, M). u outside [m, M] is accepted as is.
inline std::vector<double> prox_l1_box(std::span<const double> x, std::span<const double> u,
                                       double m, double M, double gamma) {
  if (m > M) throw std::invalid_argument("prox_l1_box: m > M");
  std::vector<double> out = prox_l1_shift(x, u, gamma);
  prox_box(out, m, M, out);
  return out;
}

/// Row-wise projection of a flat Euler block onto G^eps.
template <int Dim>
void prox_invariant_set(std::span<const double> x, const AdmissibleSet& g, std::span<double> out) {
  constexpr std::size_t cols = Dim + 2;
  if (x.size() % cols != 0 || out.size() != x.size())
    throw std::invalid_argument("prox_invariant_set: inconsistent sizes");
  const std::size_t rows = x.size() / cols;
  for (std::size_t i = 0; i < rows; ++i) {
    ConservedState<Dim> s;
    for (std::size_t c = 0; c < cols; ++c) s.q[c] = x[i * cols + c];
    const ConservedState<Dim> p = project(s, g);
    for (std::size_t c = 0; c < cols; ++c) out[i * cols + c] = p.q[c];
  }
}

template <int Dim>
CellAverageField<Dim> prox_invariant_set(const CellAverageField<Dim>& f, const AdmissibleSet& g) {
  CellAverageField<Dim> out = f;
  prox_invariant_set<Dim>(f.values(), g, out.values());
  return out;
}

}  // namespace idp
