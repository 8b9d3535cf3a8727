#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "idp/dg/quadrature.hpp"

namespace idp::dg {

enum class BasisKind { ModalPk, NodalQ3GaussLobatto, ModalPk1D };

inline const char* to_string(BasisKind k) {
  switch (k) {
    case BasisKind::ModalPk: return "modal_Pk";
    case BasisKind::NodalQ3GaussLobatto: return "nodal_Q3_GaussLobatto";
    case BasisKind::ModalPk1D: return "modal_Pk_1d";
  }
  return "?";
}

/// Dense row-major matrix of basis values at a point set.
struct PointTable {
  std::size_t n_points = 0;
  std::size_t n_basis = 0;
  std::vector<double> values;  // n_points x n_basis
  double operator()(std::size_t q, std::size_t j) const { return values[q * n_basis + j]; }
};

/// Reference-element data on [-1,1]^d. Every measure is the averaging
/// measure, so volume weights sum to 1 and so do the weights on each face.
///
/// Face order in 2D: 0 = left (xi = -1), 1 = right, 2 = bottom (eta = -1),
/// 3 = top. Face points are ordered by increasing tangential coordinate so
/// matching faces of neighbouring cells line up. In 1D the two faces are the
/// endpoints.
struct ReferenceBasis {
  BasisKind kind = BasisKind::ModalPk;
  int dim = 2;
  int degree = 2;
  std::size_t n_basis = 0;

  std::vector<std::array<double, 2>> vol_points;
  std::vector<double> vol_weights;
  PointTable vol;                  // phi_j(q)
  std::array<PointTable, 2> grad;  // d phi_j / d xi, d phi_j / d eta at q

  std::vector<double> face_weights;  // per face point, shared by all faces
  std::array<PointTable, 4> face;    // phi_j at points of each face
  std::array<std::vector<double>, 4> face_tangent;  // tangential reference coordinate

  std::vector<double> mass;          // diagonal mass under the averaging measure
  std::vector<double> mean_weights;  // cell average = sum_j mean_weights[j] c_j
  std::vector<double> one;           // coefficients of the constant 1

  PointTable check;  // point values inspected by the scaling limiter

  int n_faces() const { return dim == 1 ? 2 : 4; }
  std::size_t n_face_points() const { return face_weights.size(); }

  /// Max |Gram - diag(mass)| over the volume rule; 0 for an orthonormal basis.
  double gram_defect() const {
    double worst = 0.0;
    for (std::size_t a = 0; a < n_basis; ++a)
      for (std::size_t b = 0; b < n_basis; ++b) {
        double s = 0.0;
        for (std::size_t q = 0; q < vol_weights.size(); ++q) s += vol_weights[q] * vol(q, a) * vol(q, b);
        worst = std::max(worst, std::abs(s - (a == b ? mass[a] : 0.0)));
      }
    return worst;
  }
};

namespace detail {

inline void stack_tables(PointTable& dst, const PointTable& src) {
  dst.n_basis = src.n_basis;
  dst.values.insert(dst.values.end(), src.values.begin(), src.values.end());
  dst.n_points += src.n_points;
}

}  // namespace detail

/// Orthonormal Legendre products L_i(xi) L_j(eta), i + j <= k, with
/// (k+1)^2 tensor Gauss points and k+1 Gauss points per face.
inline ReferenceBasis make_modal_pk(int k) {
  if (k < 0 || k > 6) throw std::invalid_argument("make_modal_pk: degree must be in [0, 6]");
  ReferenceBasis b;
  b.kind = BasisKind::ModalPk;
  b.dim = 2;
  b.degree = k;
  std::vector<std::array<int, 2>> modes;
  for (int total = 0; total <= k; ++total)
    for (int i = total; i >= 0; --i) modes.push_back({i, total - i});
  b.n_basis = modes.size();
  const Rule1D g = gauss_legendre(k + 1);

  auto phi = [&](std::size_t j, double x, double y) {
    return orthonormal_legendre(modes[j][0], x) * orthonormal_legendre(modes[j][1], y);
  };
  auto table = [&](const std::vector<std::array<double, 2>>& pts) {
    PointTable t;
    t.n_points = pts.size();
    t.n_basis = b.n_basis;
    for (const auto& p : pts)
      for (std::size_t j = 0; j < b.n_basis; ++j) t.values.push_back(phi(j, p[0], p[1]));
    return t;
  };

  for (std::size_t a = 0; a < g.size(); ++a)
    for (std::size_t c = 0; c < g.size(); ++c) {
      b.vol_points.push_back({g.nodes[c], g.nodes[a]});
      b.vol_weights.push_back(g.weights[c] * g.weights[a]);
    }
  b.vol = table(b.vol_points);
  for (int d = 0; d < 2; ++d) {
    PointTable& t = b.grad[d];
    t.n_points = b.vol_points.size();
    t.n_basis = b.n_basis;
    for (const auto& p : b.vol_points)
      for (std::size_t j = 0; j < b.n_basis; ++j) {
        const auto [i0, i1] = modes[j];
        t.values.push_back(d == 0 ? orthonormal_legendre_derivative(i0, p[0]) * orthonormal_legendre(i1, p[1])
                                  : orthonormal_legendre(i0, p[0]) * orthonormal_legendre_derivative(i1, p[1]));
      }
  }

  b.face_weights = g.weights;
  for (int f = 0; f < 4; ++f) {
    std::vector<std::array<double, 2>> pts;
    for (double s : g.nodes) {
      if (f < 2)
        pts.push_back({f == 0 ? -1.0 : 1.0, s});
      else
        pts.push_back({s, f == 2 ? -1.0 : 1.0});
    }
    b.face[f] = table(pts);
    b.face_tangent[f] = g.nodes;
  }

  b.mass.assign(b.n_basis, 1.0);
  b.mean_weights.assign(b.n_basis, 0.0);
  b.mean_weights[0] = 1.0;
  b.one.assign(b.n_basis, 0.0);
  b.one[0] = 1.0;

  b.check = b.vol;
  for (int f = 0; f < 4; ++f) detail::stack_tables(b.check, b.face[f]);
  if (b.gram_defect() > 1e-12) throw std::logic_error("make_modal_pk: basis is not orthonormal");
  return b;
}

/// Lagrange basis on the 4x4 Gauss-Lobatto nodes, collocated quadrature and
/// lumped mass (the Q3 spectral element).
inline ReferenceBasis make_nodal_q3() {
  ReferenceBasis b;
  b.kind = BasisKind::NodalQ3GaussLobatto;
  b.dim = 2;
  b.degree = 3;
  const Rule1D r = gauss_lobatto4();
  const std::size_t n = r.size();
  b.n_basis = n * n;

  // Derivative matrix D(a, c) = l_c'(x_a).
  std::vector<double> D(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t c = 0; c < n; ++c) {
      double s = 0.0;
      for (std::size_t m = 0; m < n; ++m) {
        if (m == c) continue;
        double prod = 1.0 / (r.nodes[c] - r.nodes[m]);
        for (std::size_t l = 0; l < n; ++l)
          if (l != c && l != m) prod *= (r.nodes[a] - r.nodes[l]) / (r.nodes[c] - r.nodes[l]);
        s += prod;
      }
      D[a * n + c] = s;
    }

  // Node j = row * n + col, xi = nodes[col], eta = nodes[row].
  for (std::size_t row = 0; row < n; ++row)
    for (std::size_t col = 0; col < n; ++col) {
      b.vol_points.push_back({r.nodes[col], r.nodes[row]});
      b.vol_weights.push_back(r.weights[col] * r.weights[row]);
    }
  b.vol.n_points = b.n_basis;
  b.vol.n_basis = b.n_basis;
  b.vol.values.assign(b.n_basis * b.n_basis, 0.0);
  for (std::size_t j = 0; j < b.n_basis; ++j) b.vol.values[j * b.n_basis + j] = 1.0;
  for (int d = 0; d < 2; ++d) {
    PointTable& t = b.grad[d];
    t.n_points = b.n_basis;
    t.n_basis = b.n_basis;
    t.values.assign(b.n_basis * b.n_basis, 0.0);
    for (std::size_t row = 0; row < n; ++row)
      for (std::size_t col = 0; col < n; ++col) {
        const std::size_t q = row * n + col;
        for (std::size_t m = 0; m < n; ++m) {
          if (d == 0)
            t.values[q * b.n_basis + row * n + m] = D[col * n + m];
          else
            t.values[q * b.n_basis + m * n + col] = D[row * n + m];
        }
      }
  }

  b.face_weights = r.weights;
  for (int f = 0; f < 4; ++f) {
    PointTable& t = b.face[f];
    t.n_points = n;
    t.n_basis = b.n_basis;
    t.values.assign(n * b.n_basis, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      std::size_t node = 0;
      switch (f) {
        case 0: node = s * n; break;
        case 1: node = s * n + (n - 1); break;
        case 2: node = s; break;
        case 3: node = (n - 1) * n + s; break;
      }
      t.values[s * b.n_basis + node] = 1.0;
    }
    b.face_tangent[f] = r.nodes;
  }

  b.mass = b.vol_weights;
  b.mean_weights = b.vol_weights;
  b.one.assign(b.n_basis, 1.0);
  b.check = b.vol;  // the Gauss-Lobatto nodes already contain the face points
  return b;
}

/// Orthonormal Legendre modes on [-1,1] with k+1 Gauss points.
inline ReferenceBasis make_modal_pk_1d(int k) {
  if (k < 0 || k > 8) throw std::invalid_argument("make_modal_pk_1d: degree must be in [0, 8]");
  ReferenceBasis b;
  b.kind = BasisKind::ModalPk1D;
  b.dim = 1;
  b.degree = k;
  b.n_basis = static_cast<std::size_t>(k + 1);
  const Rule1D g = gauss_legendre(k + 1);
  b.vol.n_points = g.size();
  b.vol.n_basis = b.n_basis;
  b.grad[0].n_points = g.size();
  b.grad[0].n_basis = b.n_basis;
  for (std::size_t q = 0; q < g.size(); ++q) {
    b.vol_points.push_back({g.nodes[q], 0.0});
    b.vol_weights.push_back(g.weights[q]);
    for (int j = 0; j <= k; ++j) {
      b.vol.values.push_back(orthonormal_legendre(j, g.nodes[q]));
      b.grad[0].values.push_back(orthonormal_legendre_derivative(j, g.nodes[q]));
    }
  }
  b.face_weights = {1.0};
  for (int f = 0; f < 2; ++f) {
    PointTable& t = b.face[f];
    t.n_points = 1;
    t.n_basis = b.n_basis;
    for (int j = 0; j <= k; ++j) t.values.push_back(orthonormal_legendre(j, f == 0 ? -1.0 : 1.0));
    b.face_tangent[f] = {0.0};
  }
  b.mass.assign(b.n_basis, 1.0);
  b.mean_weights.assign(b.n_basis, 0.0);
  b.mean_weights[0] = 1.0;
  b.one.assign(b.n_basis, 0.0);
  b.one[0] = 1.0;
  b.check = b.vol;
  detail::stack_tables(b.check, b.face[0]);
  detail::stack_tables(b.check, b.face[1]);
  if (b.gram_defect() > 1e-12) throw std::logic_error("make_modal_pk_1d: basis is not orthonormal");
  return b;
}

inline ReferenceBasis make_basis(BasisKind kind, int degree) {
  switch (kind) {
    case BasisKind::ModalPk: return make_modal_pk(degree);
    case BasisKind::NodalQ3GaussLobatto:
      if (degree != 3) throw std::invalid_argument("nodal Gauss-Lobatto basis is Q3 only");
      return make_nodal_q3();
    case BasisKind::ModalPk1D: return make_modal_pk_1d(degree);
  }
  throw std::invalid_argument("make_basis: unknown kind");
}

}  // namespace idp::dg
