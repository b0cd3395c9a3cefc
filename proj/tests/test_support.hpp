#pragma once

#include "smoothfem/mesh.hpp"
#include "smoothfem/subdivision.hpp"

#include <memory>
#include <random>

namespace smoothfem::test_support {

// Triangles (v_k, mid_k, c) and (mid_k, v_k+1, c) of every element, with c
// the element reference point. Every auxiliary subdivision of the mesh is a
// union of these pieces.
inline SubdivisionPtr common_refinement(const Mesh& mesh) {
  auto sub = std::make_shared<Subdivision>();
  sub->kind = SubdivisionKind::elementwise;
  const int nc = mesh.corners_per_element();
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    const Eigen::Matrix2Xd corners = mesh.element_corners(e);
    const Vec2 c = element_reference_point(corners);
    for (int k = 0; k < nc; ++k) {
      const Vec2 a = corners.col(k), b = corners.col((k + 1) % nc);
      const Vec2 m = 0.5 * (a + b);
      Eigen::Matrix2Xd t1(2, 3), t2(2, 3);
      t1 << a, m, c;
      t2 << m, b, c;
      for (const auto& t : {t1, t2}) {
        sub->cells.push_back(t);
        sub->parents.push_back({e, -1, mesh.element_edge(e, k), -1, k});
      }
    }
  }
  sub->areas.resize(sub->size());
  for (Index i = 0; i < sub->size(); ++i) {
    const auto& t = sub->cells[i];
    sub->areas(i) = 0.5 * ((t(0, 1) - t(0, 0)) * (t(1, 2) - t(1, 0)) - (t(0, 2) - t(0, 0)) * (t(1, 1) - t(1, 0)));
  }
  return sub;
}

inline Eigen::Matrix3Xd random_field(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::Matrix3Xd f(3, n);
  for (Index j = 0; j < n; ++j)
    for (int i = 0; i < 3; ++i) f(i, j) = dist(rng);
  return f;
}

}  // namespace smoothfem::test_support
