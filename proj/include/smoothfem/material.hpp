#pragma once

#include "smoothfem/core.hpp"

#include <string_view>

namespace smoothfem {

enum class PlaneMode { plane_stress, plane_strain };

// Constitutive matrix in Voigt notation (sxx, syy, sxy) = D (exx, eyy, 2exy).
struct MaterialMatrix {
  Mat3 D = Mat3::Identity();
  double E = 0.0;
  double nu = 0.0;
  PlaneMode mode = PlaneMode::plane_stress;

  // Wraps an arbitrary matrix; rejects anything that is not symmetric
  // positive definite.
  static MaterialMatrix from_matrix(const Mat3& D);
};

MaterialMatrix dmatrix(double E, double nu, PlaneMode mode = PlaneMode::plane_stress);

PlaneMode parse_plane_mode(std::string_view text);
std::string_view to_string(PlaneMode mode);

}  // namespace smoothfem
