#include "smoothfem/material.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace smoothfem {

MaterialMatrix MaterialMatrix::from_matrix(const Mat3& D) {
  const double scale = D.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || !D.allFinite())
    throw MaterialError("constitutive matrix must be finite and nonzero");
  if ((D - D.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw MaterialError("constitutive matrix is not symmetric");
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(D, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0)
    throw MaterialError("constitutive matrix is not positive definite (min eigenvalue " +
                        std::to_string(eig.eigenvalues().minCoeff()) + ")");
  MaterialMatrix m;
  m.D = D;
  return m;
}

MaterialMatrix dmatrix(double E, double nu, PlaneMode mode) {
  if (!(E > 0.0)) throw MaterialError("Young's modulus must be positive, got " + std::to_string(E));
  if (!(nu >= 0.0 && nu < 0.5))
    throw MaterialError("Poisson's ratio must lie in [0, 0.5), got " + std::to_string(nu));

  Mat3 D;
  if (mode == PlaneMode::plane_stress) {
    const double c = E / (1.0 - nu * nu);
    D << c, c * nu, 0.0,
         c * nu, c, 0.0,
         0.0, 0.0, c * (1.0 - nu) / 2.0;
  } else {
    const double c = E / ((1.0 + nu) * (1.0 - 2.0 * nu));
    D << c * (1.0 - nu), c * nu, 0.0,
         c * nu, c * (1.0 - nu), 0.0,
         0.0, 0.0, c * (1.0 - 2.0 * nu) / 2.0;
  }
  MaterialMatrix m = MaterialMatrix::from_matrix(D);
  m.E = E;
  m.nu = nu;
  m.mode = mode;
  return m;
}

PlaneMode parse_plane_mode(std::string_view text) {
  if (text == "plane_stress") return PlaneMode::plane_stress;
  if (text == "plane_strain") return PlaneMode::plane_strain;
  throw ConfigError("mode must be plane_stress or plane_strain, got '" + std::string(text) + "'");
}

std::string_view to_string(PlaneMode mode) {
  return mode == PlaneMode::plane_stress ? "plane_stress" : "plane_strain";
}

}  // namespace smoothfem
