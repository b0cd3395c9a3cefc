#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <stdexcept>
#include <string>
#include <string_view>

namespace smoothfem {

using Index = Eigen::Index;

template <class Scalar>
using Vec2T = Eigen::Matrix<Scalar, 2, 1>;
template <class Scalar>
using Vec3T = Eigen::Matrix<Scalar, 3, 1>;
template <class Scalar>
using Mat3T = Eigen::Matrix<Scalar, 3, 3>;

using Vec2 = Vec2T<double>;
using Vec3 = Vec3T<double>;
using Mat3 = Mat3T<double>;
using Points = Eigen::Matrix2Xd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using RowSparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

// Every failure carries a short machine-readable code ("mesh", "config", ...)
// that the CLI prints as an `error[code]:` prefix.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  [[nodiscard]] const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

struct MeshError : Error {
  explicit MeshError(const std::string& what) : Error("mesh", what) {}
};
struct GeometryError : Error {
  explicit GeometryError(const std::string& what) : Error("geometry", what) {}
};
struct MaterialError : Error {
  explicit MaterialError(const std::string& what) : Error("material", what) {}
};
struct SolverError : Error {
  explicit SolverError(const std::string& what) : Error("solver", what) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};
struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error("parse", what) {}
};
struct MethodError : Error {
  explicit MethodError(const std::string& what) : Error("method", what) {}
};

// Axis-aligned rectangle [x0, x1] x [y0, y1].
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 1.0;
  double y1 = 1.0;

  [[nodiscard]] double width() const { return x1 - x0; }
  [[nodiscard]] double height() const { return y1 - y0; }
  [[nodiscard]] double area() const { return width() * height(); }
};

}  // namespace smoothfem
