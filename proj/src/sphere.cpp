#include "tensorica/sphere.hpp"

#include <cmath>

#include "tensorica/error.hpp"

namespace tensorica {

namespace {
constexpr double kDegenerateNorm = 1e-300;
}

UnitVector UnitVector::from_unit(Vector v) {
  const double n = v.norm();
  if (!(std::abs(n - 1.0) <= 1e-10)) {
    throw Error(ErrorKind::InvalidArgument, "vector is not unit length");
  }
  return UnitVector(std::move(v));
}

UnitVector project_sphere(const Vector& w) {
  const double n = w.norm();
  if (!(n > kDegenerateNorm) || !std::isfinite(n)) {
    throw Error(ErrorKind::DegenerateVector, "cannot project a zero or non-finite vector");
  }
  return UnitVector(w / n);
}

}  // namespace tensorica
