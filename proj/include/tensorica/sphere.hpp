#pragma once

#include "tensorica/datagen.hpp"

namespace tensorica {

/// Point on the unit sphere. Only constructed through project_sphere or a
/// checked conversion, so ||v|| = 1 up to rounding.
class UnitVector {
 public:
  /// Checked wrap of a vector that is already unit length (tolerance 1e-10).
  static UnitVector from_unit(Vector v);

  const Vector& vec() const noexcept { return v_; }
  int dimension() const noexcept { return static_cast<int>(v_.size()); }
  double operator[](Eigen::Index i) const { return v_[i]; }
  UnitVector operator-() const { return UnitVector(-v_); }

  friend bool operator==(const UnitVector& a, const UnitVector& b) { return a.v_ == b.v_; }

 private:
  friend UnitVector project_sphere(const Vector& w);
  explicit UnitVector(Vector v) : v_(std::move(v)) {}
  Vector v_;
};

/// Pi_1[w] = w / ||w||.
UnitVector project_sphere(const Vector& w);

}  // namespace tensorica
