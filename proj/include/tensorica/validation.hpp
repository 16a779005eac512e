#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tensorica/datagen.hpp"

namespace tensorica {

/// Outcome of one structural or numerical property check.
struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

PropertyResult check_sphere_normalization(std::uint64_t seed);
PropertyResult check_rotation_identity(std::uint64_t seed);
PropertyResult check_ratio_identity(std::uint64_t seed);
PropertyResult check_projection_idempotence(std::uint64_t seed);
PropertyResult check_haar_orthogonality(std::uint64_t seed);
PropertyResult check_determinism(std::uint64_t seed);
PropertyResult check_phase_boundary();

PropertyResult check_gronwall_audit(std::int64_t n_instances, std::uint64_t seed);
PropertyResult check_psi2_normal(std::int64_t n, std::uint64_t seed);
PropertyResult check_spacing(std::uint64_t seed);
PropertyResult check_moment_identity(const SourceDistribution& dist, std::uint64_t seed);

/// The structural invariants: normalization, rotation and ratio identities,
/// idempotence, orthogonality, determinism and the phase boundary.
std::vector<PropertyResult> structural_suite(std::uint64_t seed);

/// structural_suite followed by the Gronwall, psi_2, spacing and moment checks.
std::vector<PropertyResult> run_validation_suite(std::uint64_t seed);

}  // namespace tensorica
