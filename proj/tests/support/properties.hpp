#pragma once

// Seeded property suites over pseudorandom sample points.

#include <cstdint>
#include <string>
#include <vector>

namespace props {

struct Result {
  std::string name;
  int samples = 0;
  int failures = 0;
  double worst = 0.0;  // largest violation measure seen
  bool ok() const { return failures == 0; }
};

Result ks_bounds(std::uint64_t seed, int n);
Result rotation_equivariance(std::uint64_t seed, int n);
Result lattice_periodicity(std::uint64_t seed, int n);
Result shell_nesting(std::uint64_t seed, int n);
Result sign_convention(std::uint64_t seed, int n);
Result radius_table_partials(std::uint64_t seed, int n);

std::vector<Result> geometry_suite(std::uint64_t seed, int n = 1000);

}  // namespace props
