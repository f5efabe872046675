#pragma once

#include <cstdint>
#include <ostream>

namespace heliopack::cli {

struct ValidateOptions {
  int solver_instances = 20;
  int shading_fixtures = 10;
  int rays = 20000;
  double latitude = 25.0;
  std::uint64_t seed = 1;
};

/// Runs the oracle property checks, printing one PASS/FAIL line per suite.
/// Returns true when every suite passes.
bool run_validation(const ValidateOptions& options, std::ostream& out);

}  // namespace heliopack::cli
