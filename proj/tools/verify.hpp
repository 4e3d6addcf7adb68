#pragma once

#include <cstdint>
#include <string>

#include "cfdyn/jsonio.hpp"

namespace cfdyn {

struct VerifyOptions {
  double ode_tol = 1e-10;
  double quad_tol = 1e-10;
  std::uint64_t seed = 20240817;
};

struct VerifyReport {
  JsonValue json;
  bool all_passed = false;
};

// suite: conservation | oracle | symmetry | geometry
VerifyReport run_verify_suite(const std::string& suite,
                              const VerifyOptions& opts);

}  // namespace cfdyn
