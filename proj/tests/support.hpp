#pragma once

#include <cmath>
#include <string>

#include "sensnet/io.hpp"
#include "sensnet/types.hpp"

#ifndef SENSNET_FIXTURE_DIR
#define SENSNET_FIXTURE_DIR "fixtures"
#endif

namespace sensnet::test {

inline std::string fixture(const std::string& name) {
  return std::string(SENSNET_FIXTURE_DIR) + "/" + name;
}

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }
inline double max_abs_diff(const Matrix& a, const Matrix& b) { return max_abs(a - b); }

}  // namespace sensnet::test
