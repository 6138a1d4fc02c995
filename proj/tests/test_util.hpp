#pragma once

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "surpdec/error.hpp"

namespace testutil {

// Error code raised by f, or Internal when it returns normally.
template <class F>
surpdec::ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const surpdec::Error& e) {
    return e.code();
  }
  return surpdec::ErrorCode::Internal;
}

inline std::string source_path(const std::string& rel) { return std::string(SURPDEC_SOURCE_DIR) + "/" + rel; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace testutil
