#pragma once

#include <functional>
#include <stdexcept>
#include <string>

#include "forensicross/simnet.hpp"

namespace fxtest {

template <typename T>
forensicross::Digest to_digest(const T& raw) {
  forensicross::Digest d;
  std::copy(raw.begin(), raw.end(), d.bytes.begin());
  return d;
}

inline std::string scenario_path(const std::string& name) { return std::string(FX_SCENARIO_DIR) + "/" + name; }

inline forensicross::Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const forensicross::Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected an Error");
}

}  // namespace fxtest
