#pragma once

#include <functional>
#include <string>
#include <utility>

#include "stabhom/core.hpp"

namespace stabhom {

/// A family s -> vector field on [0, 1], each member carrying the Lyapunov pair that
/// is supposed to certify it.
struct HomotopyPath {
  std::string name;
  int dim = 1;
  std::function<FieldDescription(double)> field_at;
  std::function<LyapunovPair(double)> lyap_at;
  std::pair<std::string, std::string> endpoints_label;
};

}  // namespace stabhom
