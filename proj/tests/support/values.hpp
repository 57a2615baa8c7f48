#pragma once

#include <vector>

#include "gatehub/tensor.hpp"

namespace gatehub::testing {

// Tensor contents as a comparable vector.
inline std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

}  // namespace gatehub::testing
