#include "gridflow/flow/tensor.hpp"

#include <cmath>

namespace gridflow::flow {

bool all_finite(const Tensor& t) {
  for (const float v : t.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace gridflow::flow
