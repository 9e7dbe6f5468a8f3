#include "aehcl/tensor.h"

#include <cmath>

namespace aehcl {

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Tensor::shape_string() const {
  if (rank_ == 1) return "(" + std::to_string(rows_) + ",)";
  return "(" + std::to_string(rows_) + "," + std::to_string(cols_) + ")";
}

void Tensor::require_finite(const std::string& what) const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw std::domain_error("non-finite value in " + what + " at flat index " +
                              std::to_string(i));
    }
  }
}

}  // namespace aehcl
