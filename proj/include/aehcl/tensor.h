#ifndef AEHCL_TENSOR_H_
#define AEHCL_TENSOR_H_

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace aehcl {

// Dense row-major matrix or vector of doubles. A vector has rank 1 and is
// stored as a single column.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), rank_(2), data_(rows * cols, fill) {}

  static Tensor Vector(std::size_t length, double fill = 0.0) {
    Tensor t(length, 1, fill);
    t.rank_ = 1;
    return t;
  }
  static Tensor FromVector(std::vector<double> values) {
    Tensor t;
    t.rows_ = values.size();
    t.cols_ = 1;
    t.rank_ = 1;
    t.data_ = std::move(values);
    return t;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  int rank() const { return rank_; }
  bool same_shape(const Tensor& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && rank_ == other.rank_;
  }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  void fill(double value) { std::fill(data_.begin(), data_.end(), value); }
  bool all_finite() const;
  std::string shape_string() const;

  // Throws std::domain_error naming `what` if any entry is NaN or infinite.
  void require_finite(const std::string& what) const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  int rank_ = 2;
  std::vector<double> data_;
};

}  // namespace aehcl

#endif  // AEHCL_TENSOR_H_
