#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace gatehub {

// Extents of a dense tensor. Rank 0 is a scalar; rank is capped at 3
// (batch x sequence x feature), which is all the model ever needs.
class Shape {
 public:
  static constexpr std::size_t kMaxRank = 3;

  Shape() = default;
  Shape(std::initializer_list<std::size_t> extents);
  explicit Shape(std::span<const std::size_t> extents);

  std::size_t rank() const { return rank_; }
  std::size_t operator[](std::size_t axis) const;
  std::size_t numel() const;

  // Last extent (1 for scalars). Every row-wise op works over this axis.
  std::size_t cols() const { return rank_ == 0 ? 1 : extents_[rank_ - 1]; }
  // Product of all leading extents.
  std::size_t rows() const { return numel() / cols(); }

  std::span<const std::size_t> extents() const { return {extents_.data(), rank_}; }
  std::string str() const;

  friend bool operator==(const Shape& a, const Shape& b) {
    return a.rank_ == b.rank_ && a.extents_ == b.extents_;
  }

 private:
  std::array<std::size_t, kMaxRank> extents_{};
  std::size_t rank_ = 0;
};

namespace detail {
struct TensorStorage {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until a gradient is accumulated
  bool requires_grad = false;
};
}  // namespace detail

// Reference-counted handle to a row-major real array. Copies share storage;
// use clone() for an independent copy. Values are always held at 64-bit
// precision.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  // Row-major matrix literal, e.g. Tensor::matrix({{1, 2}, {3, 4}}).
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows,
                       bool requires_grad = false);
  static Tensor vector(std::initializer_list<double> values, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().rank(); }
  std::size_t numel() const { return shape().numel(); }
  std::size_t rows() const { return shape().rows(); }
  std::size_t cols() const { return shape().cols(); }

  std::span<const double> data() const;
  std::span<double> mutable_data();
  double item() const;
  // Element access for rank-2 tensors (or rank 1 with row == 0).
  double at(std::size_t row, std::size_t col) const;

  bool requires_grad() const;
  void set_requires_grad(bool value);

  bool has_grad() const;
  std::span<const double> grad() const;  // empty span when absent
  std::span<double> mutable_grad();      // allocates zeros on first use
  void zero_grad();                      // drops the accumulator

  // Deep copy of values (gradient and graph history are not copied).
  Tensor clone() const;
  // Same storage contents, new extents; numel must match. Not recorded on a tape.
  Tensor reshaped(Shape shape) const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }
  const void* id() const { return impl_.get(); }

 private:
  std::shared_ptr<detail::TensorStorage> impl_;
};

bool all_finite(std::span<const double> values);

}  // namespace gatehub
