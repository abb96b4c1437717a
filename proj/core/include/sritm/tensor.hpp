// Copyright 2026 The sritm Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sritm {

/// Dense row-major shape of rank 0..4. Image tensors are rank 4 (N, C, H, W);
/// biases are rank 1; a scalar loss is rank 0.
class Shape {
 public:
  static constexpr int kMaxRank = 4;

  Shape() = default;
  Shape(std::initializer_list<std::int64_t> dims);
  explicit Shape(std::span<const std::int64_t> dims);

  static Shape nchw(std::int64_t n, std::int64_t c, std::int64_t h,
                    std::int64_t w) {
    return Shape{n, c, h, w};
  }

  int rank() const noexcept { return rank_; }
  std::int64_t operator[](int i) const { return dims_.at(static_cast<std::size_t>(i)); }
  std::int64_t numel() const noexcept;

  // NCHW accessors; valid for rank-4 shapes only.
  std::int64_t n() const;
  std::int64_t c() const;
  std::int64_t h() const;
  std::int64_t w() const;

  std::string str() const;

  friend bool operator==(const Shape& a, const Shape& b) noexcept {
    return a.rank_ == b.rank_ && a.dims_ == b.dims_;
  }

 private:
  std::array<std::int64_t, kMaxRank> dims_{};
  int rank_ = 0;
};

template <typename T>
class Tensor;

namespace detail {

template <typename T>
struct TensorImpl;

/// One recorded operation. `inputs` keeps the operands alive; `backward`
/// receives the gradient of the op output and accumulates into operands.
template <typename T>
struct Node {
  const char* op = "";
  std::vector<std::shared_ptr<TensorImpl<T>>> inputs;
  std::function<void(std::span<const T>)> backward;
};

template <typename T>
struct TensorImpl {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;
  bool requires_grad = false;
  std::shared_ptr<Node<T>> grad_fn;

  /// Gradient buffer, zero-allocated on first access. Empty span when this
  /// tensor does not take gradients.
  std::span<T> grad_sink();
};

}  // namespace detail

/// Whether operations currently record the autodiff graph (thread-local).
bool grad_enabled() noexcept;

/// Disables graph recording for the lifetime of the guard.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// N-D array handle with optional gradient tracking. Copies share storage
/// (like a reference-counted buffer); use clone() for a deep copy.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(const Shape& shape, T fill = T{0});
  Tensor(const Shape& shape, std::vector<T> values);

  static Tensor scalar(T value) { return Tensor(Shape{}, std::vector<T>{value}); }

  bool defined() const noexcept { return impl_ != nullptr; }
  const Shape& shape() const;
  std::int64_t numel() const { return shape().numel(); }

  std::span<T> data();
  std::span<const T> data() const;

  T& at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w);
  T at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const;
  T item() const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool on);
  bool is_leaf() const;

  bool has_grad() const;
  std::span<const T> grad() const;
  void zero_grad();

  /// Deep copy of the values without graph history or gradient.
  Tensor clone() const;
  Tensor detach() const { return clone(); }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(shape());
    auto src = data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<U>(src[i]);
    return out;
  }

  bool same_storage(const Tensor& other) const noexcept { return impl_ == other.impl_; }

  // Autodiff plumbing used by the op implementations.
  const std::shared_ptr<detail::TensorImpl<T>>& impl() const noexcept { return impl_; }
  static Tensor from_impl(std::shared_ptr<detail::TensorImpl<T>> impl);

 private:
  std::shared_ptr<detail::TensorImpl<T>> impl_;
};

/// Reverse-mode sweep from a scalar loss. Every reachable tensor with
/// requires_grad receives d(loss)/d(tensor), accumulated by addition across
/// multiple uses and across repeated calls (until zero_grad()).
template <typename T>
void backward(const Tensor<T>& loss);

namespace detail {

/// Wraps freshly computed values as an op result. When grad mode is on and
/// any operand requires grad, the result records `fn` for the reverse sweep.
template <typename T>
Tensor<T> make_result(const char* op, const Shape& shape, std::vector<T> values,
                      std::initializer_list<const Tensor<T>*> operands,
                      std::function<void(std::span<const T>)> fn);

template <typename T>
Tensor<T> make_result(const char* op, const Shape& shape, std::vector<T> values,
                      const std::vector<const Tensor<T>*>& operands,
                      std::function<void(std::span<const T>)> fn);

}  // namespace detail

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace sritm
