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

#include "sritm/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "sritm/error.hpp"
#include "sritm/runtime.hpp"

namespace sritm {

// ---------------------------------------------------------------- Shape

Shape::Shape(std::initializer_list<std::int64_t> dims)
    : Shape(std::span<const std::int64_t>(dims.begin(), dims.size())) {}

Shape::Shape(std::span<const std::int64_t> dims) {
  if (dims.size() > kMaxRank) {
    throw ShapeError("rank " + std::to_string(dims.size()) + " exceeds 4");
  }
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] < 0) throw ShapeError("negative dimension in shape");
    dims_[i] = dims[i];
  }
  rank_ = static_cast<int>(dims.size());
}

std::int64_t Shape::numel() const noexcept {
  std::int64_t n = 1;
  for (int i = 0; i < rank_; ++i) n *= dims_[static_cast<std::size_t>(i)];
  return n;
}

namespace {
void require_rank4(const Shape& s) {
  if (s.rank() != 4) throw ShapeError("expected NCHW tensor, got shape " + s.str());
}
}  // namespace

std::int64_t Shape::n() const { require_rank4(*this); return dims_[0]; }
std::int64_t Shape::c() const { require_rank4(*this); return dims_[1]; }
std::int64_t Shape::h() const { require_rank4(*this); return dims_[2]; }
std::int64_t Shape::w() const { require_rank4(*this); return dims_[3]; }

std::string Shape::str() const {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < rank_; ++i) {
    if (i) os << ", ";
    os << dims_[static_cast<std::size_t>(i)];
  }
  os << ')';
  return os.str();
}

// ---------------------------------------------------------------- grad mode

namespace {
thread_local bool t_grad_enabled = true;
}  // namespace

bool grad_enabled() noexcept { return t_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

// ---------------------------------------------------------------- impl

namespace detail {

template <typename T>
std::span<T> TensorImpl<T>::grad_sink() {
  if (!requires_grad) return {};
  if (grad.empty()) grad.assign(data.size(), T{0});
  return grad;
}

}  // namespace detail

// ---------------------------------------------------------------- Tensor

template <typename T>
Tensor<T>::Tensor(const Shape& shape, T fill)
    : impl_(std::make_shared<detail::TensorImpl<T>>()) {
  impl_->shape = shape;
  impl_->data.assign(static_cast<std::size_t>(shape.numel()), fill);
}

template <typename T>
Tensor<T>::Tensor(const Shape& shape, std::vector<T> values)
    : impl_(std::make_shared<detail::TensorImpl<T>>()) {
  if (static_cast<std::int64_t>(values.size()) != shape.numel()) {
    throw ShapeError("value count " + std::to_string(values.size()) +
                     " does not match shape " + shape.str());
  }
  impl_->shape = shape;
  impl_->data = std::move(values);
}

template <typename T>
Tensor<T> Tensor<T>::from_impl(std::shared_ptr<detail::TensorImpl<T>> impl) {
  Tensor t;
  t.impl_ = std::move(impl);
  return t;
}

namespace {
template <typename Impl>
Impl& deref(const std::shared_ptr<Impl>& p) {
  if (!p) throw Error("use of an undefined tensor");
  return *p;
}
}  // namespace

template <typename T>
const Shape& Tensor<T>::shape() const { return deref(impl_).shape; }

template <typename T>
std::span<T> Tensor<T>::data() { return deref(impl_).data; }

template <typename T>
std::span<const T> Tensor<T>::data() const { return deref(impl_).data; }

template <typename T>
T& Tensor<T>::at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) {
  const Shape& s = shape();
  return impl_->data[static_cast<std::size_t>(((n * s.c() + c) * s.h() + h) * s.w() + w)];
}

template <typename T>
T Tensor<T>::at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const {
  const Shape& s = shape();
  return impl_->data[static_cast<std::size_t>(((n * s.c() + c) * s.h() + h) * s.w() + w)];
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) throw ShapeError("item() on non-scalar shape " + shape().str());
  return impl_->data[0];
}

template <typename T>
bool Tensor<T>::requires_grad() const { return deref(impl_).requires_grad; }

template <typename T>
Tensor<T>& Tensor<T>::set_requires_grad(bool on) {
  deref(impl_).requires_grad = on;
  if (!on) impl_->grad.clear();
  return *this;
}

template <typename T>
bool Tensor<T>::is_leaf() const { return deref(impl_).grad_fn == nullptr; }

template <typename T>
bool Tensor<T>::has_grad() const { return !deref(impl_).grad.empty(); }

template <typename T>
std::span<const T> Tensor<T>::grad() const { return deref(impl_).grad; }

template <typename T>
void Tensor<T>::zero_grad() { deref(impl_).grad.clear(); }

template <typename T>
Tensor<T> Tensor<T>::clone() const {
  return Tensor(shape(), std::vector<T>(data().begin(), data().end()));
}

// ---------------------------------------------------------------- graph

namespace detail {

template <typename T>
Tensor<T> make_result(const char* op, const Shape& shape, std::vector<T> values,
                      const std::vector<const Tensor<T>*>& operands,
                      std::function<void(std::span<const T>)> fn) {
  if (check_finite_enabled()) {
    for (const T v : values) {
      if (!std::isfinite(v)) {
        throw NumericError(std::string("non-finite value produced by ") + op);
      }
    }
  }
  auto impl = std::make_shared<TensorImpl<T>>();
  impl->shape = shape;
  impl->data = std::move(values);
  if (grad_enabled()) {
    bool any = false;
    for (const Tensor<T>* t : operands) any = any || t->requires_grad();
    if (any) {
      auto node = std::make_shared<Node<T>>();
      node->op = op;
      for (const Tensor<T>* t : operands) {
        if (t->requires_grad()) node->inputs.push_back(t->impl());
      }
      node->backward = std::move(fn);
      impl->requires_grad = true;
      impl->grad_fn = std::move(node);
    }
  }
  return Tensor<T>::from_impl(std::move(impl));
}

template <typename T>
Tensor<T> make_result(const char* op, const Shape& shape, std::vector<T> values,
                      std::initializer_list<const Tensor<T>*> operands,
                      std::function<void(std::span<const T>)> fn) {
  return make_result<T>(op, shape, std::move(values),
                        std::vector<const Tensor<T>*>(operands), std::move(fn));
}

}  // namespace detail

template <typename T>
void backward(const Tensor<T>& loss) {
  if (loss.numel() != 1) {
    throw ShapeError("backward() needs a scalar loss, got shape " + loss.shape().str());
  }
  if (!loss.requires_grad()) return;

  using Impl = detail::TensorImpl<T>;
  // Iterative post-order DFS; gray nodes on the stack detect cycles.
  enum class Mark { kGray, kBlack };
  std::unordered_map<const Impl*, Mark> marks;
  std::vector<Impl*> order;
  std::vector<std::pair<Impl*, std::size_t>> stack;
  stack.emplace_back(loss.impl().get(), 0);
  marks[loss.impl().get()] = Mark::kGray;
  while (!stack.empty()) {
    auto& [impl, next] = stack.back();
    const auto* node = impl->grad_fn.get();
    if (node && next < node->inputs.size()) {
      Impl* child = node->inputs[next++].get();
      auto it = marks.find(child);
      if (it == marks.end()) {
        marks[child] = Mark::kGray;
        stack.emplace_back(child, 0);
      } else if (it->second == Mark::kGray) {
        throw Error("cycle detected in the autodiff graph");
      }
      continue;
    }
    marks[impl] = Mark::kBlack;
    order.push_back(impl);
    stack.pop_back();
  }

  loss.impl()->grad.assign(1, T{1});
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Impl* impl = *it;
    if (!impl->grad_fn || impl->grad.empty()) continue;
    impl->grad_fn->backward(impl->grad);
    // Interior gradients are not observable after the sweep.
    if (impl != loss.impl().get()) {
      impl->grad.clear();
      impl->grad.shrink_to_fit();
    }
  }
}

template class Tensor<float>;
template class Tensor<double>;
template struct detail::TensorImpl<float>;
template struct detail::TensorImpl<double>;
template void backward<float>(const Tensor<float>&);
template void backward<double>(const Tensor<double>&);
template Tensor<float> detail::make_result<float>(
    const char*, const Shape&, std::vector<float>, std::initializer_list<const Tensor<float>*>,
    std::function<void(std::span<const float>)>);
template Tensor<double> detail::make_result<double>(
    const char*, const Shape&, std::vector<double>, std::initializer_list<const Tensor<double>*>,
    std::function<void(std::span<const double>)>);
template Tensor<float> detail::make_result<float>(
    const char*, const Shape&, std::vector<float>, const std::vector<const Tensor<float>*>&,
    std::function<void(std::span<const float>)>);
template Tensor<double> detail::make_result<double>(
    const char*, const Shape&, std::vector<double>, const std::vector<const Tensor<double>*>&,
    std::function<void(std::span<const double>)>);

}  // namespace sritm
