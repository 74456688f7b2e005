#pragma once

// Tensors and the define-by-run tape for reverse-mode differentiation.
//
// A Tensor is a shared handle: copies alias the same storage, which is how a
// tied embedding/head weight is represented. Every op in ops.hpp appends one
// entry to the Tape it is given, and Tape::backward replays the entries in
// exact reverse order.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace minigpt {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

template <typename T>
struct TensorImpl {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until a gradient first reaches this tensor
  bool requires_grad = false;
};

template <typename T>
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<T> values, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  bool defined() const noexcept { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t dim(std::size_t i) const { return impl_->shape.at(i); }
  std::size_t numel() const { return impl_->data.size(); }

  std::span<T> data() { return impl_->data; }
  std::span<const T> data() const { return impl_->data; }
  T item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool on);
  bool has_grad() const { return !impl_->grad.empty(); }
  std::span<T> grad() { return impl_->grad; }
  std::span<const T> grad() const { return impl_->grad; }
  /// Allocates (zero-filled) gradient storage if absent; no-op otherwise.
  std::span<T> ensure_grad();
  /// Sets an existing gradient to zero; leaves unallocated gradients alone.
  void zero_grad();

  /// Deep copy of data; the copy has no gradient and no graph history.
  Tensor clone() const;

  bool same_storage(const Tensor& other) const noexcept { return impl_ == other.impl_; }
  const std::shared_ptr<TensorImpl<T>>& impl() const noexcept { return impl_; }

 private:
  explicit Tensor(std::shared_ptr<TensorImpl<T>> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<TensorImpl<T>> impl_;
};

/// Integer tensor of token ids. Never differentiable.
struct IdTensor {
  Shape shape;
  std::vector<std::int32_t> data;

  static IdTensor from(Shape shape, std::vector<std::int32_t> values);
  std::size_t numel() const { return data.size(); }
};

template <typename T>
class Tape {
 public:
  struct Entry {
    std::string_view op;
    std::vector<std::shared_ptr<TensorImpl<T>>> inputs;
    std::shared_ptr<TensorImpl<T>> output;
    std::function<void()> backward;
  };

  explicit Tape(bool recording = true) : recording_(recording) {}

  /// A tape that records nothing; ops run forward only.
  static Tape inference() { return Tape(false); }

  bool recording() const noexcept { return recording_; }

  /// True when an op over these inputs must be recorded.
  bool wants(std::initializer_list<const Tensor<T>*> inputs) const;

  void record(std::string_view op, std::initializer_list<const Tensor<T>*> inputs, const Tensor<T>& output,
              std::function<void()> backward);

  /// Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse, adding into
  /// the gradients of every requires_grad tensor. Intermediate gradients are
  /// reset first, so the sweep can be repeated after zeroing leaf gradients.
  void backward(const Tensor<T>& loss);

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  void clear() { entries_.clear(); }

 private:
  bool recording_;
  std::vector<Entry> entries_;
};

/// Gradient buffer of `t`, allocated on first use.
template <typename T>
std::span<T> grad_of(TensorImpl<T>& t);

}  // namespace minigpt
