#include "minigpt/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "minigpt/error.hpp"

namespace minigpt {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? ", " : "") << shape[i];
  os << ']';
  return os.str();
}

namespace {

void check_shape(const Shape& shape) {
  for (auto d : shape)
    if (d == 0) throw ShapeError("tensor dimensions must be >= 1, got " + shape_str(shape));
}

}  // namespace

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
  check_shape(shape);
  auto impl = std::make_shared<TensorImpl<T>>();
  impl->data.assign(shape_numel(shape), value);
  impl->shape = std::move(shape);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

template <typename T>
Tensor<T> Tensor<T>::from(Shape shape, std::vector<T> values, bool requires_grad) {
  check_shape(shape);
  if (shape_numel(shape) != values.size())
    throw ShapeError("shape " + shape_str(shape) + " does not hold " + std::to_string(values.size()) + " values");
  auto impl = std::make_shared<TensorImpl<T>>();
  impl->shape = std::move(shape);
  impl->data = std::move(values);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
  return from({1}, {value}, requires_grad);
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape()));
  return impl_->data[0];
}

template <typename T>
void Tensor<T>::set_requires_grad(bool on) {
  impl_->requires_grad = on;
  if (!on) impl_->grad.clear();
}

template <typename T>
std::span<T> Tensor<T>::ensure_grad() {
  return grad_of(*impl_);
}

template <typename T>
void Tensor<T>::zero_grad() {
  std::fill(impl_->grad.begin(), impl_->grad.end(), T(0));
}

template <typename T>
Tensor<T> Tensor<T>::clone() const {
  return from(impl_->shape, impl_->data, impl_->requires_grad);
}

IdTensor IdTensor::from(Shape shape, std::vector<std::int32_t> values) {
  if (shape_numel(shape) != values.size())
    throw ShapeError("id shape " + shape_str(shape) + " does not hold " + std::to_string(values.size()) + " ids");
  return IdTensor{std::move(shape), std::move(values)};
}

template <typename T>
std::span<T> grad_of(TensorImpl<T>& t) {
  if (t.grad.empty()) t.grad.assign(t.data.size(), T(0));
  return t.grad;
}

template <typename T>
bool Tape<T>::wants(std::initializer_list<const Tensor<T>*> inputs) const {
  if (!recording_) return false;
  return std::any_of(inputs.begin(), inputs.end(), [](const Tensor<T>* t) { return t->requires_grad(); });
}

template <typename T>
void Tape<T>::record(std::string_view op, std::initializer_list<const Tensor<T>*> inputs, const Tensor<T>& output,
                     std::function<void()> backward) {
  Entry entry{op, {}, output.impl(), std::move(backward)};
  entry.inputs.reserve(inputs.size());
  for (const auto* t : inputs) entry.inputs.push_back(t->impl());
  output.impl()->requires_grad = true;
  entries_.push_back(std::move(entry));
}

template <typename T>
void Tape<T>::backward(const Tensor<T>& loss) {
  if (loss.numel() != 1) throw ShapeError("backward() needs a scalar loss, got shape " + shape_str(loss.shape()));
  if (!loss.requires_grad()) throw std::logic_error("backward(): loss was not produced by recorded operations");
  for (auto& e : entries_) std::fill(e.output->grad.begin(), e.output->grad.end(), T(0));
  grad_of(*loss.impl())[0] = T(1);
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->output->grad.empty()) continue;
    it->backward();
  }
}

template class Tensor<float>;
template class Tensor<double>;
template class Tape<float>;
template class Tape<double>;
template std::span<float> grad_of(TensorImpl<float>&);
template std::span<double> grad_of(TensorImpl<double>&);

}  // namespace minigpt
