#include "orn/tensor.hpp"

#include <cmath>
#include <sstream>

namespace orn {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : shape_(std::move(shape)), data_(numel(shape_), fill) {}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (numel(shape_) != data_.size()) {
    throw DimensionError("tensor shape " + to_string(shape_) + " does not match " +
                         std::to_string(data_.size()) + " elements");
  }
}

template <typename T>
std::size_t Tensor<T>::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " + to_string(shape_));
  }
  return shape_[axis];
}

template <typename T>
std::size_t Tensor<T>::offset(std::initializer_list<std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw DimensionError("index rank " + std::to_string(index.size()) + " does not match shape " +
                         to_string(shape_));
  }
  std::size_t off = 0;
  std::size_t axis = 0;
  for (auto i : index) {
    if (i >= shape_[axis]) {
      throw DimensionError("index " + std::to_string(i) + " out of range on axis " + std::to_string(axis) +
                           " of shape " + to_string(shape_));
    }
    off = off * shape_[axis] + i;
    ++axis;
  }
  return off;
}

template <typename T>
T& Tensor<T>::at(std::initializer_list<std::size_t> index) {
  return data_[offset(index)];
}

template <typename T>
const T& Tensor<T>::at(std::initializer_list<std::size_t> index) const {
  return data_[offset(index)];
}

template <typename T>
Tensor<T> Tensor<T>::reshaped(Shape shape) const {
  if (numel(shape) != data_.size()) {
    throw DimensionError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
  }
  return Tensor(std::move(shape), data_);
}

template <typename T>
void Tensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
bool Tensor<T>::all_finite() const {
  for (auto v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace orn
