#include "kgsumm/autodiff/tensor.hpp"

#include "kgsumm/errors.hpp"

namespace kgsumm::ad {

std::string Shape::str() const {
  return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
}

Tensor::Tensor(Index rows, Index cols) : m_(Matrix::Zero(rows, cols)) {}

Tensor Tensor::full(Index rows, Index cols, Scalar value) {
  return Tensor(Matrix::Constant(rows, cols, value));
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<Scalar>> rows) {
  const Index r = static_cast<Index>(rows.size());
  const Index c = r == 0 ? 0 : static_cast<Index>(rows.begin()->size());
  Tensor t(r, c);
  Index i = 0;
  for (const auto& row : rows) {
    if (static_cast<Index>(row.size()) != c) {
      throw DimensionError("ragged initializer: row " + std::to_string(i) + " has " +
                           std::to_string(row.size()) + " values, expected " +
                           std::to_string(c));
    }
    Index j = 0;
    for (Scalar v : row) t(i, j++) = v;
    ++i;
  }
  return t;
}

Tensor Tensor::row_vector(std::span<const Scalar> values) {
  Tensor t(1, static_cast<Index>(values.size()));
  std::copy(values.begin(), values.end(), t.flat().begin());
  return t;
}

Tensor Tensor::column_vector(std::span<const Scalar> values) {
  Tensor t(static_cast<Index>(values.size()), 1);
  std::copy(values.begin(), values.end(), t.flat().begin());
  return t;
}

Scalar Tensor::max_abs_diff(const Tensor& other) const {
  if (shape() != other.shape()) {
    throw DimensionError("max_abs_diff: " + shape().str() + " vs " + other.shape().str());
  }
  if (empty()) return 0.0;
  return (m_ - other.m_).cwiseAbs().maxCoeff();
}

}  // namespace kgsumm::ad
