#pragma once

#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace kgsumm::ad {

using Scalar = double;
using Index = Eigen::Index;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Shape {
  Index rows = 0;
  Index cols = 0;

  Index size() const { return rows * cols; }
  std::string str() const;
  friend bool operator==(const Shape&, const Shape&) = default;
};

// Dense row-major 2-D tensor. Vectors are 1xn (row) or nx1 (column).
class Tensor {
 public:
  Tensor() = default;
  Tensor(Index rows, Index cols);
  explicit Tensor(Matrix m) : m_(std::move(m)) {}

  static Tensor zeros(Index rows, Index cols) { return Tensor(rows, cols); }
  static Tensor full(Index rows, Index cols, Scalar value);
  static Tensor from_rows(std::initializer_list<std::initializer_list<Scalar>> rows);
  static Tensor row_vector(std::span<const Scalar> values);
  static Tensor column_vector(std::span<const Scalar> values);

  Shape shape() const { return {m_.rows(), m_.cols()}; }
  Index rows() const { return m_.rows(); }
  Index cols() const { return m_.cols(); }
  Index size() const { return m_.size(); }
  bool empty() const { return m_.size() == 0; }

  Scalar& operator()(Index r, Index c) { return m_(r, c); }
  Scalar operator()(Index r, Index c) const { return m_(r, c); }

  std::span<Scalar> flat() { return {m_.data(), static_cast<std::size_t>(m_.size())}; }
  std::span<const Scalar> flat() const {
    return {m_.data(), static_cast<std::size_t>(m_.size())};
  }
  std::vector<Scalar> to_vector() const { return {flat().begin(), flat().end()}; }

  Matrix& mat() { return m_; }
  const Matrix& mat() const { return m_; }

  Scalar sum() const { return m_.sum(); }
  Scalar max_abs_diff(const Tensor& other) const;
  bool all_finite() const { return m_.allFinite(); }

 private:
  Matrix m_;
};

}  // namespace kgsumm::ad
