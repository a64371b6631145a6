#pragma once

#include <span>
#include <vector>

#include "kgsumm/autodiff/tape.hpp"

// Differentiable primitives. Every op records its result on the tape of its
// first operand; operands must share a tape.
//
// Broadcasting (add, sub, mul, minimum) is 2-D only: each dimension must match
// or be 1 on one side.
namespace kgsumm::ad {

enum class Axis {
  Row,     // normalise within each row
  Col,     // normalise within each column
  Global,  // normalise over all entries
};

Var matmul(Var a, Var b);
// a * b^T without materialising the transpose.
Var matmul_nt(Var a, Var b);
Var transpose(Var a);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var minimum(Var a, Var b);
Var scale(Var a, Scalar s);
Var add_scalar(Var a, Scalar s);

Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
Var exp(Var a);
// Throws NumericError on a non-positive entry.
Var log(Var a);

Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_cols(Var a, Index start, Index count);
Var slice_rows(Var a, Index start, Index count);
Var pick(Var a, Index row, Index col);
Var gather_rows(Var table, std::span<const Index> rows);

Var sum(Var a);
Var mean(Var a);
// Column-wise mean over rows: (n x d) -> (1 x d).
Var mean_rows(Var a);

// `mask`, when given, has the shape of `a` with 1 = keep, 0 = excluded.
// Excluded entries get probability 0 (log-probability -inf) and no gradient.
Var softmax(Var a, Axis axis, const Tensor* mask = nullptr);
Var log_softmax(Var a, Axis axis, const Tensor* mask = nullptr);

// -sum(target * log_probs) over entries with target > 0.
Var cross_entropy(const Tensor& target, Var log_probs);

// (1 x m) -> (1 x width), out[idx[i]] += a[i].
Var scatter_add_cols(Var a, std::span<const Index> idx, Index width);
// Right-pads a row vector with zeros up to `width` columns.
Var pad_cols(Var a, Index width);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }

}  // namespace kgsumm::ad
