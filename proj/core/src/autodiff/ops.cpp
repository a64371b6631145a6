#include "kgsumm/autodiff/ops.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "kgsumm/errors.hpp"

namespace kgsumm::ad {
namespace {

void same_tape(Var a, Var b, const char* op) {
  if (&a.tape() != &b.tape()) throw Error(std::string(op) + ": operands on different tapes");
}

Shape broadcast_shape(Shape a, Shape b, const char* op) {
  auto dim = [&](Index x, Index y) {
    if (x == y) return x;
    if (x == 1) return y;
    if (y == 1) return x;
    throw DimensionError(std::string(op) + ": cannot broadcast " + a.str() + " with " +
                         b.str());
  };
  return {dim(a.rows, b.rows), dim(a.cols, b.cols)};
}

Matrix expand(const Matrix& m, Shape s) {
  if (m.rows() == s.rows && m.cols() == s.cols) return m;
  return m.replicate(s.rows / m.rows(), s.cols / m.cols());
}

// Sums a broadcast gradient back down to shape `s`.
Matrix reduce_to(const Matrix& g, Shape s) {
  if (g.rows() == s.rows && g.cols() == s.cols) return g;
  Matrix r = g;
  if (s.rows == 1 && r.rows() != 1) r = r.colwise().sum().eval();
  if (s.cols == 1 && r.cols() != 1) r = r.rowwise().sum().eval();
  return r;
}

template <typename Fwd, typename Deriv>
Var unary(Var a, Fwd fwd, Deriv deriv_from_out) {
  Tensor out(a.value().mat().unaryExpr(fwd).eval());
  const int ia = a.id();
  return a.tape().record(std::move(out), {ia},
                         [ia, deriv_from_out](const Matrix& g, const Tensor& y, Tape& t) {
                           t.accumulate(ia, g.cwiseProduct(deriv_from_out(y.mat(), t.value(ia).mat())));
                         });
}

// Normalises each row of `x` in place; entries with mask 0 are excluded.
void row_softmax_inplace(Matrix& x, const Matrix* mask, bool take_log) {
  constexpr Scalar kNegInf = -std::numeric_limits<Scalar>::infinity();
  for (Index r = 0; r < x.rows(); ++r) {
    Scalar mx = kNegInf;
    for (Index c = 0; c < x.cols(); ++c) {
      if (mask == nullptr || (*mask)(r, c) != 0.0) mx = std::max(mx, x(r, c));
    }
    if (mx == kNegInf) {
      // Whole row excluded.
      x.row(r).setConstant(take_log ? kNegInf : 0.0);
      continue;
    }
    Scalar z = 0.0;
    for (Index c = 0; c < x.cols(); ++c) {
      if (mask == nullptr || (*mask)(r, c) != 0.0) z += std::exp(x(r, c) - mx);
    }
    const Scalar log_z = mx + std::log(z);
    for (Index c = 0; c < x.cols(); ++c) {
      const bool keep = mask == nullptr || (*mask)(r, c) != 0.0;
      if (take_log) {
        x(r, c) = keep ? x(r, c) - log_z : kNegInf;
      } else {
        x(r, c) = keep ? std::exp(x(r, c) - log_z) : 0.0;
      }
    }
  }
}

// Runs `fn` on a view of `m` in which each normalisation group is one row.
template <typename Fn>
Matrix grouped(const Matrix& m, Axis axis, Fn fn) {
  switch (axis) {
    case Axis::Row: {
      Matrix x = m;
      fn(x);
      return x;
    }
    case Axis::Col: {
      Matrix x = m.transpose();
      fn(x);
      return x.transpose();
    }
    case Axis::Global: {
      Matrix x = Eigen::Map<const Matrix>(m.data(), 1, m.size());
      fn(x);
      return Eigen::Map<const Matrix>(x.data(), m.rows(), m.cols());
    }
  }
  throw ConfigError("unknown softmax axis");
}

Matrix reshape_mask(const Tensor* mask, Axis axis) {
  const Matrix& m = mask->mat();
  switch (axis) {
    case Axis::Row: return m;
    case Axis::Col: return m.transpose();
    case Axis::Global: return Eigen::Map<const Matrix>(m.data(), 1, m.size());
  }
  throw ConfigError("unknown softmax axis");
}

void check_finite(const Tensor& t, const char* op) {
  if (!t.all_finite()) throw NumericError(std::string(op) + ": non-finite input");
}

Var softmax_impl(Var a, Axis axis, const Tensor* mask, bool take_log) {
  const char* name = take_log ? "log_softmax" : "softmax";
  check_finite(a.value(), name);
  if (mask != nullptr && mask->shape() != a.shape()) {
    throw DimensionError(std::string(name) + ": mask " + mask->shape().str() +
                         " does not match input " + a.shape().str());
  }
  std::optional<Matrix> gmask;
  if (mask != nullptr) gmask = reshape_mask(mask, axis);
  const Matrix* mp = gmask ? &*gmask : nullptr;
  Tensor out(grouped(a.value().mat(), axis, [&](Matrix& x) { row_softmax_inplace(x, mp, take_log); }));
  const int ia = a.id();
  const bool has_mask = mask != nullptr;
  Tensor mask_copy = has_mask ? *mask : Tensor();
  return a.tape().record(
      std::move(out), {ia},
      [ia, axis, take_log, has_mask, mask_copy](const Matrix& g, const Tensor& y, Tape& t) {
        // Regroup gradient and output so each group is a row.
        auto to_rows = [axis](const Matrix& m) -> Matrix {
          switch (axis) {
            case Axis::Row: return m;
            case Axis::Col: return m.transpose();
            case Axis::Global: return Eigen::Map<const Matrix>(m.data(), 1, m.size());
          }
          return m;
        };
        Matrix gr = to_rows(g);
        Matrix yr = to_rows(y.mat());
        Matrix keep = has_mask ? to_rows(mask_copy.mat()) : Matrix::Ones(yr.rows(), yr.cols());
        Matrix gx(gr.rows(), gr.cols());
        for (Index r = 0; r < gr.rows(); ++r) {
          if (take_log) {
            Scalar gsum = 0.0;
            for (Index c = 0; c < gr.cols(); ++c) {
              if (keep(r, c) != 0.0) gsum += gr(r, c);
            }
            for (Index c = 0; c < gr.cols(); ++c) {
              gx(r, c) = keep(r, c) != 0.0 ? gr(r, c) - std::exp(yr(r, c)) * gsum : 0.0;
            }
          } else {
            Scalar dot = 0.0;
            for (Index c = 0; c < gr.cols(); ++c) dot += gr(r, c) * yr(r, c);
            for (Index c = 0; c < gr.cols(); ++c) gx(r, c) = yr(r, c) * (gr(r, c) - dot);
          }
        }
        switch (axis) {
          case Axis::Row: t.accumulate(ia, gx); break;
          case Axis::Col: t.accumulate(ia, gx.transpose()); break;
          case Axis::Global:
            t.accumulate(ia, Eigen::Map<const Matrix>(gx.data(), y.rows(), y.cols()));
            break;
        }
      });
}

}  // namespace

Var matmul(Var a, Var b) {
  same_tape(a, b, "matmul");
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ for " + a.shape().str() + " and " +
                         b.shape().str());
  }
  Tensor out((a.value().mat() * b.value().mat()).eval());
  const int ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {ia, ib}, [ia, ib](const Matrix& g, const Tensor&, Tape& t) {
    if (Matrix* ga = t.grad_target(ia)) ga->noalias() += g * t.value(ib).mat().transpose();
    if (Matrix* gb = t.grad_target(ib)) gb->noalias() += t.value(ia).mat().transpose() * g;
  });
}

Var matmul_nt(Var a, Var b) {
  same_tape(a, b, "matmul_nt");
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_nt: inner dimensions differ for " + a.shape().str() +
                         " and transposed " + b.shape().str());
  }
  Tensor out((a.value().mat() * b.value().mat().transpose()).eval());
  const int ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {ia, ib}, [ia, ib](const Matrix& g, const Tensor&, Tape& t) {
    if (Matrix* ga = t.grad_target(ia)) ga->noalias() += g * t.value(ib).mat();
    if (Matrix* gb = t.grad_target(ib)) gb->noalias() += g.transpose() * t.value(ia).mat();
  });
}

Var transpose(Var a) {
  Tensor out(a.value().mat().transpose().eval());
  const int ia = a.id();
  return a.tape().record(std::move(out), {ia}, [ia](const Matrix& g, const Tensor&, Tape& t) {
    t.accumulate(ia, g.transpose());
  });
}

Var add(Var a, Var b) {
  same_tape(a, b, "add");
  const Shape sa = a.shape(), sb = b.shape();
  const Shape so = broadcast_shape(sa, sb, "add");
  Tensor out((expand(a.value().mat(), so) + expand(b.value().mat(), so)).eval());
  const int ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {ia, ib}, [ia, ib, sa, sb](const Matrix& g, const Tensor&, Tape& t) {
    if (t.requires_grad(ia)) t.accumulate(ia, reduce_to(g, sa));
    if (t.requires_grad(ib)) t.accumulate(ib, reduce_to(g, sb));
  });
}

Var sub(Var a, Var b) {
  same_tape(a, b, "sub");
  const Shape sa = a.shape(), sb = b.shape();
  const Shape so = broadcast_shape(sa, sb, "sub");
  Tensor out((expand(a.value().mat(), so) - expand(b.value().mat(), so)).eval());
  const int ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {ia, ib}, [ia, ib, sa, sb](const Matrix& g, const Tensor&, Tape& t) {
    if (t.requires_grad(ia)) t.accumulate(ia, reduce_to(g, sa));
    if (t.requires_grad(ib)) t.accumulate(ib, reduce_to(-g, sb));
  });
}

Var mul(Var a, Var b) {
  same_tape(a, b, "mul");
  const Shape sa = a.shape(), sb = b.shape();
  const Shape so = broadcast_shape(sa, sb, "mul");
  Tensor out(expand(a.value().mat(), so).cwiseProduct(expand(b.value().mat(), so)));
  const int ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {ia, ib}, [ia, ib, sa, sb, so](const Matrix& g, const Tensor&, Tape& t) {
    if (t.requires_grad(ia)) {
      t.accumulate(ia, reduce_to(g.cwiseProduct(expand(t.value(ib).mat(), so)), sa));
    }
    if (t.requires_grad(ib)) {
      t.accumulate(ib, reduce_to(g.cwiseProduct(expand(t.value(ia).mat(), so)), sb));
    }
  });
}

Var minimum(Var a, Var b) {
  same_tape(a, b, "minimum");
  const Shape sa = a.shape(), sb = b.shape();
  const Shape so = broadcast_shape(sa, sb, "minimum");
  const Matrix ea = expand(a.value().mat(), so), eb = expand(b.value().mat(), so);
  Tensor out(ea.cwiseMin(eb));
  const int ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {ia, ib}, [ia, ib, sa, sb, so](const Matrix& g, const Tensor&, Tape& t) {
    const Matrix ea = expand(t.value(ia).mat(), so), eb = expand(t.value(ib).mat(), so);
    // Ties route the gradient to `a`.
    const Matrix to_a = (ea.array() <= eb.array()).cast<Scalar>().matrix();
    if (t.requires_grad(ia)) t.accumulate(ia, reduce_to(g.cwiseProduct(to_a), sa));
    if (t.requires_grad(ib)) {
      const Matrix to_b = Matrix::Ones(so.rows, so.cols) - to_a;
      t.accumulate(ib, reduce_to(g.cwiseProduct(to_b), sb));
    }
  });
}

Var scale(Var a, Scalar s) {
  Tensor out((a.value().mat() * s).eval());
  const int ia = a.id();
  return a.tape().record(std::move(out), {ia}, [ia, s](const Matrix& g, const Tensor&, Tape& t) {
    t.accumulate(ia, g * s);
  });
}

Var add_scalar(Var a, Scalar s) {
  Tensor out((a.value().mat().array() + s).matrix().eval());
  const int ia = a.id();
  return a.tape().record(std::move(out), {ia}, [ia](const Matrix& g, const Tensor&, Tape& t) {
    t.accumulate(ia, g);
  });
}

Var sigmoid(Var a) {
  return unary(
      a, [](Scalar x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); },
      [](const Matrix& y, const Matrix&) -> Matrix { return y.array() * (1.0 - y.array()); });
}

Var tanh(Var a) {
  return unary(
      a, [](Scalar x) { return std::tanh(x); },
      [](const Matrix& y, const Matrix&) -> Matrix { return 1.0 - y.array().square(); });
}

Var relu(Var a) {
  return unary(
      a, [](Scalar x) { return x > 0.0 ? x : 0.0; },
      [](const Matrix&, const Matrix& x) -> Matrix { return (x.array() > 0.0).cast<Scalar>(); });
}

Var exp(Var a) {
  return unary(
      a, [](Scalar x) { return std::exp(x); },
      [](const Matrix& y, const Matrix&) -> Matrix { return y; });
}

Var log(Var a) {
  const Matrix& x = a.value().mat();
  for (Index i = 0; i < x.size(); ++i) {
    if (!(x.data()[i] > 0.0)) {
      throw NumericError("log: non-positive input " + std::to_string(x.data()[i]));
    }
  }
  return unary(
      a, [](Scalar v) { return std::log(v); },
      [](const Matrix&, const Matrix& x) -> Matrix { return x.cwiseInverse(); });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no operands");
  const Index rows = parts.front().rows();
  Index cols = 0;
  std::vector<int> ids;
  std::vector<Index> offsets;
  for (const Var& p : parts) {
    same_tape(parts.front(), p, "concat_cols");
    if (p.rows() != rows) {
      throw DimensionError("concat_cols: row count differs for " + parts.front().shape().str() +
                           " and " + p.shape().str());
    }
    ids.push_back(p.id());
    offsets.push_back(cols);
    cols += p.cols();
  }
  Tensor out(rows, cols);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    out.mat().middleCols(offsets[i], parts[i].cols()) = parts[i].value().mat();
  }
  return parts.front().tape().record(std::move(out), ids, [ids, offsets](const Matrix& g, const Tensor&, Tape& t) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (!t.requires_grad(ids[i])) continue;
      t.accumulate(ids[i], g.middleCols(offsets[i], t.value(ids[i]).cols()));
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no operands");
  const Index cols = parts.front().cols();
  Index rows = 0;
  std::vector<int> ids;
  std::vector<Index> offsets;
  for (const Var& p : parts) {
    same_tape(parts.front(), p, "concat_rows");
    if (p.cols() != cols) {
      throw DimensionError("concat_rows: column count differs for " +
                           parts.front().shape().str() + " and " + p.shape().str());
    }
    ids.push_back(p.id());
    offsets.push_back(rows);
    rows += p.rows();
  }
  Tensor out(rows, cols);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    out.mat().middleRows(offsets[i], parts[i].rows()) = parts[i].value().mat();
  }
  return parts.front().tape().record(std::move(out), ids, [ids, offsets](const Matrix& g, const Tensor&, Tape& t) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (!t.requires_grad(ids[i])) continue;
      t.accumulate(ids[i], g.middleRows(offsets[i], t.value(ids[i]).rows()));
    }
  });
}

Var slice_cols(Var a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw DimensionError("slice_cols: [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") out of range for " + a.shape().str());
  }
  Tensor out(a.value().mat().middleCols(start, count).eval());
  const int ia = a.id();
  return a.tape().record(std::move(out), {ia}, [ia, start](const Matrix& g, const Tensor&, Tape& t) {
    t.accumulate_block(ia, 0, start, g);
  });
}

Var slice_rows(Var a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.rows()) {
    throw DimensionError("slice_rows: [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") out of range for " + a.shape().str());
  }
  Tensor out(a.value().mat().middleRows(start, count).eval());
  const int ia = a.id();
  return a.tape().record(std::move(out), {ia}, [ia, start](const Matrix& g, const Tensor&, Tape& t) {
    t.accumulate_block(ia, start, 0, g);
  });
}

Var pick(Var a, Index row, Index col) {
  if (row < 0 || row >= a.rows() || col < 0 || col >= a.cols()) {
    throw DimensionError("pick: (" + std::to_string(row) + "," + std::to_string(col) +
                         ") out of range for " + a.shape().str());
  }
  Tensor out = Tensor::full(1, 1, a.value()(row, col));
  const int ia = a.id();
  return a.tape().record(std::move(out), {ia}, [ia, row, col](const Matrix& g, const Tensor&, Tape& t) {
    t.accumulate_block(ia, row, col, g);
  });
}

Var gather_rows(Var table, std::span<const Index> rows) {
  const Matrix& m = table.value().mat();
  std::vector<Index> idx(rows.begin(), rows.end());
  Tensor out(static_cast<Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= m.rows()) {
      throw DimensionError("gather_rows: row " + std::to_string(idx[i]) + " out of range for " +
                           table.shape().str());
    }
    out.mat().row(static_cast<Index>(i)) = m.row(idx[i]);
  }
  const int it = table.id();
  return table.tape().record(std::move(out), {it}, [it, idx](const Matrix& g, const Tensor&, Tape& t) {
    t.accumulate_rows(it, idx, g);
  });
}

Var sum(Var a) {
  Tensor out = Tensor::full(1, 1, a.value().mat().sum());
  const int ia = a.id();
  const Shape sa = a.shape();
  return a.tape().record(std::move(out), {ia}, [ia, sa](const Matrix& g, const Tensor&, Tape& t) {
    t.accumulate(ia, Matrix::Constant(sa.rows, sa.cols, g(0, 0)));
  });
}

Var mean(Var a) {
  if (a.value().empty()) throw DimensionError("mean: empty input");
  return scale(sum(a), 1.0 / static_cast<Scalar>(a.value().size()));
}

Var mean_rows(Var a) {
  if (a.rows() == 0) throw DimensionError("mean_rows: no rows");
  const Scalar n = static_cast<Scalar>(a.rows());
  Tensor out((a.value().mat().colwise().sum() / n).eval());
  const int ia = a.id();
  const Index rows = a.rows();
  return a.tape().record(std::move(out), {ia}, [ia, rows, n](const Matrix& g, const Tensor&, Tape& t) {
    t.accumulate(ia, (g / n).replicate(rows, 1));
  });
}

Var softmax(Var a, Axis axis, const Tensor* mask) { return softmax_impl(a, axis, mask, false); }

Var log_softmax(Var a, Axis axis, const Tensor* mask) {
  return softmax_impl(a, axis, mask, true);
}

Var cross_entropy(const Tensor& target, Var log_probs) {
  if (target.shape() != log_probs.shape()) {
    throw DimensionError("cross_entropy: target " + target.shape().str() +
                         " vs log-probabilities " + log_probs.shape().str());
  }
  const Matrix& lp = log_probs.value().mat();
  Scalar loss = 0.0;
  for (Index i = 0; i < lp.size(); ++i) {
    const Scalar ti = target.mat().data()[i];
    if (ti > 0.0) loss -= ti * lp.data()[i];
  }
  const int il = log_probs.id();
  Matrix neg_target = -target.mat().cwiseMax(0.0);
  return log_probs.tape().record(Tensor::full(1, 1, loss), {il},
                                 [il, neg_target](const Matrix& g, const Tensor&, Tape& t) {
                                   t.accumulate(il, neg_target * g(0, 0));
                                 });
}

Var scatter_add_cols(Var a, std::span<const Index> idx, Index width) {
  if (a.rows() != 1 || a.cols() != static_cast<Index>(idx.size())) {
    throw DimensionError("scatter_add_cols: expected 1x" + std::to_string(idx.size()) +
                         " input, got " + a.shape().str());
  }
  std::vector<Index> index(idx.begin(), idx.end());
  Tensor out(1, width);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= width) {
      throw DimensionError("scatter_add_cols: index " + std::to_string(index[i]) +
                           " out of range for width " + std::to_string(width));
    }
    out(0, index[i]) += a.value()(0, static_cast<Index>(i));
  }
  const int ia = a.id();
  return a.tape().record(std::move(out), {ia}, [ia, index](const Matrix& g, const Tensor&, Tape& t) {
    Matrix ga(1, static_cast<Index>(index.size()));
    for (std::size_t i = 0; i < index.size(); ++i) ga(0, static_cast<Index>(i)) = g(0, index[i]);
    t.accumulate(ia, ga);
  });
}

Var pad_cols(Var a, Index width) {
  if (a.rows() != 1 || width < a.cols()) {
    throw DimensionError("pad_cols: cannot pad " + a.shape().str() + " to width " +
                         std::to_string(width));
  }
  Tensor out(1, width);
  out.mat().leftCols(a.cols()) = a.value().mat();
  const int ia = a.id();
  const Index n = a.cols();
  return a.tape().record(std::move(out), {ia}, [ia, n](const Matrix& g, const Tensor&, Tape& t) {
    t.accumulate(ia, g.leftCols(n));
  });
}

}  // namespace kgsumm::ad
