#include "kgsumm/encoder/gru.hpp"

#include <cmath>
#include <algorithm>
#include <memory>
#include <vector>

#include "kgsumm/errors.hpp"

namespace kgsumm::encoder {

using ad::Matrix;

GruCell GruCell::create(ad::ParameterStore& store, const std::string& prefix, Index input_dim,
                        Index hidden_dim, std::mt19937_64& rng) {
  GruCell c;
  c.input_dim = input_dim;
  c.hidden_dim = hidden_dim;
  const double limit = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  c.w_input = store.add_uniform(prefix + ".w_input", 3 * hidden_dim, input_dim, limit, rng);
  c.w_hidden = store.add_uniform(prefix + ".w_hidden", 3 * hidden_dim, hidden_dim, limit, rng);
  c.b_input = store.add_uniform(prefix + ".b_input", 1, 3 * hidden_dim, limit, rng);
  c.b_hidden = store.add_uniform(prefix + ".b_hidden", 1, 3 * hidden_dim, limit, rng);
  return c;
}

Var GruCell::input_gates(ad::Binder& bind, Var inputs) const {
  if (inputs.cols() != input_dim) {
    throw DimensionError("GRU input has " + std::to_string(inputs.cols()) +
                         " columns, cell expects " + std::to_string(input_dim));
  }
  return ad::add(ad::matmul_nt(inputs, bind(w_input)), bind(b_input));
}

Var GruCell::step(ad::Binder& bind, Var gx, Var h) const {
  const Index H = hidden_dim;
  Var gh = ad::add(ad::matmul_nt(h, bind(w_hidden)), bind(b_hidden));
  Var rz = ad::sigmoid(ad::add(ad::slice_cols(gx, 0, 2 * H), ad::slice_cols(gh, 0, 2 * H)));
  Var r = ad::slice_cols(rz, 0, H);
  Var z = ad::slice_cols(rz, H, H);
  Var n = ad::tanh(ad::add(ad::slice_cols(gx, 2 * H, H), ad::mul(r, ad::slice_cols(gh, 2 * H, H))));
  // (1 - z) * n + z * h == n + z * (h - n)
  return ad::add(n, ad::mul(z, ad::sub(h, n)));
}

namespace {

struct SequenceCache {
  Matrix r, z, n, ghn, prev;  // T x H each, rows in time order
};

// Whole recurrence as one tape node. Weight gradients are summed over time
// with a single product instead of one outer product per step.
Var gru_sequence(ad::Binder& bind, const GruCell& cell, Var gates, Var h0, bool reverse) {
  const Index T = gates.rows();
  const Index H = cell.hidden_dim;
  Var wh = bind(cell.w_hidden);
  Var bh = bind(cell.b_hidden);
  const Matrix& W = wh.value().mat();
  const Matrix& b = bh.value().mat();
  const Matrix& gx = gates.value().mat();

  auto cache = std::make_shared<SequenceCache>();
  cache->r.resize(T, H);
  cache->z.resize(T, H);
  cache->n.resize(T, H);
  cache->ghn.resize(T, H);
  cache->prev.resize(T, H);
  Matrix states(T, H);
  Matrix h = h0.value().mat();
  Matrix gh(1, 3 * H);
  for (Index k = 0; k < T; ++k) {
    const Index t = reverse ? T - 1 - k : k;
    gh.noalias() = h * W.transpose();
    gh += b;
    auto rz = (gx.row(t).head(2 * H) + gh.leftCols(2 * H)).array();
    Matrix r = (1.0 / (1.0 + (-rz.leftCols(H)).exp())).matrix();
    Matrix z = (1.0 / (1.0 + (-rz.rightCols(H)).exp())).matrix();
    Matrix n = (gx.row(t).tail(H).array() + r.array() * gh.rightCols(H).array()).tanh().matrix();
    cache->prev.row(t) = h;
    cache->r.row(t) = r;
    cache->z.row(t) = z;
    cache->n.row(t) = n;
    cache->ghn.row(t) = gh.rightCols(H);
    h = (n.array() + z.array() * (h.array() - n.array())).matrix();
    states.row(t) = h;
  }

  const int ig = gates.id(), iw = wh.id(), ib = bh.id(), ih = h0.id();
  return bind.tape().record(
      ad::Tensor(std::move(states)), {ig, iw, ib, ih},
      [cache, ig, iw, ib, ih, T, H, reverse](const Matrix& g, const ad::Tensor&, ad::Tape& tape) {
        const Matrix& Wv = tape.value(iw).mat();
        Matrix dgx(T, 3 * H);
        Matrix dgh(T, 3 * H);
        Matrix carry = Matrix::Zero(1, H);
        for (Index k = T - 1; k >= 0; --k) {
          const Index t = reverse ? T - 1 - k : k;
          const auto r = cache->r.row(t).array();
          const auto z = cache->z.row(t).array();
          const auto n = cache->n.row(t).array();
          const auto prev = cache->prev.row(t).array();
          const auto dh = (g.row(t) + carry).array();
          const auto dn = (dh * (1.0 - z)).eval();
          const auto dz = (dh * (prev - n)).eval();
          const auto dan = (dn * (1.0 - n * n)).eval();
          const auto dar = (dan * cache->ghn.row(t).array() * r * (1.0 - r)).eval();
          const auto daz = (dz * z * (1.0 - z)).eval();
          dgx.row(t).segment(0, H) = dar.matrix();
          dgx.row(t).segment(H, H) = daz.matrix();
          dgx.row(t).segment(2 * H, H) = dan.matrix();
          dgh.row(t).segment(0, H) = dar.matrix();
          dgh.row(t).segment(H, H) = daz.matrix();
          dgh.row(t).segment(2 * H, H) = (dan * r).matrix();
          Matrix next = (dh * z).matrix();
          next.noalias() += dgh.row(t) * Wv;
          carry = std::move(next);
        }
        if (Matrix* t = tape.grad_target(ig)) *t += dgx;
        if (Matrix* t = tape.grad_target(iw)) t->noalias() += dgh.transpose() * cache->prev;
        if (Matrix* t = tape.grad_target(ib)) *t += dgh.colwise().sum();
        if (Matrix* t = tape.grad_target(ih)) *t += carry;
      });
}

struct BatchStep {
  std::vector<Index> rows;    // sequences still reading at this step
  std::vector<Index> tokens;  // input row read by each of them
  Matrix r, z, n, ghn, prev;
};

// Final states of many sequences packed back to back in `gates`. All active
// sequences advance together, so the recurrence is a matrix product per step.
Var gru_last_states(ad::Binder& bind, const GruCell& cell, Var gates,
                    std::span<const Index> lengths, bool reverse) {
  const Index H = cell.hidden_dim;
  const Index N = static_cast<Index>(lengths.size());
  Var wh = bind(cell.w_hidden);
  Var bh = bind(cell.b_hidden);
  const Matrix& W = wh.value().mat();
  const Matrix& b = bh.value().mat();
  const Matrix& gx = gates.value().mat();

  std::vector<Index> offset(lengths.size() + 1, 0);
  Index longest = 0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    offset[i + 1] = offset[i] + lengths[i];
    longest = std::max(longest, lengths[i]);
  }
  if (offset.back() != gx.rows()) {
    throw DimensionError("GRU batch lengths sum to " + std::to_string(offset.back()) +
                         " but input has " + std::to_string(gx.rows()) + " rows");
  }

  auto steps = std::make_shared<std::vector<BatchStep>>(static_cast<std::size_t>(longest));
  Matrix h = Matrix::Zero(N, H);
  for (Index k = 0; k < longest; ++k) {
    BatchStep& st = (*steps)[static_cast<std::size_t>(k)];
    for (Index i = 0; i < N; ++i) {
      const Index len = lengths[static_cast<std::size_t>(i)];
      if (k >= len) continue;
      st.rows.push_back(i);
      st.tokens.push_back(offset[static_cast<std::size_t>(i)] + (reverse ? len - 1 - k : k));
    }
    const Index A = static_cast<Index>(st.rows.size());
    st.prev.resize(A, H);
    Matrix x(A, 3 * H);
    for (Index a = 0; a < A; ++a) {
      st.prev.row(a) = h.row(st.rows[static_cast<std::size_t>(a)]);
      x.row(a) = gx.row(st.tokens[static_cast<std::size_t>(a)]);
    }
    Matrix gh = st.prev * W.transpose();
    gh.rowwise() += b.row(0);
    st.r = (1.0 / (1.0 + (-(x.leftCols(H) + gh.leftCols(H)).array()).exp())).matrix();
    st.z = (1.0 / (1.0 + (-(x.middleCols(H, H) + gh.middleCols(H, H)).array()).exp())).matrix();
    st.ghn = gh.rightCols(H);
    st.n = (x.rightCols(H).array() + st.r.array() * st.ghn.array()).tanh().matrix();
    for (Index a = 0; a < A; ++a) {
      h.row(st.rows[static_cast<std::size_t>(a)]) =
          st.n.row(a).array() + st.z.row(a).array() * (st.prev.row(a).array() - st.n.row(a).array());
    }
  }

  const int ig = gates.id(), iw = wh.id(), ib = bh.id();
  return bind.tape().record(
      ad::Tensor(std::move(h)), {ig, iw, ib},
      [steps, ig, iw, ib, H](const Matrix& g, const ad::Tensor&, ad::Tape& tape) {
        const Matrix& Wv = tape.value(iw).mat();
        Matrix* dgates = tape.grad_target(ig);
        Matrix* dw = tape.grad_target(iw);
        Matrix* db = tape.grad_target(ib);
        Index total = 0;
        for (const auto& st : *steps) total += static_cast<Index>(st.rows.size());
        // Per-step rows stacked so the weight gradient is one product.
        Matrix all_dgh(total, 3 * H);
        Matrix all_prev(total, H);
        Index at = total;
        Matrix carry = g;
        for (auto it = steps->rbegin(); it != steps->rend(); ++it) {
          const BatchStep& st = *it;
          const Index A = static_cast<Index>(st.rows.size());
          at -= A;
          Matrix dh(A, H);
          for (Index a = 0; a < A; ++a) dh.row(a) = carry.row(st.rows[static_cast<std::size_t>(a)]);
          const auto r = st.r.array();
          const auto z = st.z.array();
          const auto n = st.n.array();
          const Eigen::ArrayXXd dn = dh.array() * (1.0 - z);
          const Eigen::ArrayXXd dz = dh.array() * (st.prev.array() - n);
          const Eigen::ArrayXXd dan = dn * (1.0 - n * n);
          auto dgh = all_dgh.middleRows(at, A);
          dgh.leftCols(H) = (dan * st.ghn.array() * r * (1.0 - r)).matrix();
          dgh.middleCols(H, H) = (dz * z * (1.0 - z)).matrix();
          dgh.rightCols(H) = (dan * r).matrix();
          all_prev.middleRows(at, A) = st.prev;
          Matrix dprev = (dh.array() * z).matrix();
          dprev.noalias() += dgh * Wv;
          if (dgates != nullptr) {
            for (Index a = 0; a < A; ++a) {
              auto row = dgates->row(st.tokens[static_cast<std::size_t>(a)]);
              row.head(2 * H) += dgh.row(a).head(2 * H);
              row.tail(H) += dan.row(a).matrix();
            }
          }
          for (Index a = 0; a < A; ++a) carry.row(st.rows[static_cast<std::size_t>(a)]) = dprev.row(a);
        }
        if (dw != nullptr) dw->noalias() += all_dgh.transpose() * all_prev;
        if (db != nullptr) *db += all_dgh.colwise().sum();
      });
}

}  // namespace

GruRun run_gru(ad::Binder& bind, const GruCell& cell, Var inputs, bool reverse,
               std::optional<Var> h0) {
  ad::Tape& tape = bind.tape();
  Var h = h0 ? *h0 : tape.constant(ad::Tensor(1, cell.hidden_dim));
  if (h.rows() != 1 || h.cols() != cell.hidden_dim) {
    throw DimensionError("GRU initial state must be 1x" + std::to_string(cell.hidden_dim) +
                         ", got " + h.shape().str());
  }
  const Index T = inputs.rows();
  if (T == 0) return {tape.constant(ad::Tensor(0, cell.hidden_dim)), h};
  Var states = gru_sequence(bind, cell, cell.input_gates(bind, inputs), h, reverse);
  return {states, ad::slice_rows(states, reverse ? 0 : T - 1, 1)};
}

GruRun run_gru_unrolled(ad::Binder& bind, const GruCell& cell, Var inputs, bool reverse,
                        std::optional<Var> h0) {
  ad::Tape& tape = bind.tape();
  Var h = h0 ? *h0 : tape.constant(ad::Tensor(1, cell.hidden_dim));
  const Index T = inputs.rows();
  if (T == 0) return {tape.constant(ad::Tensor(0, cell.hidden_dim)), h};
  Var gates = cell.input_gates(bind, inputs);
  std::vector<Var> states(static_cast<std::size_t>(T));
  for (Index k = 0; k < T; ++k) {
    const Index t = reverse ? T - 1 - k : k;
    h = cell.step(bind, ad::slice_rows(gates, t, 1), h);
    states[static_cast<std::size_t>(t)] = h;
  }
  return {ad::concat_rows(states), h};
}

BiGru BiGru::create(ad::ParameterStore& store, const std::string& prefix, Index input_dim,
                    Index hidden_dim, std::mt19937_64& rng) {
  return {GruCell::create(store, prefix + ".fwd", input_dim, hidden_dim, rng),
          GruCell::create(store, prefix + ".bwd", input_dim, hidden_dim, rng)};
}

Var BiGruRun::summary() const {
  const Var parts[] = {last_forward, first_backward};
  return ad::concat_cols(parts);
}

Var run_gru_last(ad::Binder& bind, const GruCell& cell, Var inputs,
                 std::span<const Index> lengths, bool reverse) {
  if (lengths.empty()) return bind.tape().constant(ad::Tensor(0, cell.hidden_dim));
  if (inputs.rows() == 0) {
    return bind.tape().constant(ad::Tensor(static_cast<Index>(lengths.size()), cell.hidden_dim));
  }
  return gru_last_states(bind, cell, cell.input_gates(bind, inputs), lengths, reverse);
}

Var bigru_summaries(ad::Binder& bind, const BiGru& rnn, Var inputs,
                    std::span<const Index> lengths) {
  const Var parts[] = {run_gru_last(bind, rnn.forward, inputs, lengths, false),
                       run_gru_last(bind, rnn.backward, inputs, lengths, true)};
  return ad::concat_cols(parts);
}

BiGruRun run_bigru(ad::Binder& bind, const BiGru& rnn, Var inputs) {
  GruRun f = run_gru(bind, rnn.forward, inputs, false);
  GruRun b = run_gru(bind, rnn.backward, inputs, true);
  const Var parts[] = {f.states, b.states};
  return {ad::concat_cols(parts), f.last, b.last};
}

}  // namespace kgsumm::encoder
