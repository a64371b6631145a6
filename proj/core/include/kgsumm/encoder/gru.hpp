#pragma once

#include <optional>
#include <random>
#include <span>
#include <string>

#include "kgsumm/autodiff/binder.hpp"
#include "kgsumm/autodiff/ops.hpp"

namespace kgsumm::encoder {

using ad::Index;
using ad::ParamId;
using ad::Var;

// Single-layer GRU cell. Gate order in the stacked matrices: reset, update, candidate.
//   r = sigmoid(W_ir x + b_ir + W_hr h + b_hr)
//   z = sigmoid(W_iz x + b_iz + W_hz h + b_hz)
//   n = tanh(W_in x + b_in + r * (W_hn h + b_hn))
//   h' = (1 - z) * n + z * h
struct GruCell {
  Index input_dim = 0;
  Index hidden_dim = 0;
  ParamId w_input = 0;   // 3H x in
  ParamId w_hidden = 0;  // 3H x H
  ParamId b_input = 0;   // 1 x 3H
  ParamId b_hidden = 0;  // 1 x 3H

  static GruCell create(ad::ParameterStore& store, const std::string& prefix, Index input_dim,
                        Index hidden_dim, std::mt19937_64& rng);

  // One step from precomputed input gates gx = x W_i^T + b_i (1 x 3H).
  Var step(ad::Binder& bind, Var input_gates, Var h) const;
  Var input_gates(ad::Binder& bind, Var inputs) const;
};

struct GruRun {
  Var states;  // T x H, row t is the state after reading input t
  Var last;    // state after the final input read (initial state when T = 0)
};

// Reads the rows of `inputs` (T x in) in order, or last-to-first when
// `reverse`. States stay aligned with input positions either way.
GruRun run_gru(ad::Binder& bind, const GruCell& cell, Var inputs, bool reverse,
               std::optional<Var> h0 = std::nullopt);
// Same result built from per-step cell ops. Slower; kept as a reference.
GruRun run_gru_unrolled(ad::Binder& bind, const GruCell& cell, Var inputs, bool reverse,
                        std::optional<Var> h0 = std::nullopt);

struct BiGru {
  GruCell forward;
  GruCell backward;

  static BiGru create(ad::ParameterStore& store, const std::string& prefix, Index input_dim,
                      Index hidden_dim, std::mt19937_64& rng);
  Index output_dim() const { return forward.hidden_dim + backward.hidden_dim; }
};

struct BiGruRun {
  Var states;          // T x 2H, row t = [fwd_t, bwd_t]
  Var last_forward;    // forward state at the last position
  Var first_backward;  // backward state at the first position
  // [last_forward, first_backward]
  Var summary() const;
};

BiGruRun run_bigru(ad::Binder& bind, const BiGru& rnn, Var inputs);

// Several sequences packed back to back in `inputs`; sequence i owns the next
// lengths[i] rows. Returns one final state per sequence (N x H): after the last
// row, or after the first row when `reverse`. Empty sequences give zeros.
Var run_gru_last(ad::Binder& bind, const GruCell& cell, Var inputs,
                 std::span<const Index> lengths, bool reverse);
// Row i is run_bigru(sequence i).summary().
Var bigru_summaries(ad::Binder& bind, const BiGru& rnn, Var inputs,
                    std::span<const Index> lengths);

}  // namespace kgsumm::encoder
