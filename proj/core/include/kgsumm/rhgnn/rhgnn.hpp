#pragma once

#include <array>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "kgsumm/autodiff/binder.hpp"
#include "kgsumm/autodiff/ops.hpp"
#include "kgsumm/graph/graph.hpp"

namespace kgsumm::rhgnn {

using ad::Index;
using ad::ParamId;
using ad::Tensor;
using ad::Var;

enum class Mode {
  Full,             // degree-normalised weighted propagation per edge type
  NoEdgeWeights,    // binary edges, 1/c_i row normalisation per edge type (R-GNN)
  NoEdgeTypes,      // summed adjacency, one shared transform (GNN)
  MeanAggregation,  // per-type neighbour mean, averaged over types with neighbours
};

std::string to_string(Mode m);
// Throws ConfigError for an unknown name.
Mode mode_from_string(std::string_view name);

// One dense symmetric adjacency per edge type, in SS, SE, EE order.
using Adjacency = std::array<Tensor, 3>;

Adjacency dense_adjacency(const graph::SentenceEntityGraph& g);

// D^-1/2 A D^-1/2 with D_ii = sum_j A_ij; zero-degree rows use D_ii = 1.
// Throws ValidationError on a negative weight, DimensionError if not square.
Tensor degree_normalize(const Tensor& a);
// Binarised A with each row divided by its neighbour count.
Tensor row_mean_normalize(const Tensor& a);

// Constant propagation matrices for a mode. For NoEdgeTypes only entry 0 is used.
struct Propagation {
  Mode mode = Mode::Full;
  std::array<Tensor, 3> p;
  std::array<bool, 3> active{};  // false when the matrix is all zero
};

Propagation prepare_propagation(const Adjacency& adj, Mode mode);

struct LevelParams {
  std::array<ParamId, 3> edge{};  // W^{ET_k}, d x d; NoEdgeTypes uses edge[0] only
  ParamId self = 0;                // W^{self}, d x d
};

struct RhgnnConfig {
  Index dim = 512;
  int levels = 2;
  Mode mode = Mode::Full;
};

struct RhgnnParams {
  RhgnnConfig config;
  std::vector<LevelParams> levels;

  static RhgnnParams create(ad::ParameterStore& store, const std::string& prefix,
                            const RhgnnConfig& config, std::mt19937_64& rng);
};

// ReLU(sum_k P_k X W_k^T + X W_self^T).
Var level_forward(ad::Binder& bind, const LevelParams& level, Var x, const Propagation& prop);

struct StackOutput {
  Var nodes;      // (M + N) x d
  Var sentences;  // M x d
  Var entities;   // N x d
};

StackOutput stack_forward(ad::Binder& bind, const RhgnnParams& params, Var x0,
                          const Propagation& prop, Index sentence_count);

}  // namespace kgsumm::rhgnn
