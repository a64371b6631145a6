#include "kgsumm/rhgnn/rhgnn.hpp"

#include <cmath>

#include "kgsumm/errors.hpp"

namespace kgsumm::rhgnn {

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Full: return "full";
    case Mode::NoEdgeWeights: return "no_edge_weights";
    case Mode::NoEdgeTypes: return "no_edge_types";
    case Mode::MeanAggregation: return "mean_aggregation";
  }
  return "full";
}

Mode mode_from_string(std::string_view name) {
  if (name == "full") return Mode::Full;
  if (name == "no_edge_weights") return Mode::NoEdgeWeights;
  if (name == "no_edge_types") return Mode::NoEdgeTypes;
  if (name == "mean_aggregation") return Mode::MeanAggregation;
  throw ConfigError("unknown propagation mode: " + std::string(name));
}

Adjacency dense_adjacency(const graph::SentenceEntityGraph& g) {
  return {g.dense(graph::EdgeType::SS), g.dense(graph::EdgeType::SE),
          g.dense(graph::EdgeType::EE)};
}

namespace {

void check_square_nonneg(const Tensor& a) {
  if (a.rows() != a.cols()) throw DimensionError("adjacency must be square, got " + a.shape().str());
  for (double v : a.flat()) {
    if (v < 0.0) throw ValidationError("adjacency has a negative weight");
    if (!std::isfinite(v)) throw ValidationError("adjacency has a non-finite weight");
  }
}

}  // namespace

Tensor degree_normalize(const Tensor& a) {
  check_square_nonneg(a);
  const Index n = a.rows();
  Eigen::VectorXd inv_sqrt(n);
  for (Index i = 0; i < n; ++i) {
    const double d = a.mat().row(i).sum();
    inv_sqrt(i) = 1.0 / std::sqrt(d > 0.0 ? d : 1.0);
  }
  Tensor out(n, n);
  out.mat() = inv_sqrt.asDiagonal() * a.mat() * inv_sqrt.asDiagonal();
  return out;
}

Tensor row_mean_normalize(const Tensor& a) {
  check_square_nonneg(a);
  const Index n = a.rows();
  Tensor out(n, n);
  for (Index i = 0; i < n; ++i) {
    Index count = 0;
    for (Index j = 0; j < n; ++j) count += a(i, j) > 0.0 ? 1 : 0;
    if (count == 0) continue;
    for (Index j = 0; j < n; ++j) out(i, j) = a(i, j) > 0.0 ? 1.0 / count : 0.0;
  }
  return out;
}

Propagation prepare_propagation(const Adjacency& adj, Mode mode) {
  Propagation prop;
  prop.mode = mode;
  const Index n = adj[0].rows();
  for (const auto& a : adj) {
    if (a.rows() != n || a.cols() != n) throw DimensionError("adjacency shapes differ");
  }
  switch (mode) {
    case Mode::Full:
      for (int k = 0; k < 3; ++k) prop.p[k] = degree_normalize(adj[k]);
      break;
    case Mode::NoEdgeWeights:
      for (int k = 0; k < 3; ++k) prop.p[k] = row_mean_normalize(adj[k]);
      break;
    case Mode::NoEdgeTypes: {
      Tensor sum(n, n);
      for (const auto& a : adj) sum.mat() += a.mat();
      prop.p[0] = degree_normalize(sum);
      prop.p[1] = Tensor(n, n);
      prop.p[2] = Tensor(n, n);
      break;
    }
    case Mode::MeanAggregation: {
      Eigen::VectorXd types = Eigen::VectorXd::Zero(n);
      for (int k = 0; k < 3; ++k) {
        prop.p[k] = row_mean_normalize(adj[k]);
        for (Index i = 0; i < n; ++i) types(i) += prop.p[k].mat().row(i).sum() > 0.0 ? 1.0 : 0.0;
      }
      for (Index i = 0; i < n; ++i) {
        if (types(i) > 1.0) {
          for (int k = 0; k < 3; ++k) prop.p[k].mat().row(i) /= types(i);
        }
      }
      break;
    }
  }
  for (int k = 0; k < 3; ++k) prop.active[k] = !prop.p[k].mat().isZero(0.0);
  return prop;
}

RhgnnParams RhgnnParams::create(ad::ParameterStore& store, const std::string& prefix,
                                const RhgnnConfig& config, std::mt19937_64& rng) {
  if (config.levels < 1) throw ConfigError("propagation needs at least one level");
  if (config.dim <= 0) throw ConfigError("node dimension must be positive");
  RhgnnParams p;
  p.config = config;
  static const char* kNames[] = {"ss", "se", "ee"};
  for (int l = 0; l < config.levels; ++l) {
    const std::string base = prefix + ".level" + std::to_string(l);
    LevelParams lp;
    if (config.mode == Mode::NoEdgeTypes) {
      lp.edge[0] = store.add_xavier(base + ".shared", config.dim, config.dim, rng);
      lp.edge[1] = lp.edge[0];
      lp.edge[2] = lp.edge[0];
    } else {
      for (int k = 0; k < 3; ++k) {
        lp.edge[k] = store.add_xavier(base + "." + kNames[k], config.dim, config.dim, rng);
      }
    }
    lp.self = store.add_xavier(base + ".self", config.dim, config.dim, rng);
    p.levels.push_back(lp);
  }
  return p;
}

Var level_forward(ad::Binder& bind, const LevelParams& level, Var x, const Propagation& prop) {
  ad::Tape& tape = bind.tape();
  if (prop.p[0].rows() != x.rows()) {
    throw DimensionError("propagation matrix " + prop.p[0].shape().str() + " does not match " +
                         std::to_string(x.rows()) + " nodes");
  }
  Var acc = ad::matmul_nt(x, bind(level.self));
  const int types = prop.mode == Mode::NoEdgeTypes ? 1 : 3;
  for (int k = 0; k < types; ++k) {
    if (!prop.active[k]) continue;
    Var msg = ad::matmul_nt(x, bind(level.edge[k]));
    acc = ad::add(acc, ad::matmul(tape.constant(prop.p[k]), msg));
  }
  return ad::relu(acc);
}

StackOutput stack_forward(ad::Binder& bind, const RhgnnParams& params, Var x0,
                          const Propagation& prop, Index sentence_count) {
  if (params.levels.empty()) throw ConfigError("propagation needs at least one level");
  if (sentence_count > x0.rows()) throw DimensionError("more sentences than nodes");
  Var x = x0;
  for (const auto& level : params.levels) x = level_forward(bind, level, x, prop);
  return {x, ad::slice_rows(x, 0, sentence_count),
          ad::slice_rows(x, sentence_count, x.rows() - sentence_count)};
}

}  // namespace kgsumm::rhgnn
