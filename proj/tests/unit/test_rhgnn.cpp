#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gradcheck.hpp"
#include "rhgnn_reference.hpp"
#include "kgsumm/errors.hpp"
#include "kgsumm/rhgnn/rhgnn.hpp"

namespace kgsumm::rhgnn {
namespace {

using ad::Matrix;
using testing::random_tensor;

using testing::loop_sym_norm;
using testing::random_adjacencies;
using testing::random_adjacency;
using testing::reference_gnn;
using testing::reference_rgnn;
using testing::relu;
using testing::run_stack;

TEST(DegreeNormalize, HandExample) {
  const Tensor out = degree_normalize(Tensor::from_rows({{0, 2}, {2, 0}}));
  EXPECT_LT(out.max_abs_diff(Tensor::from_rows({{0, 1}, {1, 0}})), 1e-15);
}

TEST(DegreeNormalize, ZeroStaysZero) {
  EXPECT_EQ(degree_normalize(Tensor(3, 3)).mat(), Matrix::Zero(3, 3));
}

TEST(DegreeNormalize, ScaleInvariantAndMatchesLoopForm) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor a = random_adjacency(7, rng);
    Tensor scaled = a;
    scaled.mat() *= 13.5;
    EXPECT_LT((degree_normalize(a).mat() - loop_sym_norm(a)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT(degree_normalize(a).max_abs_diff(degree_normalize(scaled)), 1e-15);
  }
}

TEST(DegreeNormalize, RejectsNegativeAndNonSquare) {
  EXPECT_THROW(degree_normalize(Tensor::from_rows({{0, -1}, {-1, 0}})), ValidationError);
  EXPECT_THROW(degree_normalize(Tensor(2, 3)), DimensionError);
}

TEST(RowMeanNormalize, BinarisesAndDividesByNeighbourCount) {
  const Tensor out = row_mean_normalize(Tensor::from_rows({{0, 5, 1}, {5, 0, 0}, {1, 0, 0}}));
  EXPECT_EQ(out.mat(), Tensor::from_rows({{0, 0.5, 0.5}, {1, 0, 0}, {1, 0, 0}}).mat());
}

TEST(Mode, NamesRoundTripAndUnknownThrows) {
  for (Mode m : {Mode::Full, Mode::NoEdgeWeights, Mode::NoEdgeTypes, Mode::MeanAggregation}) {
    EXPECT_EQ(mode_from_string(to_string(m)), m);
  }
  EXPECT_THROW(mode_from_string("gat"), ConfigError);
}

class LevelTest : public ::testing::Test {
 protected:
  void make(Index dim, int levels, Mode mode) {
    std::mt19937_64 rng(5);
    store = ad::ParameterStore();
    params = RhgnnParams::create(store, "g", {dim, levels, mode}, rng);
  }
  void set_identity() {
    for (std::size_t id = 0; id < store.size(); ++id) {
      auto& v = store[id].value.mat();
      v = Matrix::Identity(v.rows(), v.cols());
    }
  }
  ad::ParameterStore store;
  RhgnnParams params;
};

TEST_F(LevelTest, TwoNodeIdentityExample) {
  make(2, 1, Mode::Full);
  set_identity();
  store[params.levels[0].self].value.mat().setZero();
  Adjacency adj = {Tensor::from_rows({{0, 1}, {1, 0}}), Tensor(2, 2), Tensor(2, 2)};
  const Tensor out = run_stack(store, params, Tensor::from_rows({{1, 1}, {1, 1}}), adj, Mode::Full);
  EXPECT_EQ(out.mat(), Tensor::from_rows({{1, 1}, {1, 1}}).mat());
  // With the self transform also at identity every row gains itself.
  set_identity();
  const Tensor with_self =
      run_stack(store, params, Tensor::from_rows({{1, 1}, {1, 1}}), adj, Mode::Full);
  EXPECT_EQ(with_self.mat(), Tensor::from_rows({{2, 2}, {2, 2}}).mat());
}

TEST_F(LevelTest, IsolatedNodePassesThrough) {
  make(3, 1, Mode::Full);
  std::mt19937_64 rng(2);
  store[params.levels[0].self].value.mat() = Matrix::Identity(3, 3);
  Adjacency adj = {Tensor::from_rows({{0, 1, 0}, {1, 0, 0}, {0, 0, 0}}), Tensor(3, 3),
                   Tensor(3, 3)};
  const Tensor x = random_tensor(3, 3, rng, 0.0, 2.0);
  const Tensor out = run_stack(store, params, x, adj, Mode::Full);
  EXPECT_EQ(out.mat().row(2), x.mat().row(2));
}

TEST_F(LevelTest, PerTypeScaleInvariance) {
  make(6, 2, Mode::Full);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Adjacency adj = random_adjacencies(9, rng);
    const Tensor x = random_tensor(9, 6, rng);
    const Tensor base = run_stack(store, params, x, adj, Mode::Full);
    for (int k = 0; k < 3; ++k) {
      for (double c : {0.1, 7.0, 1000.0}) {
        Adjacency scaled = adj;
        scaled[k].mat() *= c;
        EXPECT_LT(run_stack(store, params, x, scaled, Mode::Full).max_abs_diff(base), 1e-10);
      }
    }
  }
}

TEST_F(LevelTest, PermutationEquivariance) {
  make(5, 2, Mode::Full);
  std::mt19937_64 rng(4);
  const Index n = 8;
  const Adjacency adj = random_adjacencies(n, rng);
  const Tensor x = random_tensor(n, 5, rng);
  const Tensor base = run_stack(store, params, x, adj, Mode::Full);
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(perm.begin(), perm.end(), rng);
    Tensor px(n, 5);
    Adjacency padj = {Tensor(n, n), Tensor(n, n), Tensor(n, n)};
    for (Index i = 0; i < n; ++i) {
      px.mat().row(i) = x.mat().row(perm[i]);
      for (Index j = 0; j < n; ++j) {
        for (int k = 0; k < 3; ++k) padj[k](i, j) = adj[k](perm[i], perm[j]);
      }
    }
    const Tensor out = run_stack(store, params, px, padj, Mode::Full);
    for (Index i = 0; i < n; ++i) {
      EXPECT_LT((out.mat().row(i) - base.mat().row(perm[i])).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST_F(LevelTest, SingleBinaryTypeIsSymmetricGraphConvolution) {
  make(4, 1, Mode::Full);
  store[params.levels[0].self].value.mat().setZero();
  std::mt19937_64 rng(6);
  const Tensor a = random_adjacency(7, rng, 0.5, 1.0);
  const Adjacency adj = {a, Tensor(7, 7), Tensor(7, 7)};
  const Tensor x = random_tensor(7, 4, rng);
  const Matrix& w = store[params.levels[0].edge[0]].value.mat();
  const Matrix expected = relu(loop_sym_norm(a) * x.mat() * w.transpose());
  EXPECT_LT((run_stack(store, params, x, adj, Mode::Full).mat() - expected).cwiseAbs().maxCoeff(),
            1e-14);
}

TEST_F(LevelTest, NoEdgeWeightsMatchesReferenceRgnn) {
  make(4, 1, Mode::NoEdgeWeights);
  std::mt19937_64 rng(7);
  const Adjacency adj = random_adjacencies(6, rng);
  const Tensor x = random_tensor(6, 4, rng);
  const auto& lp = params.levels[0];
  const Matrix expected =
      reference_rgnn(adj, x.mat(),
                     {store[lp.edge[0]].value.mat(), store[lp.edge[1]].value.mat(),
                      store[lp.edge[2]].value.mat()},
                     store[lp.self].value.mat());
  EXPECT_LT(
      (run_stack(store, params, x, adj, Mode::NoEdgeWeights).mat() - expected).cwiseAbs().maxCoeff(),
      1e-14);
}

TEST_F(LevelTest, NoEdgeTypesMatchesReferenceGnn) {
  make(4, 1, Mode::NoEdgeTypes);
  std::mt19937_64 rng(8);
  const Adjacency adj = random_adjacencies(6, rng);
  const Tensor x = random_tensor(6, 4, rng);
  const auto& lp = params.levels[0];
  EXPECT_EQ(lp.edge[0], lp.edge[1]);
  const Matrix expected =
      reference_gnn(adj, x.mat(), store[lp.edge[0]].value.mat(), store[lp.self].value.mat());
  EXPECT_LT(
      (run_stack(store, params, x, adj, Mode::NoEdgeTypes).mat() - expected).cwiseAbs().maxCoeff(),
      1e-14);
}

TEST_F(LevelTest, NoEdgeTypesIgnoresHowWeightIsSplit) {
  make(4, 2, Mode::NoEdgeTypes);
  std::mt19937_64 rng(9);
  const Tensor total = random_adjacency(6, rng, 0.6, 4.0);
  const Tensor x = random_tensor(6, 4, rng);
  Adjacency one = {total, Tensor(6, 6), Tensor(6, 6)};
  Adjacency split = {Tensor(6, 6), Tensor(6, 6), Tensor(6, 6)};
  split[0].mat() = total.mat() * 0.25;
  split[1].mat() = total.mat() * 0.5;
  split[2].mat() = total.mat() * 0.25;
  EXPECT_LT(run_stack(store, params, x, one, Mode::NoEdgeTypes)
                .max_abs_diff(run_stack(store, params, x, split, Mode::NoEdgeTypes)),
            1e-14);
}

TEST_F(LevelTest, MeanAggregationIgnoresWeightsAndAveragesTypes) {
  make(2, 1, Mode::MeanAggregation);
  // Node 0 has one SS neighbour (node 1) and two SE neighbours (nodes 1, 2).
  Adjacency adj = {Tensor::from_rows({{0, 1, 0}, {1, 0, 0}, {0, 0, 0}}),
                   Tensor::from_rows({{0, 3, 1}, {3, 0, 0}, {1, 0, 0}}), Tensor(3, 3)};
  const Propagation prop = prepare_propagation(adj, Mode::MeanAggregation);
  EXPECT_DOUBLE_EQ(prop.p[0](0, 1), 0.5);
  EXPECT_DOUBLE_EQ(prop.p[1](0, 1), 0.25);
  EXPECT_DOUBLE_EQ(prop.p[1](0, 2), 0.25);
  EXPECT_DOUBLE_EQ(prop.p[1](2, 0), 1.0);
  EXPECT_FALSE(prop.active[2]);
}

TEST_F(LevelTest, TwoLevelsDifferFromOne) {
  std::mt19937_64 rng(10);
  const Adjacency adj = random_adjacencies(6, rng);
  const Tensor x = random_tensor(6, 4, rng);
  make(4, 2, Mode::Full);
  const Tensor two = run_stack(store, params, x, adj, Mode::Full);
  RhgnnParams one = params;
  one.levels.resize(1);
  const Tensor single = run_stack(store, one, x, adj, Mode::Full);
  EXPECT_GT(two.max_abs_diff(single), 1e-3);
}

TEST_F(LevelTest, StackGradientMatchesCentralDifferences) {
  make(3, 2, Mode::Full);
  std::mt19937_64 rng(11);
  const Adjacency adj = random_adjacencies(5, rng);
  const Propagation prop = prepare_propagation(adj, Mode::Full);
  const Tensor x = random_tensor(5, 3, rng);
  std::vector<ParamId> ids(store.size());
  std::iota(ids.begin(), ids.end(), 0);
  const auto r = testing::check_param_gradients(store, ids, [&](ad::Binder& bind) {
    const auto out = stack_forward(bind, params, bind.tape().constant(x), prop, 2);
    return ad::add(testing::weighted_sum(out.sentences, 1), testing::weighted_sum(out.entities, 2));
  });
  EXPECT_LT(r.max_rel_error, 1e-6);
}

TEST_F(LevelTest, ShapeMismatchThrows) {
  make(3, 1, Mode::Full);
  const Adjacency adj = {Tensor(4, 4), Tensor(4, 4), Tensor(4, 4)};
  EXPECT_THROW(run_stack(store, params, Tensor(5, 3), adj, Mode::Full), DimensionError);
  EXPECT_THROW(prepare_propagation({Tensor(4, 4), Tensor(3, 3), Tensor(4, 4)}, Mode::Full),
               DimensionError);
}

}  // namespace
}  // namespace kgsumm::rhgnn
