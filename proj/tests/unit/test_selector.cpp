#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gradcheck.hpp"
#include "kgsumm/errors.hpp"
#include "kgsumm/selector/selector.hpp"
#include "kgsumm/util/log.hpp"

namespace kgsumm::selector {
namespace {

using testing::random_tensor;

class SelectorTest : public ::testing::Test {
 protected:
  SelectorTest() { params = SelectorParams::create(store, "sel", config, rng); }

  SelectorConfig small_config() {
    SelectorConfig c;
    c.dim = 4;
    c.hidden = 3;
    return c;
  }

  std::mt19937_64 rng{21};
  SelectorConfig config = small_config();
  ad::ParameterStore store;
  SelectorParams params;
};

TEST_F(SelectorTest, IdenticalRowsGiveUniformDistribution) {
  ad::Tape tape(false);
  ad::Binder bind(tape, store);
  Tensor rows(5, 4);
  const Tensor one = random_tensor(1, 4, rng);
  for (Index i = 0; i < 5; ++i) rows.mat().row(i) = one.mat();
  const auto out = select_forward(bind, params, tape.constant(rows), tape.constant(Tensor(0, 4)),
                                  Var());
  for (double p : out.p_sentence.flat()) EXPECT_NEAR(p, 0.2, 1e-15);
  EXPECT_EQ(out.p_entity.rows(), 0);
  EXPECT_FALSE(out.has_relatedness());
}

TEST_F(SelectorTest, SingleEntityGivesUnitDistributions) {
  ad::Tape tape(false);
  ad::Binder bind(tape, store);
  const auto out =
      select_forward(bind, params, tape.constant(random_tensor(3, 4, rng)),
                     tape.constant(random_tensor(1, 4, rng)), tape.constant(random_tensor(1, 2, rng)));
  EXPECT_EQ(out.p_entity(0, 0), 1.0);
  ASSERT_TRUE(out.has_relatedness());
  EXPECT_EQ(out.r_relatedness(0, 0), 1.0);
}

TEST_F(SelectorTest, DistributionsSumToOneAndDiagonalIsExcluded) {
  for (int trial = 0; trial < 100; ++trial) {
    ad::Tape tape(false);
    ad::Binder bind(tape, store);
    const auto out = select_forward(bind, params, tape.constant(random_tensor(7, 4, rng, -5, 5)),
                                    tape.constant(random_tensor(5, 4, rng, -5, 5)),
                                    tape.constant(random_tensor(5, 3, rng, -5, 5)));
    EXPECT_NEAR(out.p_sentence.sum(), 1.0, 1e-6);
    EXPECT_NEAR(out.p_entity.sum(), 1.0, 1e-6);
    EXPECT_NEAR(out.r_relatedness.sum(), 1.0, 1e-6);
    for (Index i = 0; i < 5; ++i) EXPECT_EQ(out.r_relatedness(i, i), 0.0);
  }
}

TEST(SelectorTargets, UniformPairTargetOverTwoEntities) {
  const Tensor t = relatedness_target(Tensor::full(2, 2, 1.0));
  EXPECT_EQ(t.mat(), Tensor::from_rows({{0, 0.5}, {0.5, 0}}).mat());
  EXPECT_EQ(relatedness_target(Tensor(3, 3)).sum(), 0.0);
}

TEST(SelectorTargets, LabelDistribution) {
  const std::vector<int> y = {1, 0, 1, 1};
  const Tensor t = label_distribution(y);
  EXPECT_DOUBLE_EQ(t(0, 0), 1.0 / 3.0);
  EXPECT_EQ(t(1, 0), 0.0);
  const std::vector<int> zero = {0, 0};
  EXPECT_EQ(label_distribution(zero).sum(), 0.0);
}

TEST_F(SelectorTest, LossMatchesHandCrossEntropies) {
  ad::Tape tape(false);
  ad::Binder bind(tape, store);
  const auto out = select_forward(bind, params, tape.constant(random_tensor(4, 4, rng)),
                                  tape.constant(random_tensor(3, 4, rng)),
                                  tape.constant(random_tensor(3, 2, rng)));
  const std::vector<int> ys = {1, 0, 0, 1}, ye = {0, 1, 0};
  const Tensor a = Tensor::from_rows({{0, 2, 1}, {2, 0, 0}, {1, 0, 0}});
  const auto loss = selector_loss(out, ys, ye, a, config);
  const double ls = -0.5 * (std::log(out.p_sentence(0, 0)) + std::log(out.p_sentence(3, 0)));
  const double le = -std::log(out.p_entity(1, 0));
  const double lr = -(2.0 / 6.0) * std::log(out.r_relatedness(0, 1)) -
                    (2.0 / 6.0) * std::log(out.r_relatedness(1, 0)) -
                    (1.0 / 6.0) * std::log(out.r_relatedness(0, 2)) -
                    (1.0 / 6.0) * std::log(out.r_relatedness(2, 0));
  EXPECT_NEAR(loss.sentence, ls, 1e-12);
  EXPECT_NEAR(loss.entity, le, 1e-12);
  EXPECT_NEAR(loss.relatedness, lr, 1e-12);
  EXPECT_NEAR(loss.total.value()(0, 0), ls + 0.42 * le + 0.33 * lr, 1e-12);
}

TEST_F(SelectorTest, ZeroAuxiliaryWeightsLeaveSentenceLossExactly) {
  SelectorConfig c = config;
  c.lambda_entity = 0.0;
  c.lambda_relatedness = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    ad::Tape tape;
    ad::Binder bind(tape, store);
    Var el = tape.leaf(random_tensor(4, 3, rng));
    const auto out = select_forward(bind, params, tape.constant(random_tensor(6, 4, rng)),
                                    tape.constant(random_tensor(4, 4, rng)), el);
    const std::vector<int> ys = {0, 1, 0, 0, 1, 0}, ye = {1, 1, 0, 0};
    const auto loss = selector_loss(out, ys, ye, Tensor::full(4, 4, 1.0), c);
    EXPECT_EQ(loss.total.value()(0, 0), loss.sentence);
    tape.backward(loss.total);
    EXPECT_EQ(tape.grad(el).mat().cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST_F(SelectorTest, CrossEntropyIsMinimalAtTarget) {
  ad::Tape tape(false);
  ad::Binder bind(tape, store);
  const auto out = select_forward(bind, params, tape.constant(random_tensor(5, 4, rng)),
                                  tape.constant(Tensor(0, 4)), Var());
  std::vector<double> p(out.p_sentence.flat().begin(), out.p_sentence.flat().end());
  double entropy = 0.0;
  for (double v : p) entropy -= v * std::log(v);
  // A target equal to the prediction gives the entropy; a one-hot target gives more.
  const Var ce = ad::cross_entropy(out.p_sentence, out.sentence_logp);
  EXPECT_NEAR(ce.value()(0, 0), entropy, 1e-12);
  const std::vector<int> one_hot = {0, 0, 1, 0, 0};
  const auto loss = selector_loss(out, one_hot, {}, Tensor(0, 0), config);
  EXPECT_GE(loss.sentence, entropy);
}

TEST_F(SelectorTest, DegenerateTargetsContributeZero) {
  ad::Tape tape(false);
  ad::Binder bind(tape, store);
  const auto out = select_forward(bind, params, tape.constant(random_tensor(3, 4, rng)),
                                  tape.constant(random_tensor(2, 4, rng)),
                                  tape.constant(random_tensor(2, 2, rng)));
  log::reset_warning_count();
  const std::vector<int> ys = {0, 0, 0}, ye = {0, 0};
  const auto loss = selector_loss(out, ys, ye, Tensor(2, 2), config);
  EXPECT_EQ(loss.total.value()(0, 0), 0.0);
  EXPECT_EQ(log::warning_count(), 1u);
}

TEST_F(SelectorTest, LabelCountMismatchThrows) {
  ad::Tape tape(false);
  ad::Binder bind(tape, store);
  const auto out = select_forward(bind, params, tape.constant(random_tensor(3, 4, rng)),
                                  tape.constant(Tensor(0, 4)), Var());
  const std::vector<int> ys = {1, 0};
  EXPECT_THROW(selector_loss(out, ys, {}, Tensor(0, 0), config), DimensionError);
}

TEST_F(SelectorTest, HeadsMatchCentralDifferences) {
  const Tensor s = random_tensor(5, 4, rng), e = random_tensor(4, 4, rng);
  const Tensor a = Tensor::from_rows({{0, 1, 2, 0}, {1, 0, 0, 1}, {2, 0, 0, 0}, {0, 1, 0, 0}});
  const std::vector<int> ys = {1, 0, 1, 0, 0}, ye = {0, 1, 1, 0};
  std::vector<ParamId> ids(store.size());
  std::iota(ids.begin(), ids.end(), 0);
  const auto r = testing::check_param_gradients(store, ids, [&](ad::Binder& bind) {
    ad::Tape& tape = bind.tape();
    const auto out = select_forward(bind, params, tape.constant(s), tape.constant(e),
                                    tape.constant(e));
    return selector_loss(out, ys, ye, a, config).total;
  });
  EXPECT_LT(r.max_rel_error, 1e-6);

  const auto rel = testing::check_gradients(
      [&](ad::Tape& tape, const std::vector<Var>& in) {
        ad::Binder bind(tape, store);
        const auto out = select_forward(bind, params, in[0], in[1], in[2]);
        return selector_loss(out, ys, ye, a, config).total;
      },
      {s, e, random_tensor(4, 3, rng)});
  EXPECT_LT(rel.max_rel_error, 1e-6);
}

TEST(TopK, HandExampleAndTies) {
  const std::vector<double> p = {0.5, 0.2, 0.3};
  EXPECT_EQ(top_k(p, 2), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(top_k(p, 9), (std::vector<std::size_t>{0, 1, 2}));
  const std::vector<double> tie = {0.25, 0.25, 0.25, 0.25};
  EXPECT_EQ(top_k(tie, 2), (std::vector<std::size_t>{0, 1}));
}

TEST(TopK, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> p(9), q(9);
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = u(rng);
      q[i] = std::exp(3.0 * p[i]) + 2.0;
    }
    for (std::size_t k = 0; k <= p.size(); ++k) EXPECT_EQ(top_k(p, k), top_k(q, k));
  }
}

TEST_F(SelectorTest, RankAndSelectReturnsDocumentOrder) {
  ad::Tape tape(false);
  ad::Binder bind(tape, store);
  const auto out = select_forward(bind, params, tape.constant(random_tensor(6, 4, rng)),
                                  tape.constant(random_tensor(3, 4, rng)), Var());
  const Selection sel = rank_and_select(out, 4, 10);
  EXPECT_EQ(sel.sentences.size(), 4u);
  EXPECT_TRUE(std::is_sorted(sel.sentences.begin(), sel.sentences.end()));
  EXPECT_EQ(sel.entities, (std::vector<std::size_t>{0, 1, 2}));
  for (Index i = 0; i < 6; ++i) {
    const bool chosen = std::count(sel.sentences.begin(), sel.sentences.end(), i) > 0;
    if (chosen) continue;
    for (std::size_t j : sel.sentences) EXPECT_GE(out.p_sentence(j, 0), out.p_sentence(i, 0));
  }
}

TEST(SelectorConfigCheck, NegativeWeightsRejected) {
  std::mt19937_64 rng(1);
  ad::ParameterStore store;
  SelectorConfig c;
  c.dim = 2;
  c.hidden = 2;
  c.lambda_entity = -0.1;
  EXPECT_THROW(SelectorParams::create(store, "s", c, rng), ConfigError);
}

}  // namespace
}  // namespace kgsumm::selector
