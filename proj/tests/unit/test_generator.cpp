#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "gradcheck.hpp"
#include "kgsumm/errors.hpp"
#include "kgsumm/generator/generator.hpp"
#include "kgsumm/util/log.hpp"

namespace kgsumm::generator {
namespace {

using corpus::Vocab;
using testing::random_tensor;

corpus::AnnotatedDocument vocab_document() {
  corpus::AnnotatedDocument d;
  d.id = "v";
  d.sentences = {{"a", "b", "c", "d"}, {"e", "f", "a", "b"}};
  d.summary = {{"a", "c"}};
  return d;
}

class GeneratorTest : public ::testing::Test {
 protected:
  GeneratorTest() : vocab(Vocab::build({vocab_document()})) {
    config.word_dim = 3;
    config.hidden = 2;
    config.mention_hidden = 2;
    config.decoder_hidden = 3;
    config.attention_dim = 3;
    params = GeneratorParams::create(store, "gen", config,
                                     random_tensor(static_cast<Index>(vocab.size()), 3, rng), rng);
    mentions = {{vocab.id("a"), Vocab::kSep, vocab.id("b")}, {vocab.id("c")}};
  }

  EncodedSource encode(ad::Binder& bind, const corpus::Tokens& source) {
    EncodedSource src = encode_input(bind, params, source, vocab);
    attach_entities(bind, params, src, mentions);
    return src;
  }

  std::mt19937_64 rng{31};
  Vocab vocab;
  GeneratorConfig config;
  ad::ParameterStore store;
  GeneratorParams params;
  std::vector<std::vector<Index>> mentions;
};

TEST_F(GeneratorTest, SingleTokenRepresentationIsItsState) {
  ad::Tape tape(false);
  ad::Binder bind(tape, store);
  const EncodedSource src = encode(bind, {"a"});
  EXPECT_EQ(src.states.rows(), 1);
  EXPECT_EQ(src.d_rep.value().mat(), src.states.value().mat());
}

TEST_F(GeneratorTest, LongInputIsTruncated) {
  corpus::Tokens source(200, "b");
  ad::Tape tape(false);
  ad::Binder bind(tape, store);
  EXPECT_EQ(encode(bind, source).states.rows(), 150);
  EXPECT_THROW(encode_input(bind, params, {}, vocab), ValidationError);
}

TEST_F(GeneratorTest, TokenOrderChangesEncodings) {
  ad::Tape tape(false);
  ad::Binder bind(tape, store);
  const EncodedSource ab = encode(bind, {"a", "b", "c"});
  const EncodedSource ba = encode(bind, {"b", "a", "c"});
  EXPECT_GT((ab.states.value().mat().row(2) - ba.states.value().mat().row(2)).cwiseAbs().maxCoeff(),
            1e-6);
}

TEST_F(GeneratorTest, EntitySetIsMeanOfMentionEncodings) {
  ad::Tape tape(false);
  ad::Binder bind(tape, store);
  const Var both = encode_entity_set(bind, params, mentions);
  const Var first = encode_entity_set(bind, params, {mentions[0]});
  const Var second = encode_entity_set(bind, params, {mentions[1]});
  const Var twice = encode_entity_set(bind, params, {mentions[1], mentions[1]});
  const ad::Matrix mean = 0.5 * (first.value().mat() + second.value().mat());
  EXPECT_LT((both.value().mat() - mean).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(twice.value().mat(), second.value().mat());

  const Var hand = ad::mean_rows(tape.constant(Tensor::from_rows({{1, 3}, {3, 1}})));
  EXPECT_EQ(hand.value().mat(), Tensor::from_rows({{2, 2}}).mat());
}

TEST_F(GeneratorTest, EmptyEntitySetIsZeroWithWarning) {
  ad::Tape tape(false);
  ad::Binder bind(tape, store);
  log::reset_warning_count();
  const Var h = encode_entity_set(bind, params, {});
  EXPECT_EQ(h.cols(), 4);
  EXPECT_EQ(h.value().mat().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(log::warning_count(), 1u);
}

TEST_F(GeneratorTest, ExtendedDistributionSumsToOne) {
  ad::Tape tape(false);
  ad::Binder bind(tape, store);
  const EncodedSource src = encode(bind, {"a", "zebra", "b", "zebra", "okapi"});
  EXPECT_EQ(src.ext.ext_size, static_cast<Index>(vocab.size()) + 2);
  for (int trial = 0; trial < 100; ++trial) {
    DecoderState state = initial_state(bind, params, src);
    state.h = tape.constant(random_tensor(1, 3, rng, -2, 2));
    const std::optional<double> forced[] = {std::nullopt, 0.0, 0.3, 1.0};
    const DecoderStep step =
        decode_step(bind, params, src, state, static_cast<Index>(trial % vocab.size()),
                    forced[trial % 4]);
    EXPECT_NEAR(step.attention.value().sum(), 1.0, 1e-6);
    EXPECT_NEAR(step.p_vocab.value().sum(), 1.0, 1e-6);
    EXPECT_NEAR(step.p_extended.value().sum(), 1.0, 1e-6);
    const double pg = step.p_gen.value()(0, 0);
    EXPECT_GE(pg, 0.0);
    EXPECT_LE(pg, 1.0);
  }
}

TEST_F(GeneratorTest, ForcedGenerationProbabilityBoundaries) {
  ad::Tape tape(false);
  ad::Binder bind(tape, store);
  const EncodedSource src = encode(bind, {"a", "zebra", "a"});
  const DecoderState state = initial_state(bind, params, src);
  const Index V = static_cast<Index>(vocab.size());

  const DecoderStep gen = decode_step(bind, params, src, state, Vocab::kStart, 1.0);
  const Tensor& pv = gen.p_vocab.value();
  for (Index w = 0; w < V; ++w) EXPECT_EQ(gen.p_extended.value()(0, w), pv(0, w));
  EXPECT_EQ(gen.p_extended.value()(0, V), 0.0);

  const DecoderStep copy = decode_step(bind, params, src, state, Vocab::kStart, 0.0);
  const Tensor& a = copy.attention.value();
  const Tensor& pe = copy.p_extended.value();
  EXPECT_DOUBLE_EQ(pe(0, vocab.id("a")), a(0, 0) + a(2, 0));
  EXPECT_DOUBLE_EQ(pe(0, V), a(1, 0));
  EXPECT_EQ(pe(0, vocab.id("b")), 0.0);
}

TEST_F(GeneratorTest, CoverageIsRunningSumOfAttention) {
  ad::Tape tape(false);
  ad::Binder bind(tape, store);
  const EncodedSource src = encode(bind, {"a", "b", "c", "d"});
  DecoderState state = initial_state(bind, params, src);
  ad::Matrix sum = ad::Matrix::Zero(4, 1);
  for (int t = 0; t < 5; ++t) {
    EXPECT_LT((state.coverage.value().mat() - sum).cwiseAbs().maxCoeff(), 1e-15);
    const DecoderStep step = decode_step(bind, params, src, state, vocab.id("b"));
    if (t == 0) EXPECT_EQ(step.coverage_loss.value()(0, 0), 0.0);
    const ad::Matrix& a = step.attention.value().mat();
    EXPECT_NEAR(step.coverage_loss.value()(0, 0), a.cwiseMin(sum).sum(), 1e-15);
    sum += a;
    state = step.next;
  }
}

TEST(Attention, InvariantToConstantShift) {
  std::mt19937_64 rng(3);
  ad::Tape tape(false);
  const Tensor scores = random_tensor(6, 1, rng, -3, 3);
  Tensor shifted = scores;
  shifted.mat().array() += 41.5;
  const Var a = ad::softmax(tape.constant(scores), ad::Axis::Col);
  const Var b = ad::softmax(tape.constant(shifted), ad::Axis::Col);
  EXPECT_LT(a.value().max_abs_diff(b.value()), 1e-15);
}

TEST_F(GeneratorTest, TargetSequenceMapsCopyIdsAndStop) {
  const auto ext = ExtendedSource::build({"a", "zebra", "okapi"}, vocab);
  const auto t = target_sequence({{"okapi", "b"}, {"gnu"}}, ext, vocab, 100);
  const Index V = static_cast<Index>(vocab.size());
  EXPECT_EQ(t, (std::vector<Index>{V + 1, vocab.id("b"), Vocab::kUnk, Vocab::kStop}));
  EXPECT_EQ(target_sequence({{"a", "b", "c"}}, ext, vocab, 2).size(), 2u);
  EXPECT_EQ(ext.word(V, vocab), "zebra");
}

TEST_F(GeneratorTest, BuildSourceKeepsDocumentOrderAndLimit) {
  const auto doc = vocab_document();
  EXPECT_EQ(build_source(doc, {1, 0}, 150),
            (corpus::Tokens{"a", "b", "c", "d", "e", "f", "a", "b"}));
  EXPECT_EQ(build_source(doc, {1}, 3), (corpus::Tokens{"e", "f", "a"}));
}

TEST_F(GeneratorTest, CoverageWeightZeroDropsTerm) {
  ad::Tape tape(false);
  ad::Binder bind(tape, store);
  const EncodedSource src = encode(bind, {"a", "b", "zebra"});
  const auto targets = target_sequence({{"b", "zebra", "a"}}, src.ext, vocab, 100);
  const auto plain = generator_loss(bind, params, src, targets, 0.0);
  const auto covered = generator_loss(bind, params, src, targets, 1.0);
  EXPECT_NEAR(plain.total.value()(0, 0), plain.nll, 1e-12);
  EXPECT_NEAR(covered.total.value()(0, 0), covered.nll + covered.coverage, 1e-12);
  EXPECT_GT(covered.coverage, 0.0);
  EXPECT_EQ(plain.steps, 4u);
}

TEST_F(GeneratorTest, ThreeStepLossMatchesCentralDifferences) {
  const corpus::Tokens source = {"a", "zebra", "b", "a"};
  std::vector<ParamId> ids(store.size());
  std::iota(ids.begin(), ids.end(), 0);
  const auto r = testing::check_param_gradients(store, ids, [&](ad::Binder& bind) {
    const EncodedSource src = encode(bind, source);
    const auto targets = target_sequence({{"zebra", "b"}}, src.ext, vocab, 100);
    return generator_loss(bind, params, src, targets, 1.0).total;
  });
  EXPECT_LT(r.max_rel_error, 1e-6);
}

// Independent greedy loop over decode_step.
corpus::Tokens greedy_reference(const ad::ParameterStore& store, const GeneratorParams& p,
                                const corpus::Tokens& source,
                                const std::vector<std::vector<Index>>& mentions,
                                const Vocab& vocab, std::size_t max_steps) {
  ad::Tape tape(false);
  ad::Binder bind(tape, store);
  EncodedSource src = encode_input(bind, p, source, vocab);
  attach_entities(bind, p, src, mentions);
  DecoderState state = initial_state(bind, p, src);
  Index prev = Vocab::kStart;
  corpus::Tokens out;
  for (std::size_t t = 0; t < max_steps; ++t) {
    const DecoderStep step = decode_step(bind, p, src, state, prev);
    Index best = 0;
    step.p_extended.value().mat().row(0).maxCoeff(&best);
    if (best == Vocab::kStop) break;
    out.push_back(src.ext.word(best, vocab));
    state = step.next;
    prev = best;
  }
  return out;
}

TEST_F(GeneratorTest, BeamOfOneEqualsGreedy) {
  for (int trial = 0; trial < 5; ++trial) {
    for (std::size_t id = 0; id < store.size(); ++id) {
      auto& v = store[id].value;
      v = random_tensor(v.rows(), v.cols(), rng);
    }
    const corpus::Tokens source = {"a", "zebra", "c", "d", "okapi"};
    DecodeOptions opt;
    opt.max_steps = 12;
    const Generation g = generate(store, params, source, mentions, vocab, opt);
    EXPECT_EQ(g.tokens, greedy_reference(store, params, source, mentions, vocab, 12));
    EXPECT_EQ(generate(store, params, source, mentions, vocab, opt).tokens, g.tokens);
    opt.beam = 3;
    const Generation b = generate(store, params, source, mentions, vocab, opt);
    EXPECT_LE(b.steps, 12u);
  }
}

TEST_F(GeneratorTest, StopPeakedModelEmitsNothing) {
  store[params.out_b].value(0, Vocab::kStop) = 1e3;
  DecodeOptions opt;
  opt.force_p_gen = 1.0;
  for (std::size_t beam : {1u, 4u}) {
    opt.beam = beam;
    const Generation g = generate(store, params, {"a", "b"}, mentions, vocab, opt);
    EXPECT_TRUE(g.tokens.empty());
    EXPECT_EQ(g.steps, 1u);
  }
}

TEST_F(GeneratorTest, DecodeStopsAtStepLimitAndRecordsCopies) {
  store[params.out_b].value(0, Vocab::kStop) = -1e3;
  DecodeOptions opt;
  opt.max_steps = 7;
  opt.force_p_gen = 0.0;
  const Generation g = generate(store, params, {"zebra"}, mentions, vocab, opt);
  EXPECT_EQ(g.steps, 7u);
  EXPECT_EQ(g.tokens, corpus::Tokens(7, "zebra"));
  ASSERT_EQ(g.copy_spans.size(), 1u);
  EXPECT_EQ(g.copy_spans[0], (std::pair<std::size_t, std::size_t>{0, 7}));
  EXPECT_NE(g.to_json().find("\"copied_spans\""), std::string::npos);
  opt.beam = 0;
  EXPECT_THROW(generate(store, params, {"a"}, mentions, vocab, opt), ConfigError);
}

}  // namespace
}  // namespace kgsumm::generator
