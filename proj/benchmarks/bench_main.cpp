#include <benchmark/benchmark.h>

#include <random>

#include "kgsumm/autodiff/binder.hpp"
#include "kgsumm/encoder/gru.hpp"
#include "kgsumm/graph/graph.hpp"
#include "kgsumm/rhgnn/rhgnn.hpp"
#include "kgsumm/rouge/rouge.hpp"
#include "kgsumm/synthetic/synthetic.hpp"
#include "kgsumm/training/model.hpp"
#include "kgsumm/training/trainer.hpp"

namespace {

using namespace kgsumm;

ad::Tensor random_tensor(ad::Index r, ad::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  ad::Tensor t(r, c);
  for (auto& v : t.flat()) v = d(rng);
  return t;
}

void BM_GruSequenceBackward(benchmark::State& state) {
  const auto T = static_cast<ad::Index>(state.range(0));
  std::mt19937_64 rng(1);
  ad::ParameterStore store;
  const auto cell = encoder::GruCell::create(store, "gru", 128, 256, rng);
  const ad::Tensor x = random_tensor(T, 128, rng);
  for (auto _ : state) {
    ad::Tape tape;
    ad::Binder bind(tape, store);
    ad::Gradients grads(store);
    auto run = encoder::run_gru(bind, cell, tape.constant(x), false);
    tape.backward(ad::sum(run.states), &grads);
    benchmark::DoNotOptimize(grads[cell.w_hidden].mat().data());
  }
}
BENCHMARK(BM_GruSequenceBackward)->Arg(10)->Arg(50)->Arg(150);

void BM_GruUnrolledBackward(benchmark::State& state) {
  const auto T = static_cast<ad::Index>(state.range(0));
  std::mt19937_64 rng(1);
  ad::ParameterStore store;
  const auto cell = encoder::GruCell::create(store, "gru", 128, 256, rng);
  const ad::Tensor x = random_tensor(T, 128, rng);
  for (auto _ : state) {
    ad::Tape tape;
    ad::Binder bind(tape, store);
    ad::Gradients grads(store);
    auto run = encoder::run_gru_unrolled(bind, cell, tape.constant(x), false);
    tape.backward(ad::sum(run.states), &grads);
    benchmark::DoNotOptimize(grads[cell.w_hidden].mat().data());
  }
}
BENCHMARK(BM_GruUnrolledBackward)->Arg(10)->Arg(50);

void BM_RhgnnStackBackward(benchmark::State& state) {
  const auto nodes = static_cast<ad::Index>(state.range(0));
  std::mt19937_64 rng(2);
  ad::ParameterStore store;
  rhgnn::RhgnnConfig cfg;
  const auto params = rhgnn::RhgnnParams::create(store, "rhgnn", cfg, rng);
  rhgnn::Adjacency adj;
  std::bernoulli_distribution edge(0.3);
  for (auto& a : adj) {
    a = ad::Tensor(nodes, nodes);
    for (ad::Index i = 0; i < nodes; ++i) {
      for (ad::Index j = i + 1; j < nodes; ++j) {
        if (edge(rng)) a(i, j) = a(j, i) = 1.0;
      }
    }
  }
  const auto prop = rhgnn::prepare_propagation(adj, cfg.mode);
  const ad::Tensor x = random_tensor(nodes, cfg.dim, rng);
  for (auto _ : state) {
    ad::Tape tape;
    ad::Binder bind(tape, store);
    ad::Gradients grads(store);
    auto out = rhgnn::stack_forward(bind, params, tape.constant(x), prop, nodes / 2);
    tape.backward(ad::sum(out.nodes), &grads);
    benchmark::DoNotOptimize(grads.global_norm());
  }
}
BENCHMARK(BM_RhgnnStackBackward)->Arg(16)->Arg(64);

struct SelectorFixture {
  synthetic::SyntheticCorpus corpus;
  std::unique_ptr<training::Model> model;
  std::vector<training::PreparedDocument> prepared;

  SelectorFixture() {
    synthetic::SyntheticConfig sc;
    sc.documents = 30;
    corpus = synthetic::generate(sc);
    training::TrainConfig tc;
    tc.threads = 1;
    model = training::Model::create(tc, corpus.documents);
    for (const auto& d : corpus.documents) {
      prepared.push_back(training::prepare_document(*model, d, corpus.cooccurrence));
    }
  }
};

SelectorFixture& selector_fixture() {
  static SelectorFixture f;
  return f;
}

void BM_SelectorForward(benchmark::State& state) {
  auto& f = selector_fixture();
  std::size_t i = 0;
  for (auto _ : state) {
    const auto sel = training::select_document(*f.model, f.prepared[i++ % f.prepared.size()]);
    benchmark::DoNotOptimize(sel.sentences.data());
  }
}
BENCHMARK(BM_SelectorForward)->Unit(benchmark::kMillisecond);

void BM_SelectorTrainStep(benchmark::State& state) {
  auto& f = selector_fixture();
  training::TrainState ts;
  training::Trainer trainer(*f.model, ts, f.corpus.cooccurrence);
  std::vector<const training::PreparedDocument*> batch;
  for (std::size_t i = 0; i < static_cast<std::size_t>(state.range(0)); ++i) {
    batch.push_back(&f.prepared[i % f.prepared.size()]);
  }
  for (auto _ : state) {
    const auto losses = trainer.step(training::Phase::Selector, batch);
    benchmark::DoNotOptimize(losses.total);
  }
}
BENCHMARK(BM_SelectorTrainStep)->Arg(1)->Arg(15)->Unit(benchmark::kMillisecond);

void BM_RougeTriple(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> word(0, 200);
  rouge::Tokens a, b;
  for (std::size_t i = 0; i < n; ++i) {
    a.push_back("w" + std::to_string(word(rng)));
    b.push_back("w" + std::to_string(word(rng)));
  }
  for (auto _ : state) {
    const auto s = rouge::score_all(a, b);
    benchmark::DoNotOptimize(s.rl.f1);
  }
}
BENCHMARK(BM_RougeTriple)->Arg(100)->Arg(1000);

void BM_BuildGraph(benchmark::State& state) {
  auto& f = selector_fixture();
  std::size_t i = 0;
  for (auto _ : state) {
    const auto g = graph::build_graph(f.corpus.documents[i++ % f.corpus.documents.size()],
                                      f.corpus.cooccurrence);
    benchmark::DoNotOptimize(g.se_count());
  }
}
BENCHMARK(BM_BuildGraph);

}  // namespace

BENCHMARK_MAIN();
