#include "kgsumm/synthetic/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#include "kgsumm/corpus/oracle.hpp"
#include "kgsumm/errors.hpp"

namespace kgsumm::synthetic {

namespace {

using corpus::AnnotatedDocument;
using corpus::Tokens;

struct PoolEntity {
  std::string token;
  std::optional<std::string> kg_id;
};

std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

std::vector<std::size_t> choose(std::mt19937_64& rng, std::size_t pool, std::size_t k) {
  std::vector<std::size_t> idx(pool);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[uniform(rng, i, pool - 1)]);
  idx.resize(k);
  return idx;
}

std::string filler(std::mt19937_64& rng, const SyntheticConfig& c) {
  return "w" + std::to_string(uniform(rng, 0, c.filler_pool - 1));
}

void check(const SyntheticConfig& c) {
  if (c.sentences == 0 || c.planted == 0 || c.planted > c.sentences) {
    throw ConfigError("synthetic corpus: planted sentences must be in [1, sentences]");
  }
  if (c.salient_entities > c.entities || c.entities > c.entity_pool) {
    throw ConfigError("synthetic corpus: entity counts exceed the available pool");
  }
  if (c.entities > c.salient_entities && c.planted == c.sentences) {
    throw ConfigError("synthetic corpus: non-salient entities need a filler sentence");
  }
  if (c.salient_entities > 0 && c.planted == 0) {
    throw ConfigError("synthetic corpus: salient entities need a planted sentence");
  }
  if (c.keyword_pool < 5 * c.planted || c.filler_pool == 0) {
    throw ConfigError("synthetic corpus: keyword or filler pool too small");
  }
  if (c.dev_fraction < 0.0 || c.test_fraction < 0.0 || c.dev_fraction + c.test_fraction > 1.0) {
    throw ConfigError("synthetic corpus: split fractions must be nonnegative and sum to <= 1");
  }
}

}  // namespace

SyntheticCorpus generate(const SyntheticConfig& c) {
  check(c);
  std::mt19937_64 rng(c.seed);
  std::bernoulli_distribution linked(c.linked_fraction);
  std::vector<PoolEntity> pool;
  for (std::size_t g = 0; g < c.entity_pool; ++g) {
    PoolEntity e;
    e.token = "ent" + std::to_string(g);
    if (linked(rng)) e.kg_id = "Q" + std::to_string(1000 + g);
    pool.push_back(std::move(e));
  }

  SyntheticCorpus out;
  const auto n_test = static_cast<std::size_t>(c.test_fraction * static_cast<double>(c.documents));
  const auto n_dev = static_cast<std::size_t>(c.dev_fraction * static_cast<double>(c.documents));
  const std::size_t n_train = c.documents - n_test - n_dev;
  std::uniform_int_distribution<std::uint64_t> count_dist(5, 50);

  for (std::size_t d = 0; d < c.documents; ++d) {
    AnnotatedDocument doc;
    doc.id = "syn-" + std::to_string(d);
    doc.split = d < n_train ? corpus::Split::Train
                            : (d < n_train + n_dev ? corpus::Split::Dev : corpus::Split::Test);

    std::vector<std::size_t> planted = choose(rng, c.sentences, c.planted);
    std::sort(planted.begin(), planted.end());
    std::vector<bool> is_planted(c.sentences, false);
    for (std::size_t s : planted) is_planted[s] = true;
    std::vector<std::size_t> fillers;
    for (std::size_t s = 0; s < c.sentences; ++s) {
      if (!is_planted[s]) fillers.push_back(s);
    }

    // Document entity order: salient first, then the rest.
    const std::vector<std::size_t> picked = choose(rng, c.entity_pool, c.entities);
    for (std::size_t j = 0; j < c.entities; ++j) {
      doc.entities.push_back({pool[picked[j]].token, pool[picked[j]].kg_id, {}});
    }

    // Which entities each sentence mentions.
    std::vector<std::vector<std::size_t>> mentions_in(c.sentences);
    for (std::size_t j = 0; j < c.salient_entities; ++j) {
      mentions_in[planted[j % planted.size()]].push_back(j);
    }
    for (std::size_t p = c.salient_entities; p < planted.size() && c.salient_entities > 0; ++p) {
      mentions_in[planted[p]].push_back(uniform(rng, 0, c.salient_entities - 1));
    }
    for (std::size_t j = c.salient_entities; j < c.entities; ++j) {
      const std::size_t times = uniform(rng, 1, 2);
      for (std::size_t t = 0; t < times; ++t) {
        mentions_in[fillers[uniform(rng, 0, fillers.size() - 1)]].push_back(j);
      }
    }

    const std::vector<std::size_t> keywords = choose(rng, c.keyword_pool, 4 * c.planted);
    std::size_t next_keyword = 0;
    doc.sentences.resize(c.sentences);
    std::vector<std::vector<std::size_t>> entity_at(c.sentences);  // entity per token or npos
    constexpr std::size_t kNone = static_cast<std::size_t>(-1);

    for (std::size_t s = 0; s < c.sentences; ++s) {
      Tokens& sent = doc.sentences[s];
      std::vector<std::size_t>& owner = entity_at[s];
      if (is_planted[s]) {
        std::vector<std::pair<std::string, std::size_t>> core;
        const std::size_t kw = uniform(rng, 3, 4);
        for (std::size_t k = 0; k < kw; ++k) {
          core.emplace_back("k" + std::to_string(keywords[next_keyword++]), kNone);
        }
        for (std::size_t j : mentions_in[s]) core.emplace_back(doc.entities[j].name, j);
        std::shuffle(core.begin(), core.end(), rng);
        Tokens summary_sentence;
        sent.push_back(filler(rng, c));
        owner.push_back(kNone);
        for (auto& [tok, j] : core) {
          summary_sentence.push_back(tok);
          sent.push_back(tok);
          owner.push_back(j);
        }
        if (uniform(rng, 0, 1) == 1) {
          sent.push_back(filler(rng, c));
          owner.push_back(kNone);
        }
        doc.summary.push_back(std::move(summary_sentence));
      } else {
        const std::size_t len = uniform(rng, 5, 8);
        for (std::size_t t = 0; t < len; ++t) {
          sent.push_back(filler(rng, c));
          owner.push_back(kNone);
        }
        for (std::size_t j : mentions_in[s]) {
          const std::size_t pos = uniform(rng, 0, sent.size());
          sent.insert(sent.begin() + static_cast<std::ptrdiff_t>(pos), doc.entities[j].name);
          owner.insert(owner.begin() + static_cast<std::ptrdiff_t>(pos), j);
        }
      }
    }
    for (std::size_t s = 0; s < c.sentences; ++s) {
      for (std::size_t t = 0; t < entity_at[s].size(); ++t) {
        const std::size_t j = entity_at[s][t];
        if (j != kNone) doc.entities[j].mentions.push_back({s, t, t + 1, doc.sentences[s][t]});
      }
    }

    for (std::size_t a = 0; a < c.salient_entities; ++a) {
      for (std::size_t b = a + 1; b < c.salient_entities; ++b) {
        const auto& ea = doc.entities[a];
        const auto& eb = doc.entities[b];
        if (ea.kg_id && eb.kg_id) out.cooccurrence.set(*ea.kg_id, *eb.kg_id, count_dist(rng));
      }
    }

    // Order entities by first mention.
    std::vector<std::size_t> order(c.entities);
    std::iota(order.begin(), order.end(), 0);
    auto first = [&](std::size_t j) {
      const auto& m = doc.entities[j].mentions.front();
      return std::make_pair(m.sentence, m.start);
    };
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return first(a) < first(b); });
    std::vector<corpus::Entity> sorted;
    std::vector<std::size_t> salient;
    for (std::size_t r = 0; r < order.size(); ++r) {
      sorted.push_back(std::move(doc.entities[order[r]]));
      if (order[r] < c.salient_entities) salient.push_back(r);
    }
    doc.entities = std::move(sorted);

    corpus::validate(doc);
    corpus::ensure_oracle_labels(doc, true);
    out.documents.push_back(std::move(doc));
    out.planted_sentences.push_back(std::move(planted));
    out.salient_entities.push_back(std::move(salient));
  }
  return out;
}

}  // namespace kgsumm::synthetic
