#include "kgsumm/rl/rl.hpp"

#include <algorithm>
#include <sstream>

#include "kgsumm/errors.hpp"

namespace kgsumm::rl {

std::string to_string(Baseline b) { return b == Baseline::Greedy ? "greedy" : "none"; }

Baseline baseline_from_string(std::string_view name) {
  if (name == "none") return Baseline::None;
  if (name == "greedy") return Baseline::Greedy;
  throw ConfigError("unknown reward baseline: " + std::string(name));
}

std::vector<std::size_t> sample_without_replacement(std::span<const double> probs, std::size_t k,
                                                    std::mt19937_64& rng) {
  std::vector<double> w(probs.begin(), probs.end());
  for (double& v : w) {
    if (!(v >= 0.0)) throw ValidationError("sampling weights must be nonnegative");
  }
  const auto support = static_cast<std::size_t>(
      std::count_if(w.begin(), w.end(), [](double v) { return v > 0.0; }));
  k = std::min(k, support);
  std::vector<std::size_t> out;
  out.reserve(k);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (out.size() < k) {
    double total = 0.0;
    for (double v : w) total += v;
    const double target = unit(rng) * total;
    double acc = 0.0;
    std::size_t pick = w.size();
    std::size_t last_positive = w.size();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] <= 0.0) continue;
      last_positive = i;
      acc += w[i];
      if (target < acc) {
        pick = i;
        break;
      }
    }
    if (pick == w.size()) pick = last_positive;  // rounding at the top end
    out.push_back(pick);
    w[pick] = 0.0;
  }
  return out;
}

RlSample make_sample(std::vector<std::size_t> sentences, std::vector<std::size_t> entities,
                     std::size_t m, std::size_t n) {
  RlSample s;
  std::sort(sentences.begin(), sentences.end());
  std::sort(entities.begin(), entities.end());
  s.target_sentence = Tensor(static_cast<ad::Index>(m), 1);
  s.target_entity = Tensor(static_cast<ad::Index>(n), 1);
  for (std::size_t i : sentences) {
    s.target_sentence(static_cast<ad::Index>(i), 0) = 1.0 / static_cast<double>(sentences.size());
  }
  for (std::size_t j : entities) {
    s.target_entity(static_cast<ad::Index>(j), 0) = 1.0 / static_cast<double>(entities.size());
  }
  s.sentences = std::move(sentences);
  s.entities = std::move(entities);
  return s;
}

RlSample sample_actions(const selector::SelectorOutput& out, const RlConfig& config,
                        std::mt19937_64& rng) {
  auto sents = sample_without_replacement(out.p_sentence.flat(), config.k_sentences, rng);
  auto ents = sample_without_replacement(out.p_entity.flat(), config.k_entities, rng);
  return make_sample(std::move(sents), std::move(ents),
                     static_cast<std::size_t>(out.p_sentence.rows()),
                     static_cast<std::size_t>(out.p_entity.rows()));
}

Var rl_loss(const RlSample& sample, const selector::SelectorOutput& out, double reward,
            double lambda_entity) {
  Var ce = ad::cross_entropy(sample.target_sentence, out.sentence_logp);
  if (out.entity_logp.rows() > 0 && !sample.entities.empty()) {
    ce = ad::add(ce, ad::scale(ad::cross_entropy(sample.target_entity, out.entity_logp),
                               lambda_entity));
  }
  return ad::scale(ce, reward);
}

Var combined_selector_loss(Var base, Var rl, double lambda_rl) {
  if (lambda_rl < 0.0) throw ConfigError("lambda_rl must be nonnegative");
  return ad::add(base, ad::scale(rl, lambda_rl));
}

std::uint64_t episode_seed(std::uint64_t seed, std::string_view doc_id) {
  std::uint64_t h = 1469598103934665603ULL ^ seed;
  for (unsigned char c : doc_id) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

}  // namespace

std::string episode_log_line(std::string_view doc_id, const RlSample& sample, double base_loss,
                             double rl_loss, double total) {
  std::ostringstream os;
  os.precision(9);
  os << doc_id << '\t' << join(sample.sentences) << '\t' << join(sample.entities) << '\t'
     << sample.reward << '\t' << base_loss << '\t' << rl_loss << '\t' << total;
  return os.str();
}

}  // namespace kgsumm::rl
