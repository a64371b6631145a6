#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "kgsumm/encoder/encoder.hpp"
#include "kgsumm/generator/generator.hpp"
#include "kgsumm/graph/graph.hpp"
#include "kgsumm/rhgnn/rhgnn.hpp"
#include "kgsumm/rl/rl.hpp"
#include "kgsumm/selector/selector.hpp"

namespace kgsumm::training {

inline constexpr std::string_view kAblations[] = {
    "no_entity_level_embeddings", "no_ee_supervision", "no_edge_weights", "no_edge_types",
    "mean_aggregation",           "no_ee_ss_edges",    "no_rl",
};

enum class Phase { Selector, Generator, Rl };
std::string to_string(Phase p);
Phase phase_from_string(std::string_view name);

struct TrainConfig {
  std::uint64_t seed = 1;
  std::size_t batch_size = 15;
  std::size_t max_steps = 3000;
  std::size_t eval_interval = 100;
  std::size_t patience = 5;
  double learning_rate = 1e-3;
  double clip_norm = 2.0;
  std::size_t threads = 0;  // 0: RHGNN_SUMM_THREADS or 1

  std::size_t vocab_size = 40000;
  std::size_t max_sentences = 100;
  std::size_t max_entities = 100;

  ad::Index word_dim = 128;
  ad::Index entity_dim = 128;
  ad::Index node_dim = 512;
  ad::Index encoder_hidden = 256;
  ad::Index mention_hidden = 192;
  ad::Index selector_hidden = 256;
  ad::Index decoder_hidden = 512;
  ad::Index attention_dim = 512;
  int levels = 2;

  std::size_t max_input_tokens = 150;
  std::size_t max_decode_steps = 100;
  std::size_t beam = 1;

  double lambda_entity = 0.42;
  double lambda_relatedness = 0.33;
  double lambda_rl = 0.6;
  double lambda_coverage = 1.0;
  std::size_t k_sentences = 4;
  std::size_t k_entities = 4;
  rl::Baseline baseline = rl::Baseline::None;
  // "full_f1" (full-length F1) or "limited_recall" (recall at reference length).
  std::string rouge_protocol = "full_f1";

  std::set<std::string> ablations;

  // Throws ConfigError on a bad key or value; checks all invariants.
  void set(std::string_view key, std::string_view value);
  void validate() const;
  bool ablated(std::string_view name) const { return ablations.contains(std::string(name)); }

  // Sorted "key=value" lines; the hash covers exactly this text.
  std::string to_text() const;
  std::uint64_t hash() const;

  // Derived component configurations with ablations applied.
  encoder::EncoderConfig encoder() const;
  rhgnn::RhgnnConfig rhgnn() const;
  selector::SelectorConfig selector() const;
  generator::GeneratorConfig generator() const;
  rl::RlConfig rl() const;
  graph::GraphOptions graph() const;
  corpus::TruncationConfig truncation() const;
  std::size_t worker_threads() const;
};

// Flat key=value text; '#' starts a comment; blank lines ignored. Keys are
// applied in order onto `base`. Throws ParseError with the line number.
TrainConfig parse_config_text(const std::string& text, TrainConfig base = {});
TrainConfig load_config(const std::filesystem::path& path, TrainConfig base = {});

}  // namespace kgsumm::training
