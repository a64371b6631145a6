#include "kgsumm/training/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "kgsumm/errors.hpp"
#include "kgsumm/util/hash.hpp"
#include "kgsumm/util/parallel.hpp"

namespace kgsumm::training {

std::string to_string(Phase p) {
  switch (p) {
    case Phase::Selector: return "selector";
    case Phase::Generator: return "generator";
    case Phase::Rl: return "rl";
  }
  return "selector";
}

Phase phase_from_string(std::string_view name) {
  if (name == "selector") return Phase::Selector;
  if (name == "generator") return Phase::Generator;
  if (name == "rl") return Phase::Rl;
  throw ConfigError("unknown phase: " + std::string(name));
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_integer(std::string_view key, std::string_view v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("invalid integer for " + std::string(key) + ": '" + std::string(v) + "'");
  }
  return out;
}

double parse_real(std::string_view key, std::string_view v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(std::string(v), &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("invalid number for " + std::string(key) + ": '" + std::string(v) + "'");
  }
}

std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct Field {
  std::function<void(TrainConfig&, std::string_view)> set;
  std::function<std::string(const TrainConfig&)> get;
};

template <typename T>
Field integer_field(T TrainConfig::*member) {
  return {[member](TrainConfig& c, std::string_view v) {
            c.*member = parse_integer<T>("value", v);
          },
          [member](const TrainConfig& c) { return std::to_string(c.*member); }};
}

Field real_field(double TrainConfig::*member) {
  return {[member](TrainConfig& c, std::string_view v) { c.*member = parse_real("value", v); },
          [member](const TrainConfig& c) { return format_real(c.*member); }};
}

const std::map<std::string, Field, std::less<>>& fields() {
  static const std::map<std::string, Field, std::less<>> table = {
      {"seed", integer_field(&TrainConfig::seed)},
      {"batch_size", integer_field(&TrainConfig::batch_size)},
      {"max_steps", integer_field(&TrainConfig::max_steps)},
      {"eval_interval", integer_field(&TrainConfig::eval_interval)},
      {"patience", integer_field(&TrainConfig::patience)},
      {"learning_rate", real_field(&TrainConfig::learning_rate)},
      {"clip_norm", real_field(&TrainConfig::clip_norm)},
      {"threads", integer_field(&TrainConfig::threads)},
      {"vocab_size", integer_field(&TrainConfig::vocab_size)},
      {"max_sentences", integer_field(&TrainConfig::max_sentences)},
      {"max_entities", integer_field(&TrainConfig::max_entities)},
      {"word_dim", integer_field(&TrainConfig::word_dim)},
      {"entity_dim", integer_field(&TrainConfig::entity_dim)},
      {"node_dim", integer_field(&TrainConfig::node_dim)},
      {"encoder_hidden", integer_field(&TrainConfig::encoder_hidden)},
      {"mention_hidden", integer_field(&TrainConfig::mention_hidden)},
      {"selector_hidden", integer_field(&TrainConfig::selector_hidden)},
      {"decoder_hidden", integer_field(&TrainConfig::decoder_hidden)},
      {"attention_dim", integer_field(&TrainConfig::attention_dim)},
      {"levels", integer_field(&TrainConfig::levels)},
      {"max_input_tokens", integer_field(&TrainConfig::max_input_tokens)},
      {"max_decode_steps", integer_field(&TrainConfig::max_decode_steps)},
      {"beam", integer_field(&TrainConfig::beam)},
      {"lambda_entity", real_field(&TrainConfig::lambda_entity)},
      {"lambda_relatedness", real_field(&TrainConfig::lambda_relatedness)},
      {"lambda_rl", real_field(&TrainConfig::lambda_rl)},
      {"lambda_coverage", real_field(&TrainConfig::lambda_coverage)},
      {"k_sentences", integer_field(&TrainConfig::k_sentences)},
      {"k_entities", integer_field(&TrainConfig::k_entities)},
      {"baseline",
       {[](TrainConfig& c, std::string_view v) { c.baseline = rl::baseline_from_string(v); },
        [](const TrainConfig& c) { return rl::to_string(c.baseline); }}},
      {"rouge_protocol",
       {[](TrainConfig& c, std::string_view v) {
          if (v != "full_f1" && v != "limited_recall") {
            throw ConfigError("rouge_protocol must be full_f1 or limited_recall");
          }
          c.rouge_protocol = std::string(v);
        },
        [](const TrainConfig& c) { return c.rouge_protocol; }}},
      {"ablations",
       {[](TrainConfig& c, std::string_view v) {
          c.ablations.clear();
          std::string item;
          std::istringstream is{std::string(v)};
          while (std::getline(is, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            bool known = false;
            for (auto a : kAblations) known = known || a == item;
            if (!known) throw ConfigError("unknown ablation: " + item);
            c.ablations.insert(item);
          }
        },
        [](const TrainConfig& c) {
          std::string s;
          for (const auto& a : c.ablations) s += (s.empty() ? "" : ",") + a;
          return s;
        }}},
  };
  return table;
}

}  // namespace

void TrainConfig::set(std::string_view key, std::string_view value) {
  auto it = fields().find(key);
  if (it == fields().end()) throw ConfigError("unknown config key: " + std::string(key));
  try {
    it->second.set(*this, trim(value));
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

void TrainConfig::validate() const {
  auto positive = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string(what) + " must be positive");
  };
  positive(batch_size > 0, "batch_size");
  positive(eval_interval > 0, "eval_interval");
  positive(learning_rate > 0.0, "learning_rate");
  positive(clip_norm > 0.0, "clip_norm");
  positive(vocab_size > corpus::Vocab::kSpecialCount, "vocab_size beyond the special tokens");
  positive(max_sentences > 0 && max_entities > 0, "truncation limits");
  positive(word_dim > 0 && entity_dim > 0 && node_dim > 0 && encoder_hidden > 0 &&
               mention_hidden > 0 && selector_hidden > 0 && decoder_hidden > 0 &&
               attention_dim > 0 && levels > 0,
           "every dimension");
  positive(max_input_tokens > 0 && max_decode_steps > 0 && beam > 0, "decode limits");
  positive(k_sentences > 0 && k_entities > 0, "k");
  if (node_dim != 2 * encoder_hidden) {
    throw ConfigError("node_dim must equal 2 * encoder_hidden");
  }
  if (lambda_entity < 0 || lambda_relatedness < 0 || lambda_rl < 0 || lambda_coverage < 0) {
    throw ConfigError("loss weights must be nonnegative");
  }
  int modes = 0;
  for (auto a : {"no_edge_weights", "no_edge_types", "mean_aggregation"}) modes += ablated(a);
  if (modes > 1) throw ConfigError("at most one propagation ablation may be set");
}

std::string TrainConfig::to_text() const {
  std::string out;
  for (const auto& [key, field] : fields()) out += key + "=" + field.get(*this) + "\n";
  return out;
}

std::uint64_t TrainConfig::hash() const { return util::fnv1a(to_text()); }

encoder::EncoderConfig TrainConfig::encoder() const {
  encoder::EncoderConfig c;
  c.word_dim = word_dim;
  c.entity_dim = entity_dim;
  c.hidden = encoder_hidden;
  c.mention_hidden = mention_hidden;
  c.node_dim = node_dim;
  c.entity_level = !ablated("no_entity_level_embeddings");
  return c;
}

rhgnn::RhgnnConfig TrainConfig::rhgnn() const {
  rhgnn::RhgnnConfig c;
  c.dim = node_dim;
  c.levels = levels;
  if (ablated("no_edge_weights")) c.mode = rhgnn::Mode::NoEdgeWeights;
  if (ablated("no_edge_types")) c.mode = rhgnn::Mode::NoEdgeTypes;
  if (ablated("mean_aggregation")) c.mode = rhgnn::Mode::MeanAggregation;
  return c;
}

selector::SelectorConfig TrainConfig::selector() const {
  selector::SelectorConfig c;
  c.dim = node_dim;
  c.hidden = selector_hidden;
  c.lambda_entity = lambda_entity;
  c.lambda_relatedness = ablated("no_ee_supervision") ? 0.0 : lambda_relatedness;
  return c;
}

generator::GeneratorConfig TrainConfig::generator() const {
  generator::GeneratorConfig c;
  c.word_dim = word_dim;
  c.hidden = encoder_hidden;
  c.mention_hidden = mention_hidden;
  c.decoder_hidden = decoder_hidden;
  c.attention_dim = attention_dim;
  c.max_input_tokens = max_input_tokens;
  c.max_decode_steps = max_decode_steps;
  c.lambda_coverage = lambda_coverage;
  return c;
}

rl::RlConfig TrainConfig::rl() const {
  rl::RlConfig c;
  c.lambda_rl = ablated("no_rl") ? 0.0 : lambda_rl;
  c.k_sentences = k_sentences;
  c.k_entities = k_entities;
  c.baseline = baseline;
  return c;
}

graph::GraphOptions TrainConfig::graph() const {
  const bool keep = !ablated("no_ee_ss_edges");
  return {keep, keep};
}

corpus::TruncationConfig TrainConfig::truncation() const { return {max_sentences, max_entities}; }

std::size_t TrainConfig::worker_threads() const {
  return threads > 0 ? threads : util::default_threads();
}

TrainConfig parse_config_text(const std::string& text, TrainConfig base) {
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", line);
    try {
      base.set(trim(s.substr(0, eq)), s.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), line);
    }
  }
  return base;
}

TrainConfig load_config(const std::filesystem::path& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), std::move(base));
}

}  // namespace kgsumm::training
