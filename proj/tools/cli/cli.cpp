#include "cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kgsumm/corpus/corpus_io.hpp"
#include "kgsumm/corpus/oracle.hpp"
#include "kgsumm/errors.hpp"
#include "kgsumm/graph/density.hpp"
#include "kgsumm/synthetic/synthetic.hpp"
#include "kgsumm/training/trainer.hpp"
#include "kgsumm/util/hash.hpp"
#include "kgsumm/util/log.hpp"

namespace kgsumm::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using training::TrainConfig;

namespace {

struct Options {
  std::string corpus;
  std::string cooc;
  std::string entity_emb;
  std::string word_emb;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::string checkpoint;
  std::string mode;
  std::vector<std::string> density;
  std::vector<std::string> ablate;
  std::vector<std::string> set;
  std::string split = "test";
  std::size_t docs = 200;
  std::size_t sentences = 10;
  std::size_t entities = 6;
};

// Keys that may change on a loaded checkpoint without altering its shapes.
const std::set<std::string> kTrainingKeys = {
    "seed", "batch_size", "max_steps", "eval_interval", "patience", "learning_rate",
    "clip_norm", "threads", "beam", "lambda_entity", "lambda_relatedness", "lambda_rl",
    "lambda_coverage", "k_sentences", "k_entities", "baseline", "rouge_protocol",
    "max_decode_steps"};
const std::set<std::string> kTrainingAblations = {"no_ee_supervision", "no_rl"};

class Run {
 public:
  Run(std::string command, const Options& opt) : command_(std::move(command)), opt_(opt) {}

  fs::path out_dir() const { return opt_.out; }

  void input(const std::string& path) {
    if (path.empty()) return;
    if (!fs::exists(path)) throw IoError("missing input file: " + path);
    inputs_.push_back({path, util::hex64(util::file_digest(path))});
  }

  void output(const fs::path& p) { outputs_.push_back(p.filename().string()); }

  void write_text(const fs::path& name, const std::string& text) {
    fs::create_directories(out_dir());
    std::ofstream f(out_dir() / name, std::ios::binary);
    f << text;
    if (!f) throw IoError("cannot write " + (out_dir() / name).string());
    output(name);
  }

  void finish(const std::optional<TrainConfig>& config) {
    ordered_json j;
    j["command"] = command_;
    if (config) {
      j["config_hash"] = util::hex64(config->hash());
      j["seed"] = config->seed;
    } else {
      j["config_hash"] = nullptr;
      j["seed"] = opt_.seed ? ordered_json(*opt_.seed) : ordered_json(nullptr);
    }
    auto ins = ordered_json::array();
    for (const auto& [path, digest] : inputs_) ins.push_back({{"path", path}, {"fnv1a64", digest}});
    j["inputs"] = ins;
    j["outputs"] = outputs_;
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::ostringstream ts;
    ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
    j["timestamp"] = ts.str();
    fs::create_directories(out_dir());
    std::ofstream f(out_dir() / "run.json");
    f << j.dump(2) << '\n';
  }

 private:
  std::string command_;
  const Options& opt_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::string> outputs_;
};

void apply_overrides(TrainConfig& c, const Options& opt, bool loaded) {
  auto guard = [&](const std::string& key) {
    if (loaded && !kTrainingKeys.contains(key)) {
      throw ConfigError("'" + key + "' changes the model shape and cannot override a checkpoint");
    }
  };
  if (!opt.config.empty()) {
    const TrainConfig before = c;
    const TrainConfig after = training::load_config(opt.config, c);
    if (loaded) {
      // Compare key by key so only shape-neutral keys may differ.
      std::istringstream a(before.to_text()), b(after.to_text());
      std::string la, lb;
      while (std::getline(a, la) && std::getline(b, lb)) {
        if (la != lb) guard(la.substr(0, la.find('=')));
      }
    }
    c = after;
  }
  for (const auto& kv : opt.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got " + kv);
    guard(kv.substr(0, eq));
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (opt.seed) c.seed = *opt.seed;
  for (const auto& a : opt.ablate) {
    if (loaded && !kTrainingAblations.contains(a)) {
      throw ConfigError("ablation '" + a + "' changes the model and needs a fresh selector run");
    }
    bool known = false;
    for (auto k : training::kAblations) known = known || k == a;
    if (!known) throw ConfigError("unknown ablation: " + a);
    c.ablations.insert(a);
  }
  c.validate();
}

std::vector<corpus::AnnotatedDocument> read_corpus(Run& run, const Options& opt,
                                                   const corpus::TruncationConfig& t = {}) {
  if (opt.corpus.empty()) throw ConfigError("--corpus is required");
  run.input(opt.corpus);
  return corpus::load_corpus(opt.corpus, t);
}

corpus::CooccurrenceTable read_cooc(Run& run, const Options& opt) {
  if (opt.cooc.empty()) return {};
  run.input(opt.cooc);
  return corpus::CooccurrenceTable::load(opt.cooc);
}

std::string graph_json(const corpus::AnnotatedDocument& d, const graph::SentenceEntityGraph& g) {
  auto edges = [](const std::vector<graph::Edge>& es) {
    auto a = ordered_json::array();
    for (const auto& e : es) a.push_back({e.i, e.j, e.weight});
    return a;
  };
  ordered_json j;
  j["id"] = d.id;
  j["sentences"] = g.sentences;
  j["entities"] = g.entities;
  j["ss"] = edges(g.ss);
  j["se"] = edges(g.se);
  j["ee"] = edges(g.ee);
  j["se_density"] = graph::se_density(g);
  return j.dump();
}

int cmd_build_graphs(const Options& opt, std::ostream& out) {
  Run run("build-graphs", opt);
  const auto docs = read_corpus(run, opt);
  const auto cooc = read_cooc(run, opt);
  std::string lines;
  std::vector<double> densities;
  for (const auto& d : docs) {
    const auto g = graph::build_graph(d, cooc);
    densities.push_back(graph::se_density(g));
    lines += graph_json(d, g) + "\n";
  }
  run.write_text("graphs.jsonl", lines);
  run.write_text("density_histogram.csv", graph::density_histogram(densities).to_csv());
  run.finish(std::nullopt);
  out << "wrote " << docs.size() << " graphs to " << opt.out << "\n";
  return 0;
}

int cmd_stats(const Options& opt, std::ostream& out) {
  Run run("stats", opt);
  const auto docs = read_corpus(run, opt);
  const std::string report = graph::corpus_stats(docs).to_json();
  run.write_text("stats.json", report + "\n");
  run.finish(std::nullopt);
  out << report << "\n";
  return 0;
}

std::string threshold_file(const graph::DensityThreshold& t) {
  std::ostringstream os;
  os << (t.op == graph::DensityThreshold::Op::Less ? "lt" : "ge") << t.value << ".jsonl";
  return "density_" + os.str();
}

int cmd_partition(const Options& opt, std::ostream& out) {
  Run run("partition", opt);
  const auto docs = read_corpus(run, opt);
  std::vector<graph::DensityThreshold> thresholds;
  if (opt.density.empty()) {
    for (double v : {0.5, 0.6, 0.7, 0.8}) thresholds.push_back({graph::DensityThreshold::Op::Less, v});
  }
  for (const auto& d : opt.density) thresholds.push_back(graph::DensityThreshold::parse(d));
  const graph::DensityReport report = graph::density_report(docs, thresholds);
  for (const auto& part : report.partitions) {
    std::vector<corpus::AnnotatedDocument> sub;
    for (std::size_t i : part.members) sub.push_back(docs[i]);
    fs::create_directories(run.out_dir());
    const std::string name = threshold_file(part.threshold);
    corpus::save_corpus(run.out_dir() / name, sub);
    run.output(name);
    out << part.threshold.label() << ": " << sub.size() << " documents -> " << name << "\n";
  }
  run.write_text("partition.json", report.to_json() + "\n");
  run.write_text("density_histogram.csv", report.histogram.to_csv());
  run.finish(std::nullopt);
  return 0;
}

std::optional<corpus::EmbeddingTable> read_embeddings(Run& run, const std::string& path,
                                                      std::size_t dim) {
  if (path.empty()) return std::nullopt;
  run.input(path);
  return corpus::load_embedding_file(path, dim);
}

training::LoadedCheckpoint read_checkpoint(Run& run, const Options& opt) {
  if (opt.checkpoint.empty()) throw ConfigError("--checkpoint is required");
  run.input(opt.checkpoint);
  training::LoadedCheckpoint ck = training::load_checkpoint(opt.checkpoint);
  TrainConfig c = ck.model->config;
  apply_overrides(c, opt, true);
  ck.model->config = c;
  ck.model->selector.config = c.selector();
  ck.model->generator.config = c.generator();
  return ck;
}

void report_training(const training::TrainResult& r, std::ostream& out) {
  out << "steps: " << r.steps << (r.early_stopped ? " (early stop)" : "") << "\n";
  if (!r.rows.empty()) out << "final loss: " << r.rows.back().losses.total << "\n";
  if (r.best_dev) out << "best dev metric: " << *r.best_dev << "\n";
}

int cmd_train(training::Phase phase, const Options& opt, std::ostream& out) {
  const std::string name = "train-" + training::to_string(phase);
  Run run(name, opt);
  std::unique_ptr<training::Model> model;
  training::TrainState state;
  if (phase == training::Phase::Selector) {
    TrainConfig c;
    apply_overrides(c, opt, false);
    const auto docs = read_corpus(run, opt, c.truncation());
    const auto words = read_embeddings(run, opt.word_emb, static_cast<std::size_t>(c.word_dim));
    const auto ents = read_embeddings(run, opt.entity_emb, static_cast<std::size_t>(c.entity_dim));
    std::vector<corpus::AnnotatedDocument> train;
    for (const auto& d : docs) {
      if (d.split == corpus::Split::Train) train.push_back(d);
    }
    model = training::Model::create(c, train, words ? &*words : nullptr, ents ? &*ents : nullptr);
    state.rng.seed(c.seed);
    const auto cooc = read_cooc(run, opt);
    training::Trainer trainer(*model, state, cooc);
    report_training(trainer.train(phase, docs, {run.out_dir()}), out);
  } else {
    training::LoadedCheckpoint ck = read_checkpoint(run, opt);
    model = std::move(ck.model);
    state = std::move(ck.state);
    const auto docs = read_corpus(run, opt, model->config.truncation());
    const auto cooc = read_cooc(run, opt);
    training::Trainer trainer(*model, state, cooc);
    const auto result = trainer.train(phase, docs, {run.out_dir()});
    report_training(result, out);
    if (phase == training::Phase::Rl && result.frozen_violations > 0) {
      throw Error("generator received gradient during RL training");
    }
  }
  run.output("checkpoint.bin");
  run.output("metrics.csv");
  if (phase == training::Phase::Rl) run.output("episodes.tsv");
  run.finish(model->config);
  return 0;
}

std::vector<training::PreparedDocument> prepare_all(
    const training::Model& model, const std::vector<corpus::AnnotatedDocument>& docs,
    const corpus::CooccurrenceTable& cooc) {
  std::vector<training::PreparedDocument> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(training::prepare_document(model, d, cooc));
  return out;
}

int cmd_summarize(const Options& opt, std::ostream& out) {
  Run run("summarize", opt);
  const std::string mode = opt.mode.empty() ? "both" : opt.mode;
  if (mode != "extractive" && mode != "abstractive" && mode != "both") {
    throw ConfigError("--mode must be extractive, abstractive or both");
  }
  training::LoadedCheckpoint ck = read_checkpoint(run, opt);
  const training::Model& model = *ck.model;
  const auto docs = read_corpus(run, opt, model.config.truncation());
  const auto cooc = read_cooc(run, opt);
  const auto prepared = prepare_all(model, docs, cooc);

  std::string ext_text, ext_side, abs_text, abs_side;
  for (const auto& p : prepared) {
    selector::SelectorOutput probs;
    const selector::Selection sel = training::select_document(model, p, &probs);
    if (mode != "abstractive") {
      ordered_json side;
      side["id"] = p.doc->id;
      side["sentences"] = sel.sentences;
      side["entities"] = sel.entities;
      std::vector<double> ps, pe;
      for (std::size_t s : sel.sentences) ps.push_back(probs.p_sentence(static_cast<ad::Index>(s), 0));
      for (std::size_t e : sel.entities) pe.push_back(probs.p_entity(static_cast<ad::Index>(e), 0));
      side["sentence_probabilities"] = ps;
      side["entity_probabilities"] = pe;
      ext_side += side.dump() + "\n";
      ext_text += "# " + p.doc->id + "\n";
      for (std::size_t s : sel.sentences) {
        std::string line;
        for (const auto& tok : p.doc->sentences[s]) line += (line.empty() ? "" : " ") + tok;
        ext_text += line + "\n";
      }
      ext_text += "\n";
    }
    if (mode != "extractive") {
      const generator::Generation g = training::abstract_document(model, p, sel);
      std::string line;
      for (const auto& tok : g.tokens) line += (line.empty() ? "" : " ") + tok;
      abs_text += line + "\n";
      ordered_json side = ordered_json::parse(g.to_json());
      side["id"] = p.doc->id;
      abs_side += side.dump() + "\n";
    }
  }
  if (mode != "abstractive") {
    run.write_text("extractive.txt", ext_text);
    run.write_text("extractive.jsonl", ext_side);
  }
  if (mode != "extractive") {
    run.write_text("abstractive.txt", abs_text);
    run.write_text("abstractive.jsonl", abs_side);
  }
  run.finish(model.config);
  out << "summarized " << prepared.size() << " documents (" << mode << ")\n";
  return 0;
}

int cmd_evaluate(const Options& opt, std::ostream& out) {
  Run run("evaluate", opt);
  const training::EvalMode mode =
      training::eval_mode_from_string(opt.mode.empty() ? "extractive" : opt.mode);
  training::LoadedCheckpoint ck = read_checkpoint(run, opt);
  const training::Model& model = *ck.model;
  const auto all = read_corpus(run, opt, model.config.truncation());
  std::vector<corpus::AnnotatedDocument> docs;
  for (const auto& d : all) {
    if (opt.split == "all" || corpus::to_string(d.split) == opt.split) docs.push_back(d);
  }
  const auto cooc = read_cooc(run, opt);
  const auto prepared = prepare_all(model, docs, cooc);
  const training::EvalReport report =
      training::evaluate(model, prepared, mode, model.config.worker_threads());
  run.write_text("report.json", report.to_json() + "\n");
  run.finish(model.config);
  out << "documents: " << report.documents.size() << "\nR-1 " << report.rouge1 << "  R-2 "
      << report.rouge2 << "  R-L " << report.rougel << "\nsentence P@k "
      << report.sentence_precision << "  entity P@k " << report.entity_precision << "\n";
  return 0;
}

int cmd_gen_synthetic(const Options& opt, std::ostream& out) {
  Run run("gen-synthetic", opt);
  synthetic::SyntheticConfig c;
  c.documents = opt.docs;
  c.sentences = opt.sentences;
  c.entities = opt.entities;
  if (opt.seed) c.seed = *opt.seed;
  const synthetic::SyntheticCorpus sc = synthetic::generate(c);
  fs::create_directories(run.out_dir());
  corpus::save_corpus(run.out_dir() / "corpus.jsonl", sc.documents);
  run.output("corpus.jsonl");
  sc.cooccurrence.save(run.out_dir() / "cooc.tsv");
  run.output("cooc.tsv");
  std::string truth;
  for (std::size_t i = 0; i < sc.documents.size(); ++i) {
    ordered_json j;
    j["id"] = sc.documents[i].id;
    j["planted_sentences"] = sc.planted_sentences[i];
    j["salient_entities"] = sc.salient_entities[i];
    truth += j.dump() + "\n";
  }
  run.write_text("truth.jsonl", truth);
  run.finish(std::nullopt);
  out << "wrote " << sc.documents.size() << " documents to " << opt.out << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entity-guided graph summarization toolkit", "rhgnn-summ"};
  app.require_subcommand(1);
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--config", opt.config, "key=value config file");
    sub->add_option("--seed", opt.seed, "Random seed");
    sub->add_option("--set", opt.set, "Config override key=value (repeatable)");
  };
  auto add_corpus = [&](CLI::App* sub) {
    sub->add_option("--corpus", opt.corpus, "Line-delimited JSON corpus")->required();
    sub->add_option("--cooc", opt.cooc, "Entity co-occurrence TSV");
  };

  auto* build = app.add_subcommand("build-graphs", "Build sentence-entity graphs");
  add_common(build);
  add_corpus(build);
  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  add_common(stats);
  add_corpus(stats);
  auto* partition = app.add_subcommand("partition", "Split a corpus by SE density");
  add_common(partition);
  add_corpus(partition);
  partition->add_option("--density", opt.density, "Threshold such as <0.7 (repeatable)");

  auto* tsel = app.add_subcommand("train-selector", "Train the sentence/entity selector");
  auto* tgen = app.add_subcommand("train-generator", "Train the abstractive generator");
  auto* trl = app.add_subcommand("train-rl", "Fine-tune the selector with rewards");
  for (auto* sub : {tsel, tgen, trl}) {
    add_common(sub);
    add_corpus(sub);
    sub->add_option("--ablate", opt.ablate, "Ablation name (repeatable)");
  }
  tsel->add_option("--word-emb", opt.word_emb, "Pretrained word embeddings");
  tsel->add_option("--entity-emb", opt.entity_emb, "Entity-level embeddings");
  tgen->add_option("--checkpoint", opt.checkpoint, "Checkpoint with a trained selector")->required();
  trl->add_option("--checkpoint", opt.checkpoint, "Checkpoint with selector and generator")->required();

  auto* summarize = app.add_subcommand("summarize", "Write extractive and abstractive summaries");
  add_common(summarize);
  add_corpus(summarize);
  summarize->add_option("--checkpoint", opt.checkpoint, "Model checkpoint")->required();
  summarize->add_option("--mode", opt.mode, "extractive, abstractive or both");

  auto* evaluate = app.add_subcommand("evaluate", "Score a checkpoint against references");
  add_common(evaluate);
  add_corpus(evaluate);
  evaluate->add_option("--checkpoint", opt.checkpoint, "Model checkpoint")->required();
  evaluate->add_option("--mode", opt.mode, "extractive or abstractive");
  evaluate->add_option("--split", opt.split, "train, dev, test or all");

  auto* gen = app.add_subcommand("gen-synthetic", "Generate a planted-signal corpus");
  add_common(gen);
  gen->add_option("--docs", opt.docs, "Number of documents");
  gen->add_option("--sentences", opt.sentences, "Sentences per document");
  gen->add_option("--entities", opt.entities, "Entities per document");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return e.get_exit_code() != 0 ? e.get_exit_code() : 2;
  }

  try {
    if (*build) return cmd_build_graphs(opt, out);
    if (*stats) return cmd_stats(opt, out);
    if (*partition) return cmd_partition(opt, out);
    if (*tsel) return cmd_train(training::Phase::Selector, opt, out);
    if (*tgen) return cmd_train(training::Phase::Generator, opt, out);
    if (*trl) return cmd_train(training::Phase::Rl, opt, out);
    if (*summarize) return cmd_summarize(opt, out);
    if (*evaluate) return cmd_evaluate(opt, out);
    if (*gen) return cmd_gen_synthetic(opt, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace kgsumm::cli
