#include "kgsumm/training/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "kgsumm/errors.hpp"
#include "kgsumm/util/hash.hpp"

namespace kgsumm::training {

namespace {

constexpr char kMagic[8] = {'K', 'G', 'S', 'U', 'M', 'M', 'C', 'K'};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  template <typename T>
  void pod(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void str(const std::string& s) {
    pod<std::uint64_t>(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void tensor_data(const ad::Tensor& t) {
    out_.write(reinterpret_cast<const char*>(t.mat().data()),
               static_cast<std::streamsize>(t.size() * sizeof(double)));
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}
  template <typename T>
  T pod() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof v);
    check();
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint64_t>();
    if (n > (1ULL << 32)) fail("string length out of range");
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    check();
    return s;
  }
  void tensor_data(ad::Tensor& t) {
    in_.read(reinterpret_cast<char*>(t.mat().data()),
             static_cast<std::streamsize>(t.size() * sizeof(double)));
    check();
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw IoError("checkpoint " + path_ + ": " + what);
  }

 private:
  void check() const {
    if (!in_) fail("truncated file");
  }
  std::istream& in_;
  std::string path_;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const TrainState& state) {
  std::ostringstream buf(std::ios::binary);
  Writer w(buf);
  buf.write(kMagic, sizeof kMagic);
  w.pod<std::uint32_t>(kCheckpointVersion);
  w.pod<std::uint64_t>(model.config.hash());
  w.pod<std::uint32_t>(state.phases);
  w.pod<std::uint64_t>(state.step);
  std::ostringstream rng;
  rng << state.rng;
  w.str(rng.str());
  w.str(model.config.to_text());
  w.pod<std::uint64_t>(model.vocab.size());
  for (const auto& word : model.vocab.words()) w.str(word);
  w.pod<std::uint64_t>(model.entity_vocab.kg_ids().size());
  for (const auto& id : model.entity_vocab.kg_ids()) w.str(id);
  w.pod<std::uint64_t>(model.params.size());
  for (const auto& p : model.params) {
    w.str(p.name);
    w.pod<std::int64_t>(p.value.rows());
    w.pod<std::int64_t>(p.value.cols());
    w.tensor_data(p.value);
  }
  w.pod<std::int64_t>(state.adam.step);
  const bool moments = state.adam.m.size() == model.params.size();
  w.pod<std::uint8_t>(moments ? 1 : 0);
  if (moments) {
    for (std::size_t i = 0; i < model.params.size(); ++i) {
      w.tensor_data(state.adam.m[i]);
      w.tensor_data(state.adam.v[i]);
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  const std::string bytes = buf.str();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for checkpoint " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  Reader r(in, path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) r.fail("not a checkpoint file");
  const auto version = r.pod<std::uint32_t>();
  if (version != kCheckpointVersion) r.fail("unsupported version " + std::to_string(version));

  LoadedCheckpoint out;
  out.config_hash = r.pod<std::uint64_t>();
  out.state.phases = r.pod<std::uint32_t>();
  out.state.step = r.pod<std::uint64_t>();
  std::istringstream rng(r.str());
  rng >> out.state.rng;
  if (!rng) r.fail("bad RNG state");
  TrainConfig config;
  try {
    config = parse_config_text(r.str());
  } catch (const Error& e) {
    r.fail(std::string("bad config: ") + e.what());
  }
  if (config.hash() != out.config_hash) r.fail("config hash mismatch");

  std::vector<std::string> words(r.pod<std::uint64_t>());
  for (auto& word : words) word = r.str();
  std::vector<std::string> ids(r.pod<std::uint64_t>());
  for (auto& id : ids) id = r.str();
  try {
    out.model = Model::with_vocabularies(config, corpus::Vocab(std::move(words)),
                                         corpus::EntityVocab(std::move(ids)), nullptr, nullptr);
  } catch (const Error& e) {
    r.fail(e.what());
  }
  ad::ParameterStore& params = out.model->params;
  const auto count = r.pod<std::uint64_t>();
  if (count != params.size()) r.fail("parameter count differs from the configured model");
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string name = r.str();
    const auto rows = r.pod<std::int64_t>();
    const auto cols = r.pod<std::int64_t>();
    if (!params.contains(name)) r.fail("unknown parameter " + name);
    ad::Tensor& t = params[params.id(name)].value;
    if (t.rows() != rows || t.cols() != cols) r.fail("shape mismatch for " + name);
    r.tensor_data(t);
  }
  const auto adam_step = r.pod<std::int64_t>();
  if (r.pod<std::uint8_t>() != 0) {
    out.state.adam = ad::AdamState(params);
    for (std::size_t i = 0; i < params.size(); ++i) {
      r.tensor_data(out.state.adam.m[i]);
      r.tensor_data(out.state.adam.v[i]);
    }
  }
  out.state.adam.step = adam_step;
  if (in.peek() != std::char_traits<char>::eof()) r.fail("trailing bytes");
  return out;
}

std::uint64_t parameter_hash(const ad::ParameterStore& store, const std::string& prefix) {
  std::uint64_t h = util::fnv1a("");
  for (const auto& p : store) {
    if (!p.name.starts_with(prefix)) continue;
    h = util::fnv1a(p.name, h);
    const auto data = p.value.flat();
    h = util::fnv1a(std::string_view(reinterpret_cast<const char*>(data.data()),
                                     data.size() * sizeof(double)),
                    h);
  }
  return h;
}

}  // namespace kgsumm::training
