#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include "kgsumm/autodiff/adam.hpp"
#include "kgsumm/training/model.hpp"

namespace kgsumm::training {

// Bit flags for completed phases.
enum PhaseMask : std::uint32_t {
  kSelectorDone = 1u << 0,
  kGeneratorDone = 1u << 1,
  kRlDone = 1u << 2,
};

struct TrainState {
  std::uint64_t step = 0;
  std::uint32_t phases = 0;
  std::mt19937_64 rng;
  ad::AdamState adam;
};

// Little-endian binary container:
//   "KGSUMMCK" | u32 version | u64 config hash | u32 phases | u64 step
//   | str rng state | str config text | u64 n, n x str vocab words
//   | u64 n, n x str entity ids | u64 n, n x (str name, i64 rows, i64 cols, f64 data)
//   | i64 adam step | u8 has moments [, per parameter: f64 m, f64 v]
// where str = u64 length + bytes.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const TrainState& state);

struct LoadedCheckpoint {
  std::unique_ptr<Model> model;
  TrainState state;
  std::uint64_t config_hash = 0;
};

// Throws IoError for unreadable or malformed files.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

// Hash over the names, shapes and values of parameters with `prefix`.
std::uint64_t parameter_hash(const ad::ParameterStore& store, const std::string& prefix);

}  // namespace kgsumm::training
