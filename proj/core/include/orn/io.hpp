#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "orn/config.hpp"
#include "orn/params.hpp"
#include "orn/world.hpp"

namespace orn::io {

// Binary array file: "ORNV", u32 version, u32 dtype, u32 rank, u64 dims[rank],
// then the little-endian payload.
enum class DType : std::uint32_t { u8 = 1, f32 = 2 };

struct Shard {
  DType dtype = DType::u8;
  std::vector<std::uint64_t> shape;
  std::vector<std::uint8_t> bytes;  // payload, little-endian
};

void write_shard(const std::filesystem::path& path, const Shard& shard);
// Throws FormatError on a bad magic, version, dtype or truncated payload.
Shard read_shard(const std::filesystem::path& path);

struct Dataset {
  WorldConfig world;
  std::vector<world::Video> videos;
};

// Writes `dir`/manifest.json (JSON index: world config, per video label,
// events, shard reference and per-frame annotations with RLE masks) and one
// shard per video under `dir`/shards.
void write_dataset(const std::filesystem::path& dir, const Dataset& data);
Dataset read_dataset(const std::filesystem::path& manifest);

// Checkpoint: "ORNC", u32 version, u64 header size, JSON header (experiment
// config and tensor manifest: name, shape, byte offset), then little-endian
// float32 payload.
struct Checkpoint {
  ExperimentConfig config;
  ParamStore<float> params;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

// Writes to a temporary file first, so a failed write leaves the previous
// checkpoint in place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Throws ConfigError unless `params` has exactly the names and shapes a model
// built from `cfg` would have.
void check_compatible(const ModelConfig& cfg, const ParamStore<float>& params);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

}  // namespace orn::io
