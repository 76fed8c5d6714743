#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "egoact/net.hpp"
#include "egoact/optim.hpp"

namespace egoact {

inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

// Binary layout (all integers little-endian):
//
//   "EGOACKPT"                 8-byte magic
//   u32 format_version
//   u32 header_size, header    compact JSON: net config, epoch, rng, extras
//   u32 tensor_count
//   per tensor: u32 name_size, name, u32 rows, u32 cols, rows*cols f32 LE
//
// Model tensors are named "model.<name>", optimizer moments
// "adamw.m.<name>" / "adamw.v.<name>".
struct Checkpoint {
    ClassifierParams<float> params;
    int epoch = 0;
    std::uint64_t seed = 0;
    // Next epoch whose derived random streams have not been consumed.
    int rng_next_epoch = 0;
    std::optional<AdamWState> optimizer;
    // Free-form JSON object text for run bookkeeping.
    std::string extra = "{}";
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace egoact
