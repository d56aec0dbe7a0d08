#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flopsd/net.hpp"

namespace flopsd {

// Versioned binary checkpoint:
//   magic "FLOPSD1" (7 bytes)
//   u32 LE layer count (number of entries in layer_sizes)
//   u32 LE per layer size
//   u8 activation tag (0 = tanh, 1 = silu)
//   f64 LE parameters in canonical order
struct Checkpoint {
    NetSpec spec;
    ParamVector params;
};

std::vector<unsigned char> serialize_checkpoint(const NetSpec& spec, const ParamVector& params);
Checkpoint deserialize_checkpoint(const std::vector<unsigned char>& bytes);

void save_checkpoint(const std::string& path, const NetSpec& spec, const ParamVector& params);
Checkpoint load_checkpoint(const std::string& path);  // throws UsageError if missing/corrupt

// FNV-1a over the serialized bytes; used in run manifests and frozen-teacher checks.
uint64_t checkpoint_hash(const NetSpec& spec, const ParamVector& params);
uint64_t file_hash(const std::string& path);

}  // namespace flopsd
