#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "core/tensor.hpp"

namespace sca {

// Full training snapshot: model parameters, optimizer moments, RNG position,
// and the resolved config text. Serialization is deterministic, so
// save -> load -> save reproduces the file byte for byte.
struct Checkpoint {
    std::uint32_t version = 1;
    std::string config_text;
    std::uint64_t epoch = 0;
    std::uint64_t rng_state = 0;
    std::vector<std::pair<std::string, Tensor>> tensors;

    const Tensor* find(const std::string& name) const;
    void put(const std::string& name, Tensor t);

    bool operator==(const Checkpoint&) const = default;
};

std::string encode_checkpoint(const Checkpoint& st);
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::string& path, const Checkpoint& st);
Checkpoint load_checkpoint(const std::string& path);

// Human-readable summary used by the CLI inspect command.
std::string describe_checkpoint(const Checkpoint& st);

}  // namespace sca
