#pragma once

#include <cstdint>
#include <string_view>

namespace sca {

// Counter-based 64-bit generator (splitmix64 update). Streams are derived
// from a parent state by hashing a label, so construction-time draws
// (bank frequencies, net weights, geometry) and training-time draws
// (minibatch indices, collocation points) never interleave.
class Rng {
  public:
    Rng() = default;
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();

    // Child generator for an independent named stream.
    Rng stream(std::string_view label) const;

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform();
    double uniform(double lo, double hi);

    // Standard normal via Box-Muller (one value per call, no cached spare).
    double gaussian();

    std::uint64_t state() const { return state_; }
    void set_state(std::uint64_t s) { state_ = s; }

  private:
    std::uint64_t state_ = 0;
};

} // namespace sca
