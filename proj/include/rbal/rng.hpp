#pragma once

#include <cstdint>
#include <random>

namespace rbal {

using Rng = std::mt19937_64;

/// Independent purposes that draw from a seed; each gets its own stream.
enum class StreamTag : std::uint32_t {
    SyntheticClass = 1,
    Split = 2,
    InitialLabels = 3,
    Presentation = 4,
    Baseline = 5,
};

/// Stream for (seed, purpose, index). Distinct tuples give unrelated streams.
inline Rng make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

} // namespace rbal
