#pragma once

#include <cstdint>
#include <random>

namespace levyhjmm {

/// Deterministic per-path random stream.
///
/// Every Monte Carlo path gets its own generator derived from
/// (master seed, path index), so results do not depend on scheduling
/// order and a path can be replayed in isolation.
inline std::mt19937_64 path_stream(std::uint64_t master_seed, std::uint64_t path_index) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(master_seed),
        static_cast<std::uint32_t>(master_seed >> 32),
        static_cast<std::uint32_t>(path_index),
        static_cast<std::uint32_t>(path_index >> 32),
        0x9e3779b9u};
    return std::mt19937_64(seq);
}

} // namespace levyhjmm
