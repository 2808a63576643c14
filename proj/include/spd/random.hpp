#ifndef SPD_RANDOM_HPP
#define SPD_RANDOM_HPP

#include <cstdint>
#include <random>

namespace spd {

/// Random stream type used throughout. Every consumer takes one explicitly.
using Rng = std::mt19937_64;

/// One step of splitmix64; advances state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/**
 * Derives an independent stream from a master seed and a (stream, substream)
 * counter pair. Experiments use stream = configuration row, substream = run
 * index, so any single run can be replayed in isolation.
 */
inline Rng make_stream(std::uint64_t master_seed, std::uint64_t stream = 0, std::uint64_t substream = 0) {
    std::uint64_t state = master_seed;
    std::uint64_t mixed = splitmix64(state);
    state = mixed ^ (stream * 0xD1B54A32D192ED03ULL);
    mixed = splitmix64(state);
    state = mixed ^ (substream * 0x8CB92BA72F3D8DD7ULL);
    return Rng(splitmix64(state));
}

}  // namespace spd

#endif
