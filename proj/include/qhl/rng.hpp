// rng.hpp — deterministic random streams and seed splitting.
//
// Stream-splitting rule (used everywhere a job fans out): the child stream
// for sub-task k of a run with master seed s is seeded with
// split_seed(s, k); grid cells use the two-index form with their cell
// coordinates. Child streams are therefore independent of execution order
// and of the number of worker threads.

#pragma once

#include <cstdint>
#include <random>

namespace qhl {

using Rng = std::mt19937_64;

// SplitMix64 finalizer: a well-mixed 64-bit permutation.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Child seed = hash(master seed, index).
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(master ^ mix64(index));
}

// Child seed = hash(master seed, (a, b)) for two-dimensional job coordinates.
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    return mix64(split_seed(master, a) ^ mix64(b + 0x632be59bd9b4e019ULL));
}

}  // namespace qhl
