#pragma once

#include <cstdint>
#include <random>

namespace dmac {

// splitmix64 finalizer; derives decorrelated stream seeds from (seed, stream).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seeded generator handle. Every randomized routine takes one of these so a
// run is reproducible from (seed, parameters); parallel sweeps give each cell
// its own stream via Rng(seed, cell_index).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t seed, std::uint64_t stream) : engine_(mix_seed(seed, stream)) {}

    double uniform() { return unit_(engine_); }  // [0,1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() { return normal_(engine_); }
    double normal(double mean, double stddev) { return mean + stddev * normal_(engine_); }
    std::uint64_t next_u64() { return engine_(); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace dmac
