#pragma once

#include <cstdint>
#include <random>

namespace anomaly {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

/// Seed of replica r: mix64(master_seed + (r + 1) * 0x9E3779B97F4A7C15),
/// arithmetic mod 2^64. A pure function of (master_seed, r), so a replica
/// draws the same numbers whichever worker runs it.
constexpr std::uint64_t replica_seed(std::uint64_t master_seed, std::uint64_t replica) {
    return mix64(master_seed + (replica + 1) * 0x9E3779B97F4A7C15ULL);
}

/// Random stream owned by one replica: std::mt19937_64 seeded with
/// replica_seed(). uniform() takes the top 53 bits of one engine output,
/// giving k * 2^-53 in [0, 1).
class ReplicaStream {
public:
    ReplicaStream(std::uint64_t master_seed, std::uint64_t replica)
        : engine_(replica_seed(master_seed, replica)) {}

    std::uint64_t next() { return engine_(); }
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

}  // namespace anomaly
