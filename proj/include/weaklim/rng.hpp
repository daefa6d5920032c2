#pragma once

#include <cstdint>

namespace weaklim {

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter), so parallel loops cannot reorder the sequence.
class Rng {
public:
    explicit Rng(uint64_t seed, uint64_t stream = 0) : seed_(seed), stream_(stream) {}

    static uint64_t mix(uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    uint64_t next_u64() { return at(counter_++); }

    // Stateless access; used by per-sample derived seeds.
    uint64_t at(uint64_t counter) const {
        uint64_t h = mix(seed_ ^ mix(stream_ ^ 0x53505f5354524dULL));
        return mix(h ^ mix(counter));
    }

    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    Rng split(uint64_t substream) const { return Rng(seed_, mix(stream_ ^ mix(substream + 0x7fb5d329728ea185ULL))); }

private:
    uint64_t seed_;
    uint64_t stream_;
    uint64_t counter_ = 0;
};

}  // namespace weaklim
