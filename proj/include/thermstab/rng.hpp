#pragma once

#include <cstdint>

namespace thermstab {

/// Counter-based generator (Philox-2x64, 10 rounds).
///
/// Each (master_seed, shot_index) pair names an independent stream, so shots
/// can be replayed individually or distributed across threads without any
/// coordination. Every call to next_u64() consumes exactly one counter value;
/// the draw sequence for a given stream is therefore a pure function of the
/// constructor arguments.
class ShotRng {
   public:
    ShotRng(uint64_t master_seed, uint64_t shot_index)
        : key_(master_seed), ctr_hi_(shot_index), ctr_lo_(0) {}

    uint64_t next_u64() {
        uint64_t x0 = ctr_lo_++;
        uint64_t x1 = ctr_hi_;
        uint64_t k = key_;
        for (int round = 0; round < 10; ++round) {
            unsigned __int128 prod = (unsigned __int128)MULTIPLIER * x0;
            uint64_t hi = (uint64_t)(prod >> 64);
            uint64_t lo = (uint64_t)prod;
            x0 = hi ^ k ^ x1;
            x1 = lo;
            k += WEYL;
        }
        return x0;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double next_double() { return (double)(next_u64() >> 11) * 0x1.0p-53; }

    /// One fair bit (used by random-outcome measurements).
    bool next_bit() { return (next_u64() >> 63) != 0; }

   private:
    static constexpr uint64_t MULTIPLIER = 0xD2B74407B1CE6E93ull;
    static constexpr uint64_t WEYL = 0x9E3779B97F4A7C15ull;

    uint64_t key_;
    uint64_t ctr_hi_;
    uint64_t ctr_lo_;
};

inline ShotRng shot_rng(uint64_t master_seed, uint64_t shot_index) {
    return ShotRng(master_seed, shot_index);
}

}  // namespace thermstab
