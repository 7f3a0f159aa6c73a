#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "thermstab/channel_algebra.hpp"
#include "thermstab/rng.hpp"
#include "thermstab/tableau_engine.hpp"

namespace thermstab {

/// Stabilizer branch channels a noise site can resolve to. The enumeration
/// order is the canonical sampling order; exact decompositions only populate
/// I/Z/R0/R1, Pauli-twirled sites only I/X/Y/Z.
enum class Branch : uint8_t { I = 0, X = 1, Y = 2, Z = 3, R0 = 4, R1 = 5 };
inline constexpr int BRANCH_COUNT = 6;

inline const char* branch_name(Branch b) {
    static const char* names[BRANCH_COUNT] = {"I", "X", "Y", "Z", "R0", "R1"};
    return names[(int)b];
}

/// Affine weights over the six branches plus the precomputed sampling tables.
/// gamma = sum |q|; cum is the cumulative |q|/gamma in canonical order with
/// the final entry pinned to 1 so a [0,1) draw always lands.
struct BranchDistribution {
    std::array<double, BRANCH_COUNT> q{};
    std::array<double, BRANCH_COUNT> cum{};
    double gamma = 1.0;

    static BranchDistribution from_decomposition(const ChannelDecomposition& d) {
        BranchDistribution out;
        out.q[(int)Branch::I] = d.q_identity;
        out.q[(int)Branch::Z] = d.q_pauli_z;
        out.q[(int)Branch::R0] = d.q_reset0;
        out.q[(int)Branch::R1] = d.q_reset1;
        out.finalize();
        return out;
    }

    static BranchDistribution from_pauli(const PauliChannelProbs& p) {
        BranchDistribution out;
        out.q[(int)Branch::I] = p.p_identity();
        out.q[(int)Branch::X] = p.p_x;
        out.q[(int)Branch::Y] = p.p_y;
        out.q[(int)Branch::Z] = p.p_z;
        out.finalize();
        return out;
    }

   private:
    void finalize() {
        gamma = 0.0;
        for (double v : q) gamma += std::abs(v);
        double acc = 0.0;
        for (int k = 0; k < BRANCH_COUNT; ++k) {
            acc += std::abs(q[k]) / gamma;
            cum[k] = acc;
        }
        cum[BRANCH_COUNT - 1] = 1.0;
    }
};

/// One instrumented channel location. site_id is the ordinal of the site in
/// circuit order and doubles as the fault label used by the decoder.
struct NoiseSite {
    int qubit;
    BranchDistribution dist;
    int site_id;
};

/// Monte-Carlo weight of one shot: sign = product of sgn(q) over the sampled
/// branches, gamma_product = product of per-site gamma (shared by all shots
/// of a circuit).
struct ShotWeight {
    int sign = 1;
    double gamma_product = 1.0;
};

/// Draw a branch with probability |q_b|/gamma; one uniform draw per call.
inline std::pair<Branch, int> sample_branch(const BranchDistribution& d, ShotRng& rng) {
    double u = rng.next_double();
    for (int k = 0; k < BRANCH_COUNT; ++k) {
        if (u < d.cum[k]) {
            return {(Branch)k, d.q[k] < 0.0 ? -1 : 1};
        }
    }
    return {(Branch)(BRANCH_COUNT - 1), d.q[BRANCH_COUNT - 1] < 0.0 ? -1 : 1};
}

/// Execute one branch on the tableau. Resets consume RNG (their projective
/// measurement can be random); Pauli branches do not.
inline void apply_branch(StabilizerTableau& t, int qubit, Branch b, ShotRng& rng) {
    switch (b) {
        case Branch::I: return;
        case Branch::X: t.apply_x(qubit); return;
        case Branch::Y: t.apply_y(qubit); return;
        case Branch::Z: t.apply_z(qubit); return;
        case Branch::R0: t.reset(qubit, 0, rng); return;
        case Branch::R1: t.reset(qubit, 1, rng); return;
    }
}

/// Mergeable (sum, sum of squares, count) accumulator for the sign-weighted
/// estimator; merging is associative so shot order never matters.
struct RunningStats {
    double sum = 0.0;
    double sumsq = 0.0;
    long long n = 0;

    void add(double x) {
        sum += x;
        sumsq += x * x;
        ++n;
    }
    void merge(const RunningStats& o) {
        sum += o.sum;
        sumsq += o.sumsq;
        n += o.n;
    }
    double mean() const { return n > 0 ? sum / (double)n : 0.0; }
    double sample_variance() const {
        if (n < 2) return 0.0;
        double v = (sumsq - sum * sum / (double)n) / (double)(n - 1);
        return v > 0.0 ? v : 0.0;
    }
};

struct WeightedEstimate {
    double estimate;
    double std_error;
};

inline WeightedEstimate weighted_estimate_from(const RunningStats& stats, double gamma_total) {
    double se = stats.n > 1 ? std::sqrt(stats.sample_variance() / (double)stats.n) : 0.0;
    return {gamma_total * stats.mean(), gamma_total * se};
}

/// Unbiased quasi-probability estimate from signed shot values:
/// gamma_total * mean(sign * value), with the matching standard error.
inline WeightedEstimate weighted_estimate(
    const std::vector<std::pair<double, ShotWeight>>& records) {
    if (records.empty()) {
        throw std::invalid_argument("weighted_estimate: no records");
    }
    const double gamma = records.front().second.gamma_product;
    RunningStats stats;
    for (const auto& [value, weight] : records) {
        if (std::abs(weight.gamma_product - gamma) > 1e-9 * gamma) {
            throw std::invalid_argument(
                "weighted_estimate: records mix different gamma_product values");
        }
        stats.add(weight.sign * value);
    }
    return weighted_estimate_from(stats, gamma);
}

}  // namespace thermstab
