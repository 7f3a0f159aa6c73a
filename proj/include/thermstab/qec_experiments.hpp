#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "thermstab/circuit.hpp"
#include "thermstab/gf2.hpp"

namespace thermstab {

enum class InitialState : uint8_t { zero, one, plus };

inline InitialState initial_state_from_string(const std::string& s) {
    if (s == "0") return InitialState::zero;
    if (s == "1") return InitialState::one;
    if (s == "+") return InitialState::plus;
    throw std::invalid_argument("unknown initial state '" + s + "' (expected 0, 1 or +)");
}
inline const char* to_string(InitialState s) {
    switch (s) {
        case InitialState::zero: return "0";
        case InitialState::one: return "1";
        case InitialState::plus: return "+";
    }
    return "?";
}

/// Rotated surface-code memory parameters. The |+> state runs an X-basis
/// memory; |0> and |1> run Z-basis memories.
struct SurfaceSpec {
    int distance = 3;
    char basis = 'Z';
    InitialState initial_state = InitialState::zero;

    void validate() const {
        if (distance < 3 || distance % 2 == 0) {
            throw std::invalid_argument("SurfaceSpec: distance must be odd and >= 3");
        }
        if (basis != 'Z' && basis != 'X') {
            throw std::invalid_argument("SurfaceSpec: basis must be 'Z' or 'X'");
        }
        bool x_state = initial_state == InitialState::plus;
        if (x_state != (basis == 'X')) {
            throw std::invalid_argument(
                "SurfaceSpec: |+> pairs with basis X, |0>/|1> with basis Z");
        }
    }
};

namespace detail {

/// One weight-<=4 check of the rotated layout. Data slots are in role order
/// NW, NE, SW, SE; clipped corners are -1.
struct Plaquette {
    int r, c;
    bool is_x;
    int ancilla;
    std::array<int, 4> data;
};

/// Plaquette candidates live on (r, c) in [-1, d-1]^2, covering data rows
/// r..r+1 and columns c..c+1. Interior ones are always kept; the top and
/// bottom rows keep only X checks, the left and right columns only Z checks.
inline std::vector<Plaquette> surface_plaquettes(int d) {
    std::vector<Plaquette> out;
    auto data_index = [d](int r, int c) {
        return (r >= 0 && r < d && c >= 0 && c < d) ? r * d + c : -1;
    };
    for (int r = -1; r < d; ++r) {
        for (int c = -1; c < d; ++c) {
            bool z_type = (((r + c) % 2) + 2) % 2 == 0;
            bool interior = r >= 0 && r < d - 1 && c >= 0 && c < d - 1;
            bool top_bottom = (r == -1 || r == d - 1) && c >= 0 && c < d - 1;
            bool left_right = (c == -1 || c == d - 1) && r >= 0 && r < d - 1;
            bool keep = interior || (top_bottom && !z_type) || (left_right && z_type);
            if (!keep) continue;
            Plaquette p;
            p.r = r;
            p.c = c;
            p.is_x = !z_type;
            p.ancilla = d * d + (int)out.size();
            p.data = {data_index(r, c), data_index(r, c + 1), data_index(r + 1, c),
                      data_index(r + 1, c + 1)};
            out.push_back(p);
        }
    }
    return out;
}

// Role visited at each of the four CNOT steps (indices into the NW/NE/SW/SE
// slots). The two orders interleave without ever touching a data qubit twice
// in one step and keep the X/Z check propagation consistent.
inline constexpr std::array<int, 4> X_SCHEDULE = {3, 2, 1, 0};  // SE, SW, NE, NW
inline constexpr std::array<int, 4> Z_SCHEDULE = {3, 1, 2, 0};  // SE, NE, SW, NW

}  // namespace detail

/// d rounds of syndrome extraction on a distance-d rotated surface code,
/// followed by a transversal data measurement in the memory basis.
inline Circuit build_surface_memory(const SurfaceSpec& spec, int rounds) {
    spec.validate();
    if (rounds < 1) throw std::invalid_argument("build_surface_memory: rounds must be >= 1");
    const int d = spec.distance;
    const int n_data = d * d;
    const auto plaquettes = detail::surface_plaquettes(d);
    const int n_anc = (int)plaquettes.size();

    Circuit c;
    c.n_qubits = n_data + n_anc;

    if (spec.initial_state == InitialState::one) {
        // Minimum-weight logical X string: data column 0.
        for (int r = 0; r < d; ++r) c.append_gate(Gate::X, r * d);
    } else if (spec.initial_state == InitialState::plus) {
        for (int q = 0; q < n_data; ++q) c.append_gate(Gate::H, q);
    }

    for (int round = 0; round < rounds; ++round) {
        for (const auto& p : plaquettes) {
            if (p.is_x) c.append_gate(Gate::H, p.ancilla);
        }
        for (int step = 0; step < 4; ++step) {
            for (const auto& p : plaquettes) {
                int role = p.is_x ? detail::X_SCHEDULE[step] : detail::Z_SCHEDULE[step];
                int dq = p.data[role];
                if (dq < 0) continue;
                if (p.is_x) {
                    c.append_gate(Gate::CNOT, p.ancilla, dq);
                } else {
                    c.append_gate(Gate::CNOT, dq, p.ancilla);
                }
            }
        }
        for (const auto& p : plaquettes) {
            if (p.is_x) c.append_gate(Gate::H, p.ancilla);
        }
        for (const auto& p : plaquettes) c.append_measure(p.ancilla);
        for (const auto& p : plaquettes) c.append_reset(p.ancilla, 0);
    }

    if (spec.basis == 'X') {
        for (int q = 0; q < n_data; ++q) c.append_gate(Gate::H, q);
    }
    const int final_base = c.n_records;
    for (int q = 0; q < n_data; ++q) c.append_measure(q);

    auto round_record = [&](int round, int plaq) { return round * n_anc + plaq; };
    const bool z_memory = spec.basis == 'Z';

    // First round: only checks of the prepared basis are deterministic.
    for (int p = 0; p < n_anc; ++p) {
        if (plaquettes[p].is_x != z_memory) c.detectors.push_back({round_record(0, p)});
    }
    for (int round = 1; round < rounds; ++round) {
        for (int p = 0; p < n_anc; ++p) {
            c.detectors.push_back({round_record(round - 1, p), round_record(round, p)});
        }
    }
    // Final data measurement closes out the memory-basis checks.
    for (int p = 0; p < n_anc; ++p) {
        if (plaquettes[p].is_x == z_memory) continue;
        std::vector<int> det{round_record(rounds - 1, p)};
        for (int dq : plaquettes[p].data) {
            if (dq >= 0) det.push_back(final_base + dq);
        }
        c.detectors.push_back(std::move(det));
    }

    std::vector<int> obs;
    if (z_memory) {
        for (int col = 0; col < d; ++col) obs.push_back(final_base + col);  // data row 0
    } else {
        for (int row = 0; row < d; ++row) obs.push_back(final_base + row * d);  // column 0
    }
    c.observables.push_back(std::move(obs));
    c.observable_expected.push_back(spec.initial_state == InitialState::one ? 1 : 0);

    c.validate();
    return c;
}

/// Bivariate-bicycle code over Z_l x Z_m: polynomials are monomial exponent
/// lists, A = sum x^i y^j over poly_a and likewise B.
struct BBSpec {
    int l = 0;
    int m = 0;
    std::vector<std::pair<int, int>> poly_a;
    std::vector<std::pair<int, int>> poly_b;

    void validate() const {
        if (l < 2 || m < 2) throw std::invalid_argument("BBSpec: l and m must be >= 2");
        if (poly_a.empty() || poly_b.empty()) {
            throw std::invalid_argument("BBSpec: polynomials must be nonempty");
        }
    }
};

/// Shipped preset verified to realize an [[18, 4, 4]] code:
/// A = 1 + x + y, B = 1 + x^2 + y^2 over Z_3 x Z_3.
inline BBSpec bb18_preset() {
    return BBSpec{3, 3, {{0, 0}, {0, 1}, {1, 0}}, {{0, 0}, {0, 2}, {2, 0}}};
}

/// Derived CSS structure of a BB spec.
struct BBCode {
    int l = 0, m = 0;
    int n = 0;  // data qubits = 2 l m
    BitMatrix h_x{1, 1};
    BitMatrix h_z{1, 1};
    int k = 0;
    std::vector<std::vector<uint64_t>> logical_z;  // k data-qubit support vectors
};

namespace detail {

inline std::vector<int> circulant_support(int base, const std::vector<std::pair<int, int>>& poly,
                                          int l, int m, int dir) {
    // Monomial (a, b) acts as the index shift (i, j) -> (i + dir*a, j + dir*b).
    int bi = base / m, bj = base % m;
    std::vector<int> cols;
    for (auto [a, b] : poly) {
        int i = ((bi + dir * a) % l + l) % l;
        int j = ((bj + dir * b) % m + m) % m;
        cols.push_back(i * m + j);
    }
    return cols;
}

}  // namespace detail

inline BBCode build_bb_code(const BBSpec& spec) {
    spec.validate();
    const int l = spec.l, m = spec.m, lm = l * m;
    const int n = 2 * lm;

    // Reject duplicate monomials after exponent reduction: they cancel over
    // GF(2) and almost certainly indicate a typo in the spec.
    auto check_poly = [&](const std::vector<std::pair<int, int>>& poly, const char* name) {
        std::vector<std::pair<int, int>> reduced;
        for (auto [a, b] : poly) reduced.emplace_back(((a % l) + l) % l, ((b % m) + m) % m);
        for (size_t i = 0; i < reduced.size(); ++i)
            for (size_t j = i + 1; j < reduced.size(); ++j)
                if (reduced[i] == reduced[j]) {
                    throw std::invalid_argument(std::string("BBSpec: duplicate monomial in ") +
                                                name);
                }
    };
    check_poly(spec.poly_a, "poly_a");
    check_poly(spec.poly_b, "poly_b");

    BBCode code;
    code.l = l;
    code.m = m;
    code.n = n;
    code.h_x = BitMatrix(lm, n);
    code.h_z = BitMatrix(lm, n);
    for (int i = 0; i < lm; ++i) {
        for (int v : detail::circulant_support(i, spec.poly_a, l, m, +1)) {
            code.h_x.set(i, v, true);
        }
        for (int v : detail::circulant_support(i, spec.poly_b, l, m, +1)) {
            code.h_x.set(i, lm + v, true);
        }
        for (int v : detail::circulant_support(i, spec.poly_b, l, m, -1)) {
            code.h_z.set(i, v, true);
        }
        for (int v : detail::circulant_support(i, spec.poly_a, l, m, -1)) {
            code.h_z.set(i, lm + v, true);
        }
    }

    BitMatrix prod = code.h_x.multiply(code.h_z.transposed());
    if (!prod.is_zero()) {
        for (int r = 0; r < prod.rows(); ++r)
            for (int c = 0; c < prod.cols(); ++c)
                if (prod.get(r, c)) {
                    throw std::invalid_argument(
                        "BBSpec: checks do not commute, H_X H_Z^T has a 1 at (" +
                        std::to_string(r) + ", " + std::to_string(c) + ")");
                }
    }

    code.k = n - code.h_x.rank() - code.h_z.rank();
    if (code.k <= 0) {
        throw std::invalid_argument("BBSpec: code has no logical qubits (k = " +
                                    std::to_string(code.k) + ")");
    }

    // Logical Z representatives: kernel vectors of H_X outside rowspace(H_Z).
    Gf2Span span(n);
    for (int r = 0; r < lm; ++r) span.insert(code.h_z.row_copy(r));
    for (auto& v : code.h_x.kernel_basis()) {
        std::vector<uint64_t> copy = v;
        if (span.insert(std::move(copy))) {
            code.logical_z.push_back(std::move(v));
            if ((int)code.logical_z.size() == code.k) break;
        }
    }
    if ((int)code.logical_z.size() != code.k) {
        throw std::logic_error("build_bb_code: failed to extract k logical operators");
    }
    return code;
}

/// Exhaustive minimum-distance search over both logical cosets; feasible for
/// kernel dimensions up to ~20.
inline int bb_min_distance(const BBCode& code) {
    auto coset_min = [&](const BitMatrix& ker_of, const BitMatrix& modulo) {
        auto basis = ker_of.kernel_basis();
        if (basis.size() > 22) {
            throw std::invalid_argument("bb_min_distance: kernel too large for exhaustion");
        }
        Gf2Span span(code.n);
        for (int r = 0; r < modulo.rows(); ++r) span.insert(modulo.row_copy(r));
        const int words = (code.n + 63) / 64;
        int best = code.n + 1;
        for (uint64_t mask = 1; mask < (1ull << basis.size()); ++mask) {
            std::vector<uint64_t> v(words, 0);
            for (size_t b = 0; b < basis.size(); ++b) {
                if ((mask >> b) & 1) {
                    for (int w = 0; w < words; ++w) v[w] ^= basis[b][w];
                }
            }
            int weight = 0;
            for (int w = 0; w < words; ++w) weight += std::popcount(v[w]);
            if (weight >= best) continue;
            if (!span.contains(v)) best = weight;
        }
        return best;
    };
    int dz = coset_min(code.h_x, code.h_z);
    int dx = coset_min(code.h_z, code.h_x);
    return dz < dx ? dz : dx;
}

/// Z-basis memory on a BB code: all data prepared in |0>, `rounds` rounds of
/// two-phase syndrome extraction (every X-check CNOT layer, then every
/// Z-check layer; CSS commutation makes the phases independent), final
/// transversal Z measurement. Observables are the k logical Z operators.
inline Circuit build_bb_memory(const BBSpec& spec, int rounds) {
    if (rounds < 1) throw std::invalid_argument("build_bb_memory: rounds must be >= 1");
    BBCode code = build_bb_code(spec);
    const int lm = spec.l * spec.m;
    const int n = code.n;

    auto support = [&](const BitMatrix& h, int row) {
        std::vector<int> cols;
        for (int c = 0; c < n; ++c)
            if (h.get(row, c)) cols.push_back(c);
        return cols;
    };

    Circuit c;
    c.n_qubits = n + 2 * lm;  // data, X ancillas, Z ancillas
    auto anc_x = [&](int i) { return n + i; };
    auto anc_z = [&](int i) { return n + lm + i; };

    for (int round = 0; round < rounds; ++round) {
        for (int i = 0; i < lm; ++i) c.append_gate(Gate::H, anc_x(i));
        for (int i = 0; i < lm; ++i) {
            for (int q : support(code.h_x, i)) c.append_gate(Gate::CNOT, anc_x(i), q);
        }
        for (int i = 0; i < lm; ++i) {
            for (int q : support(code.h_z, i)) c.append_gate(Gate::CNOT, q, anc_z(i));
        }
        for (int i = 0; i < lm; ++i) c.append_gate(Gate::H, anc_x(i));
        for (int i = 0; i < lm; ++i) c.append_measure(anc_x(i));
        for (int i = 0; i < lm; ++i) c.append_measure(anc_z(i));
        for (int i = 0; i < 2 * lm; ++i) c.append_reset(n + i, 0);
    }
    const int final_base = c.n_records;
    for (int q = 0; q < n; ++q) c.append_measure(q);

    auto x_record = [&](int round, int i) { return round * 2 * lm + i; };
    auto z_record = [&](int round, int i) { return round * 2 * lm + lm + i; };

    for (int i = 0; i < lm; ++i) c.detectors.push_back({z_record(0, i)});
    for (int round = 1; round < rounds; ++round) {
        for (int i = 0; i < lm; ++i) {
            c.detectors.push_back({x_record(round - 1, i), x_record(round, i)});
        }
        for (int i = 0; i < lm; ++i) {
            c.detectors.push_back({z_record(round - 1, i), z_record(round, i)});
        }
    }
    for (int i = 0; i < lm; ++i) {
        std::vector<int> det{z_record(rounds - 1, i)};
        for (int q : support(code.h_z, i)) det.push_back(final_base + q);
        c.detectors.push_back(std::move(det));
    }

    for (const auto& logical : code.logical_z) {
        std::vector<int> obs;
        for (int q = 0; q < n; ++q) {
            if ((logical[q >> 6] >> (q & 63)) & 1) obs.push_back(final_base + q);
        }
        c.observables.push_back(std::move(obs));
        c.observable_expected.push_back(0);
    }

    c.validate();
    return c;
}

inline int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("THERMSTAB_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? (int)hw : 1;
}

struct MemorySummary {
    double ler = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    long long shots = 0;
    double gamma_total = 1.0;
    long long fallback_count = 0;
    double wall_seconds = 0.0;
};

struct ShotRecordView {
    std::vector<uint64_t> detection_events;
    uint32_t logical_flips;
    ShotWeight weight;
};

struct RunResult {
    int n_detectors = 0;
    int n_observables = 0;
    int det_words = 0;
    std::vector<uint64_t> events;          // shots x det_words, packed
    std::vector<uint32_t> raw_flips;       // before decoder correction
    std::vector<uint32_t> corrected_flips; // after decoder correction
    std::vector<int8_t> signs;
    MemorySummary summary;

    ShotRecordView record(long long shot) const {
        ShotRecordView v;
        v.detection_events.assign(events.begin() + shot * det_words,
                                  events.begin() + (shot + 1) * det_words);
        v.logical_flips = raw_flips[(size_t)shot];
        v.weight = {signs[(size_t)shot], summary.gamma_total};
        return v;
    }
};

struct DecodeResult {
    uint32_t flips = 0;
    bool fallback = false;
};

struct RunOptions {
    int threads = 0;  // 0: THERMSTAB_THREADS if set, else hardware concurrency
    bool keep_records = true;
    long long chunk = 4096;  // shots per work unit; fixed so merges are stable
};

namespace detail {

inline std::pair<double, double> wilson_interval(double k, double n) {
    const double z = 1.959963984540054;
    double phat = k / n;
    double denom = 1.0 + z * z / n;
    double center = (phat + z * z / (2.0 * n)) / denom;
    double half = z * std::sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

}  // namespace detail

/// Execute `shots` Monte-Carlo shots of an instrumented circuit, decoding
/// each detection-event word with `decode`. Results are bit-identical for a
/// fixed (circuit, shots, master_seed) regardless of thread count.
template <typename DecodeFn>
RunResult run_memory(const Circuit& c, long long shots, uint64_t master_seed, DecodeFn&& decode,
                     const RunOptions& opt = {}) {
    if (shots <= 0) throw std::invalid_argument("run_memory: shots must be positive");
    auto t_start = std::chrono::steady_clock::now();

    RunResult res;
    res.n_detectors = (int)c.detectors.size();
    res.n_observables = (int)c.observables.size();
    res.det_words = c.detector_words();
    if (opt.keep_records) {
        res.events.assign((size_t)shots * res.det_words, 0);
        res.raw_flips.assign((size_t)shots, 0);
        res.corrected_flips.assign((size_t)shots, 0);
        res.signs.assign((size_t)shots, 1);
    }
    const double gamma_total = c.gamma_total();
    const bool positive = gamma_total <= 1.0 + 1e-12;

    const long long chunk = opt.chunk > 0 ? opt.chunk : 4096;
    const long long n_tasks = (shots + chunk - 1) / chunk;
    const int threads = std::min<long long>(resolve_thread_count(opt.threads), n_tasks);

    std::vector<RunningStats> task_stats((size_t)n_tasks);
    std::vector<long long> task_fallbacks((size_t)n_tasks, 0);
    std::atomic<long long> next_task{0};

    auto worker = [&]() {
        StabilizerTableau tableau(c.n_qubits);
        std::vector<uint8_t> records;
        std::vector<uint64_t> ev((size_t)res.det_words, 0);
        for (;;) {
            long long task = next_task.fetch_add(1, std::memory_order_relaxed);
            if (task >= n_tasks) return;
            const long long begin = task * chunk;
            const long long end = std::min(shots, begin + chunk);
            RunningStats stats;
            long long fallbacks = 0;
            for (long long shot = begin; shot < end; ++shot) {
                ShotRng rng = shot_rng(master_seed, (uint64_t)shot);
                int sign = execute_circuit(c, rng, records, tableau);
                compute_detection_events(c, records, ev.data());
                uint32_t raw = compute_observable_flips(c, records);
                DecodeResult dec = decode(ev.data(), res.det_words);
                uint32_t corrected = raw ^ dec.flips;
                if (dec.fallback) ++fallbacks;
                stats.add(sign * (corrected != 0 ? 1.0 : 0.0));
                if (opt.keep_records) {
                    for (int w = 0; w < res.det_words; ++w) {
                        res.events[(size_t)shot * res.det_words + w] = ev[w];
                    }
                    res.raw_flips[(size_t)shot] = raw;
                    res.corrected_flips[(size_t)shot] = corrected;
                    res.signs[(size_t)shot] = (int8_t)sign;
                }
            }
            task_stats[(size_t)task] = stats;
            task_fallbacks[(size_t)task] = fallbacks;
        }
    };

    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    RunningStats total;
    long long fallback_count = 0;
    for (long long t = 0; t < n_tasks; ++t) {
        total.merge(task_stats[(size_t)t]);
        fallback_count += task_fallbacks[(size_t)t];
    }

    MemorySummary& s = res.summary;
    s.shots = shots;
    s.gamma_total = gamma_total;
    s.fallback_count = fallback_count;
    if (positive) {
        s.ler = total.mean();
        auto [lo, hi] = detail::wilson_interval(total.sum, (double)total.n);
        s.ci_low = lo;
        s.ci_high = hi;
    } else {
        WeightedEstimate est = weighted_estimate_from(total, gamma_total);
        s.ler = est.estimate;
        s.ci_low = est.estimate - 1.959963984540054 * est.std_error;
        s.ci_high = est.estimate + 1.959963984540054 * est.std_error;
    }
    s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return res;
}

inline DecodeResult zero_decoder(const uint64_t*, int) { return {0u, false}; }

/// Deterministically parallel sign-weighted shot loop for scalar estimates.
/// make_ctx() builds per-worker scratch state; fn(ctx, shot_index, rng)
/// returns (value, sign).
template <typename MakeCtx, typename ShotFn>
RunningStats parallel_weighted_shots(long long shots, uint64_t master_seed, int threads_req,
                                     MakeCtx&& make_ctx, ShotFn&& fn, long long chunk = 4096) {
    if (shots <= 0) throw std::invalid_argument("parallel_weighted_shots: shots must be positive");
    const long long n_tasks = (shots + chunk - 1) / chunk;
    const int threads = (int)std::min<long long>(resolve_thread_count(threads_req), n_tasks);
    std::vector<RunningStats> task_stats((size_t)n_tasks);
    std::atomic<long long> next_task{0};
    auto worker = [&]() {
        auto ctx = make_ctx();
        for (;;) {
            long long task = next_task.fetch_add(1, std::memory_order_relaxed);
            if (task >= n_tasks) return;
            const long long begin = task * chunk;
            const long long end = std::min(shots, begin + chunk);
            RunningStats stats;
            for (long long shot = begin; shot < end; ++shot) {
                ShotRng rng = shot_rng(master_seed, (uint64_t)shot);
                auto [value, sign] = fn(ctx, shot, rng);
                stats.add(sign * value);
            }
            task_stats[(size_t)task] = stats;
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    RunningStats total;
    for (auto& st : task_stats) total.merge(st);
    return total;
}

/// State preparation plus one syndrome round, then a transversal Z
/// measurement of every qubit (data and syndrome). No detectors: the readout
/// of interest is the raw excited-qubit fraction.
inline Circuit build_population_circuit(InitialState state, int d) {
    SurfaceSpec spec;
    spec.distance = d;
    spec.basis = state == InitialState::plus ? 'X' : 'Z';
    spec.initial_state = state;
    spec.validate();

    const int n_data = d * d;
    const auto plaquettes = detail::surface_plaquettes(d);

    Circuit c;
    c.n_qubits = n_data + (int)plaquettes.size();
    if (state == InitialState::one) {
        for (int r = 0; r < d; ++r) c.append_gate(Gate::X, r * d);
    } else if (state == InitialState::plus) {
        for (int q = 0; q < n_data; ++q) c.append_gate(Gate::H, q);
    }
    for (const auto& p : plaquettes) {
        if (p.is_x) c.append_gate(Gate::H, p.ancilla);
    }
    for (int step = 0; step < 4; ++step) {
        for (const auto& p : plaquettes) {
            int role = p.is_x ? detail::X_SCHEDULE[step] : detail::Z_SCHEDULE[step];
            int dq = p.data[role];
            if (dq < 0) continue;
            if (p.is_x) {
                c.append_gate(Gate::CNOT, p.ancilla, dq);
            } else {
                c.append_gate(Gate::CNOT, dq, p.ancilla);
            }
        }
    }
    for (const auto& p : plaquettes) {
        if (p.is_x) c.append_gate(Gate::H, p.ancilla);
    }
    for (const auto& p : plaquettes) c.append_measure(p.ancilla);
    for (const auto& p : plaquettes) c.append_reset(p.ancilla, 0);
    for (int q = 0; q < c.n_qubits; ++q) c.append_measure(q);
    c.validate();
    return c;
}

struct PopulationEstimate {
    double fraction = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    long long shots = 0;
    double gamma_total = 1.0;
};

/// Mean excited fraction over all qubits of the population circuit,
/// sign-weighted under the chosen channel model.
inline PopulationEstimate excited_population(InitialState state, int d, const ThermalParams& params,
                                             ChannelModel model, long long shots,
                                             uint64_t master_seed,
                                             const InstrumentOptions& iopt = {}, int threads = 0) {
    Circuit base = build_population_circuit(state, d);
    Circuit c = instrument_noise(base, params, model, iopt);
    const int n_qubits = c.n_qubits;
    const int final_base = c.n_records - n_qubits;
    const double gamma_total = c.gamma_total();

    struct Ctx {
        StabilizerTableau t;
        std::vector<uint8_t> records;
    };
    RunningStats stats = parallel_weighted_shots(
        shots, master_seed, threads,
        [&]() { return Ctx{StabilizerTableau(c.n_qubits), {}}; },
        [&](Ctx& ctx, long long, ShotRng& rng) -> std::pair<double, int> {
            int sign = execute_circuit(c, rng, ctx.records, ctx.t);
            int ones = 0;
            for (int q = 0; q < n_qubits; ++q) ones += ctx.records[final_base + q];
            return {(double)ones / n_qubits, sign};
        });

    WeightedEstimate est = weighted_estimate_from(stats, gamma_total);
    PopulationEstimate out;
    out.fraction = est.estimate;
    out.std_error = est.std_error;
    out.ci_low = est.estimate - 1.959963984540054 * est.std_error;
    out.ci_high = est.estimate + 1.959963984540054 * est.std_error;
    out.shots = shots;
    out.gamma_total = gamma_total;
    return out;
}

/// One line per shot: detector bits, space, raw observable-flip bits, space,
/// shot sign.
inline void write_detection_events(std::ostream& os, const RunResult& r) {
    const long long shots = r.summary.shots;
    std::string line;
    for (long long shot = 0; shot < shots; ++shot) {
        line.clear();
        for (int d = 0; d < r.n_detectors; ++d) {
            uint64_t w = r.events[(size_t)shot * r.det_words + (d >> 6)];
            line.push_back(((w >> (d & 63)) & 1) ? '1' : '0');
        }
        line.push_back(' ');
        for (int k = 0; k < r.n_observables; ++k) {
            line.push_back(((r.raw_flips[(size_t)shot] >> k) & 1) ? '1' : '0');
        }
        line.push_back(' ');
        line.push_back(r.signs[(size_t)shot] >= 0 ? '+' : '-');
        line.push_back('\n');
        os << line;
    }
}

}  // namespace thermstab
