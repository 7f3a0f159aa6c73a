#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "thermstab/circuit.hpp"
#include "thermstab/qec_experiments.hpp"

namespace thermstab {

namespace detail {

// Fault exploration supports up to 256 detectors; the dictionary itself is
// capped at 64 so signatures fit a single word key.
inline constexpr int FAULT_SIG_WORDS = 4;
inline constexpr int MAX_GRAPH_DETECTORS = FAULT_SIG_WORDS * 64;
using FaultSignature = std::array<uint64_t, FAULT_SIG_WORDS>;

struct FaultEffect {
    FaultSignature sig;
    uint32_t flips;
    bool operator==(const FaultEffect& o) const = default;
};

inline constexpr uint64_t FAULT_EXPLORE_SEED = 0x74686572'6d737462ull;

// Pauli faults have deterministic detector signatures; reset branches project
// randomly, so they are replayed under several RNG streams to collect the
// reachable signature set.
inline int fault_reps(const std::vector<std::pair<int, Branch>>& forced, int n_faults) {
    bool has_reset = false;
    for (auto& [site, b] : forced) {
        if (b == Branch::R0 || b == Branch::R1) has_reset = true;
    }
    if (!has_reset) return 1;
    return n_faults >= 2 ? 16 : 64;
}

inline void explore_fault(const Circuit& c, const std::vector<std::pair<int, Branch>>& forced,
                          uint64_t salt, StabilizerTableau& ws, std::vector<uint8_t>& records,
                          std::vector<uint64_t>& ev, std::vector<FaultEffect>& out) {
    out.clear();
    const int words = c.detector_words();
    const int reps = fault_reps(forced, (int)forced.size());
    for (int rep = 0; rep < reps; ++rep) {
        ShotRng rng = shot_rng(FAULT_EXPLORE_SEED ^ salt, (uint64_t)rep);
        execute_circuit(c, rng, records, ws, &forced);
        compute_detection_events(c, records, ev.data());
        FaultEffect eff;
        eff.sig.fill(0);
        for (int w = 0; w < words; ++w) eff.sig[w] = ev[w];
        eff.flips = compute_observable_flips(c, records);
        if (std::find(out.begin(), out.end(), eff) == out.end()) out.push_back(eff);
    }
}

// Elementary fault branches at a site, in tie-break order; identity is not a
// fault and branches absent from the decomposition are skipped.
inline std::vector<Branch> site_fault_branches(const NoiseSite& site) {
    std::vector<Branch> out;
    for (int b = 1; b < BRANCH_COUNT; ++b) {
        if (std::abs(site.dist.q[b]) > 1e-15) out.push_back((Branch)b);
    }
    return out;
}

}  // namespace detail

/// Exhaustive small-instance decoder: detection-event signature -> correction.
struct FaultDictionary {
    struct Entry {
        uint32_t flips = 0;
        uint8_t weight = 0;
    };
    int n_detectors = 0;
    std::unordered_map<uint64_t, Entry> table;

    const Entry* find(uint64_t sig) const {
        auto it = table.find(sig);
        return it == table.end() ? nullptr : &it->second;
    }
};

/// Enumerates every combination of at most `max_faults` elementary branch
/// faults and records the lowest-weight correction per signature; equal-weight
/// collisions keep the lexicographically smallest (site, branch) fault set.
inline FaultDictionary build_fault_dictionary(const Circuit& c, int max_faults) {
    if (max_faults != 1 && max_faults != 2) {
        throw std::invalid_argument("build_fault_dictionary: max_faults must be 1 or 2");
    }
    if (c.detectors.size() > 40) {
        throw std::invalid_argument("build_fault_dictionary: more than 40 detectors");
    }
    if (c.sites.empty()) {
        throw std::invalid_argument("build_fault_dictionary: circuit has no noise sites");
    }

    FaultDictionary dict;
    dict.n_detectors = (int)c.detectors.size();
    dict.table[0] = {0u, 0};

    StabilizerTableau ws(c.n_qubits);
    std::vector<uint8_t> records;
    std::vector<uint64_t> ev((size_t)c.detector_words(), 0);
    std::vector<detail::FaultEffect> effects;
    uint64_t salt = 0;

    auto insert_effects = [&](uint8_t weight) {
        for (const auto& eff : effects) {
            dict.table.try_emplace(eff.sig[0], FaultDictionary::Entry{eff.flips, weight});
        }
    };

    std::vector<std::pair<int, Branch>> forced(1);
    for (const auto& site : c.sites) {
        for (Branch b : detail::site_fault_branches(site)) {
            forced[0] = {site.site_id, b};
            detail::explore_fault(c, forced, ++salt, ws, records, ev, effects);
            insert_effects(1);
        }
    }
    if (max_faults == 2) {
        std::vector<std::pair<int, Branch>> pair(2);
        for (size_t i = 0; i < c.sites.size(); ++i) {
            for (Branch bi : detail::site_fault_branches(c.sites[i])) {
                pair[0] = {c.sites[i].site_id, bi};
                for (size_t j = i + 1; j < c.sites.size(); ++j) {
                    for (Branch bj : detail::site_fault_branches(c.sites[j])) {
                        pair[1] = {c.sites[j].site_id, bj};
                        detail::explore_fault(c, pair, ++salt, ws, records, ev, effects);
                        insert_effects(2);
                    }
                }
            }
        }
    }
    return dict;
}

/// Single-fault equivalence class for the detector-model export and the
/// matching graph: the detectors it fires, the observables it flips, and the
/// XOR-combined probability of all faults producing it.
struct FaultClass {
    detail::FaultSignature sig{};
    uint32_t flips = 0;
    double prob = 0.0;
};

inline std::vector<FaultClass> enumerate_single_fault_classes(const Circuit& c) {
    if ((int)c.detectors.size() > detail::MAX_GRAPH_DETECTORS) {
        throw std::invalid_argument("enumerate_single_fault_classes: more than 256 detectors");
    }
    if (c.sites.empty()) {
        throw std::invalid_argument("enumerate_single_fault_classes: circuit has no noise sites");
    }
    struct KeyHash {
        size_t operator()(const std::pair<detail::FaultSignature, uint32_t>& k) const {
            uint64_t h = 0x9e3779b97f4a7c15ull + k.second;
            for (uint64_t w : k.first) h = (h ^ w) * 0xd2b74407b1ce6e93ull;
            return (size_t)h;
        }
    };
    std::unordered_map<std::pair<detail::FaultSignature, uint32_t>, double, KeyHash> classes;

    StabilizerTableau ws(c.n_qubits);
    std::vector<uint8_t> records;
    std::vector<uint64_t> ev((size_t)c.detector_words(), 0);
    std::vector<detail::FaultEffect> effects;
    std::vector<std::pair<int, Branch>> forced(1);
    uint64_t salt = 0;

    for (const auto& site : c.sites) {
        for (Branch b : detail::site_fault_branches(site)) {
            forced[0] = {site.site_id, b};
            detail::explore_fault(c, forced, ++salt, ws, records, ev, effects);
            double p = std::abs(site.dist.q[(int)b]) / site.dist.gamma;
            for (const auto& eff : effects) {
                bool trivial = eff.flips == 0 &&
                               std::all_of(eff.sig.begin(), eff.sig.end(),
                                           [](uint64_t w) { return w == 0; });
                if (trivial) continue;
                double& q = classes[{eff.sig, eff.flips}];
                q = q * (1.0 - p) + p * (1.0 - q);
            }
        }
    }

    std::vector<FaultClass> out;
    out.reserve(classes.size());
    for (auto& [key, p] : classes) out.push_back({key.first, key.second, p});
    std::sort(out.begin(), out.end(), [](const FaultClass& a, const FaultClass& b) {
        if (a.sig != b.sig) {
            return std::lexicographical_compare(a.sig.begin(), a.sig.end(), b.sig.begin(),
                                                b.sig.end());
        }
        return a.flips < b.flips;
    });
    return out;
}

/// Matching graph over detectors plus one boundary node (id n_detectors).
/// Parallel edges with different observable effects are kept distinct.
struct DetectorGraph {
    struct Edge {
        int to;
        double weight;
        uint32_t flips;
    };
    int n_detectors = 0;
    std::vector<std::vector<Edge>> adj;  // size n_detectors + 1

    int boundary() const { return n_detectors; }
};

inline DetectorGraph detector_graph_from_classes(const std::vector<FaultClass>& classes,
                                                 int n_detectors) {
    DetectorGraph g;
    g.n_detectors = n_detectors;
    g.adj.assign((size_t)n_detectors + 1, {});
    auto add_edge = [&](int u, int v, double p, uint32_t flips) {
        if (p <= 0.0) return;
        double w = -std::log(p);
        g.adj[(size_t)u].push_back({v, w, flips});
        g.adj[(size_t)v].push_back({u, w, flips});
    };
    for (const auto& fc : classes) {
        std::vector<int> fired;
        for (int d = 0; d < n_detectors; ++d) {
            if ((fc.sig[d >> 6] >> (d & 63)) & 1) fired.push_back(d);
        }
        if (fired.size() == 1) {
            add_edge(fired[0], n_detectors, fc.prob, fc.flips);
        } else if (fired.size() == 2) {
            add_edge(fired[0], fired[1], fc.prob, fc.flips);
        }
        // Classes firing 0 or >2 detectors have no pairwise-graph analogue.
    }
    return g;
}

inline DetectorGraph build_detector_graph(const Circuit& c) {
    return detector_graph_from_classes(enumerate_single_fault_classes(c),
                                       (int)c.detectors.size());
}

/// Pairs fired detectors greedily, cheapest pair first, where a pair either
/// takes its shortest direct path or routes both endpoints to the boundary;
/// leftovers match the boundary. Returns the XOR of the observable flips
/// along all chosen paths.
inline uint32_t greedy_match(const uint64_t* events, const DetectorGraph& g) {
    std::vector<int> fired;
    for (int d = 0; d < g.n_detectors; ++d) {
        if ((events[d >> 6] >> (d & 63)) & 1) fired.push_back(d);
    }
    if (fired.empty()) return 0;

    const int n_nodes = g.n_detectors + 1;
    const double inf = std::numeric_limits<double>::infinity();
    struct Paths {
        std::vector<double> dist;
        std::vector<uint32_t> flips;
    };
    std::vector<Paths> sp(fired.size());
    for (size_t f = 0; f < fired.size(); ++f) {
        auto& p = sp[f];
        p.dist.assign((size_t)n_nodes, inf);
        p.flips.assign((size_t)n_nodes, 0);
        using QItem = std::pair<double, int>;
        std::priority_queue<QItem, std::vector<QItem>, std::greater<>> q;
        p.dist[(size_t)fired[f]] = 0.0;
        q.push({0.0, fired[f]});
        while (!q.empty()) {
            auto [d, u] = q.top();
            q.pop();
            if (d > p.dist[(size_t)u]) continue;
            for (const auto& e : g.adj[(size_t)u]) {
                double nd = d + e.weight;
                if (nd < p.dist[(size_t)e.to]) {
                    p.dist[(size_t)e.to] = nd;
                    p.flips[(size_t)e.to] = p.flips[(size_t)u] ^ e.flips;
                    q.push({nd, e.to});
                }
            }
        }
    }

    std::vector<bool> matched(fired.size(), false);
    size_t remaining = fired.size();
    uint32_t result = 0;
    const size_t bnd = (size_t)g.boundary();
    while (remaining > 1) {
        double best = inf;
        size_t bu = fired.size(), bv = fired.size();
        bool via_boundary = false;
        for (size_t u = 0; u < fired.size(); ++u) {
            if (matched[u]) continue;
            for (size_t v = u + 1; v < fired.size(); ++v) {
                if (matched[v]) continue;
                double direct = sp[u].dist[(size_t)fired[v]];
                double through = sp[u].dist[bnd] + sp[v].dist[bnd];
                double cost = std::min(direct, through);
                if (cost < best) {
                    best = cost;
                    bu = u;
                    bv = v;
                    via_boundary = through < direct;
                }
            }
        }
        if (bu == fired.size()) break;
        matched[bu] = matched[bv] = true;
        remaining -= 2;
        if (via_boundary) {
            result ^= sp[bu].flips[bnd] ^ sp[bv].flips[bnd];
        } else {
            result ^= sp[bu].flips[(size_t)fired[bv]];
        }
    }
    // Leftovers: an odd last node, or fired detectors no finite pair move can
    // reach. Each matches the boundary when reachable, else stays uncorrected.
    for (size_t u = 0; u < fired.size(); ++u) {
        if (!matched[u] && sp[u].dist[bnd] < inf) result ^= sp[u].flips[bnd];
    }
    return result;
}

/// Dictionary lookup with fallback: greedy matching when a graph is supplied
/// (surface codes), zero correction otherwise (BB codes).
inline DecodeResult decode(const FaultDictionary& dict, const uint64_t* events, int n_words,
                           const DetectorGraph* fallback_graph = nullptr) {
    bool high_bits = false;
    for (int w = 1; w < n_words; ++w) high_bits |= events[w] != 0;
    if (!high_bits) {
        if (const auto* e = dict.find(events[0])) return {e->flips, false};
    }
    if (fallback_graph) return {greedy_match(events, *fallback_graph), true};
    return {0u, true};
}

/// Text detector-model export, one single-fault equivalence class per line:
/// `fault <prob> D<i> D<j> ... [L<k>]`.
inline void write_detector_model(std::ostream& os, const Circuit& c) {
    auto classes = enumerate_single_fault_classes(c);
    const int n_det = (int)c.detectors.size();
    const auto old_precision = os.precision(17);
    for (const auto& fc : classes) {
        os << "fault " << fc.prob;
        for (int d = 0; d < n_det; ++d) {
            if ((fc.sig[d >> 6] >> (d & 63)) & 1) os << " D" << d;
        }
        for (int k = 0; k < 32; ++k) {
            if ((fc.flips >> k) & 1) os << " L" << k;
        }
        os << '\n';
    }
    os.precision(old_precision);
}

struct DetectorModel {
    struct Fault {
        double prob = 0.0;
        std::vector<int> detectors;
        uint32_t flips = 0;
    };
    int n_detectors = 0;
    std::vector<Fault> faults;
};

inline DetectorModel read_detector_model(std::istream& is) {
    DetectorModel model;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok != "fault") {
            throw std::invalid_argument("detector model line " + std::to_string(line_no) +
                                        ": expected 'fault', got '" + tok + "'");
        }
        DetectorModel::Fault f;
        if (!(ls >> f.prob)) {
            throw std::invalid_argument("detector model line " + std::to_string(line_no) +
                                        ": missing probability");
        }
        while (ls >> tok) {
            if (tok.size() < 2 || (tok[0] != 'D' && tok[0] != 'L')) {
                throw std::invalid_argument("detector model line " + std::to_string(line_no) +
                                            ": bad token '" + tok + "'");
            }
            int idx = std::stoi(tok.substr(1));
            if (idx < 0) {
                throw std::invalid_argument("detector model line " + std::to_string(line_no) +
                                            ": negative index");
            }
            if (tok[0] == 'D') {
                if (idx >= detail::MAX_GRAPH_DETECTORS) {
                    throw std::invalid_argument("detector model line " + std::to_string(line_no) +
                                                ": detector index too large");
                }
                f.detectors.push_back(idx);
                model.n_detectors = std::max(model.n_detectors, idx + 1);
            } else {
                if (idx >= 32) {
                    throw std::invalid_argument("detector model line " + std::to_string(line_no) +
                                                ": observable index too large");
                }
                f.flips |= 1u << idx;
            }
        }
        model.faults.push_back(std::move(f));
    }
    return model;
}

inline DetectorGraph build_detector_graph(const DetectorModel& model) {
    std::vector<FaultClass> classes;
    classes.reserve(model.faults.size());
    for (const auto& f : model.faults) {
        FaultClass fc;
        fc.prob = f.prob;
        fc.flips = f.flips;
        for (int d : f.detectors) fc.sig[d >> 6] |= 1ull << (d & 63);
        classes.push_back(fc);
    }
    return detector_graph_from_classes(classes, model.n_detectors);
}

}  // namespace thermstab
