#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermstab/channel_algebra.hpp"
#include "thermstab/noise_sampler.hpp"
#include "thermstab/tableau_engine.hpp"

namespace thermstab {

/// Timed circuit instruction. `index` is the measurement-record slot for
/// measure and the site-table slot for noise.
struct Instruction {
    enum class Kind : uint8_t { gate, measure, reset, noise };

    Kind kind;
    Gate gate = Gate::H;
    int q0 = -1;
    int q1 = -1;
    int index = -1;
    int target = 0;

    static Instruction make_gate(Gate g, int a, int b = -1) {
        Instruction ins;
        ins.kind = Kind::gate;
        ins.gate = g;
        ins.q0 = a;
        ins.q1 = b;
        return ins;
    }
    static Instruction make_measure(int q, int record) {
        Instruction ins;
        ins.kind = Kind::measure;
        ins.q0 = q;
        ins.index = record;
        return ins;
    }
    static Instruction make_reset(int q, int target) {
        Instruction ins;
        ins.kind = Kind::reset;
        ins.q0 = q;
        ins.target = target;
        return ins;
    }
    static Instruction make_noise(int site_index) {
        Instruction ins;
        ins.kind = Kind::noise;
        ins.index = site_index;
        return ins;
    }
};

/// Instruction list plus detector/observable annotations. Detectors and
/// observables are parity sets over measurement-record indices; an
/// observable's recorded flip is its parity XOR the expected bit.
struct Circuit {
    int n_qubits = 0;
    std::vector<Instruction> instructions;
    std::vector<NoiseSite> sites;
    std::vector<std::vector<int>> detectors;
    std::vector<std::vector<int>> observables;
    std::vector<uint8_t> observable_expected;
    int n_records = 0;

    void append_gate(Gate g, int a, int b = -1) {
        instructions.push_back(Instruction::make_gate(g, a, b));
    }
    int append_measure(int q) {
        instructions.push_back(Instruction::make_measure(q, n_records));
        return n_records++;
    }
    void append_reset(int q, int target = 0) {
        instructions.push_back(Instruction::make_reset(q, target));
    }

    int detector_words() const { return ((int)detectors.size() + 63) / 64; }

    double gamma_total() const {
        double g = 1.0;
        for (const NoiseSite& s : sites) g *= s.dist.gamma;
        return g;
    }

    void validate() const {
        int next_record = 0;
        int next_site = 0;
        for (const Instruction& ins : instructions) {
            switch (ins.kind) {
                case Instruction::Kind::gate:
                    check_qubit(ins.q0);
                    if (ins.gate == Gate::CNOT || ins.gate == Gate::CZ) check_qubit(ins.q1);
                    break;
                case Instruction::Kind::measure:
                    check_qubit(ins.q0);
                    if (ins.index != next_record) {
                        throw std::logic_error("Circuit: record indices must be sequential");
                    }
                    ++next_record;
                    break;
                case Instruction::Kind::reset:
                    check_qubit(ins.q0);
                    break;
                case Instruction::Kind::noise:
                    if (ins.index != next_site) {
                        throw std::logic_error("Circuit: noise site ids must be sequential");
                    }
                    if (ins.index >= (int)sites.size() || sites[ins.index].site_id != ins.index) {
                        throw std::logic_error("Circuit: noise site table mismatch");
                    }
                    check_qubit(sites[ins.index].qubit);
                    ++next_site;
                    break;
            }
        }
        if (next_record != n_records) throw std::logic_error("Circuit: n_records mismatch");
        if (next_site != (int)sites.size()) throw std::logic_error("Circuit: unused noise sites");
        for (const auto& det : detectors) {
            for (int r : det) {
                if (r < 0 || r >= n_records) throw std::logic_error("Circuit: bad detector record");
            }
        }
        if (observables.size() != observable_expected.size()) {
            throw std::logic_error("Circuit: observable_expected size mismatch");
        }
        for (const auto& obs : observables) {
            for (int r : obs) {
                if (r < 0 || r >= n_records)
                    throw std::logic_error("Circuit: bad observable record");
            }
        }
    }

   private:
    void check_qubit(int q) const {
        if (q < 0 || q >= n_qubits) throw std::logic_error("Circuit: qubit index out of range");
    }
};

enum class ChannelModel { exact_qpd, pta, reset_approx };
enum class NoisePolicy { before_measure, around_measure_reset };

inline ChannelModel channel_model_from_string(const std::string& s) {
    if (s == "exact_qpd") return ChannelModel::exact_qpd;
    if (s == "pta") return ChannelModel::pta;
    if (s == "reset_approx") return ChannelModel::reset_approx;
    throw std::invalid_argument("unknown channel model '" + s + "'");
}
inline const char* to_string(ChannelModel m) {
    switch (m) {
        case ChannelModel::exact_qpd: return "exact_qpd";
        case ChannelModel::pta: return "pta";
        case ChannelModel::reset_approx: return "reset_approx";
    }
    return "?";
}

inline NoisePolicy noise_policy_from_string(const std::string& s) {
    if (s == "before_measure") return NoisePolicy::before_measure;
    if (s == "around_measure_reset") return NoisePolicy::around_measure_reset;
    throw std::invalid_argument("unknown noise policy '" + s + "'");
}
inline const char* to_string(NoisePolicy p) {
    return p == NoisePolicy::before_measure ? "before_measure" : "around_measure_reset";
}

struct InstrumentOptions {
    NoisePolicy policy = NoisePolicy::before_measure;
    // Whether the final data-measurement layer receives noise sites too.
    bool final_layer_noise = true;
};

/// Resolve the channel model once into a branch distribution.
inline BranchDistribution resolve_model(const ThermalParams& params, ChannelModel model) {
    switch (model) {
        case ChannelModel::exact_qpd:
            return BranchDistribution::from_decomposition(qpd_thermal(params));
        case ChannelModel::pta: {
            auto [p_gamma, p_phi] = relaxation_probs(params);
            return BranchDistribution::from_pauli(pta_channel(p_gamma, p_phi));
        }
        case ChannelModel::reset_approx:
            return BranchDistribution::from_decomposition(reset_approximation(params));
    }
    throw std::logic_error("resolve_model: unreachable");
}

/// Insert noise sites on every qubit before each measurement layer (a maximal
/// run of measure/reset instructions containing at least one measurement).
/// The around_measure_reset policy additionally instruments after each layer
/// that also resets, matching measure-and-reset windows on syndrome qubits.
inline Circuit instrument_noise(const Circuit& c, const ThermalParams& params, ChannelModel model,
                                const InstrumentOptions& opt = {}) {
    if (!c.sites.empty()) {
        throw std::invalid_argument("instrument_noise: circuit already instrumented");
    }
    const BranchDistribution dist = resolve_model(params, model);

    // Layer spans [begin, end) over the instruction list.
    struct Layer {
        size_t begin, end;
        bool has_reset;
    };
    std::vector<Layer> layers;
    size_t i = 0;
    while (i < c.instructions.size()) {
        auto kind = c.instructions[i].kind;
        if (kind != Instruction::Kind::measure && kind != Instruction::Kind::reset) {
            ++i;
            continue;
        }
        size_t j = i;
        bool any_measure = false, any_reset = false;
        while (j < c.instructions.size() &&
               (c.instructions[j].kind == Instruction::Kind::measure ||
                c.instructions[j].kind == Instruction::Kind::reset)) {
            any_measure |= c.instructions[j].kind == Instruction::Kind::measure;
            any_reset |= c.instructions[j].kind == Instruction::Kind::reset;
            ++j;
        }
        if (any_measure) layers.push_back({i, j, any_reset});
        i = j;
    }
    if (layers.empty()) {
        throw std::invalid_argument("instrument_noise: circuit has no measurement layers");
    }

    Circuit out = c;
    out.instructions.clear();
    out.sites.clear();
    auto add_sites = [&]() {
        for (int q = 0; q < c.n_qubits; ++q) {
            int id = (int)out.sites.size();
            out.sites.push_back(NoiseSite{q, dist, id});
            out.instructions.push_back(Instruction::make_noise(id));
        }
    };

    size_t layer_idx = 0;
    for (size_t pos = 0; pos < c.instructions.size(); ++pos) {
        if (layer_idx < layers.size() && pos == layers[layer_idx].begin) {
            bool is_final_layer = layer_idx + 1 == layers.size();
            if (!is_final_layer || opt.final_layer_noise) add_sites();
            for (size_t k = layers[layer_idx].begin; k < layers[layer_idx].end; ++k) {
                out.instructions.push_back(c.instructions[k]);
            }
            pos = layers[layer_idx].end - 1;
            if (opt.policy == NoisePolicy::around_measure_reset && layers[layer_idx].has_reset) {
                add_sites();
            }
            ++layer_idx;
            continue;
        }
        out.instructions.push_back(c.instructions[pos]);
    }
    out.validate();
    return out;
}

/// Run one shot. Returns the shot sign; measurement outcomes land in
/// `records` (resized to the circuit's record count). When `forced` is given
/// the sampler is bypassed: listed sites apply their branch, all other sites
/// apply identity. `forced` must be sorted by site id.
inline int execute_circuit(const Circuit& c, ShotRng& rng, std::vector<uint8_t>& records,
                           StabilizerTableau& workspace,
                           const std::vector<std::pair<int, Branch>>* forced = nullptr) {
    records.assign(c.n_records, 0);
    workspace.reset_all_zero();
    StabilizerTableau& t = workspace;
    int sign = 1;
    size_t forced_at = 0;
    for (const Instruction& ins : c.instructions) {
        switch (ins.kind) {
            case Instruction::Kind::gate:
                t.apply(ins.gate, ins.q0, ins.q1);
                break;
            case Instruction::Kind::measure:
                records[ins.index] = (uint8_t)t.measure_z(ins.q0, rng).first;
                break;
            case Instruction::Kind::reset:
                t.reset(ins.q0, ins.target, rng);
                break;
            case Instruction::Kind::noise: {
                const NoiseSite& site = c.sites[ins.index];
                if (forced) {
                    while (forced_at < forced->size() && (*forced)[forced_at].first < ins.index) {
                        ++forced_at;
                    }
                    if (forced_at < forced->size() && (*forced)[forced_at].first == ins.index) {
                        apply_branch(t, site.qubit, (*forced)[forced_at].second, rng);
                    }
                } else {
                    auto [branch, s] = sample_branch(site.dist, rng);
                    sign *= s;
                    apply_branch(t, site.qubit, branch, rng);
                }
                break;
            }
        }
    }
    return sign;
}

inline int execute_circuit(const Circuit& c, ShotRng& rng, std::vector<uint8_t>& records,
                           const std::vector<std::pair<int, Branch>>* forced = nullptr) {
    StabilizerTableau t(c.n_qubits);
    return execute_circuit(c, rng, records, t, forced);
}

/// Detector parities packed little-endian into 64-bit words.
inline void compute_detection_events(const Circuit& c, const std::vector<uint8_t>& records,
                                     uint64_t* out) {
    const int words = c.detector_words();
    for (int w = 0; w < words; ++w) out[w] = 0;
    for (size_t d = 0; d < c.detectors.size(); ++d) {
        int parity = 0;
        for (int r : c.detectors[d]) parity ^= records[r];
        if (parity) out[d >> 6] |= 1ull << (d & 63);
    }
}

/// Observable flip bits: measured parity XOR the expected parity.
inline uint32_t compute_observable_flips(const Circuit& c, const std::vector<uint8_t>& records) {
    uint32_t flips = 0;
    for (size_t k = 0; k < c.observables.size(); ++k) {
        int parity = 0;
        for (int r : c.observables[k]) parity ^= records[r];
        if (parity != (int)c.observable_expected[k]) flips |= 1u << k;
    }
    return flips;
}

}  // namespace thermstab
