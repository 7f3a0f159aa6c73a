#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "thermstab/channel_algebra.hpp"
#include "thermstab/circuit.hpp"
#include "thermstab/qec_experiments.hpp"

namespace thermstab {

/// Flat sectioned key-value experiment description. Parsing is strict:
/// unknown sections, unknown keys and duplicate keys are rejected; values are
/// re-validated against the upstream type constraints by validate().
struct ExperimentConfig {
    // [code]
    std::string code_type = "surface";  // surface | bb
    int distance = 3;
    int rounds = 3;
    std::string initial_state = "0";  // 0 | 1 | +
    int bb_l = 3;
    int bb_m = 3;
    std::string bb_poly_a = "0,0 0,1 1,0";
    std::string bb_poly_b = "0,0 0,2 2,0";
    // [noise]
    double t1 = 1.0;
    double t2 = 1.0;
    double tau = 0.01;
    double p1 = 0.0;
    std::string channel_model = "exact_qpd";  // exact_qpd | pta | reset_approx | none
    std::string noise_policy = "before_measure";
    bool final_layer_noise = true;
    // [run]
    long long shots = 100000;
    uint64_t master_seed = 1;
    std::string decoder = "lookup";  // lookup | greedy | none
    int threads = 0;
    // [output]
    std::string output_dir = "out";

    bool operator==(const ExperimentConfig&) const = default;
};

/// Monomial exponent list "i,j i,j ..." for BB polynomials.
inline std::vector<std::pair<int, int>> parse_poly(const std::string& text) {
    std::vector<std::pair<int, int>> out;
    std::istringstream is(text);
    std::string tok;
    while (is >> tok) {
        auto comma = tok.find(',');
        if (comma == std::string::npos || comma == 0 || comma + 1 == tok.size()) {
            throw std::invalid_argument("bad monomial '" + tok + "' (expected i,j)");
        }
        size_t used = 0;
        int a = std::stoi(tok.substr(0, comma), &used);
        if (used != comma) throw std::invalid_argument("bad monomial '" + tok + "'");
        int b = std::stoi(tok.substr(comma + 1), &used);
        if (used != tok.size() - comma - 1) throw std::invalid_argument("bad monomial '" + tok + "'");
        out.emplace_back(a, b);
    }
    if (out.empty()) throw std::invalid_argument("empty polynomial");
    return out;
}

namespace detail {

inline std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace((unsigned char)s[b])) ++b;
    while (e > b && std::isspace((unsigned char)s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw std::invalid_argument("key '" + key + "': expected true or false, got '" + v + "'");
}

template <typename T>
T parse_int(const std::string& v, const std::string& key) {
    try {
        size_t used = 0;
        if constexpr (std::is_same_v<T, uint64_t>) {
            unsigned long long x = std::stoull(v, &used);
            if (used != v.size()) throw std::invalid_argument("");
            return (T)x;
        } else {
            long long x = std::stoll(v, &used);
            if (used != v.size()) throw std::invalid_argument("");
            return (T)x;
        }
    } catch (const std::exception&) {
        throw std::invalid_argument("key '" + key + "': bad integer '" + v + "'");
    }
}

inline double parse_double(const std::string& v, const std::string& key) {
    try {
        size_t used = 0;
        double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw std::invalid_argument("key '" + key + "': bad number '" + v + "'");
    }
}

// Shortest decimal that round-trips to the same double.
inline std::string format_double(double x) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line;
    std::string section;
    std::vector<std::string> seen;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto fail = [&](const std::string& msg) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + msg);
        };
        if (t.front() == '[') {
            if (t.back() != ']') fail("unterminated section header");
            section = t.substr(1, t.size() - 2);
            if (section != "code" && section != "noise" && section != "run" &&
                section != "output") {
                fail("unknown section [" + section + "]");
            }
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        std::string key = detail::trim(t.substr(0, eq));
        std::string value = detail::trim(t.substr(eq + 1));
        if (section.empty()) fail("key '" + key + "' outside any section");
        std::string qual = section + "." + key;
        for (const auto& s : seen) {
            if (s == qual) fail("duplicate key '" + qual + "'");
        }
        seen.push_back(qual);

        try {
            if (qual == "code.type") cfg.code_type = value;
            else if (qual == "code.distance") cfg.distance = detail::parse_int<int>(value, key);
            else if (qual == "code.rounds") cfg.rounds = detail::parse_int<int>(value, key);
            else if (qual == "code.initial_state") cfg.initial_state = value;
            else if (qual == "code.l") cfg.bb_l = detail::parse_int<int>(value, key);
            else if (qual == "code.m") cfg.bb_m = detail::parse_int<int>(value, key);
            else if (qual == "code.poly_a") cfg.bb_poly_a = value;
            else if (qual == "code.poly_b") cfg.bb_poly_b = value;
            else if (qual == "noise.t1") cfg.t1 = detail::parse_double(value, key);
            else if (qual == "noise.t2") cfg.t2 = detail::parse_double(value, key);
            else if (qual == "noise.tau") cfg.tau = detail::parse_double(value, key);
            else if (qual == "noise.p1") cfg.p1 = detail::parse_double(value, key);
            else if (qual == "noise.channel_model") cfg.channel_model = value;
            else if (qual == "noise.noise_policy") cfg.noise_policy = value;
            else if (qual == "noise.final_layer_noise")
                cfg.final_layer_noise = detail::parse_bool(value, key);
            else if (qual == "run.shots") cfg.shots = detail::parse_int<long long>(value, key);
            else if (qual == "run.master_seed")
                cfg.master_seed = detail::parse_int<uint64_t>(value, key);
            else if (qual == "run.decoder") cfg.decoder = value;
            else if (qual == "run.threads") cfg.threads = detail::parse_int<int>(value, key);
            else if (qual == "output.output_dir") cfg.output_dir = value;
            else fail("unknown key '" + qual + "'");
        } catch (const std::invalid_argument& e) {
            std::string what = e.what();
            if (what.rfind("config line", 0) == 0) throw;
            fail(what);
        }
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

inline std::string serialize(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "[code]\n";
    os << "type = " << c.code_type << "\n";
    os << "distance = " << c.distance << "\n";
    os << "rounds = " << c.rounds << "\n";
    os << "initial_state = " << c.initial_state << "\n";
    os << "l = " << c.bb_l << "\n";
    os << "m = " << c.bb_m << "\n";
    os << "poly_a = " << c.bb_poly_a << "\n";
    os << "poly_b = " << c.bb_poly_b << "\n";
    os << "[noise]\n";
    os << "t1 = " << detail::format_double(c.t1) << "\n";
    os << "t2 = " << detail::format_double(c.t2) << "\n";
    os << "tau = " << detail::format_double(c.tau) << "\n";
    os << "p1 = " << detail::format_double(c.p1) << "\n";
    os << "channel_model = " << c.channel_model << "\n";
    os << "noise_policy = " << c.noise_policy << "\n";
    os << "final_layer_noise = " << (c.final_layer_noise ? "true" : "false") << "\n";
    os << "[run]\n";
    os << "shots = " << c.shots << "\n";
    os << "master_seed = " << c.master_seed << "\n";
    os << "decoder = " << c.decoder << "\n";
    os << "threads = " << c.threads << "\n";
    os << "[output]\n";
    os << "output_dir = " << c.output_dir << "\n";
    return os.str();
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

/// Hash of the canonical serialization; recorded in run manifests.
inline std::string config_hash(const ExperimentConfig& c) {
    static const char* digits = "0123456789abcdef";
    uint64_t h = fnv1a64(serialize(c));
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[(size_t)i] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

/// All validation failures, empty when the config is usable.
inline std::vector<std::string> validate(const ExperimentConfig& c) {
    std::vector<std::string> errors;
    auto check = [&](bool ok, const std::string& msg) {
        if (!ok) errors.push_back(msg);
    };

    check(c.code_type == "surface" || c.code_type == "bb",
          "code.type must be surface or bb, got '" + c.code_type + "'");
    check(c.rounds >= 1, "code.rounds must be >= 1");
    if (c.code_type == "surface") {
        check(c.distance >= 3 && c.distance % 2 == 1, "code.distance must be odd and >= 3");
        check(c.initial_state == "0" || c.initial_state == "1" || c.initial_state == "+",
              "code.initial_state must be 0, 1 or +");
    } else if (c.code_type == "bb") {
        check(c.initial_state == "0", "code.initial_state must be 0 for bb codes");
        try {
            BBSpec spec{c.bb_l, c.bb_m, parse_poly(c.bb_poly_a), parse_poly(c.bb_poly_b)};
            spec.validate();
        } catch (const std::exception& e) {
            errors.push_back(std::string("code: ") + e.what());
        }
    }

    if (c.channel_model != "none") {
        try {
            channel_model_from_string(c.channel_model);
        } catch (const std::exception& e) {
            errors.push_back(std::string("noise.channel_model: ") + e.what());
        }
        try {
            ThermalParams params(c.t1, c.t2, c.tau, c.p1);
            (void)params;
        } catch (const std::exception& e) {
            errors.push_back(std::string("noise: ") + e.what());
        }
    }
    try {
        noise_policy_from_string(c.noise_policy);
    } catch (const std::exception& e) {
        errors.push_back(std::string("noise.noise_policy: ") + e.what());
    }

    check(c.shots >= 1, "run.shots must be >= 1");
    check(c.decoder == "lookup" || c.decoder == "greedy" || c.decoder == "none",
          "run.decoder must be lookup, greedy or none, got '" + c.decoder + "'");
    if (c.decoder == "greedy") {
        check(c.code_type == "surface", "run.decoder greedy requires a surface code");
    }
    if (c.channel_model == "none") {
        check(c.decoder == "none",
              "run.decoder must be none when noise.channel_model is none (no fault sites)");
    }
    check(c.threads >= 0, "run.threads must be >= 0");
    check(!c.output_dir.empty(), "output.output_dir must not be empty");
    return errors;
}

inline SurfaceSpec to_surface_spec(const ExperimentConfig& c) {
    SurfaceSpec spec;
    spec.distance = c.distance;
    spec.initial_state = initial_state_from_string(c.initial_state);
    spec.basis = spec.initial_state == InitialState::plus ? 'X' : 'Z';
    return spec;
}

inline BBSpec to_bb_spec(const ExperimentConfig& c) {
    return BBSpec{c.bb_l, c.bb_m, parse_poly(c.bb_poly_a), parse_poly(c.bb_poly_b)};
}

inline ThermalParams to_thermal_params(const ExperimentConfig& c) {
    return ThermalParams(c.t1, c.t2, c.tau, c.p1);
}

inline InstrumentOptions to_instrument_options(const ExperimentConfig& c) {
    InstrumentOptions opt;
    opt.policy = noise_policy_from_string(c.noise_policy);
    opt.final_layer_noise = c.final_layer_noise;
    return opt;
}

}  // namespace thermstab
