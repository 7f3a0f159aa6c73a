// Command-line front end: channel inspection, figure-data sweeps, memory
// experiments with reproducibility manifests, and oracle self-checks.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "thermstab/thermstab.hpp"
#include "thermstab/validation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace thermstab;

namespace {

struct DevicePreset {
    double t1_us;
    double t2_us;
};

// Median coherence times of the supported device presets, microseconds.
const std::map<std::string, DevicePreset> PRESETS = {
    {"boston", {275.27, 338.82}},   {"fez", {142.41, 98.43}},
    {"kingston", {261.36, 131.93}}, {"marrakesh", {185.77, 104.16}},
    {"pittsburgh", {300.0, 324.17}}, {"torino", {183.67, 131.48}},
};

std::string fmt(double x) { return detail::format_double(x); }

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open output file '" + path.string() + "'");
    return f;
}

// ---------------------------------------------------------------- channel --

struct ChannelArgs {
    double t1 = 1.0;
    double t2 = 1.0;
    double tau = -1.0;  // <0: use t1/100
    double p1 = 0.0;
    std::string preset;
    std::string csv_path;
};

int cmd_channel(const ChannelArgs& args) {
    double t1 = args.t1, t2 = args.t2;
    if (!args.preset.empty()) {
        auto it = PRESETS.find(args.preset);
        if (it == PRESETS.end()) {
            std::cerr << "error: unknown preset '" << args.preset << "' (known:";
            for (auto& [name, _] : PRESETS) std::cerr << " " << name;
            std::cerr << ")\n";
            return 1;
        }
        t1 = it->second.t1_us;
        t2 = it->second.t2_us;
    }
    // Measurement window defaults to T1/100.
    double tau = args.tau >= 0.0 ? args.tau : t1 / 100.0;

    ThermalParams params(t1, t2, tau, args.p1);
    auto [p_gamma, p_phi] = relaxation_probs(params);
    ChannelDecomposition exact = qpd_thermal(params);
    ChannelDecomposition reset = reset_approximation(params);
    PauliChannelProbs pta = pta_channel(p_gamma, p_phi);
    double gamma = negativity(exact);

    DenseChannel dense_exact = DenseChannel::from_kraus(kraus_thermal(params));
    DenseChannel dense_pta = DenseChannel::from_pauli(pta);
    DenseChannel dense_reset = DenseChannel::from_decomposition(reset);
    double f_pta = channel_fidelity(dense_exact, dense_pta);
    double f_reset = channel_fidelity(dense_exact, dense_reset);

    std::cout << std::setprecision(6) << std::fixed;
    std::cout << "parameters: T1 = " << t1 << ", T2 = " << t2 << ", tau = " << tau
              << ", p1 = " << args.p1 << "\n";
    std::cout << "relaxation: p_gamma = " << p_gamma << ", p_phi = " << p_phi << "\n";
    std::cout << "exact decomposition: q_I = " << exact.q_identity << ", q_Z = " << exact.q_pauli_z
              << ", q_R0 = " << exact.q_reset0 << ", q_R1 = " << exact.q_reset1 << "\n";
    std::cout << "negativity: Gamma = " << gamma << "\n";
    std::cout << "pta probabilities: p_i = " << pta.p_identity() << ", p_x = " << pta.p_x
              << ", p_y = " << pta.p_y << ", p_z = " << pta.p_z << "\n";
    std::cout << "reset approximation: q_I = " << reset.q_identity << ", q_R0 = " << reset.q_reset0
              << ", q_R1 = " << reset.q_reset1 << "\n";
    std::cout << "channel fidelity exact vs pta:   " << f_pta << "\n";
    std::cout << "channel fidelity exact vs reset: " << f_reset << "\n";

    if (!args.csv_path.empty()) {
        auto f = open_out(args.csv_path);
        f << "quantity,value\n";
        f << "t1," << fmt(t1) << "\n";
        f << "t2," << fmt(t2) << "\n";
        f << "tau," << fmt(tau) << "\n";
        f << "p1," << fmt(args.p1) << "\n";
        f << "p_gamma," << fmt(p_gamma) << "\n";
        f << "p_phi," << fmt(p_phi) << "\n";
        f << "q_identity," << fmt(exact.q_identity) << "\n";
        f << "q_pauli_z," << fmt(exact.q_pauli_z) << "\n";
        f << "q_reset0," << fmt(exact.q_reset0) << "\n";
        f << "q_reset1," << fmt(exact.q_reset1) << "\n";
        f << "gamma," << fmt(gamma) << "\n";
        f << "pta_p_x," << fmt(pta.p_x) << "\n";
        f << "pta_p_y," << fmt(pta.p_y) << "\n";
        f << "pta_p_z," << fmt(pta.p_z) << "\n";
        f << "reset_q_identity," << fmt(reset.q_identity) << "\n";
        f << "reset_q_reset0," << fmt(reset.q_reset0) << "\n";
        f << "reset_q_reset1," << fmt(reset.q_reset1) << "\n";
        f << "fidelity_exact_pta," << fmt(f_pta) << "\n";
        f << "fidelity_exact_reset," << fmt(f_reset) << "\n";
    }
    return 0;
}

// ------------------------------------------------------------------ sweep --

struct SweepArgs {
    std::string kind;
    std::string out_path;
    double t2_ratio = 1.5;
    double tau_ratio = 1.0;
    double p1 = 0.0;
    int points = 199;
    double t2_lo = 1.0, t2_hi = 2.0;
    double tau_lo = 0.0, tau_hi = 1.0;
    int nt2 = 50, ntau = 50;
    int n_channels = 1;
};

int cmd_sweep(const SweepArgs& args) {
    auto f = open_out(args.out_path);
    if (args.kind == "delta_d") {
        ThermalParams params(1.0, args.t2_ratio, args.tau_ratio, args.p1);
        std::vector<double> thetas;
        for (int k = 1; k <= args.points; ++k) {
            thetas.push_back(std::numbers::pi * k / (args.points + 1));
        }
        f << "theta,delta_d\n";
        for (auto [theta, dd] : delta_d_sweep(thetas, params)) {
            f << fmt(theta) << "," << fmt(dd) << "\n";
        }
    } else if (args.kind == "delta_f") {
        f << "t2_ratio,tau_ratio,delta_f\n";
        for (int i = 1; i <= args.nt2; ++i) {
            double t2r = args.t2_lo + (args.t2_hi - args.t2_lo) * i / args.nt2;
            for (int j = 1; j <= args.ntau; ++j) {
                double taur = args.tau_lo + (args.tau_hi - args.tau_lo) * j / args.ntau;
                ThermalParams params(1.0, t2r, taur, args.p1);
                auto [p_gamma, p_phi] = relaxation_probs(params);
                DenseChannel exact = DenseChannel::from_kraus(kraus_thermal(params));
                DenseChannel pta = DenseChannel::from_pauli(pta_channel(p_gamma, p_phi));
                DenseChannel reset =
                    DenseChannel::from_decomposition(reset_approximation(params));
                double delta_f =
                    channel_fidelity(exact, reset) - channel_fidelity(exact, pta);
                f << fmt(t2r) << "," << fmt(taur) << "," << fmt(delta_f) << "\n";
            }
        }
    } else if (args.kind == "overhead") {
        f << "t2_ratio,tau_ratio,gamma,gamma_total,variance_factor\n";
        for (int i = 1; i <= args.nt2; ++i) {
            double t2r = args.t2_lo + (args.t2_hi - args.t2_lo) * i / args.nt2;
            for (int j = 1; j <= args.ntau; ++j) {
                double taur = args.tau_lo + (args.tau_hi - args.tau_lo) * j / args.ntau;
                ThermalParams params(1.0, t2r, taur, args.p1);
                double gamma = negativity(qpd_thermal(params));
                auto [total, variance] =
                    total_overhead(std::vector<double>(args.n_channels, gamma));
                f << fmt(t2r) << "," << fmt(taur) << "," << fmt(gamma) << "," << fmt(total)
                  << "," << fmt(variance) << "\n";
            }
        }
    } else {
        std::cerr << "error: unknown sweep kind '" << args.kind << "'\n";
        return 1;
    }
    std::cout << "wrote " << args.out_path << "\n";
    return 0;
}

// ----------------------------------------------------------------- memory --

struct MemoryArgs {
    std::string config_path;
    long long shots_override = -1;
    long long seed_override = -1;
    int threads_override = -1;
    std::string output_override;
    std::string decoder_override;
    std::string model_override;
};

int cmd_memory(const MemoryArgs& args) {
    ExperimentConfig cfg = load_config(args.config_path);
    if (args.shots_override >= 0) cfg.shots = args.shots_override;
    if (args.seed_override >= 0) cfg.master_seed = (uint64_t)args.seed_override;
    if (args.threads_override >= 0) cfg.threads = args.threads_override;
    if (!args.output_override.empty()) cfg.output_dir = args.output_override;
    if (!args.decoder_override.empty()) cfg.decoder = args.decoder_override;
    if (!args.model_override.empty()) cfg.channel_model = args.model_override;

    auto errors = validate(cfg);
    if (!errors.empty()) {
        std::cerr << "config validation failed:\n";
        for (const auto& e : errors) std::cerr << "  - " << e << "\n";
        return 1;
    }

    Circuit circuit = cfg.code_type == "surface"
                          ? build_surface_memory(to_surface_spec(cfg), cfg.rounds)
                          : build_bb_memory(to_bb_spec(cfg), cfg.rounds);
    if (cfg.channel_model != "none") {
        circuit = instrument_noise(circuit, to_thermal_params(cfg),
                                   channel_model_from_string(cfg.channel_model),
                                   to_instrument_options(cfg));
    }

    FaultDictionary dict;
    DetectorGraph graph;
    bool use_dict = cfg.decoder == "lookup";
    bool use_greedy = cfg.decoder == "greedy";
    bool surface = cfg.code_type == "surface";
    if (use_dict) {
        dict = build_fault_dictionary(circuit, 2);
        if (surface) graph = build_detector_graph(circuit);
    } else if (use_greedy) {
        graph = build_detector_graph(circuit);
    }

    RunOptions ropt;
    ropt.threads = cfg.threads;
    auto decoder_fn = [&](const uint64_t* ev, int words) -> DecodeResult {
        if (use_dict) return decode(dict, ev, words, surface ? &graph : nullptr);
        if (use_greedy) return {greedy_match(ev, graph), false};
        return {0u, false};
    };
    RunResult result = run_memory(circuit, cfg.shots, cfg.master_seed, decoder_fn, ropt);
    const MemorySummary& s = result.summary;

    fs::path dir(cfg.output_dir);
    fs::create_directories(dir);

    json summary = {
        {"ler", s.ler},
        {"ci95", {s.ci_low, s.ci_high}},
        {"shots", s.shots},
        {"gamma_total", s.gamma_total},
        {"fallback_count", s.fallback_count},
        {"wall_time", s.wall_seconds},
    };
    open_out(dir / "summary.json") << summary.dump(2) << "\n";

    {
        auto f = open_out(dir / "events.txt");
        write_detection_events(f, result);
    }
    if (!circuit.sites.empty()) {
        auto f = open_out(dir / "detector_model.txt");
        write_detector_model(f, circuit);
    }
    json manifest = {
        {"version", THERMSTAB_VERSION},
        {"config_hash", config_hash(cfg)},
        {"master_seed", cfg.master_seed},
        {"config", serialize(cfg)},
    };
    open_out(dir / "manifest.json") << manifest.dump(2) << "\n";

    std::cout << std::setprecision(6);
    std::cout << "ler = " << s.ler << "  ci95 = [" << s.ci_low << ", " << s.ci_high << "]\n";
    std::cout << "shots = " << s.shots << "  gamma_total = " << s.gamma_total
              << "  fallback_count = " << s.fallback_count << "\n";
    std::cout << "wall_time = " << s.wall_seconds << " s\n";
    std::cout << "wrote " << (dir / "summary.json").string() << ", events.txt, manifest.json\n";
    return 0;
}

// ----------------------------------------------------------- oracle-check --

struct OracleArgs {
    int draws = 200;
    long long shots = 100000;
    long long seed = 12345;
};

int cmd_oracle_check(const OracleArgs& args) {
    bool ok = true;

    PtmEqualityResult ptm = ptm_equality_check(args.draws, (uint64_t)args.seed);
    std::cout << "ptm-equality: " << (ptm.pass ? "PASS" : "FAIL") << " (" << ptm.draws
              << " draws, max |diff| = " << std::scientific << std::setprecision(3)
              << ptm.max_abs_diff << ", tol " << ptm.tolerance << ")\n";
    ok = ok && ptm.pass;

    TomographyResult tomo = tomography_check(args.shots, (uint64_t)args.seed + 1000);
    std::cout << "tomography:   " << (tomo.pass ? "PASS" : "FAIL") << " ("
              << tomo.cases.size() << " cases, " << args.shots << " shots each, max sigma = "
              << std::fixed << std::setprecision(2) << tomo.max_sigma << ", limit "
              << tomo.sigma_limit << ")\n";
    for (const auto& tc : tomo.cases) {
        if (!tc.pass) {
            std::cout << "  FAIL state " << detail::CARDINAL_NAMES[tc.state] << " pauli "
                      << "XYZ"[tc.pauli - 1] << ": estimate " << tc.estimate << " +- "
                      << tc.std_error << ", exact " << tc.exact << "\n";
        }
    }
    ok = ok && tomo.pass;
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"thermal-relaxation stabilizer simulation and channel analysis"};
    app.require_subcommand(1);

    ChannelArgs channel_args;
    auto* channel = app.add_subcommand("channel", "inspect the thermal channel decompositions");
    channel->add_option("--t1", channel_args.t1, "relaxation time T1");
    channel->add_option("--t2", channel_args.t2, "decoherence time T2 (<= 2 T1)");
    channel->add_option("--tau", channel_args.tau, "channel duration (default T1/100)");
    channel->add_option("--p1", channel_args.p1, "equilibrium excited population in [0, 0.5]");
    channel->add_option("--preset", channel_args.preset,
                        "device preset for T1/T2 (boston, fez, kingston, marrakesh, pittsburgh, "
                        "torino)");
    channel->add_option("--csv", channel_args.csv_path, "also write quantities as CSV");

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "write figure-data CSV grids");
    sweep->add_option("--kind", sweep_args.kind, "delta_d | delta_f | overhead")->required();
    sweep->add_option("--out", sweep_args.out_path, "output CSV path")->required();
    sweep->add_option("--t2-ratio", sweep_args.t2_ratio, "T2/T1 for delta_d");
    sweep->add_option("--tau-ratio", sweep_args.tau_ratio, "tau/T1 for delta_d");
    sweep->add_option("--p1", sweep_args.p1, "equilibrium excited population");
    sweep->add_option("--points", sweep_args.points, "theta grid points for delta_d");
    sweep->add_option("--t2-lo", sweep_args.t2_lo, "grid T2/T1 lower edge (exclusive)");
    sweep->add_option("--t2-hi", sweep_args.t2_hi, "grid T2/T1 upper edge (inclusive)");
    sweep->add_option("--tau-lo", sweep_args.tau_lo, "grid tau/T1 lower edge (exclusive)");
    sweep->add_option("--tau-hi", sweep_args.tau_hi, "grid tau/T1 upper edge (inclusive)");
    sweep->add_option("--nt2", sweep_args.nt2, "grid points along T2/T1");
    sweep->add_option("--ntau", sweep_args.ntau, "grid points along tau/T1");
    sweep->add_option("--nc", sweep_args.n_channels, "channel count for overhead");

    MemoryArgs memory_args;
    auto* memory = app.add_subcommand("memory", "run a memory experiment from a config file");
    memory->add_option("--config", memory_args.config_path, "experiment config file")->required();
    memory->add_option("--shots", memory_args.shots_override, "override run.shots");
    memory->add_option("--seed", memory_args.seed_override, "override run.master_seed");
    memory->add_option("--threads", memory_args.threads_override, "override run.threads");
    memory->add_option("--output-dir", memory_args.output_override, "override output.output_dir");
    memory->add_option("--decoder", memory_args.decoder_override, "override run.decoder");
    memory->add_option("--model", memory_args.model_override, "override noise.channel_model");

    OracleArgs oracle_args;
    auto* oracle = app.add_subcommand("oracle-check",
                                      "run the PTM-equality and tomography self-checks");
    oracle->add_option("--draws", oracle_args.draws, "random parameter draws");
    oracle->add_option("--shots", oracle_args.shots, "shots per tomography case");
    oracle->add_option("--seed", oracle_args.seed, "master seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (channel->parsed()) return cmd_channel(channel_args);
        if (sweep->parsed()) return cmd_sweep(sweep_args);
        if (memory->parsed()) return cmd_memory(memory_args);
        if (oracle->parsed()) return cmd_oracle_check(oracle_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
