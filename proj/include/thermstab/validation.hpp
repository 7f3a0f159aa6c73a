#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "thermstab/circuit.hpp"
#include "thermstab/dense_oracle.hpp"
#include "thermstab/qec_experiments.hpp"

namespace thermstab {

namespace detail {

/// Random parameters satisfying every ThermalParams constraint:
/// T2 <= 2 T1, tau <= 2 T1, p1 in [0, 0.5].
inline ThermalParams random_thermal_params(ShotRng& rng) {
    double t1 = 0.1 + 1.9 * rng.next_double();
    double t2 = t1 * (0.05 + 1.95 * rng.next_double());
    double tau = 2.0 * t1 * rng.next_double();
    double p1 = 0.5 * rng.next_double();
    return ThermalParams(t1, t2, tau, p1);
}

}  // namespace detail

struct PtmEqualityResult {
    int draws = 0;
    double max_abs_diff = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// The decomposition and the Kraus form must describe the same map: compares
/// their Pauli transfer matrices entrywise over random parameter draws.
inline PtmEqualityResult ptm_equality_check(int draws, uint64_t seed, double tol = 1e-10) {
    PtmEqualityResult res;
    res.draws = draws;
    res.tolerance = tol;
    for (int i = 0; i < draws; ++i) {
        ShotRng rng = shot_rng(seed, (uint64_t)i);
        ThermalParams params = detail::random_thermal_params(rng);
        auto decomp = DenseChannel::from_decomposition(qpd_thermal(params));
        auto kraus = DenseChannel::from_kraus(kraus_thermal(params));
        Eigen::Matrix4d d =
            (pauli_transfer_matrix(decomp).entries - pauli_transfer_matrix(kraus).entries)
                .cwiseAbs();
        res.max_abs_diff = std::max(res.max_abs_diff, d.maxCoeff());
    }
    res.pass = res.max_abs_diff < tol;
    return res;
}

namespace detail {

inline const char* CARDINAL_NAMES[6] = {"|0>", "|1>", "|+>", "|->", "|+i>", "|-i>"};

inline Mat2 cardinal_state(int index) {
    using namespace std::complex_literals;
    Eigen::Vector2cd v;
    switch (index) {
        case 0: v << 1, 0; break;
        case 1: v << 0, 1; break;
        case 2: v << 1, 1; break;
        case 3: v << 1, -1; break;
        case 4: v << 1, 1i; break;
        case 5: v << 1, -1i; break;
        default: throw std::invalid_argument("cardinal_state: index must be 0..5");
    }
    v.normalize();
    return v * v.adjoint();
}

inline std::vector<Gate> cardinal_prep_gates(int index) {
    switch (index) {
        case 0: return {};
        case 1: return {Gate::X};
        case 2: return {Gate::H};
        case 3: return {Gate::X, Gate::H};
        case 4: return {Gate::H, Gate::S};
        case 5: return {Gate::X, Gate::H, Gate::S};
        default: throw std::invalid_argument("cardinal_prep_gates: index must be 0..5");
    }
}

// Basis change mapping the Pauli's eigenbasis onto Z before measuring;
// S dagger is S applied three times.
inline std::vector<Gate> pauli_measure_gates(int pauli) {
    switch (pauli) {
        case 1: return {Gate::H};
        case 2: return {Gate::S, Gate::S, Gate::S, Gate::H};
        case 3: return {};
        default: throw std::invalid_argument("pauli_measure_gates: pauli must be 1..3");
    }
}

}  // namespace detail

/// One-qubit circuit: prepare a cardinal state, apply one noise site with the
/// given branch distribution, measure the chosen Pauli.
inline Circuit single_site_pauli_circuit(int state, int pauli, const BranchDistribution& dist) {
    Circuit c;
    c.n_qubits = 1;
    for (Gate g : detail::cardinal_prep_gates(state)) c.append_gate(g, 0);
    c.sites.push_back(NoiseSite{0, dist, 0});
    c.instructions.push_back(Instruction::make_noise(0));
    for (Gate g : detail::pauli_measure_gates(pauli)) c.append_gate(g, 0);
    c.append_measure(0);
    c.validate();
    return c;
}

/// Sign-weighted estimate of <P> after the noise site.
inline WeightedEstimate estimate_pauli_expectation(const Circuit& c, long long shots,
                                                   uint64_t seed, int threads = 0) {
    struct Ctx {
        StabilizerTableau t;
        std::vector<uint8_t> records;
    };
    RunningStats stats = parallel_weighted_shots(
        shots, seed, threads, [&]() { return Ctx{StabilizerTableau(c.n_qubits), {}}; },
        [&](Ctx& ctx, long long, ShotRng& rng) -> std::pair<double, int> {
            int sign = execute_circuit(c, rng, ctx.records, ctx.t);
            return {ctx.records[0] ? -1.0 : 1.0, sign};
        });
    return weighted_estimate_from(stats, c.gamma_total());
}

struct TomographyCase {
    int state = 0;
    int pauli = 0;
    double estimate = 0.0;
    double std_error = 0.0;
    double exact = 0.0;
    double sigma = 0.0;  // |estimate - exact| / std_error
    bool pass = false;
};

struct TomographyResult {
    std::vector<TomographyCase> cases;
    double max_sigma = 0.0;
    double sigma_limit = 0.0;
    bool pass = false;
};

/// Tomography of the negative-decomposition channel (T2 = 2 T1, tau = T1) on
/// all six cardinal states: every weighted Pauli expectation must sit within
/// `sigma_limit` estimated standard errors of the dense-oracle value.
inline TomographyResult tomography_check(long long shots, uint64_t seed, double sigma_limit = 5.0,
                                         int threads = 0) {
    ThermalParams params(1.0, 2.0, 1.0, 0.0);
    BranchDistribution dist = BranchDistribution::from_decomposition(qpd_thermal(params));
    DenseChannel exact_channel = DenseChannel::from_kraus(kraus_thermal(params));

    TomographyResult res;
    res.sigma_limit = sigma_limit;
    res.pass = true;
    for (int state = 0; state < 6; ++state) {
        Mat2 rho_out = exact_channel.apply(detail::cardinal_state(state));
        for (int op = 1; op <= 3; ++op) {
            Circuit c = single_site_pauli_circuit(state, op, dist);
            uint64_t case_seed = seed + (uint64_t)(state * 3 + op);
            WeightedEstimate est = estimate_pauli_expectation(c, shots, case_seed, threads);

            TomographyCase tc;
            tc.state = state;
            tc.pauli = op;
            tc.estimate = est.estimate;
            tc.std_error = est.std_error;
            tc.exact = (pauli(op) * rho_out).trace().real();
            double err = std::abs(tc.estimate - tc.exact);
            tc.sigma = est.std_error > 0.0 ? err / est.std_error : (err == 0.0 ? 0.0 : 1e30);
            tc.pass = tc.sigma <= sigma_limit;
            res.max_sigma = std::max(res.max_sigma, tc.sigma);
            res.pass = res.pass && tc.pass;
            res.cases.push_back(tc);
        }
    }
    return res;
}

}  // namespace thermstab
