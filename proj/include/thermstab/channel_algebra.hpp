#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace thermstab {

inline constexpr double COEFF_SUM_TOL = 1e-12;

/// Physical relaxation parameters for one noise window.
///
/// All three times share one unit (only ratios enter the channel
/// coefficients). p1 is the equilibrium excited-state population; p1 = 0
/// denotes a zero-temperature bath.
struct ThermalParams {
    double t1;
    double t2;
    double tau;
    double p1;

    ThermalParams(double t1_, double t2_, double tau_, double p1_ = 0.0)
        : t1(t1_), t2(t2_), tau(tau_), p1(p1_) {
        if (!(t1 > 0.0) || !(t2 > 0.0)) {
            throw std::invalid_argument("ThermalParams: t1 and t2 must be positive, got t1=" +
                                        std::to_string(t1) + " t2=" + std::to_string(t2));
        }
        if (!(tau >= 0.0)) {
            throw std::invalid_argument("ThermalParams: tau must be nonnegative, got " +
                                        std::to_string(tau));
        }
        // 1/T2 = 1/(2 T1) + 1/T_phi forces T2 <= 2 T1; larger values are
        // unphysical and almost always a config bug, so reject rather than clamp.
        if (t2 > 2.0 * t1 * (1.0 + 1e-14)) {
            throw std::invalid_argument("ThermalParams: t2=" + std::to_string(t2) +
                                        " exceeds 2*t1=" + std::to_string(2.0 * t1) +
                                        " (decoherence bound violated)");
        }
        if (!(p1 >= 0.0) || p1 > 0.5) {
            throw std::invalid_argument("ThermalParams: p1 must lie in [0, 1/2], got " +
                                        std::to_string(p1));
        }
    }

    /// Pure dephasing time; infinite when T2 = 2 T1.
    double t_phi() const {
        double inv = 1.0 / t2 - 0.5 / t1;
        if (inv <= 0.0) return std::numeric_limits<double>::infinity();
        return 1.0 / inv;
    }

    /// Pure dephasing rate 1/T_phi (clamped at 0 for T2 = 2 T1 roundoff).
    double rate_phi() const { return std::max(0.0, 1.0 / t2 - 0.5 / t1); }

    /// Decay rate |1> -> |0>. Together with rate_up this gives the total
    /// relaxation rate 1/T1 and the equilibrium population p1.
    double rate_down() const { return (1.0 - p1) / t1; }

    /// Thermal excitation rate |0> -> |1>; zero at zero temperature.
    double rate_up() const { return p1 / t1; }
};

/// Bath description used to derive p1 from device-level quantities.
struct BathSpec {
    double qubit_frequency;   // Hz (cycles per second)
    double bath_temperature;  // kelvin

    BathSpec(double freq_hz, double temp_k)
        : qubit_frequency(freq_hz), bath_temperature(temp_k) {
        if (!(qubit_frequency > 0.0)) {
            throw std::invalid_argument("BathSpec: qubit_frequency must be positive");
        }
        if (!(bath_temperature > 0.0)) {
            throw std::invalid_argument("BathSpec: bath_temperature must be positive");
        }
    }
};

/// Affine combination of the four stabilizer branch channels
/// {identity, Pauli-Z, reset-to-|0>, reset-to-|1>}.
///
/// Coefficients always sum to 1 (trace preservation); q_identity, q_reset0
/// and q_reset1 are nonnegative for every physical parameter set, while
/// q_pauli_z may be negative (exactly when T2 > T1).
struct ChannelDecomposition {
    double q_identity;
    double q_pauli_z;
    double q_reset0;
    double q_reset1;

    ChannelDecomposition(double qi, double qz, double qr0, double qr1)
        : q_identity(qi), q_pauli_z(qz), q_reset0(qr0), q_reset1(qr1) {
        double sum = qi + qz + qr0 + qr1;
        if (std::abs(sum - 1.0) > COEFF_SUM_TOL) {
            throw std::invalid_argument("ChannelDecomposition: coefficients sum to " +
                                        std::to_string(sum) + ", expected 1");
        }
        if (qi < -COEFF_SUM_TOL || qr0 < -COEFF_SUM_TOL || qr1 < -COEFF_SUM_TOL) {
            throw std::invalid_argument(
                "ChannelDecomposition: q_identity, q_reset0, q_reset1 must be nonnegative");
        }
    }
};

/// Stochastic Pauli channel probabilities; p_identity is implied.
struct PauliChannelProbs {
    double p_x;
    double p_y;
    double p_z;

    PauliChannelProbs(double px, double py, double pz) : p_x(px), p_y(py), p_z(pz) {
        if (p_x < -COEFF_SUM_TOL || p_y < -COEFF_SUM_TOL || p_z < -COEFF_SUM_TOL ||
            p_x + p_y + p_z > 1.0 + COEFF_SUM_TOL) {
            throw std::invalid_argument("PauliChannelProbs: probabilities out of range");
        }
    }

    double p_identity() const { return 1.0 - p_x - p_y - p_z; }
};

/// Relaxation probability p_gamma = 1 - e^{-tau/T1} and dephasing-branch
/// probability p_phi = (1 - e^{-tau/T_phi}) / 2.
inline std::pair<double, double> relaxation_probs(const ThermalParams& p) {
    double p_gamma = 1.0 - std::exp(-p.tau / p.t1);
    double p_phi = 0.5 * (1.0 - std::exp(-p.tau * p.rate_phi()));
    return {p_gamma, p_phi};
}

/// Pauli-twirled thermal relaxation channel.
///
/// The twirl keeps only the diagonal chi-matrix entries; for the composed
/// dephasing-after-damping channel they evaluate to
///   p_x = p_y = p_gamma / 4,
///   p_z = 1/2 - p_gamma/4 - (1 - 2 p_phi) sqrt(1 - p_gamma) / 2.
/// Independent of bath temperature.
inline PauliChannelProbs pta_channel(double p_gamma, double p_phi) {
    if (p_gamma < 0.0 || p_gamma > 1.0 || p_phi < 0.0 || p_phi > 0.5) {
        throw std::invalid_argument("pta_channel: probabilities out of range");
    }
    double pxy = 0.25 * p_gamma;
    double pz = 0.5 - 0.25 * p_gamma - 0.5 * (1.0 - 2.0 * p_phi) * std::sqrt(1.0 - p_gamma);
    // pz is nonnegative for all valid inputs but can round to -1e-17 at tau=0.
    pz = std::max(0.0, pz);
    return PauliChannelProbs(pxy, pxy, pz);
}

/// Exact quasi-probability decomposition of thermal relaxation over
/// {I, Z, R|0>, R|1>}:
///   q_± = (e^{-tau/T1} ± e^{-tau/T2}) / 2,
///   reset mass p_gamma split (1-p1) : p1 between the two targets.
/// q_pauli_z >= 0 iff T2 <= T1; the negativity is independent of p1.
inline ChannelDecomposition qpd_thermal(const ThermalParams& p) {
    double e1 = std::exp(-p.tau / p.t1);
    double e2 = std::exp(-p.tau / p.t2);
    double q_plus = 0.5 * (e1 + e2);
    double q_minus = 0.5 * (e1 - e2);
    double p_gamma = 1.0 - e1;
    return ChannelDecomposition(q_plus, q_minus, (1.0 - p.p1) * p_gamma, p.p1 * p_gamma);
}

/// Standalone amplitude-damping decomposition,
/// q_± = (1 - p_gamma ± sqrt(1 - p_gamma)) / 2; the Z coefficient is
/// negative for every p_gamma in (0, 1).
inline ChannelDecomposition qpd_amplitude_damping(double p_gamma) {
    if (p_gamma < 0.0 || p_gamma > 1.0) {
        throw std::invalid_argument("qpd_amplitude_damping: p_gamma must lie in [0, 1]");
    }
    double root = std::sqrt(1.0 - p_gamma);
    double q_plus = 0.5 * (1.0 - p_gamma + root);
    double q_minus = 0.5 * (1.0 - p_gamma - root);
    return ChannelDecomposition(q_plus, q_minus, p_gamma, 0.0);
}

/// Positive (sign-problem-free) approximation: keep q_identity from the exact
/// decomposition and move the remaining mass onto the reset branches.
inline ChannelDecomposition reset_approximation(const ThermalParams& p) {
    double q_plus = 0.5 * (std::exp(-p.tau / p.t1) + std::exp(-p.tau / p.t2));
    double rest = 1.0 - q_plus;
    return ChannelDecomposition(q_plus, 0.0, rest * (1.0 - p.p1), rest * p.p1);
}

/// Negativity Gamma = sum of |coefficients|; 1 exactly when the decomposition
/// is a probability distribution, and the sampling variance scales as Gamma^2.
inline double negativity(const ChannelDecomposition& d) {
    return std::abs(d.q_identity) + std::abs(d.q_pauli_z) + std::abs(d.q_reset0) +
           std::abs(d.q_reset1);
}

/// Product overhead over a circuit's noise sites: Gamma_total = prod Gamma_i,
/// estimator variance factor Gamma_total^2.
inline std::pair<double, double> total_overhead(const std::vector<double>& gammas) {
    double total = 1.0;
    for (double g : gammas) {
        if (g < 1.0 - COEFF_SUM_TOL) {
            throw std::invalid_argument("total_overhead: each gamma must be >= 1, got " +
                                        std::to_string(g));
        }
        total *= g;
    }
    return {total, total * total};
}

/// Equilibrium excited-state population of a qubit coupled to a thermal bath:
/// p1 = <n_b>/(1 + 2<n_b>) = 1/(1 + e^{h f / k_b T_b}).
inline double equilibrium_excitation(const BathSpec& bath) {
    constexpr double PLANCK = 6.62607015e-34;     // J s
    constexpr double BOLTZMANN = 1.380649e-23;    // J / K
    double x = PLANCK * bath.qubit_frequency / (BOLTZMANN * bath.bath_temperature);
    return 1.0 / (1.0 + std::exp(x));
}

}  // namespace thermstab
