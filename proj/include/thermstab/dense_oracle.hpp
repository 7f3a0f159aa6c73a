#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "thermstab/channel_algebra.hpp"

namespace thermstab {

using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using cplx = std::complex<double>;

/// sigma_0..sigma_3 = I, X, Y, Z.
inline const Mat2& pauli(int i) {
    static const Mat2 table[4] = {
        (Mat2() << 1, 0, 0, 1).finished(),
        (Mat2() << 0, 1, 1, 0).finished(),
        (Mat2() << 0, cplx(0, -1), cplx(0, 1), 0).finished(),
        (Mat2() << 1, 0, 0, -1).finished(),
    };
    return table[i];
}

/// |psi(theta)> = cos(theta/2)|0> + sin(theta/2)|1> as a density matrix.
inline Mat2 meridian_state(double theta) {
    Eigen::Vector2cd psi(std::cos(theta / 2.0), std::sin(theta / 2.0));
    return psi * psi.adjoint();
}

template <typename Mat>
inline bool is_valid_density(const Mat& rho, double tol = 1e-10) {
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
    if (std::abs(rho.trace().real() - 1.0) > tol || std::abs(rho.trace().imag()) > tol)
        return false;
    Eigen::SelfAdjointEigenSolver<Mat> es(rho);
    return es.eigenvalues().minCoeff() > -tol;
}

/// A CPTP map given by explicit Kraus operators.
struct KrausChannel {
    std::vector<Mat2> operators;

    void validate(double tol = 1e-10) const {
        Mat2 sum = Mat2::Zero();
        for (const Mat2& k : operators) sum += k.adjoint() * k;
        if ((sum - Mat2::Identity()).cwiseAbs().maxCoeff() > tol) {
            throw std::runtime_error("KrausChannel: completeness sum deviates from identity");
        }
    }

    Mat2 apply(const Mat2& rho) const {
        Mat2 out = Mat2::Zero();
        for (const Mat2& k : operators) out += k * rho * k.adjoint();
        return out;
    }
};

namespace detail {
inline Mat2 ket_bra(int a, int b) {
    Mat2 m = Mat2::Zero();
    m(a, b) = 1.0;
    return m;
}
}  // namespace detail

/// Kraus set for each stabilizer branch channel. Resets are the two-operator
/// measure-and-flip maps, so their linear extension to traceless inputs is the
/// correct one (they annihilate them).
inline const KrausChannel& branch_kraus_identity() {
    static const KrausChannel c{{Mat2::Identity()}};
    return c;
}
inline const KrausChannel& branch_kraus_pauli(int i) {
    static const KrausChannel table[4] = {{{pauli(0)}}, {{pauli(1)}}, {{pauli(2)}}, {{pauli(3)}}};
    return table[i];
}
inline const KrausChannel& branch_kraus_reset0() {
    static const KrausChannel c{{detail::ket_bra(0, 0), detail::ket_bra(0, 1)}};
    return c;
}
inline const KrausChannel& branch_kraus_reset1() {
    static const KrausChannel c{{detail::ket_bra(1, 0), detail::ket_bra(1, 1)}};
    return c;
}

/// Composed (generalized-)amplitude-damping and dephasing Kraus set for the
/// given parameters. At p1 = 0 this is the textbook damping pair followed by
/// the stochastic-Z dephasing map.
inline KrausChannel kraus_thermal(const ThermalParams& p) {
    auto [p_gamma, p_phi] = relaxation_probs(p);
    double a = std::sqrt(1.0 - p.p1);
    double b = std::sqrt(p.p1);
    std::vector<Mat2> gad;
    gad.push_back(a * (Mat2() << 1, 0, 0, std::sqrt(1.0 - p_gamma)).finished());
    gad.push_back(a * (Mat2() << 0, std::sqrt(p_gamma), 0, 0).finished());
    gad.push_back(b * (Mat2() << std::sqrt(1.0 - p_gamma), 0, 0, 1).finished());
    gad.push_back(b * (Mat2() << 0, 0, std::sqrt(p_gamma), 0).finished());

    std::vector<Mat2> pd;
    pd.push_back(std::sqrt(1.0 - p_phi) * pauli(0));
    pd.push_back(std::sqrt(p_phi) * pauli(3));

    KrausChannel out;
    for (const Mat2& k_pd : pd) {
        for (const Mat2& k_gad : gad) {
            Mat2 k = k_pd * k_gad;
            if (k.squaredNorm() > 1e-30) out.operators.push_back(k);
        }
    }
    out.validate();
    return out;
}

/// Common evaluation form for every channel representation used here: an
/// affine combination of Kraus pieces. Weights may be negative (QPD terms).
struct DenseChannel {
    std::vector<std::pair<double, KrausChannel>> terms;

    static DenseChannel identity() { return {{{1.0, branch_kraus_identity()}}}; }

    static DenseChannel from_kraus(KrausChannel k) { return {{{1.0, std::move(k)}}}; }

    static DenseChannel from_decomposition(const ChannelDecomposition& d) {
        return {{{d.q_identity, branch_kraus_identity()},
                 {d.q_pauli_z, branch_kraus_pauli(3)},
                 {d.q_reset0, branch_kraus_reset0()},
                 {d.q_reset1, branch_kraus_reset1()}}};
    }

    static DenseChannel from_pauli(const PauliChannelProbs& p) {
        return {{{p.p_identity(), branch_kraus_pauli(0)},
                 {p.p_x, branch_kraus_pauli(1)},
                 {p.p_y, branch_kraus_pauli(2)},
                 {p.p_z, branch_kraus_pauli(3)}}};
    }

    Mat2 apply(const Mat2& rho) const {
        Mat2 out = Mat2::Zero();
        for (const auto& [w, k] : terms) out += w * k.apply(rho);
        return out;
    }

    /// Channel on the first qubit, identity on the second (index = 2*q0 + q1).
    Mat4 apply_left(const Mat4& rho) const {
        Mat4 out = Mat4::Zero();
        for (const auto& [w, kc] : terms) {
            for (const Mat2& k : kc.operators) {
                Mat4 big = Mat4::Zero();
                for (int a = 0; a < 2; ++a)
                    for (int c = 0; c < 2; ++c) {
                        big(2 * a + 0, 2 * c + 0) = k(a, c);
                        big(2 * a + 1, 2 * c + 1) = k(a, c);
                    }
                out += w * (big * rho * big.adjoint());
            }
        }
        return out;
    }
};

/// Affine application of a branch decomposition to a density matrix.
inline Mat2 apply_decomposition(const Mat2& rho, const ChannelDecomposition& d) {
    return DenseChannel::from_decomposition(d).apply(rho);
}
inline Mat4 apply_decomposition(const Mat4& rho, const ChannelDecomposition& d) {
    return DenseChannel::from_decomposition(d).apply_left(rho);
}

/// Fixed-step RK4 integration of the single-qubit thermal master equation
/// (relaxation, thermal excitation, pure dephasing dissipators) over the
/// window tau. Throws if the trace drifts by more than 1e-8.
inline Mat2 integrate_master_equation(const Mat2& rho0, const ThermalParams& p, int steps) {
    if (steps < 100) {
        throw std::invalid_argument("integrate_master_equation: steps must be >= 100");
    }
    const Mat2 sm = detail::ket_bra(0, 1);
    const Mat2 sp = detail::ket_bra(1, 0);
    const Mat2 z = pauli(3);
    const double g_down = p.rate_down();
    const double g_up = p.rate_up();
    const double g_phi = p.rate_phi();

    auto dissipator = [](const Mat2& a, const Mat2& rho) {
        Mat2 ada = a.adjoint() * a;
        return (a * rho * a.adjoint() - 0.5 * (ada * rho + rho * ada)).eval();
    };
    auto rhs = [&](const Mat2& rho) {
        return (g_down * dissipator(sm, rho) + g_up * dissipator(sp, rho) +
                0.5 * g_phi * dissipator(z, rho))
            .eval();
    };

    Mat2 rho = rho0;
    const double dt = p.tau / steps;
    for (int s = 0; s < steps; ++s) {
        Mat2 k1 = rhs(rho);
        Mat2 k2 = rhs(rho + 0.5 * dt * k1);
        Mat2 k3 = rhs(rho + 0.5 * dt * k2);
        Mat2 k4 = rhs(rho + dt * k3);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (std::abs(rho.trace().real() - 1.0) > 1e-8 || std::abs(rho.trace().imag()) > 1e-8) {
            throw std::runtime_error("integrate_master_equation: trace drift exceeded 1e-8");
        }
    }
    return rho;
}

/// Trace distance (1/2)||rho - sigma||_1 for Hermitian inputs.
template <typename Mat>
inline double trace_distance(const Mat& rho, const Mat& sigma) {
    Eigen::SelfAdjointEigenSolver<Mat> es(Mat(rho - sigma));
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

/// Uhlmann fidelity in the squared convention, F = (tr sqrt(sqrt(rho) sigma
/// sqrt(rho)))^2; equals 1 iff the states coincide.
template <typename Mat>
inline double state_fidelity(const Mat& rho, const Mat& sigma) {
    Eigen::SelfAdjointEigenSolver<Mat> es(rho);
    auto lam = es.eigenvalues();
    Mat root = Mat::Zero();
    for (int i = 0; i < lam.size(); ++i) {
        double v = std::max(0.0, lam(i));
        root += std::sqrt(v) * (es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint());
    }
    Mat inner = root * sigma * root;
    Eigen::SelfAdjointEigenSolver<Mat> es2((Mat((inner + inner.adjoint()) / 2.0)));
    double tr = 0.0;
    for (int i = 0; i < es2.eigenvalues().size(); ++i) {
        tr += std::sqrt(std::max(0.0, es2.eigenvalues()(i)));
    }
    return tr * tr;
}

/// Channel fidelity via one half of the maximally entangled pair
/// (|00> + |11>)/sqrt(2).
inline double channel_fidelity(const DenseChannel& a, const DenseChannel& b) {
    Eigen::Vector4cd phi;
    phi << 1.0 / std::sqrt(2.0), 0, 0, 1.0 / std::sqrt(2.0);
    Mat4 me = phi * phi.adjoint();
    return state_fidelity<Mat4>(a.apply_left(me), b.apply_left(me));
}

/// 4x4 real Pauli transfer matrix, R_ij = (1/2) tr[sigma_i E(sigma_j)].
struct PauliTransferMatrix {
    Eigen::Matrix4d entries;

    void validate(double tol = 1e-10) const {
        Eigen::Vector4d row0 = entries.row(0);
        if (std::abs(row0(0) - 1.0) > tol || row0.tail<3>().cwiseAbs().maxCoeff() > tol) {
            throw std::runtime_error("PauliTransferMatrix: channel is not trace preserving");
        }
        if (entries.cwiseAbs().maxCoeff() > 1.0 + 1e-9) {
            throw std::runtime_error("PauliTransferMatrix: entry magnitude above 1");
        }
    }
};

inline PauliTransferMatrix pauli_transfer_matrix(const DenseChannel& e) {
    PauliTransferMatrix r;
    for (int j = 0; j < 4; ++j) {
        Mat2 out = e.apply(pauli(j));
        for (int i = 0; i < 4; ++i) {
            r.entries(i, j) = 0.5 * (pauli(i).adjoint() * out).trace().real();
        }
    }
    return r;
}

/// Process (chi) matrix in the Pauli basis, E(rho) = sum_ij chi_ij s_i rho s_j.
inline Mat4 chi_matrix(const DenseChannel& e) {
    // Unnormalized Choi matrix C = sum_ab E(|a><b|) (x) |a><b|; then
    // chi_ij = vec(s_i)^dag C vec(s_j) / 4 with vec(s)[2x+y] = s(x,y).
    Mat4 choi = Mat4::Zero();
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            Mat2 out = e.apply(detail::ket_bra(a, b));
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < 2; ++y)
                    choi(2 * x + a, 2 * y + b) += out(x, y);
        }
    }
    auto vec = [](const Mat2& s) {
        Eigen::Vector4cd v;
        v << s(0, 0), s(0, 1), s(1, 0), s(1, 1);
        return v;
    };
    Mat4 chi;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            chi(i, j) = (vec(pauli(i)).adjoint() * choi * vec(pauli(j)))(0) / 4.0;
    return chi;
}

/// Pauli twirl of a single-qubit channel. Averaging over {I, X, Y, Z}
/// conjugation keeps only the diagonal PTM entries; the surviving Pauli
/// probabilities follow from the Walsh-Hadamard relation on that diagonal.
inline PauliChannelProbs pauli_twirl(const DenseChannel& e) {
    Eigen::Matrix4d r = pauli_transfer_matrix(e).entries;
    double rxx = r(1, 1), ryy = r(2, 2), rzz = r(3, 3);
    double px = (1.0 + rxx - ryy - rzz) / 4.0;
    double py = (1.0 - rxx + ryy - rzz) / 4.0;
    double pz = (1.0 - rxx - ryy + rzz) / 4.0;
    return PauliChannelProbs(std::max(0.0, px), std::max(0.0, py), std::max(0.0, pz));
}

/// Trace-distance gap between the Pauli-twirled and exact thermal channels on
/// the meridian state family: positive where the twirl overestimates the
/// error, negative where it underestimates.
inline std::vector<std::pair<double, double>> delta_d_sweep(const std::vector<double>& thetas,
                                                            const ThermalParams& p) {
    DenseChannel exact = DenseChannel::from_kraus(kraus_thermal(p));
    auto [p_gamma, p_phi] = relaxation_probs(p);
    DenseChannel pta = DenseChannel::from_pauli(pta_channel(p_gamma, p_phi));
    std::vector<std::pair<double, double>> out;
    out.reserve(thetas.size());
    for (double theta : thetas) {
        Mat2 rho = meridian_state(theta);
        double d_pta = trace_distance<Mat2>(rho, pta.apply(rho));
        double d_exact = trace_distance<Mat2>(rho, exact.apply(rho));
        out.emplace_back(theta, d_pta - d_exact);
    }
    return out;
}

}  // namespace thermstab
