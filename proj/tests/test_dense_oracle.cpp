#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "thermstab/channel_algebra.hpp"
#include "thermstab/dense_oracle.hpp"
#include "thermstab/rng.hpp"

using namespace thermstab;

namespace {

Mat2 random_pure_state(ShotRng& rng) {
    double a = rng.next_double() * 3.141592653589793;
    double b = rng.next_double() * 6.283185307179586;
    Eigen::Vector2cd psi;
    psi << std::cos(a / 2.0), std::exp(cplx(0.0, b)) * std::sin(a / 2.0);
    return psi * psi.adjoint();
}

Mat2 random_mixed_state(ShotRng& rng) {
    double w = rng.next_double();
    return w * random_pure_state(rng) + (1.0 - w) * random_pure_state(rng);
}

ThermalParams random_params(ShotRng& rng) {
    double t1 = 0.1 + 1.9 * rng.next_double();
    double t2 = t1 * (0.05 + 1.95 * rng.next_double());
    double tau = 2.0 * t1 * rng.next_double();
    double p1 = 0.5 * rng.next_double();
    return ThermalParams(t1, t2, tau, p1);
}

}  // namespace

TEST_CASE("thermal Kraus channel is trace preserving", "[dense_oracle]") {
    ShotRng rng = shot_rng(101, 0);
    for (int i = 0; i < 50; ++i) {
        KrausChannel k = kraus_thermal(random_params(rng));
        Mat2 rho = random_mixed_state(rng);
        Mat2 out = k.apply(rho);
        CHECK(std::abs(out.trace().real() - 1.0) < 1e-12);
        CHECK(is_valid_density(out));
    }
}

TEST_CASE("quasi-probability decomposition reproduces the Kraus channel on states",
          "[dense_oracle]") {
    ShotRng rng = shot_rng(102, 0);
    for (int i = 0; i < 50; ++i) {
        ThermalParams p = random_params(rng);
        ChannelDecomposition d = qpd_thermal(p);
        KrausChannel k = kraus_thermal(p);
        Mat2 rho = random_mixed_state(rng);
        CHECK(trace_distance<Mat2>(apply_decomposition(rho, d), k.apply(rho)) < 1e-12);
    }
}

TEST_CASE("master equation integration matches the Kraus solution", "[dense_oracle]") {
    ShotRng rng = shot_rng(103, 0);
    for (int i = 0; i < 8; ++i) {
        ThermalParams p = random_params(rng);
        Mat2 rho = random_mixed_state(rng);
        Mat2 by_ode = integrate_master_equation(rho, p, 10000);
        Mat2 by_kraus = kraus_thermal(p).apply(rho);
        CHECK(trace_distance<Mat2>(by_ode, by_kraus) < 1e-8);
    }
}

TEST_CASE("long-time evolution reaches the thermal equilibrium state", "[dense_oracle]") {
    ThermalParams p(1.0, 1.2, 50.0, 0.1);
    Mat2 rho = kraus_thermal(p).apply(meridian_state(3.141592653589793 / 2.0));
    CHECK(std::abs(rho(0, 0).real() - 0.9) < 1e-6);
    CHECK(std::abs(rho(1, 1).real() - 0.1) < 1e-6);
    CHECK(std::abs(rho(0, 1)) < 1e-6);
}

TEST_CASE("fidelity and trace distance agree with closed forms", "[dense_oracle]") {
    Mat2 zero = meridian_state(0.0);
    Mat2 one = meridian_state(3.141592653589793);
    Mat2 plus = meridian_state(3.141592653589793 / 2.0);
    CHECK(state_fidelity<Mat2>(zero, zero) == Catch::Approx(1.0).margin(1e-12));
    CHECK(state_fidelity<Mat2>(zero, one) == Catch::Approx(0.0).margin(1e-12));
    CHECK(state_fidelity<Mat2>(zero, plus) == Catch::Approx(0.5).epsilon(1e-10));
    CHECK(trace_distance<Mat2>(zero, one) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(trace_distance<Mat2>(zero, plus) ==
          Catch::Approx(0.7071067811865476).epsilon(1e-10));
}

TEST_CASE("channel fidelity of identity against a bit-flip channel", "[dense_oracle]") {
    for (double pr : {0.0, 0.05, 0.3}) {
        DenseChannel flip = DenseChannel::from_pauli(PauliChannelProbs(pr, 0.0, 0.0));
        CHECK(channel_fidelity(DenseChannel::identity(), flip) ==
              Catch::Approx(1.0 - pr).margin(1e-10));
    }
}

TEST_CASE("channel fidelities of the approximations at a reference point", "[dense_oracle]") {
    ThermalParams p(1.0, 1.5, 1.0, 0.0);
    DenseChannel exact = DenseChannel::from_kraus(kraus_thermal(p));
    auto [pg, pp] = relaxation_probs(p);
    DenseChannel pta = DenseChannel::from_pauli(pta_channel(pg, pp));
    DenseChannel reset = DenseChannel::from_decomposition(reset_approximation(p));
    CHECK(channel_fidelity(exact, pta) == Catch::Approx(0.7846249328886095).margin(1e-9));
    CHECK(channel_fidelity(exact, reset) == Catch::Approx(0.9857976290450501).margin(1e-9));
}

TEST_CASE("Pauli transfer matrix of simple channels", "[dense_oracle]") {
    PauliTransferMatrix id = pauli_transfer_matrix(DenseChannel::identity());
    CHECK((id.entries - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-12);

    // Z channel flips the sign of the X and Y rows.
    DenseChannel zchan = DenseChannel::from_pauli(PauliChannelProbs(0.0, 0.0, 1.0));
    Eigen::Matrix4d expect = Eigen::Matrix4d::Identity();
    expect(1, 1) = -1.0;
    expect(2, 2) = -1.0;
    PauliTransferMatrix zm = pauli_transfer_matrix(zchan);
    CHECK((zm.entries - expect).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_NOTHROW(zm.validate());
}

TEST_CASE("chi matrix of the identity channel", "[dense_oracle]") {
    Mat4 chi = chi_matrix(DenseChannel::identity());
    CHECK(std::abs(chi(0, 0).real() - 1.0) < 1e-12);
    CHECK(chi.cwiseAbs().sum() == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("twirling a Pauli channel returns its own probabilities", "[dense_oracle]") {
    PauliChannelProbs in(0.12, 0.05, 0.2);
    PauliChannelProbs out = pauli_twirl(DenseChannel::from_pauli(in));
    CHECK(out.p_x == Catch::Approx(in.p_x).margin(1e-12));
    CHECK(out.p_y == Catch::Approx(in.p_y).margin(1e-12));
    CHECK(out.p_z == Catch::Approx(in.p_z).margin(1e-12));
}

TEST_CASE("twirling the thermal channel matches the closed-form approximation",
          "[dense_oracle]") {
    ShotRng rng = shot_rng(104, 0);
    for (int i = 0; i < 20; ++i) {
        ThermalParams p = random_params(rng);
        PauliChannelProbs twirled = pauli_twirl(DenseChannel::from_kraus(kraus_thermal(p)));
        auto [pg, pp] = relaxation_probs(p);
        PauliChannelProbs closed = pta_channel(pg, pp);
        CHECK(std::abs(twirled.p_x - closed.p_x) < 1e-10);
        CHECK(std::abs(twirled.p_y - closed.p_y) < 1e-10);
        CHECK(std::abs(twirled.p_z - closed.p_z) < 1e-10);
    }
}

TEST_CASE("meridian sweep of the approximation error difference", "[dense_oracle]") {
    ThermalParams p(1.0, 1.5, 1.0, 0.0);
    const double pi = 3.141592653589793;
    auto sweep = delta_d_sweep({0.001, pi / 3.0, pi - 0.001}, p);
    REQUIRE(sweep.size() == 3);
    CHECK(sweep[0].second == Catch::Approx(0.31581692357124286).margin(1e-9));
    CHECK(std::abs(sweep[1].second) < 1e-10);  // crossover sits exactly at pi/3 here
    CHECK(sweep[2].second == Catch::Approx(-0.31606023259509736).margin(1e-9));
}
