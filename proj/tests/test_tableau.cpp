#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "support/statevector.hpp"
#include "thermstab/rng.hpp"
#include "thermstab/tableau_engine.hpp"

using namespace thermstab;

TEST_CASE("fresh tableau measures zero deterministically", "[tableau]") {
    StabilizerTableau t(4);
    ShotRng rng = shot_rng(1, 0);
    for (int q = 0; q < 4; ++q) {
        auto [outcome, deterministic] = t.measure_z(q, rng);
        CHECK(outcome == 0);
        CHECK(deterministic);
    }
    CHECK(t.check_invariants());
}

TEST_CASE("Bell pair gives random but correlated outcomes", "[tableau]") {
    int ones = 0;
    for (int shot = 0; shot < 200; ++shot) {
        StabilizerTableau t(2);
        ShotRng rng = shot_rng(2, shot);
        t.apply_h(0);
        t.apply_cnot(0, 1);
        auto [m0, det0] = t.measure_z(0, rng);
        auto [m1, det1] = t.measure_z(1, rng);
        CHECK_FALSE(det0);
        CHECK(det1);
        CHECK(m0 == m1);
        ones += m0;
    }
    CHECK(ones > 60);
    CHECK(ones < 140);
}

TEST_CASE("GHZ state keeps all qubits aligned", "[tableau]") {
    for (int shot = 0; shot < 50; ++shot) {
        StabilizerTableau t(5);
        ShotRng rng = shot_rng(3, shot);
        t.apply_h(0);
        for (int q = 1; q < 5; ++q) t.apply_cnot(0, q);
        auto first = t.measure_z(0, rng).first;
        for (int q = 1; q < 5; ++q) CHECK(t.measure_z(q, rng).first == first);
    }
}

TEST_CASE("single-qubit gate identities", "[tableau]") {
    ShotRng rng = shot_rng(4, 0);

    // X flips a fresh qubit.
    StabilizerTableau t1(1);
    t1.apply_x(0);
    CHECK(t1.measure_z(0, rng) == std::pair<int, bool>(1, true));

    // HZH = X.
    StabilizerTableau t2(1);
    t2.apply_h(0);
    t2.apply_z(0);
    t2.apply_h(0);
    CHECK(t2.measure_z(0, rng) == std::pair<int, bool>(1, true));

    // HSSH = HZH = X.
    StabilizerTableau t3(1);
    t3.apply_h(0);
    t3.apply_s(0);
    t3.apply_s(0);
    t3.apply_h(0);
    CHECK(t3.measure_z(0, rng) == std::pair<int, bool>(1, true));

    // Y on |0> also lands on |1>.
    StabilizerTableau t4(1);
    t4.apply_y(0);
    CHECK(t4.measure_z(0, rng) == std::pair<int, bool>(1, true));

    // Z is phase-only on the computational basis.
    StabilizerTableau t5(1);
    t5.apply_x(0);
    t5.apply_z(0);
    CHECK(t5.measure_z(0, rng) == std::pair<int, bool>(1, true));
}

TEST_CASE("CZ matches H-conjugated CNOT", "[tableau]") {
    ShotRng rng = shot_rng(5, 0);
    StabilizerTableau a(2);
    a.apply_x(0);
    a.apply_h(1);
    a.apply_cz(0, 1);
    a.apply_h(1);

    StabilizerTableau b(2);
    b.apply_x(0);
    b.apply_cnot(0, 1);

    for (int q = 0; q < 2; ++q) {
        CHECK(a.measure_z(q, rng).first == b.measure_z(q, rng).first);
    }
}

TEST_CASE("reset reports the pre-reset outcome and leaves the target", "[tableau]") {
    ShotRng rng = shot_rng(6, 0);
    StabilizerTableau t(2);
    t.apply_x(0);
    auto [out0, det0] = t.reset(0, 0, rng);
    CHECK(out0 == 1);
    CHECK(det0);
    CHECK(t.measure_z(0, rng) == std::pair<int, bool>(0, true));

    auto [out1, det1] = t.reset(1, 1, rng);
    CHECK(out1 == 0);
    CHECK(det1);
    CHECK(t.measure_z(1, rng) == std::pair<int, bool>(1, true));
}

TEST_CASE("reset disentangles a Bell pair", "[tableau]") {
    for (int shot = 0; shot < 20; ++shot) {
        StabilizerTableau t(2);
        ShotRng rng = shot_rng(7, shot);
        t.apply_h(0);
        t.apply_cnot(0, 1);
        auto [out, det] = t.reset(0, 0, rng);
        CHECK_FALSE(det);
        // The partner collapses to whatever was measured during the reset.
        CHECK(t.measure_z(1, rng) == std::pair<int, bool>(out, true));
        CHECK(t.measure_z(0, rng) == std::pair<int, bool>(0, true));
    }
}

TEST_CASE("random circuits agree with a statevector oracle", "[tableau]") {
    const int n = 5;
    const int gates = 60;
    for (int trial = 0; trial < 60; ++trial) {
        StabilizerTableau t(n);
        sv::State psi(n);
        ShotRng circ_rng = shot_rng(8, trial);
        ShotRng meas_rng = shot_rng(9, trial);
        for (int g = 0; g < gates; ++g) {
            uint64_t pick = circ_rng.next_u64() % 8;
            int q0 = (int)(circ_rng.next_u64() % n);
            int q1 = (int)(circ_rng.next_u64() % (n - 1));
            if (q1 >= q0) ++q1;
            switch (pick) {
                case 0: t.apply_h(q0); psi.h(q0); break;
                case 1: t.apply_s(q0); psi.s(q0); break;
                case 2: t.apply_x(q0); psi.x(q0); break;
                case 3: t.apply_y(q0); psi.y(q0); break;
                case 4: t.apply_z(q0); psi.z(q0); break;
                case 5: t.apply_cnot(q0, q1); psi.cnot(q0, q1); break;
                case 6: t.apply_cz(q0, q1); psi.cz(q0, q1); break;
                default: {
                    auto [outcome, det] = t.measure_z(q0, meas_rng);
                    double p1 = psi.prob_one(q0);
                    if (det) {
                        CHECK((std::abs(p1 - outcome) < 1e-9));
                    } else {
                        CHECK(std::abs(p1 - 0.5) < 1e-9);
                    }
                    psi.project(q0, outcome);
                    break;
                }
            }
            REQUIRE(t.check_invariants());
        }
        // Final full measurement must match the collapsed statevector.
        for (int q = 0; q < n; ++q) {
            auto [outcome, det] = t.measure_z(q, meas_rng);
            double p1 = psi.prob_one(q);
            if (det) {
                CHECK(std::abs(p1 - outcome) < 1e-9);
            } else {
                CHECK(std::abs(p1 - 0.5) < 1e-9);
            }
            psi.project(q, outcome);
        }
    }
}

TEST_CASE("reset_all_zero restores the initial tableau", "[tableau]") {
    StabilizerTableau t(3);
    ShotRng rng = shot_rng(10, 0);
    t.apply_h(0);
    t.apply_cnot(0, 2);
    t.apply_s(1);
    t.reset_all_zero();
    CHECK(t.check_invariants());
    for (int q = 0; q < 3; ++q) {
        CHECK(t.measure_z(q, rng) == std::pair<int, bool>(0, true));
    }
}

TEST_CASE("gate dispatch covers the whole gate set", "[tableau]") {
    ShotRng rng = shot_rng(11, 0);
    StabilizerTableau t(2);
    t.apply(Gate::H, 0);
    t.apply(Gate::S, 0);
    t.apply(Gate::S, 0);
    t.apply(Gate::H, 0);  // net X on qubit 0
    t.apply(Gate::CNOT, 0, 1);
    t.apply(Gate::X, 0);
    t.apply(Gate::Y, 1);
    t.apply(Gate::Z, 0);
    t.apply(Gate::CZ, 0, 1);
    CHECK(t.measure_z(0, rng) == std::pair<int, bool>(0, true));
    CHECK(t.measure_z(1, rng) == std::pair<int, bool>(0, true));
}
