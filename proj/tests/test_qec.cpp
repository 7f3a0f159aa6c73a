#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "thermstab/decoder.hpp"
#include "thermstab/qec_experiments.hpp"

using namespace thermstab;

TEST_CASE("distance-3 plaquette layout", "[qec]") {
    auto plaquettes = detail::surface_plaquettes(3);
    REQUIRE(plaquettes.size() == 8);

    std::set<std::pair<int, int>> x_checks, z_checks;
    for (const auto& p : plaquettes) {
        (p.is_x ? x_checks : z_checks).insert({p.r, p.c});
        int weight = 0;
        for (int dq : p.data) weight += dq >= 0;
        CHECK((weight == 2 || weight == 4));
        CHECK(p.ancilla >= 9);
    }
    CHECK(x_checks == std::set<std::pair<int, int>>{{-1, 0}, {0, 1}, {1, 0}, {2, 1}});
    CHECK(z_checks == std::set<std::pair<int, int>>{{0, 0}, {0, 2}, {1, 1}, {1, -1}});
}

TEST_CASE("plaquette counts scale with distance", "[qec]") {
    CHECK(detail::surface_plaquettes(5).size() == 24);
    CHECK(detail::surface_plaquettes(7).size() == 48);
}

TEST_CASE("surface memory circuit bookkeeping", "[qec]") {
    SurfaceSpec spec;  // d = 3, Z basis, |0>
    Circuit c = build_surface_memory(spec, 2);
    CHECK(c.n_qubits == 17);
    CHECK(c.n_records == 2 * 8 + 9);
    CHECK(c.detectors.size() == 4 + 8 + 4);
    CHECK(c.observables.size() == 1);
    CHECK(c.observables[0].size() == 3);

    Circuit c3 = build_surface_memory(spec, 3);
    CHECK(c3.detectors.size() == 4 + 8 + 8 + 4);

    SurfaceSpec spec5;
    spec5.distance = 5;
    Circuit c5 = build_surface_memory(spec5, 2);
    CHECK(c5.n_qubits == 49);
    CHECK(c5.detectors.size() == 12 + 24 + 12);
}

TEST_CASE("surface spec validation", "[qec]") {
    SurfaceSpec bad;
    bad.distance = 4;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.distance = 3;
    bad.basis = 'Y';
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.basis = 'X';
    bad.initial_state = InitialState::zero;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.initial_state = InitialState::plus;
    CHECK_NOTHROW(bad.validate());
}

TEST_CASE("noiseless surface memory has no events and no logical errors", "[qec]") {
    for (auto [state, basis] : std::vector<std::pair<InitialState, char>>{
             {InitialState::zero, 'Z'}, {InitialState::one, 'Z'}, {InitialState::plus, 'X'}}) {
        SurfaceSpec spec;
        spec.initial_state = state;
        spec.basis = basis;
        Circuit c = build_surface_memory(spec, 3);
        RunResult r = run_memory(c, 400, 99, zero_decoder);
        CHECK(r.summary.ler == 0.0);
        CHECK(r.summary.fallback_count == 0);
        for (uint64_t w : r.events) CHECK(w == 0);
        for (uint32_t f : r.raw_flips) CHECK(f == 0);
    }
}

TEST_CASE("noiseless distance-5 surface memory is clean", "[qec]") {
    SurfaceSpec spec;
    spec.distance = 5;
    Circuit c = build_surface_memory(spec, 2);
    RunResult r = run_memory(c, 200, 100, zero_decoder);
    CHECK(r.summary.ler == 0.0);
    for (uint64_t w : r.events) CHECK(w == 0);
}

TEST_CASE("bivariate bicycle preset realizes an [[18, 4, 4]] code", "[qec]") {
    BBCode code = build_bb_code(bb18_preset());
    CHECK(code.n == 18);
    CHECK(code.k == 4);
    CHECK(code.h_x.rank() == 7);
    CHECK(code.h_z.rank() == 7);
    CHECK(code.logical_z.size() == 4);
    CHECK(bb_min_distance(code) == 4);

    // Checks commute: H_X H_Z^T = 0.
    CHECK(code.h_x.multiply(code.h_z.transposed()).is_zero());
}

TEST_CASE("degenerate bicycle specs are rejected", "[qec]") {
    // Duplicate monomial after exponent reduction.
    BBSpec dup{3, 3, {{0, 0}, {3, 0}}, {{0, 0}, {0, 1}}};
    CHECK_THROWS_AS(build_bb_code(dup), std::invalid_argument);

    // A = B = 1 leaves no logical qubits.
    BBSpec trivial{2, 2, {{0, 0}}, {{0, 0}}};
    CHECK_THROWS_AS(build_bb_code(trivial), std::invalid_argument);
}

TEST_CASE("bicycle memory circuit bookkeeping", "[qec]") {
    Circuit c = build_bb_memory(bb18_preset(), 2);
    CHECK(c.n_qubits == 18 + 18);
    CHECK(c.n_records == 2 * 18 + 18);
    CHECK(c.detectors.size() == 9 + 18 + 9);
    CHECK(c.observables.size() == 4);
}

TEST_CASE("noiseless bicycle memory is clean", "[qec]") {
    Circuit c = build_bb_memory(bb18_preset(), 2);
    RunResult r = run_memory(c, 300, 101, zero_decoder);
    CHECK(r.summary.ler == 0.0);
    for (uint64_t w : r.events) CHECK(w == 0);
    for (uint32_t f : r.raw_flips) CHECK(f == 0);
}

TEST_CASE("memory runs are bit-identical across thread counts", "[qec]") {
    SurfaceSpec spec;
    Circuit base = build_surface_memory(spec, 2);
    Circuit c = instrument_noise(base, ThermalParams(1.0, 1.0, 0.05, 0.0),
                                 ChannelModel::exact_qpd);

    RunOptions opt1;
    opt1.threads = 1;
    opt1.chunk = 256;
    RunOptions opt4;
    opt4.threads = 4;
    opt4.chunk = 256;

    RunResult a = run_memory(c, 2500, 4242, zero_decoder, opt1);
    RunResult b = run_memory(c, 2500, 4242, zero_decoder, opt4);
    CHECK(a.events == b.events);
    CHECK(a.raw_flips == b.raw_flips);
    CHECK(a.signs == b.signs);
    CHECK(a.summary.ler == b.summary.ler);
    CHECK(a.summary.ci_low == b.summary.ci_low);
    CHECK(a.summary.ci_high == b.summary.ci_high);
}

TEST_CASE("sign-weighted logical error rates carry a normal interval", "[qec]") {
    SurfaceSpec spec;
    Circuit base = build_surface_memory(spec, 2);
    Circuit c = instrument_noise(base, ThermalParams(1.0, 2.0, 0.05, 0.0),
                                 ChannelModel::exact_qpd);
    REQUIRE(c.gamma_total() > 1.0);
    RunResult r = run_memory(c, 2000, 7, zero_decoder);
    CHECK(r.summary.ci_low <= r.summary.ler);
    CHECK(r.summary.ler <= r.summary.ci_high);
    CHECK(r.summary.gamma_total == Catch::Approx(c.gamma_total()));
    bool saw_negative = false;
    for (int8_t s : r.signs) saw_negative |= s < 0;
    CHECK(saw_negative);
}

TEST_CASE("wilson interval at a reference point", "[qec]") {
    auto [lo, hi] = detail::wilson_interval(5.0, 100.0);
    CHECK(lo == Catch::Approx(0.02154367915436796).epsilon(1e-12));
    CHECK(hi == Catch::Approx(0.11175046923191913).epsilon(1e-12));
}

TEST_CASE("thread count resolution prefers the explicit request", "[qec]") {
    CHECK(resolve_thread_count(3) == 3);
    CHECK(resolve_thread_count(1) == 1);
    CHECK(resolve_thread_count(0) >= 1);
}

TEST_CASE("population circuit measures every qubit once at the end", "[qec]") {
    Circuit c = build_population_circuit(InitialState::zero, 3);
    CHECK(c.n_qubits == 17);
    CHECK(c.n_records == 8 + 17);
}

TEST_CASE("excited population vanishes after long relaxation at zero temperature", "[qec]") {
    PopulationEstimate est = excited_population(InitialState::zero, 3,
                                                ThermalParams(1.0, 1.0, 50.0, 0.0),
                                                ChannelModel::exact_qpd, 2000, 55);
    CHECK(est.fraction == Catch::Approx(0.0).margin(1e-12));
    CHECK(est.shots == 2000);
}

TEST_CASE("prepared logical states have nearby excited populations", "[qec]") {
    // Idle window of zero length: the readout difference between |1>_L and
    // |0>_L is bounded by the logical string weight d over the 2d^2 - 1 qubits.
    ThermalParams idle(1.0, 1.0, 0.0, 0.0);
    PopulationEstimate p0 = excited_population(InitialState::zero, 3, idle,
                                               ChannelModel::exact_qpd, 6000, 56);
    PopulationEstimate p1 = excited_population(InitialState::one, 3, idle,
                                               ChannelModel::exact_qpd, 6000, 57);
    double diff = p1.fraction - p0.fraction;
    double se = std::sqrt(p0.std_error * p0.std_error + p1.std_error * p1.std_error);
    CHECK(std::abs(diff) <= 3.0 / 17.0 + 5.0 * se);
}

TEST_CASE("detection event dump format", "[qec]") {
    SurfaceSpec spec;
    Circuit base = build_surface_memory(spec, 2);
    Circuit c = instrument_noise(base, ThermalParams(1.0, 1.0, 0.1, 0.0),
                                 ChannelModel::exact_qpd);
    RunResult r = run_memory(c, 25, 9, zero_decoder);

    std::ostringstream os;
    write_detection_events(os, r);
    std::istringstream is(os.str());
    std::string line;
    int lines = 0;
    bool any_event = false;
    while (std::getline(is, line)) {
        REQUIRE(line.size() == (size_t)r.n_detectors + 1 + (size_t)r.n_observables + 2);
        CHECK(line[r.n_detectors] == ' ');
        CHECK(line[r.n_detectors + 1 + r.n_observables] == ' ');
        char sign = line.back();
        CHECK((sign == '+' || sign == '-'));
        for (int d = 0; d < r.n_detectors; ++d) {
            CHECK((line[d] == '0' || line[d] == '1'));
            any_event |= line[d] == '1';
        }
        ++lines;
    }
    CHECK(lines == 25);
    CHECK(any_event);
}
