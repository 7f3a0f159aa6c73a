#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "thermstab/circuit.hpp"

using namespace thermstab;

namespace {

// Two "rounds": a measure+reset layer on qubit 1, then a final measure layer.
Circuit two_layer_circuit() {
    Circuit c;
    c.n_qubits = 2;
    c.append_gate(Gate::CNOT, 0, 1);
    c.append_measure(1);
    c.append_reset(1);
    c.append_gate(Gate::CNOT, 0, 1);
    c.append_measure(0);
    c.append_measure(1);
    return c;
}

}  // namespace

TEST_CASE("circuit validation catches malformed programs", "[circuit]") {
    Circuit good = two_layer_circuit();
    CHECK_NOTHROW(good.validate());

    Circuit bad_qubit = good;
    bad_qubit.append_gate(Gate::H, 7);
    CHECK_THROWS_AS(bad_qubit.validate(), std::logic_error);

    Circuit bad_record = good;
    bad_record.instructions.push_back(Instruction::make_measure(0, 5));
    CHECK_THROWS_AS(bad_record.validate(), std::logic_error);

    Circuit bad_detector = good;
    bad_detector.detectors.push_back({0, 99});
    CHECK_THROWS_AS(bad_detector.validate(), std::logic_error);
}

TEST_CASE("instrumentation places one site per qubit before each layer", "[circuit]") {
    Circuit base = two_layer_circuit();
    ThermalParams params(1.0, 1.5, 0.1, 0.0);

    Circuit noisy = instrument_noise(base, params, ChannelModel::exact_qpd);
    // Two layers, two qubits each.
    CHECK(noisy.sites.size() == 4);
    CHECK(noisy.gamma_total() == Catch::Approx(std::pow(
              negativity(qpd_thermal(params)), 4)));

    // Sites sit immediately before their layer.
    REQUIRE(noisy.instructions.size() == base.instructions.size() + 4);
    CHECK(noisy.instructions[0].kind == Instruction::Kind::gate);
    CHECK(noisy.instructions[1].kind == Instruction::Kind::noise);
    CHECK(noisy.instructions[2].kind == Instruction::Kind::noise);
    CHECK(noisy.instructions[3].kind == Instruction::Kind::measure);
    CHECK(noisy.instructions[4].kind == Instruction::Kind::reset);
    CHECK(noisy.instructions[5].kind == Instruction::Kind::gate);
    CHECK(noisy.instructions[6].kind == Instruction::Kind::noise);
    CHECK(noisy.instructions[7].kind == Instruction::Kind::noise);
    CHECK_NOTHROW(noisy.validate());
}

TEST_CASE("final layer noise can be disabled", "[circuit]") {
    Circuit base = two_layer_circuit();
    ThermalParams params(1.0, 1.5, 0.1, 0.0);
    InstrumentOptions opt;
    opt.final_layer_noise = false;
    Circuit noisy = instrument_noise(base, params, ChannelModel::exact_qpd, opt);
    CHECK(noisy.sites.size() == 2);
}

TEST_CASE("around policy adds a trailing site layer after reset layers", "[circuit]") {
    Circuit base = two_layer_circuit();
    ThermalParams params(1.0, 1.5, 0.1, 0.0);
    InstrumentOptions opt;
    opt.policy = NoisePolicy::around_measure_reset;
    Circuit noisy = instrument_noise(base, params, ChannelModel::exact_qpd, opt);
    // First layer has a reset, so it gets before+after sites; final layer only before.
    CHECK(noisy.sites.size() == 6);
    CHECK_NOTHROW(noisy.validate());
}

TEST_CASE("instrumenting twice is rejected", "[circuit]") {
    Circuit base = two_layer_circuit();
    ThermalParams params(1.0, 1.5, 0.1, 0.0);
    Circuit noisy = instrument_noise(base, params, ChannelModel::pta);
    CHECK_THROWS_AS(instrument_noise(noisy, params, ChannelModel::pta), std::invalid_argument);
}

TEST_CASE("PTA instrumentation has unit overhead", "[circuit]") {
    Circuit base = two_layer_circuit();
    ThermalParams params(1.0, 1.8, 0.3, 0.1);
    Circuit noisy = instrument_noise(base, params, ChannelModel::pta);
    CHECK(noisy.gamma_total() == Catch::Approx(1.0).margin(1e-12));
    Circuit reset_noisy = instrument_noise(base, params, ChannelModel::reset_approx);
    CHECK(reset_noisy.gamma_total() == Catch::Approx(1.0).margin(1e-12));
    Circuit exact = instrument_noise(base, params, ChannelModel::exact_qpd);
    CHECK(exact.gamma_total() > 1.0);
}

TEST_CASE("noiseless execution of the two-layer circuit", "[circuit]") {
    Circuit c = two_layer_circuit();
    c.detectors.push_back({0, 2});
    c.observables.push_back({1});
    c.observable_expected.push_back(0);

    std::vector<uint8_t> records;
    ShotRng rng = shot_rng(31, 0);
    int sign = execute_circuit(c, rng, records);
    CHECK(sign == 1);
    REQUIRE(records.size() == 3);
    CHECK(records[0] == 0);
    CHECK(records[1] == 0);
    CHECK(records[2] == 0);

    uint64_t events = 0;
    compute_detection_events(c, records, &events);
    CHECK(events == 0);
    CHECK(compute_observable_flips(c, records) == 0);
}

TEST_CASE("forced branches flip exactly the targeted sites", "[circuit]") {
    Circuit base = two_layer_circuit();
    ThermalParams params(1.0, 1.5, 0.1, 0.0);
    Circuit c = instrument_noise(base, params, ChannelModel::exact_qpd);
    // Records: r0 = syndrome (qubit 1), r1 = final qubit 0, r2 = final qubit 1.
    c.detectors.push_back({0});
    c.observables.push_back({1});
    c.observable_expected.push_back(0);
    c.validate();

    std::vector<uint8_t> records;
    ShotRng rng = shot_rng(32, 0);

    // Site 0 is qubit 0 before the first layer; the X propagates through the
    // second CNOT into both final measurements but misses the first syndrome.
    std::vector<std::pair<int, Branch>> forced = {{0, Branch::X}};
    int sign = execute_circuit(c, rng, records, &forced);
    CHECK(sign == 1);
    CHECK(records[0] == 0);
    CHECK(records[1] == 1);
    CHECK(records[2] == 1);

    // Site 1 is qubit 1 before the first layer; X there flips only the
    // syndrome because the reset wipes it.
    forced = {{1, Branch::X}};
    execute_circuit(c, rng, records, &forced);
    CHECK(records[0] == 1);
    CHECK(records[1] == 0);
    CHECK(records[2] == 0);

    // Empty forcing list means identity everywhere.
    forced = {};
    execute_circuit(c, rng, records, &forced);
    CHECK(records[0] == 0);
    CHECK(records[1] == 0);
    CHECK(records[2] == 0);
}

TEST_CASE("execution is reproducible for a fixed stream", "[circuit]") {
    Circuit base = two_layer_circuit();
    ThermalParams params(1.0, 1.2, 0.6, 0.2);
    Circuit c = instrument_noise(base, params, ChannelModel::exact_qpd);

    for (int shot = 0; shot < 20; ++shot) {
        std::vector<uint8_t> r1, r2;
        ShotRng rng1 = shot_rng(33, shot);
        ShotRng rng2 = shot_rng(33, shot);
        int s1 = execute_circuit(c, rng1, r1);
        int s2 = execute_circuit(c, rng2, r2);
        CHECK(s1 == s2);
        CHECK(r1 == r2);
    }
}

TEST_CASE("observable flips respect the expected parity", "[circuit]") {
    Circuit c;
    c.n_qubits = 1;
    c.append_gate(Gate::X, 0);
    c.append_measure(0);
    c.observables.push_back({0});
    c.observable_expected.push_back(1);

    std::vector<uint8_t> records;
    ShotRng rng = shot_rng(34, 0);
    execute_circuit(c, rng, records);
    CHECK(records[0] == 1);
    CHECK(compute_observable_flips(c, records) == 0);

    c.observable_expected[0] = 0;
    CHECK(compute_observable_flips(c, records) == 1);
}

TEST_CASE("model and policy names round-trip", "[circuit]") {
    for (auto m : {ChannelModel::exact_qpd, ChannelModel::pta, ChannelModel::reset_approx}) {
        CHECK(channel_model_from_string(to_string(m)) == m);
    }
    for (auto p : {NoisePolicy::before_measure, NoisePolicy::around_measure_reset}) {
        CHECK(noise_policy_from_string(to_string(p)) == p);
    }
    CHECK_THROWS_AS(channel_model_from_string("bogus"), std::invalid_argument);
    CHECK_THROWS_AS(noise_policy_from_string("bogus"), std::invalid_argument);
}
