#include <doctest.h>

#include <cmath>
#include <vector>

#include "fndam/calibration.hpp"
#include "fndam/dam_cell.hpp"
#include "fndam/errors.hpp"
#include "fndam/rng.hpp"
#include "oracles.hpp"

using namespace fndam;

namespace {

DamCell aged(double age) {
    const FnParams p = default_params();
    return decay(synchronize(p, p, 7.5), age);
}

// Two nodes of identical parameters placed at W_S and W_S + w/1000.
DamCell with_weight(double w_s, double w_mv) {
    const FnParams p = default_params();
    DamCell c = synchronize(p, p, w_s);
    c.reset_node = make_node(p, w_s + w_mv / c.weight_scale);
    return c;
}

}  // namespace

TEST_SUITE("dam_cell") {

TEST_CASE("synchronize with identical parameters") {
    const FnParams p = default_params();
    const DamCell c = synchronize(p, p, 7.5);
    CHECK(c.set_node.v_fg == 7.5);
    CHECK(c.reset_node.v_fg == 7.5);
    CHECK(weight_of(c) == 0.0);
    CHECK(weight_of(decay(c, 10.0)) == 0.0);
    CHECK(read_weight(c).weight == 0.0);
}

TEST_CASE("synchronize rate-matches mismatched nodes") {
    const FnParams p = default_params();
    FnParams q = p;
    q.k1 *= 1.001;
    const DamCell c = synchronize(p, q, 7.5);
    const double ls = log_discharge_rate(p, c.set_node.v_fg);
    const double lr = log_discharge_rate(q, c.reset_node.v_fg);
    CHECK(std::abs(ls - lr) < 1e-10 * std::abs(ls));
    // A 0.1 % faster RESET node must sit lower by log(1.001) / (d log rate / dV).
    const double v = 7.5;
    const double predicted_mv = -1000.0 * std::log(1.001) / (2.0 / v + p.k2 / (v * v));
    CHECK(weight_of(c) == doctest::Approx(predicted_mv).epsilon(1e-3));

    FnParams bad = p;
    bad.k1 = 1e-10;  // even at k2 the RESET node discharges far slower than SET
    CHECK_THROWS_AS(synchronize(p, bad, 7.5), InitializationError);
}

TEST_CASE("SET raises and RESET lowers the weight") {
    const DamCell c = aged(90.0);
    const Pulse pulse{0.5, 0.5};
    const double up = weight_of(set_pulse(c, pulse));
    const double down = weight_of(reset_pulse(c, pulse));
    CHECK(up > 0.0);
    CHECK(down < 0.0);
    CHECK(oracle::rel(-down, up) < 1e-9);
    CHECK(set_pulse(c, pulse).clock == doctest::Approx(c.clock + 0.5));
}

TEST_CASE("SET followed by an equal RESET cancels") {
    const DamCell c = aged(540.0);
    const Pulse pulse{1.0, 0.1};
    const double step = weight_of(set_pulse(c, pulse));
    const double after = weight_of(reset_pulse(set_pulse(c, pulse), pulse));
    CHECK(std::abs(after) < 0.05 * step);
}

TEST_CASE("short pulses accumulate linearly early in life") {
    const DamCell c = aged(0.0);
    const Pulse pulse{0.1, 1e-3};
    const double single = weight_of(set_pulse(c, pulse));
    DamCell cur = c;
    for (int k = 1; k <= 10; ++k) {
        cur = set_pulse(cur, pulse);
        CHECK(weight_of(cur) == doctest::Approx(k * single).epsilon(0.05));
    }
}

TEST_CASE("repeated strong pulses give successively smaller steps") {
    DamCell c = aged(540.0);
    const Pulse pulse{3.0, 0.1};
    double prev_step = 1e300;
    for (int k = 0; k < 8; ++k) {
        const double before = weight_of(c);
        c = set_pulse(c, pulse);
        const double step = weight_of(c) - before;
        CHECK(step > 0.0);
        CHECK(step < prev_step);
        prev_step = step;
    }
}

TEST_CASE("noisy reads") {
    const DamCell c = set_pulse(aged(90.0), Pulse{0.5, 0.5});
    Rng rng(7);
    const double truth = weight_of(c);
    double sum = 0.0, sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double w = read_weight(c, 1e-4, rng).weight;
        sum += w;
        sq += (w - truth) * (w - truth);
    }
    CHECK(sum / n == doctest::Approx(truth).epsilon(0.01));
    CHECK(std::sqrt(sq / n) == doctest::Approx(0.1).epsilon(0.03));  // 100 uV -> 0.1 mV
    CHECK(read_weight(c, 0.0, rng).weight == truth);
}

TEST_CASE("decay resynchronizes") {
    DamCell c = set_pulse(aged(0.0), Pulse{0.2, 0.5});
    CHECK(weight_of(decay(aged(0.0), 40.0)) == 0.0);
    double prev = weight_of(c);
    for (int i = 0; i < 30; ++i) {
        c = decay(c, 0.5 + i);
        const double w = weight_of(c);
        CHECK(w < prev);
        CHECK(w > 0.0);
        prev = w;
    }
    CHECK(decay(c, 0.0) == c);
}

TEST_CASE("retention over a fixed window grows as the bias falls") {
    double prev = 0.0;
    for (const double age : {0.0, 30.0, 90.0, 200.0, 540.0, 2000.0}) {
        const DamCell c = set_pulse(aged(age), Pulse{1.0, 0.5});
        const double r = weight_of(decay(c, 40.0)) / weight_of(c);
        CHECK(r > prev);
        prev = r;
    }
}

TEST_CASE("discrete update") {
    const FnParams p = default_params();
    CHECK(discrete_update(0.0, 7.5, p, 1.0, 0.0) == 0.0);
    const double next = discrete_update(1.0, 7.5, p, 1.0, 0.0);
    CHECK(next > 0.0);
    CHECK(next < 1.0);
    CHECK(discrete_update(0.0, 7.5, p, 1.0, 0.01) == doctest::Approx(1000.0 * 0.1 * 0.01));
    CHECK_THROWS_AS(discrete_update(1.0, 7.5, p, 100.0, 0.0), StepSizeError);
}

TEST_CASE("discrete update tracks the two-node simulation") {
    const FnParams p = default_params();
    Rng rng(2024);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double w_s = rng.uniform(6.0, 7.5);
        const double w = (rng.uniform01() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.05, 5.0);
        const double dt = rng.uniform(0.01, 1.0);
        const double sim = weight_of(decay(with_weight(w_s, w), dt));
        const double disc = discrete_update(w, w_s, p, dt, 0.0);
        worst = std::max(worst, oracle::rel(disc, sim));
    }
    CHECK(worst < 0.01);
}

TEST_CASE("decay factor schedule") {
    const FnParams p = default_params();
    const double k0 = k0_from_initial(p, 7.5);
    const double dt = 1.0;
    double prev = decay_factor(p, k0, 0, dt);
    CHECK(prev > 0.0);
    for (std::uint64_t n = 1; n <= 100000; ++n) {
        const double f = decay_factor(p, k0, n, dt);
        REQUIRE(f < prev);
        prev = f;
    }
    const std::uint64_t n = 1000000;
    const double L = std::log(k0) + std::log1p(p.k1 * n * dt / k0);
    const double nf = static_cast<double>(n) * decay_factor(p, k0, n, dt);
    CHECK(nf > 1.0 - 1e-4);  // approaches 1 once k1 n dt >> k0
    CHECK(nf <= 1.0 + 2.0 / L);

    // Same quantity written through the gate voltage.
    for (const std::uint64_t m : {0ull, 1ull, 10ull, 1000ull, 100000ull}) {
        const double w_s = voltage_at(p, k0, static_cast<double>(m) * dt);
        CHECK(oracle::rel(decay_factor(p, k0, m, dt), linearized_decay(p, w_s, dt)) < 1e-12);
    }

    const DecaySchedule s = decay_schedule(p, k0, 100, 0.5);
    CHECK(s.alpha_eta.size() == 100);
    CHECK(s.dt_step == 0.5);
    CHECK(s.alpha_eta[7] == decay_factor(p, k0, 7, 0.5));
}

TEST_CASE("precompensated amplitude") {
    const DamCell young = aged(0.0);
    CHECK(precompensated_amplitude(young, 0.0, 0.5, Polarity::positive) == 0.0);

    const double a = precompensated_amplitude(young, 1.0, 0.5, Polarity::positive);
    CHECK(pulse_response(young, Pulse{a, 0.5}, Polarity::positive) == doctest::Approx(1.0).epsilon(1e-6));
    const double r = precompensated_amplitude(young, 1.0, 0.5, Polarity::negative);
    CHECK(pulse_response(young, Pulse{r, 0.5}, Polarity::negative) == doctest::Approx(-1.0).epsilon(1e-6));

    double prev = 0.0;
    for (const double age : {0.0, 10.0, 90.0, 540.0, 3600.0, 86400.0}) {
        const double amp = precompensated_amplitude(aged(age), 1.0, 0.5, Polarity::positive);
        CHECK(amp > prev);
        prev = amp;
    }
    // Regime amplitudes: ~100 mV, ~500 mV, ~1 V within a factor of two.
    const double expected[] = {0.1, 0.5, 1.0};
    const double ages[] = {0.0, 90.0, 540.0};
    for (int i = 0; i < 3; ++i) {
        const double amp = precompensated_amplitude(aged(ages[i]), 1.0, 0.5, Polarity::positive);
        CHECK(amp > expected[i] / 2.0);
        CHECK(amp < expected[i] * 2.0);
    }
    CHECK_THROWS_AS(precompensated_amplitude(aged(540.0), 1.0, 0.5, Polarity::positive, 0.2), SaturationError);
}

TEST_CASE("common-mode steps") {
    const DamCell zero = aged(540.0);
    CHECK(weight_of(decay(common_mode_step(zero, 0.1), 40.0)) == 0.0);
    CHECK(common_mode_step(zero, 0.0) == zero);

    const DamCell c0 = aged(540.0);
    const double amp = precompensated_amplitude(c0, 2.0, 0.5, Polarity::positive);
    const DamCell c = set_pulse(c0, Pulse{amp, 0.5});
    const double ref = weight_of(decay(c, 40.0));
    const double common = weight_of(decay(common_mode_step(c, 0.1), 40.0));
    DamCell single = c;
    single.set_node = step_voltage(single.set_node, single.set_params, 0.1);
    const double one_sided = weight_of(decay(single, 40.0));
    CHECK(std::abs(common - ref) * 10.0 <= std::abs(one_sided - ref));
    CHECK_THROWS_AS(common_mode_step(c, -100.0), DomainError);
}

}  // TEST_SUITE
