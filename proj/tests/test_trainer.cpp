#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fndam/calibration.hpp"
#include "fndam/errors.hpp"
#include "fndam/rng.hpp"
#include "fndam/trainer.hpp"

using namespace fndam;

namespace {

DamArray two_cells(std::uint64_t seed = 0) {
    return DamArray::build(2, default_params(), 7.5, MismatchSpec{0.0, seed});
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("decision function") {
    CHECK(decision_fn({3.0, 0.0}, {0.0, 0.0}) == 0.0);
    CHECK(decision_fn({2.0, 5.0}, {1.0, -1.0}) == 4.0);
    // sign flips where x2 crosses -w1 x1 - w0
    const Vec2 w{0.5, 2.0};
    const double x1 = 1.5;
    const double boundary = -w[1] * x1 - w[0];
    CHECK(decision_fn({x1, boundary + 1e-9}, w) > 0.0);
    CHECK(decision_fn({x1, boundary - 1e-9}, w) < 0.0);
}

TEST_CASE("hinge loss and gradient") {
    // y f = 2: no loss, no gradient
    LabeledPoint far{{0.0, 2.0}, 1};
    CHECK(hinge_loss(far, {0.0, 0.0}) == 0.0);
    CHECK(hinge_gradient(far, {0.0, 0.0}) == Vec2{0.0, 0.0});
    // y = +1, f = 0, x1 = 3
    LabeledPoint p{{3.0, 0.0}, 1};
    CHECK(hinge_loss(p, {0.0, 0.0}) == 1.0);
    CHECK(hinge_gradient(p, {0.0, 0.0}) == Vec2{-1.0, -3.0});
    LabeledPoint n{{3.0, 0.0}, -1};
    CHECK(hinge_gradient(n, {0.0, 0.0}) == Vec2{1.0, 3.0});
    // kink y f = 1 -> zero gradient
    LabeledPoint kink{{0.0, 1.0}, 1};
    CHECK(hinge_gradient(kink, {0.0, 0.0}) == Vec2{0.0, 0.0});

    // convex along random lines
    Rng rng(1);
    for (int i = 0; i < 200; ++i) {
        LabeledPoint q{{rng.uniform(-2, 2), rng.uniform(-2, 2)}, rng.uniform01() < 0.5 ? -1 : 1};
        const Vec2 a{rng.uniform(-3, 3), rng.uniform(-3, 3)};
        const Vec2 b{rng.uniform(-3, 3), rng.uniform(-3, 3)};
        const Vec2 mid{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
        CHECK(hinge_loss(q, mid) <= 0.5 * (hinge_loss(q, a) + hinge_loss(q, b)) + 1e-12);
    }
}

TEST_CASE("separable datasets") {
    const DatasetSpec spec;
    CHECK(spec.n == 50);
    const SeparableDataset a = make_separable_dataset(spec);
    const SeparableDataset b = make_separable_dataset(spec);
    REQUIRE(a.points.size() == 50);
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        CHECK(a.points[i].x == b.points[i].x);
        CHECK(a.points[i].y == b.points[i].y);
        // margin around the ground-truth line
        const auto& p = a.points[i];
        CHECK(p.y * (p.x[1] - a.truth.slope * p.x[0] - a.truth.intercept) >= spec.margin);
    }
    CHECK(is_separable(a.points));
    const Vec2 truth_w{-a.truth.intercept, -a.truth.slope};
    CHECK(accuracy(a.points, truth_w) == 1.0);

    DatasetSpec other = spec;
    other.seed = 1;
    CHECK(make_separable_dataset(other).points[0].x != a.points[0].x);

    // XOR-like points cannot be split by x2 + w1 x1 + w0
    const std::vector<LabeledPoint> xor_pts{{{-1, 1}, 1}, {{1, -1}, 1}, {{-1, -1}, -1}, {{1, 1}, -1}};
    CHECK_FALSE(is_separable(xor_pts));
    // and vertical orderings that disagree in sign cannot either
    const std::vector<LabeledPoint> stacked{{{0, 1}, -1}, {{0, 0}, 1}};
    CHECK_FALSE(is_separable(stacked));

    CHECK_THROWS_AS(make_separable_dataset(DatasetSpec{1}), ArgumentError);
    DatasetSpec zero_margin;
    zero_margin.margin = 0.0;
    CHECK_THROWS_AS(make_separable_dataset(zero_margin), ArgumentError);
}

TEST_CASE("gradient to pulses") {
    const TrainerConfig cfg;
    const DamArray a = two_cells();
    const DamCell ref = reference_cell(a.cell(0), a.v0(), 0.0);

    CHECK(gradient_to_pulses(0.0, cfg, ref).n_pulses == 0);
    const PulsePlan one = gradient_to_pulses(cfg.unit_step, cfg, ref);
    CHECK(one.n_pulses == 1);
    CHECK(one.polarity == Polarity::positive);
    CHECK(pulse_response(ref, Pulse{one.amplitude, cfg.pulse_duration}, Polarity::positive) ==
          doctest::Approx(cfg.unit_step).epsilon(1e-6));
    CHECK(gradient_to_pulses(2.4 * cfg.unit_step, cfg, ref).n_pulses == 2);
    CHECK(gradient_to_pulses(2.6 * cfg.unit_step, cfg, ref).n_pulses == 3);
    const PulsePlan neg = gradient_to_pulses(-3.0 * cfg.unit_step, cfg, ref);
    CHECK(neg.polarity == Polarity::negative);
    CHECK(neg.n_pulses == 3);

    TrainerConfig capped = cfg;
    capped.max_pulses = 4;
    const PulsePlan clipped = gradient_to_pulses(10.0 * cfg.unit_step, capped, ref);
    CHECK(clipped.clipped);
    CHECK(clipped.n_pulses == 4);

    // amplitude grows with the reference age
    const double later = gradient_to_pulses(cfg.unit_step, cfg, reference_cell(a.cell(0), a.v0(), 300.0)).amplitude;
    CHECK(later > one.amplitude);
}

TEST_CASE("perceptron training reaches full accuracy") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        DatasetSpec spec;
        spec.seed = seed;
        const SeparableDataset data = make_separable_dataset(spec);
        DamArray array = two_cells(seed);
        TrainerConfig cfg;
        cfg.seed = seed;
        EnergyLedger ledger;
        const TrainingTrace trace = train_perceptron(data.points, array, cfg, ledger);
        CAPTURE(seed);
        CHECK(trace.epochs.size() == 5);
        CHECK(trace.epochs.back().accuracy == 1.0);
        CHECK(trace.steps.size() == 5 * 50);
        CHECK(trace.total_energy == ledger.total());
        CHECK(array.global_clock() == doctest::Approx(5 * 50 * cfg.sample_interval));

        // every issued train appears in the ledger, in order
        std::size_t entry = 0;
        double last_amp = 0.0;
        for (const auto& s : trace.steps) {
            for (int k = 0; k < 2; ++k) {
                if (s.pulses[k] == 0) {
                    continue;
                }
                REQUIRE(entry < ledger.entries().size());
                const auto& e = ledger.entries()[entry++];
                CHECK(e.cell_id == static_cast<std::size_t>(k));
                CHECK(e.n_pulses == s.pulses[k]);
                CHECK(e.amplitude == s.amplitude[k]);
                CHECK(e.t == s.t);
                CHECK(e.amplitude >= last_amp);
                last_amp = e.amplitude;
            }
        }
        CHECK(entry == ledger.entries().size());
    }
}

TEST_CASE("updates shrink faster than the energy spent on them") {
    const SeparableDataset data = make_separable_dataset(DatasetSpec{});
    DamArray array = two_cells();
    EnergyLedger ledger;
    const TrainingTrace trace = train_perceptron(data.points, array, TrainerConfig{}, ledger);
    const auto& first = trace.epochs.front();
    const auto& last = trace.epochs.back();
    CHECK(last.mean_abs_update < first.mean_abs_update);
    CHECK(last.energy / first.energy > last.mean_abs_update / first.mean_abs_update);
}

TEST_CASE("an already separating boundary issues no pulses") {
    DatasetSpec spec;
    spec.max_slope = 0.0;
    spec.max_intercept = 0.0;  // truth line x2 = 0, margin 1.2 > hinge margin
    const SeparableDataset data = make_separable_dataset(spec);
    DamArray array = two_cells();
    EnergyLedger ledger;
    const TrainingTrace trace = train_perceptron(data.points, array, TrainerConfig{}, ledger);
    CHECK(ledger.entries().empty());
    CHECK(trace.total_energy == 0.0);
    for (const auto& s : trace.steps) {
        CHECK(s.pulses[0] + s.pulses[1] == 0);
    }
}

TEST_CASE("training refuses bad inputs") {
    const std::vector<LabeledPoint> xor_pts{{{-1, 1}, 1}, {{1, -1}, 1}, {{-1, -1}, -1}, {{1, 1}, -1}};
    DamArray array = two_cells();
    EnergyLedger ledger;
    CHECK_THROWS_AS(train_perceptron(xor_pts, array, TrainerConfig{}, ledger), ArgumentError);
    CHECK(array.global_clock() == 0.0);

    DamArray three = DamArray::build(3, default_params(), 7.5, MismatchSpec{0.0, 0});
    const SeparableDataset data = make_separable_dataset(DatasetSpec{});
    CHECK_THROWS_AS(train_perceptron(data.points, three, TrainerConfig{}, ledger), ArgumentError);

    TrainerConfig slow;
    slow.max_pulses = 5000;  // 5 s of 1 kHz pulses in a 2 s slot
    CHECK_THROWS_AS(slow.validate(), ArgumentError);
}

TEST_CASE("trace CSVs") {
    const SeparableDataset data = make_separable_dataset(DatasetSpec{});
    DamArray array = two_cells();
    EnergyLedger ledger;
    const TrainingTrace trace = train_perceptron(data.points, array, TrainerConfig{}, ledger);
    std::ostringstream steps, epochs;
    write_steps_csv(steps, trace);
    write_epochs_csv(epochs, trace);
    const std::string st = steps.str();
    CHECK(std::count(st.begin(), st.end(), '\n') == 251);
    CHECK(epochs.str().rfind("epoch,accuracy,mean_abs_update_mV,energy_J,end_time_s,w0_mV,w1_mV\n", 0) == 0);
}

}  // TEST_SUITE
