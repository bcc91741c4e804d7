#pragma once

// Chip-in-the-loop perceptron: two DAM cells hold (w0, w1) of the boundary
// f(x) = x2 + w1 x1 + w0. Gradients of the hinge loss are computed in software
// and written back as trains of fixed-width pulses whose amplitude is
// re-solved at every step so that one pulse moves the weight by one unit step.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "fndam/dam_array.hpp"
#include "fndam/energy.hpp"

namespace fndam {

using Vec2 = std::array<double, 2>;

struct LabeledPoint {
    Vec2 x{};
    int y = 1;  // -1 or +1
};

/// x2 = slope * x1 + intercept
struct Line {
    double slope = 0.0;
    double intercept = 0.0;
};

struct DatasetSpec {
    std::size_t n = 50;
    double margin = 1.2;       // minimum vertical distance from the ground-truth line
    double spread = 1.5;       // extra uniform distance beyond the margin
    double x1_range = 2.0;     // x1 ~ U[-x1_range, x1_range]
    double max_slope = 1.0;
    double max_intercept = 2.0;
    std::uint64_t seed = 0;
};

struct SeparableDataset {
    std::vector<LabeledPoint> points;
    Line truth;
};

SeparableDataset make_separable_dataset(const DatasetSpec& spec);

/// True if some (w0, w1) gives y * f(x) > 0 for every point.
bool is_separable(std::span<const LabeledPoint> points);

/// f = x2 + w1 x1 + w0, with w = {w0, w1}.
double decision_fn(const Vec2& x, const Vec2& w);

double hinge_loss(const LabeledPoint& p, const Vec2& w);

/// dL/dw = -y (1, x1) while y f < 1; zero otherwise, including the kink y f = 1.
Vec2 hinge_gradient(const LabeledPoint& p, const Vec2& w);

double accuracy(std::span<const LabeledPoint> points, const Vec2& w);

struct TrainerConfig {
    double learning_rate = 0.25;     // mV of weight per unit gradient
    double unit_step = 0.05;         // mV per pulse
    double pulse_frequency = 1000.0; // Hz
    double pulse_duration = 0.0005;  // s (50 % duty)
    double sample_interval = 2.0;    // s between training points
    std::size_t epochs = 5;
    std::size_t max_pulses = 2000;   // per weight per step
    double amp_max = kDefaultMaxAmplitude;
    std::uint64_t seed = 0;

    void validate() const;
};

struct PulsePlan {
    Polarity polarity = Polarity::positive;
    std::size_t n_pulses = 0;
    double amplitude = 0.0;
    bool clipped = false;
};

/// Reference cell for amplitude solving: the cell's parameters freshly
/// synchronized at v0 and aged to `age`. Depends on age only, not on the
/// stored weight.
DamCell reference_cell(const DamCell& cell, double v0, double age);

/// Map a requested weight change (mV) onto SET/RESET pulses. Positive updates
/// use SET, negative RESET; the count is round(|update| / unit_step).
PulsePlan gradient_to_pulses(double update, const TrainerConfig& config, const DamCell& reference);

struct StepRecord {
    std::size_t epoch = 0;
    std::size_t step = 0;
    std::size_t point = 0;
    double t = 0.0;
    Vec2 weights{};   // read at the start of the step
    double loss = 0.0;
    Vec2 gradient{};
    Vec2 update{};    // -lambda * gradient, mV
    std::array<std::size_t, 2> pulses{};
    std::array<int, 2> polarity{};
    Vec2 amplitude{};
    double energy = 0.0;
    bool clipped = false;
};

struct EpochSummary {
    std::size_t epoch = 0;
    double accuracy = 0.0;
    double mean_abs_update = 0.0;  // mean over the epoch's steps of |u0| + |u1|
    double energy = 0.0;
    double end_time = 0.0;
    Vec2 weights{};
};

struct TrainingTrace {
    std::vector<StepRecord> steps;
    std::vector<EpochSummary> epochs;
    Vec2 final_weights{};
    double total_energy = 0.0;
};

/// Train the two-cell array in place. Every pulse train is appended to the ledger.
/// Throws ArgumentError for non-separable data or arrays without two cells.
TrainingTrace train_perceptron(std::span<const LabeledPoint> points, DamArray& array,
                               const TrainerConfig& config, EnergyLedger& ledger);

void write_steps_csv(std::ostream& os, const TrainingTrace& trace);
void write_epochs_csv(std::ostream& os, const TrainingTrace& trace);

}  // namespace fndam
