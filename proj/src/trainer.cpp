#include "fndam/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "fndam/errors.hpp"
#include "fndam/rng.hpp"

namespace fndam {

SeparableDataset make_separable_dataset(const DatasetSpec& spec) {
    if (spec.n < 2) {
        throw ArgumentError("dataset needs at least two points");
    }
    if (!(spec.margin > 0.0)) {
        throw ArgumentError(fmt::format("dataset margin must be > 0 (got {})", spec.margin));
    }
    Rng rng(spec.seed);
    SeparableDataset ds;
    ds.truth.slope = rng.uniform(-spec.max_slope, spec.max_slope);
    ds.truth.intercept = rng.uniform(-spec.max_intercept, spec.max_intercept);
    ds.points.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        LabeledPoint p;
        p.y = (i % 2 == 0) ? 1 : -1;
        p.x[0] = rng.uniform(-spec.x1_range, spec.x1_range);
        const double offset = spec.margin + rng.uniform(0.0, spec.spread);
        p.x[1] = ds.truth.slope * p.x[0] + ds.truth.intercept + p.y * offset;
        ds.points.push_back(p);
    }
    shuffle(ds.points, rng);
    return ds;
}

bool is_separable(std::span<const LabeledPoint> points) {
    // Feasible (w0, w1) region: intersection of half-planes
    // y w0 + y x1 w1 + y x2 > 0, clipped from a large box.
    constexpr double box = 1e6;
    constexpr double eps = 1e-9;
    std::vector<Vec2> poly{{-box, -box}, {box, -box}, {box, box}, {-box, box}};
    for (const auto& p : points) {
        const double a = p.y;
        const double b = p.y * p.x[0];
        const double c = p.y * p.x[1] - eps;
        auto side = [&](const Vec2& w) { return a * w[0] + b * w[1] + c; };
        std::vector<Vec2> next;
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const Vec2& u = poly[i];
            const Vec2& v = poly[(i + 1) % poly.size()];
            const double su = side(u);
            const double sv = side(v);
            if (su > 0.0) {
                next.push_back(u);
            }
            if ((su > 0.0) != (sv > 0.0)) {
                const double t = su / (su - sv);
                next.push_back({u[0] + t * (v[0] - u[0]), u[1] + t * (v[1] - u[1])});
            }
        }
        poly = std::move(next);
        if (poly.empty()) {
            return false;
        }
    }
    return true;
}

double decision_fn(const Vec2& x, const Vec2& w) { return x[1] + w[1] * x[0] + w[0]; }

double hinge_loss(const LabeledPoint& p, const Vec2& w) {
    return std::max(0.0, 1.0 - p.y * decision_fn(p.x, w));
}

Vec2 hinge_gradient(const LabeledPoint& p, const Vec2& w) {
    if (p.y * decision_fn(p.x, w) >= 1.0) {
        return {0.0, 0.0};
    }
    return {-static_cast<double>(p.y), -p.y * p.x[0]};
}

double accuracy(std::span<const LabeledPoint> points, const Vec2& w) {
    if (points.empty()) {
        return 0.0;
    }
    const auto correct = std::count_if(points.begin(), points.end(),
                                       [&](const LabeledPoint& p) { return p.y * decision_fn(p.x, w) > 0.0; });
    return static_cast<double>(correct) / static_cast<double>(points.size());
}

void TrainerConfig::validate() const {
    if (!(learning_rate > 0.0) || !(unit_step > 0.0)) {
        throw ArgumentError("trainer: learning rate and unit step must be > 0");
    }
    if (!(pulse_frequency > 0.0) || !(pulse_duration > 0.0) || pulse_duration * pulse_frequency > 1.0) {
        throw ArgumentError("trainer: pulses must fit their period");
    }
    if (!(sample_interval > 0.0) || static_cast<double>(max_pulses) / pulse_frequency > sample_interval) {
        throw ArgumentError("trainer: the largest pulse train must fit in one sample interval");
    }
    if (epochs == 0) {
        throw ArgumentError("trainer: need at least one epoch");
    }
}

DamCell reference_cell(const DamCell& cell, double v0, double age) {
    DamCell ref = decay(synchronize(cell.set_params, cell.reset_params, v0), age);
    ref.weight_scale = cell.weight_scale;
    return ref;
}

PulsePlan gradient_to_pulses(double update, const TrainerConfig& config, const DamCell& reference) {
    PulsePlan plan;
    plan.polarity = update >= 0.0 ? Polarity::positive : Polarity::negative;
    const double count = std::round(std::abs(update) / config.unit_step);
    if (count == 0.0) {
        return plan;
    }
    plan.n_pulses = static_cast<std::size_t>(count);
    if (plan.n_pulses > config.max_pulses) {
        plan.n_pulses = config.max_pulses;
        plan.clipped = true;
    }
    plan.amplitude = precompensated_amplitude(reference, config.unit_step, config.pulse_duration,
                                              plan.polarity, config.amp_max);
    return plan;
}

namespace {

Vec2 read_pair(const DamArray& array) {
    const auto r = array.batch_read(kernels::Exec::serial);
    return {r[0].weight, r[1].weight};
}

}  // namespace

TrainingTrace train_perceptron(std::span<const LabeledPoint> points, DamArray& array,
                               const TrainerConfig& config, EnergyLedger& ledger) {
    config.validate();
    if (array.size() != 2) {
        throw ArgumentError(fmt::format("perceptron needs a two-cell array (got {})", array.size()));
    }
    if (points.empty() || !is_separable(points)) {
        throw ArgumentError(
            "train_perceptron: dataset is not linearly separable by x2 + w1 x1 + w0; refusing to train");
    }

    Rng rng(config.seed);
    std::vector<std::size_t> order(points.size());
    TrainingTrace trace;
    std::size_t step = 0;
    ExactSum total;  // entry by entry, the same terms the ledger sums

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        shuffle(order, rng);
        EpochSummary summary;
        summary.epoch = epoch;
        ExactSum epoch_energy;
        double update_sum = 0.0;

        for (const std::size_t idx : order) {
            const LabeledPoint& p = points[idx];
            StepRecord rec;
            rec.epoch = epoch;
            rec.step = step++;
            rec.point = idx;
            rec.t = array.global_clock();
            rec.weights = read_pair(array);
            rec.loss = hinge_loss(p, rec.weights);
            rec.gradient = hinge_gradient(p, rec.weights);

            std::vector<TrainTarget> targets;
            for (std::size_t k = 0; k < 2; ++k) {
                rec.update[k] = -config.learning_rate * rec.gradient[k];
                if (rec.update[k] == 0.0) {
                    continue;
                }
                const DamCell ref = reference_cell(array.cell(k), array.v0(), array.global_clock());
                const PulsePlan plan = gradient_to_pulses(rec.update[k], config, ref);
                rec.clipped = rec.clipped || plan.clipped;
                if (plan.n_pulses == 0) {
                    continue;
                }
                rec.pulses[k] = plan.n_pulses;
                rec.polarity[k] = static_cast<int>(plan.polarity);
                rec.amplitude[k] = plan.amplitude;
                const Pulse pulse{plan.amplitude, config.pulse_duration};
                targets.push_back({k, plan.polarity, pulse, plan.n_pulses, config.pulse_frequency});
                const double e = ledger.record(k, rec.t, pulse, plan.n_pulses).energy;
                rec.energy += e;
                epoch_energy.add(e);
                total.add(e);
            }
            const double start = array.global_clock();
            if (!targets.empty()) {
                array.batch_train(targets);
            }
            array.advance(std::max(0.0, config.sample_interval - (array.global_clock() - start)));

            update_sum += std::abs(rec.update[0]) + std::abs(rec.update[1]);
            trace.steps.push_back(rec);
        }

        summary.weights = read_pair(array);
        summary.accuracy = accuracy(points, summary.weights);
        summary.mean_abs_update = update_sum / static_cast<double>(points.size());
        summary.energy = epoch_energy.value();
        summary.end_time = array.global_clock();
        trace.epochs.push_back(summary);
    }
    trace.final_weights = read_pair(array);
    trace.total_energy = total.value();
    return trace;
}

void write_steps_csv(std::ostream& os, const TrainingTrace& trace) {
    os << "epoch,step,point,t_s,w0_mV,w1_mV,loss,grad0,grad1,update0_mV,update1_mV,"
          "pulses0,pulses1,polarity0,polarity1,amplitude0_V,amplitude1_V,energy_J,clipped\n";
    for (const auto& s : trace.steps) {
        os << fmt::format("{},{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{},{},{},"
                          "{:.17g},{:.17g},{:.17g},{}\n",
                          s.epoch, s.step, s.point, s.t, s.weights[0], s.weights[1], s.loss, s.gradient[0],
                          s.gradient[1], s.update[0], s.update[1], s.pulses[0], s.pulses[1], s.polarity[0],
                          s.polarity[1], s.amplitude[0], s.amplitude[1], s.energy, s.clipped ? 1 : 0);
    }
}

void write_epochs_csv(std::ostream& os, const TrainingTrace& trace) {
    os << "epoch,accuracy,mean_abs_update_mV,energy_J,end_time_s,w0_mV,w1_mV\n";
    for (const auto& e : trace.epochs) {
        os << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", e.epoch, e.accuracy,
                          e.mean_abs_update, e.energy, e.end_time, e.weights[0], e.weights[1]);
    }
}

}  // namespace fndam
