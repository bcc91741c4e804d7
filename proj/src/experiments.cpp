#include "fndam/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "fndam/calibration.hpp"
#include "fndam/dam_array.hpp"
#include "fndam/dam_cell.hpp"
#include "fndam/errors.hpp"
#include "fndam/network.hpp"
#include "fndam/trainer.hpp"
#include "fndam/util.hpp"

namespace fndam {

namespace fs = std::filesystem;

// ---- tables ---------------------------------------------------------------

void Table::add(std::vector<Field> row) {
    if (row.size() != columns.size()) {
        throw ArgumentError(fmt::format("table {}: row has {} fields, expected {}", name, row.size(), columns.size()));
    }
    rows.push_back(std::move(row));
}

std::size_t Table::column_index(const std::string& column) const {
    const auto it = std::find(columns.begin(), columns.end(), column);
    if (it == columns.end()) {
        throw ArgumentError(fmt::format("table {} has no column '{}'", name, column));
    }
    return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> Table::numbers(const std::string& column) const {
    const std::size_t k = column_index(column);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        const Field& f = row[k];
        if (const auto* d = std::get_if<double>(&f)) {
            out.push_back(*d);
        } else if (const auto* i = std::get_if<std::int64_t>(&f)) {
            out.push_back(static_cast<double>(*i));
        } else {
            throw ArgumentError(fmt::format("table {}: column '{}' is not numeric", name, column));
        }
    }
    return out;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (const char ch : s) {
        if (ch == '"') {
            out += '"';
        }
        out += ch;
    }
    out += '"';
    return out;
}

namespace {

std::string format_field(const Field& f) {
    if (const auto* d = std::get_if<double>(&f)) {
        return fmt::format("{:.17g}", *d);
    }
    if (const auto* i = std::get_if<std::int64_t>(&f)) {
        return fmt::format("{}", *i);
    }
    return csv_quote(std::get<std::string>(f));
}

Field count_field(std::uint64_t n) { return static_cast<std::int64_t>(n); }

}  // namespace

std::string Table::to_csv() const {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out += (i ? "," : "") + csv_quote(columns[i]);
    }
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) {
                out += ',';
            }
            out += format_field(row[i]);
        }
        out += '\n';
    }
    return out;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw ArgumentError("fit_line: need two or more paired points");
    }
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) {
        throw ArgumentError("fit_line: x values are all equal");
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
    return f;
}

// ---- characterize ---------------------------------------------------------

namespace {

DamCell fresh_cell(const ExperimentConfig& c, double v0, double age) {
    const FnParams p = c.device.params();
    return decay(synchronize(p, p, v0), age);
}

CalibrationTargets targets_for(const ExperimentConfig& c) {
    CalibrationTargets t;
    t.v0 = c.device.v0;
    t.c_total = c.device.c_total;
    t.coupling_ratio = c.device.c_couple / c.device.c_total;
    t.window = c.grids.regime_window;
    return t;
}

Field polarity_field(Polarity p) { return static_cast<std::int64_t>(p == Polarity::positive ? 1 : -1); }

}  // namespace

Table regimes_table(const ExperimentConfig& c) {
    Table t{"regimes", {"regime", "age_s", "set_V", "amplitude_V", "energy_J", "t_s", "weight_mV", "retention"}, {}};
    const CalibrationTargets targets = targets_for(c);
    const FnParams p = c.device.params();
    for (std::size_t i = 0; i < targets.regimes.size(); ++i) {
        const RegimeResult r = measure_regime(p, targets, targets.regimes[i]);
        const DamCell pulsed =
            set_pulse(fresh_cell(c, c.device.v0, r.age), Pulse{r.amplitude, targets.pulse_duration});
        const double w0 = weight_of(pulsed);
        const double energy = write_energy(c.device.c_in, r.amplitude);
        const auto steps = static_cast<std::size_t>(std::floor(c.grids.regime_window / c.grids.regime_step + 1e-9));
        for (std::size_t k = 0; k <= steps; ++k) {
            const double dt = static_cast<double>(k) * c.grids.regime_step;
            const double w = weight_of(decay(pulsed, dt));
            t.add({static_cast<std::int64_t>(i + 1), r.age, r.set_voltage, r.amplitude, energy, dt, w, w / w0});
        }
    }
    return t;
}

Table bidirectional_table(const ExperimentConfig& c) {
    const SweepGrids& g = c.grids;
    if (g.bidir_interval < g.bidir_duration) {
        throw ArgumentError("bidirectional: pulse interval shorter than the pulse");
    }
    Table t{"bidirectional", {"step", "t_s", "polarity", "amplitude_V", "set_V", "reset_V", "weight_mV"}, {}};
    DamCell cell = fresh_cell(c, c.device.v0, g.sweep_age);
    const double start = cell.clock;
    t.add({std::int64_t{0}, 0.0, std::int64_t{0}, 0.0, cell.set_node.v_fg, cell.reset_node.v_fg, weight_of(cell)});
    const Pulse pulse{g.bidir_amplitude, g.bidir_duration};
    for (std::size_t k = 1; k <= 2 * g.bidir_pulses; ++k) {
        const Polarity pol = k <= g.bidir_pulses ? Polarity::positive : Polarity::negative;
        cell = decay(program_pulse(cell, pulse, pol), g.bidir_interval - g.bidir_duration);
        t.add({static_cast<std::int64_t>(k), cell.clock - start, polarity_field(pol), g.bidir_amplitude,
               cell.set_node.v_fg, cell.reset_node.v_fg, weight_of(cell)});
    }
    return t;
}

Table pulse_splitting_table(const ExperimentConfig& c) {
    const SweepGrids& g = c.grids;
    Table t{"pulse_splitting",
            {"n_pulses", "pulse_duration_s", "period_s", "window_s", "amplitude_V", "delta_w_mV", "relative_to_first"},
            {}};
    const DamCell c0 = fresh_cell(c, c.device.v0, g.sweep_age);
    const double window = 2.0 * g.split_on_time;  // 50 % duty
    const double idle = weight_of(decay(c0, window));
    double first = 0.0;
    for (const std::uint64_t n : g.splits) {
        if (n == 0) {
            throw ArgumentError("pulse splitting: pulse count must be >= 1");
        }
        const double nn = static_cast<double>(n);
        const Pulse pulse{g.split_amplitude, g.split_on_time / nn};
        const DamCell cell = program_train(c0, pulse, n, nn / window, Polarity::positive);
        const double dw = weight_of(cell) - idle;
        if (first == 0.0) {
            first = dw;
        }
        t.add({count_field(n), pulse.duration, window / nn, window, g.split_amplitude, dw, dw / first});
    }
    return t;
}

Table amplitude_sweep_table(const ExperimentConfig& c) {
    const SweepGrids& g = c.grids;
    Table t{"amplitude_sweep", {"amplitude_V", "pulse_index", "delta_w_mV", "cumulative_mV", "log_delta_w"}, {}};
    const DamCell c0 = fresh_cell(c, c.device.v0, g.sweep_age);
    for (const double a : g.amplitudes) {
        DamCell cell = c0;
        const Pulse pulse{a, g.sweep_duration};
        for (std::size_t k = 1; k <= g.sweep_repeats; ++k) {
            const double dw = pulse_response(cell, pulse, Polarity::positive);
            cell = set_pulse(cell, pulse);
            t.add({a, static_cast<std::int64_t>(k), dw, weight_of(cell) - weight_of(c0), std::log(dw)});
        }
    }
    return t;
}

Table pulse_count_table(const ExperimentConfig& c) {
    const SweepGrids& g = c.grids;
    Table t{"pulse_count_sweep", {"n_pulses", "amplitude_V", "pulse_duration_s", "delta_w_mV", "per_pulse_mV"}, {}};
    const DamCell c0 = fresh_cell(c, c.device.v0, g.sweep_age);
    const Pulse pulse{g.count_amplitude, g.count_duration};
    for (const std::uint64_t n : g.pulse_counts) {
        if (n == 0) {
            throw ArgumentError("pulse-count sweep: pulse count must be >= 1");
        }
        const double nn = static_cast<double>(n);
        const DamCell cell = program_train(c0, pulse, n, g.count_frequency, Polarity::positive);
        const double dw = weight_of(cell) - weight_of(decay(c0, nn / g.count_frequency));
        t.add({count_field(n), g.count_amplitude, g.count_duration, dw, dw / nn});
    }
    return t;
}

Table common_mode_table(const ExperimentConfig& c) {
    const SweepGrids& g = c.grids;
    Table t{"common_mode",
            {"t_s", "w_reference_mV", "w_common_mV", "w_single_mV", "dev_common_mV", "dev_single_mV"},
            {}};
    const DamCell c0 = fresh_cell(c, c.device.v0, g.sweep_age);
    const double dur = c.grids.retention_pulse_duration;
    const double amp = precompensated_amplitude(c0, g.common_weight, dur, Polarity::positive);
    const DamCell ref = set_pulse(c0, Pulse{amp, dur});
    const DamCell common = common_mode_step(ref, g.common_step);
    DamCell single = ref;
    single.set_node = step_voltage(single.set_node, single.set_params, g.common_step);
    const auto steps = static_cast<std::size_t>(std::floor(g.common_window / c.grids.regime_step + 1e-9));
    for (std::size_t k = 0; k <= steps; ++k) {
        const double dt = static_cast<double>(k) * c.grids.regime_step;
        const double wr = weight_of(decay(ref, dt));
        const double wc = weight_of(decay(common, dt));
        const double ws = weight_of(decay(single, dt));
        t.add({dt, wr, wc, ws, wc - wr, ws - wr});
    }
    return t;
}

namespace {

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (const double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

Table summary_table(const std::vector<Table>& tables) {
    Table s{"summary", {"metric", "value", "unit"}, {}};
    for (const Table& t : tables) {
        if (t.name == "regimes") {
            const auto regime = t.numbers("regime");
            const auto amp = t.numbers("amplitude_V");
            const auto ret = t.numbers("retention");
            for (std::size_t i = 0; i < regime.size(); ++i) {
                if (i + 1 == regime.size() || regime[i + 1] != regime[i]) {
                    const auto r = static_cast<int>(regime[i]);
                    s.add({fmt::format("regime{}_amplitude", r), amp[i], std::string("V")});
                    s.add({fmt::format("regime{}_retention", r), ret[i], std::string("fraction")});
                }
            }
        } else if (t.name == "pulse_splitting") {
            const auto dw = t.numbers("delta_w_mV");
            const auto [lo, hi] = std::minmax_element(dw.begin(), dw.end());
            s.add({std::string("split_max_spread"), (*hi - *lo) / std::abs(dw.front()), std::string("fraction")});
        } else if (t.name == "amplitude_sweep") {
            const auto idx = t.numbers("pulse_index");
            std::vector<double> a, l;
            const auto amp = t.numbers("amplitude_V");
            const auto logs = t.numbers("log_delta_w");
            for (std::size_t i = 0; i < idx.size(); ++i) {
                if (idx[i] == 1.0) {
                    a.push_back(amp[i]);
                    l.push_back(logs[i]);
                }
            }
            const LineFit f = fit_line(a, l);
            s.add({std::string("amplitude_fit_slope"), f.slope, std::string("1/V")});
            s.add({std::string("amplitude_fit_r_squared"), f.r_squared, std::string("1")});
        } else if (t.name == "common_mode") {
            const double dc = max_abs(t.numbers("dev_common_mV"));
            const double ds = max_abs(t.numbers("dev_single_mV"));
            s.add({std::string("common_mode_max_deviation"), dc, std::string("mV")});
            s.add({std::string("single_ended_max_deviation"), ds, std::string("mV")});
            s.add({std::string("common_mode_rejection"), ds / dc, std::string("1")});
        }
    }
    return s;
}

}  // namespace

ExperimentOutput run_characterize(const ExperimentConfig& c, const std::string& name) {
    using Builder = Table (*)(const ExperimentConfig&);
    const std::vector<std::pair<std::string, Builder>> all{
        {"regimes", regimes_table},
        {"bidirectional", bidirectional_table},
        {"pulse_splitting", pulse_splitting_table},
        {"amplitude_sweep", amplitude_sweep_table},
        {"pulse_count_sweep", pulse_count_table},
        {"common_mode", common_mode_table},
    };
    ExperimentOutput out;
    for (const auto& [key, build] : all) {
        if (name.empty() || name == "all" || name == key) {
            out.tables.push_back(build(c));
        }
    }
    if (out.tables.empty()) {
        throw ArgumentError(fmt::format(
            "unknown characterize experiment '{}' (expected all, regimes, bidirectional, pulse_splitting, "
            "amplitude_sweep, pulse_count_sweep or common_mode)",
            name));
    }
    out.tables.push_back(summary_table(out.tables));
    return out;
}

// ---- energy and retention reports -----------------------------------------

ExperimentOutput run_energy_report(const ExperimentConfig& c) {
    const FnParams p = c.device.params();
    const double k0 = k0_from_initial(p, c.device.v0);
    const auto samples =
        write_energy_trajectory(p, k0, c.grids.energy_offset, c.horizon, c.grids.energy_samples, c.device.c_in);
    Table t{"energy", {"t_s", "t_days", "v_fg_V", "v_train_V", "energy_J", "ratio_to_first"}, {}};
    bool monotone = true;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        monotone = monotone && (i == 0 || s.energy >= samples[i - 1].energy);
        t.add({s.t, s.t / kSecondsPerDay, s.v_fg, s.v_train, s.energy, s.energy / samples.front().energy});
    }
    constexpr double reference_end = 2.5e-12;  // J after 12 days
    const double end_ratio = samples.back().energy / reference_end;
    Table s{"energy_summary", {"metric", "value", "unit"}, {}};
    s.add({std::string("energy_first"), samples.front().energy, std::string("J")});
    s.add({std::string("energy_last"), samples.back().energy, std::string("J")});
    s.add({std::string("horizon"), c.horizon, std::string("s")});
    s.add({std::string("reference_last"), reference_end, std::string("J")});
    s.add({std::string("ratio_last_to_reference"), end_ratio, std::string("1")});
    s.add({std::string("monotone"), std::int64_t{monotone ? 1 : 0}, std::string("bool")});
    s.add({std::string("within_factor_2"), std::int64_t{end_ratio >= 0.5 && end_ratio <= 2.0 ? 1 : 0},
           std::string("bool")});
    ExperimentOutput out;
    out.tables.push_back(std::move(t));
    out.tables.push_back(std::move(s));
    return out;
}

namespace {

// One row of the retention grids: write `weight` mV with a single precompensated
// SET pulse and measure how long it stays above the noise floor.
std::vector<Field> retention_row(const ExperimentConfig& c, const DamCell& cell, double weight) {
    if (weight == 0.0) {
        return {weight, 0.0, 0.0, std::int64_t{0}, std::string("zero")};
    }
    const double dur = c.grids.retention_pulse_duration;
    try {
        const double amp = precompensated_amplitude(cell, weight, dur, Polarity::positive);
        const RetentionResult r = retention_time(set_pulse(cell, Pulse{amp, dur}), c.noise);
        return {weight, amp, r.seconds, std::int64_t{r.saturated ? 1 : 0}, std::string("ok")};
    } catch (const SaturationError&) {
        return {weight, 0.0, 0.0, std::int64_t{0}, std::string("unreachable")};
    }
}

}  // namespace

ExperimentOutput run_retention_report(const ExperimentConfig& c) {
    const SweepGrids& g = c.grids;
    Table bias{"retention_vs_bias",
               {"bias_V", "weight_mV", "amplitude_V", "retention_s", "horizon_capped", "status"},
               {}};
    for (const double v : g.bias_voltages) {
        const DamCell cell = fresh_cell(c, v, 0.0);
        for (const double w : g.update_weights) {
            auto row = retention_row(c, cell, w);
            row.insert(row.begin(), v);
            bias.add(std::move(row));
        }
    }
    Table elapsed{"retention_vs_elapsed",
                  {"init_V", "elapsed_s", "weight_mV", "amplitude_V", "retention_s", "horizon_capped", "status"},
                  {}};
    for (const double v : g.init_voltages) {
        for (const double e : g.elapsed) {
            const DamCell cell = fresh_cell(c, v, e);
            for (const double w : g.update_weights) {
                auto row = retention_row(c, cell, w);
                row.insert(row.begin(), e);
                row.insert(row.begin(), v);
                elapsed.add(std::move(row));
            }
        }
    }
    ExperimentOutput out;
    out.tables.push_back(std::move(bias));
    out.tables.push_back(std::move(elapsed));
    return out;
}

// ---- calibrate ------------------------------------------------------------

ExperimentOutput run_calibrate(const ExperimentConfig& c) {
    const CalibrationTargets targets = targets_for(c);
    const CalibrationResult r = calibrate(targets);
    Table t{"calibration",
            {"regime", "age_s", "set_V", "amplitude_V", "target_amplitude_V", "retention", "target_retention"},
            {}};
    for (std::size_t i = 0; i < r.regimes.size(); ++i) {
        const auto& m = r.regimes[i];
        t.add({static_cast<std::int64_t>(i + 1), m.age, m.set_voltage, m.amplitude, targets.regimes[i].amplitude,
               m.retention, targets.regimes[i].retention});
    }
    Table f{"fit", {"metric", "value", "unit"}, {}};
    f.add({std::string("k1"), r.params.k1, std::string("1/s")});
    f.add({std::string("k2"), r.params.k2, std::string("V")});
    f.add({std::string("barrier_sensitivity"), r.fit.barrier_sensitivity, std::string("1/V")});
    f.add({std::string("log_initial_age"), r.fit.log_initial_age, std::string("log(s)")});
    f.add({std::string("cost"), r.cost, std::string("1")});
    f.add({std::string("iterations"), std::int64_t{r.iterations}, std::string("1")});

    DeviceConfig d = c.device;
    d.k1 = r.params.k1;
    d.k2 = r.params.k2;
    d.c_total = r.params.c_total;
    d.c_couple = r.params.c_couple;
    ExperimentOutput out;
    out.tables.push_back(std::move(t));
    out.tables.push_back(std::move(f));
    out.extra.push_back({"device.json", nlohmann::json{{"device", device_to_json(d)}}.dump(2) + "\n"});
    return out;
}

// ---- train ----------------------------------------------------------------

namespace {

void train_perceptron_seed(const ExperimentConfig& c, std::uint64_t seed, ExperimentOutput& out) {
    const std::string dir = fmt::format("seed_{}/", seed);
    DatasetSpec ds = c.perceptron.dataset;
    ds.seed = seed;
    const SeparableDataset data = make_separable_dataset(ds);

    DamArray array;
    if (!c.resume_state.empty()) {
        std::ifstream in(c.resume_state, std::ios::binary);
        if (!in) {
            throw ParseError("/experiment/resume_state", fmt::format("cannot open '{}'", c.resume_state));
        }
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("/experiment/resume_state", e.what());
        }
        array = DamArray::load_state(doc);
    } else {
        array = DamArray::build(2, c.device.params(), c.device.v0,
                                MismatchSpec{c.perceptron.mismatch_sigma, seed, MismatchDistribution::gaussian});
    }
    TrainerConfig tc = c.perceptron.trainer;
    tc.seed = seed;
    EnergyLedger ledger(c.device.c_in);
    const TrainingTrace trace = train_perceptron(data.points, array, tc, ledger);

    Table points{dir + "dataset", {"point", "x1", "x2", "y"}, {}};
    for (std::size_t i = 0; i < data.points.size(); ++i) {
        const auto& p = data.points[i];
        points.add({static_cast<std::int64_t>(i), p.x[0], p.x[1], static_cast<std::int64_t>(p.y)});
    }
    Table boundary{dir + "boundary",
                   {"w0_mV", "w1_mV", "accuracy", "epochs", "total_energy_J", "ledger_total_J", "truth_slope",
                    "truth_intercept"},
                   {}};
    boundary.add({trace.final_weights[0], trace.final_weights[1], accuracy(data.points, trace.final_weights),
                  static_cast<std::int64_t>(trace.epochs.size()), trace.total_energy, ledger.total(),
                  data.truth.slope, data.truth.intercept});

    std::ostringstream steps, epochs, ledger_csv;
    write_steps_csv(steps, trace);
    write_epochs_csv(epochs, trace);
    ledger.write_csv(ledger_csv);
    out.tables.push_back(std::move(points));
    out.tables.push_back(std::move(boundary));
    out.extra.push_back({dir + "steps.csv", steps.str()});
    out.extra.push_back({dir + "epochs.csv", epochs.str()});
    out.extra.push_back({dir + "energy_ledger.csv", ledger_csv.str()});
    out.extra.push_back({dir + "array_state.json", array.save_state().dump(2) + "\n"});
}

void train_network_seed(const ExperimentConfig& c, std::uint64_t seed, ExperimentOutput& out) {
    const std::string dir = fmt::format("seed_{}/", seed);
    BlobsSpec bs = c.network.blobs;
    bs.seed = seed;
    MlpShape shape = c.network.shape;
    shape.inputs = bs.features;
    shape.outputs = bs.classes;
    NetworkConfig nc = c.network.config;
    nc.seed = seed;
    nc.v0 = c.device.v0;
    const BlobsData data = make_blobs(bs);
    const NetworkExperiment exp = run_network_experiment(shape, data, nc, c.device.params());

    std::ostringstream epochs, summary;
    write_network_epochs_csv(epochs, exp);
    write_network_summary_csv(summary, exp);
    out.extra.push_back({dir + "network_epochs.csv", epochs.str()});
    out.extra.push_back({dir + "network_summary.csv", summary.str()});
    for (const auto& arm : exp.arms) {
        if (arm.array.size() > 0) {
            out.extra.push_back({fmt::format("{}array_state_{}.json", dir, to_string(arm.arm)),
                                 arm.array.save_state().dump(2) + "\n"});
        }
    }
}

}  // namespace

ExperimentOutput run_train(const ExperimentConfig& c, const std::string& name) {
    ExperimentOutput out;
    const std::string which = name.empty() ? "perceptron" : name;
    for (const std::uint64_t seed : c.seeds) {
        if (which == "perceptron") {
            train_perceptron_seed(c, seed, out);
        } else if (which == "network") {
            train_network_seed(c, seed, out);
        } else {
            throw ArgumentError(fmt::format("unknown train experiment '{}' (expected perceptron or network)", which));
        }
    }
    return out;
}

// ---- command runner -------------------------------------------------------

namespace {

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os << content;
    os.close();
    if (!os) {
        throw Error(fmt::format("failed to write {}", path.string()));
    }
}

std::vector<std::string> header_of(const std::string& csv) {
    std::vector<std::string> cols;
    const std::string line = csv.substr(0, csv.find('\n'));
    std::size_t start = 0;
    while (start <= line.size()) {
        const std::size_t end = std::min(line.find(',', start), line.size());
        cols.push_back(line.substr(start, end - start));
        start = end + 1;
    }
    return cols;
}

nlohmann::json sidecar(const std::string& file, const std::string& csv, const RunOptions& o,
                       const LoadedConfig& cfg, const std::string& experiment) {
    const auto rows = static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n'));
    return {
        {"file", file},
        {"command", o.command},
        {"experiment", experiment},
        {"seeds", cfg.config.seeds},
        {"columns", header_of(csv)},
        {"rows", rows == 0 ? 0 : rows - 1},
        {"sha256", sha256_hex(csv)},
        {"config_sha256", cfg.sha256},
        {"config_schema_version", kConfigSchemaVersion},
        {"schema_version", kOutputSchemaVersion},
        {"tool_version", kToolVersion},
    };
}

}  // namespace

RunResult run_command(const RunOptions& o) {
    LoadedConfig cfg = load_config(o.config);
    ExperimentConfig& c = cfg.config;
    if (o.seed) {
        c.seeds = {*o.seed};
    }
    if (o.out) {
        c.output_dir = *o.out;
    }
    if (o.experiment) {
        c.experiment = *o.experiment;
    }
    c.validate();

    ExperimentOutput out;
    std::string experiment = c.experiment;
    if (o.command == "calibrate") {
        out = run_calibrate(c);
    } else if (o.command == "characterize") {
        out = run_characterize(c, experiment);
        experiment = experiment.empty() ? "all" : experiment;
    } else if (o.command == "energy-report") {
        out = run_energy_report(c);
    } else if (o.command == "retention-report") {
        out = run_retention_report(c);
    } else if (o.command == "train") {
        out = run_train(c, experiment);
        experiment = experiment.empty() ? "perceptron" : experiment;
    } else {
        throw ArgumentError(fmt::format("unknown command '{}'", o.command));
    }
    if (experiment.empty()) {
        experiment = o.command;
    }

    const fs::path root(c.output_dir);
    const bool selectable = o.command == "characterize" || o.command == "train";
    const fs::path final_dir = selectable ? root / o.command / experiment : root / o.command;
    const fs::path staging = final_dir.parent_path() / fmt::format(".{}.partial", final_dir.filename().string());
    RunResult result;
    result.directory = final_dir;
    try {
        fs::remove_all(staging);
        fs::create_directories(staging);
        auto emit_csv = [&](const std::string& file, const std::string& csv) {
            write_file(staging / file, csv);
            write_file(staging / (file + ".meta.json"), sidecar(file, csv, o, cfg, experiment).dump(2) + "\n");
            result.files.push_back(file);
            result.files.push_back(file + ".meta.json");
        };
        for (const Table& t : out.tables) {
            emit_csv(t.name + ".csv", t.to_csv());
        }
        for (const Artifact& a : out.extra) {
            if (a.filename.ends_with(".csv")) {
                emit_csv(a.filename, a.content);
            } else {
                write_file(staging / a.filename, a.content);
                result.files.push_back(a.filename);
            }
        }
        fs::remove_all(final_dir);
        fs::rename(staging, final_dir);
    } catch (...) {
        std::error_code ec;
        fs::remove_all(staging, ec);
        throw;
    }
    std::sort(result.files.begin(), result.files.end());
    return result;
}

nlohmann::json error_record(const std::string& command, const std::exception& e) {
    nlohmann::json rec{{"status", "error"}, {"command", command}, {"message", e.what()}};
    if (const auto* pe = dynamic_cast<const ParseError*>(&e)) {
        rec["kind"] = pe->kind();
        rec["path"] = pe->path();
    } else if (const auto* fe = dynamic_cast<const Error*>(&e)) {
        rec["kind"] = fe->kind();
        rec["path"] = nullptr;
    } else if (dynamic_cast<const fs::filesystem_error*>(&e)) {
        rec["kind"] = "io";
        rec["path"] = nullptr;
    } else {
        rec["kind"] = "internal";
        rec["path"] = nullptr;
    }
    return rec;
}

}  // namespace fndam
