#include "fndam/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "fndam/calibration.hpp"
#include "fndam/errors.hpp"
#include "fndam/util.hpp"

namespace fndam {

FnParams DeviceConfig::params() const {
    FnParams p;
    p.k1 = k1;
    p.k2 = k2;
    p.c_total = c_total;
    p.c_couple = c_couple;
    return p;
}

DeviceConfig default_device() {
    const FnParams p = default_params();
    return {p.k1, p.k2, p.c_total, p.c_couple, kDefaultCin, kDefaultV0};
}

nlohmann::json device_to_json(const DeviceConfig& d) {
    return {{"k1", d.k1}, {"k2", d.k2}, {"c_total", d.c_total},
            {"c_couple", d.c_couple}, {"c_in", d.c_in}, {"v0", d.v0}};
}

namespace {

void positive(const JsonReader& r, const std::string& key, double& out) {
    if (!r.has(key)) {
        return;
    }
    const double v = r.number(key);
    if (!(v > 0.0)) {
        throw ParseError(r.path() + "/" + key, fmt::format("must be > 0 (got {})", v));
    }
    out = v;
}

void non_negative(const JsonReader& r, const std::string& key, double& out) {
    if (!r.has(key)) {
        return;
    }
    const double v = r.number(key);
    if (v < 0.0) {
        throw ParseError(r.path() + "/" + key, fmt::format("must be >= 0 (got {})", v));
    }
    out = v;
}

template <typename T>
void count(const JsonReader& r, const std::string& key, T& out) {
    if (r.has(key)) {
        out = static_cast<T>(r.unsigned_integer(key));
    }
}

void numbers(const JsonReader& r, const std::string& key, std::vector<double>& out) {
    if (!r.has(key)) {
        return;
    }
    const JsonReader a = r.at(key);
    out.clear();
    for (std::size_t i = 0; i < a.array_size(); ++i) {
        out.push_back(a.at(i).number());
    }
    if (out.empty()) {
        throw ParseError(a.path(), "grid must not be empty");
    }
}

void counts(const JsonReader& r, const std::string& key, std::vector<std::uint64_t>& out) {
    if (!r.has(key)) {
        return;
    }
    const JsonReader a = r.at(key);
    out.clear();
    for (std::size_t i = 0; i < a.array_size(); ++i) {
        out.push_back(a.at(i).unsigned_integer());
    }
    if (out.empty()) {
        throw ParseError(a.path(), "list must not be empty");
    }
}

void parse_grids(const JsonReader& r, SweepGrids& g) {
    r.expect_keys({"regime_window", "regime_step", "bidir_pulses", "bidir_amplitude", "bidir_duration",
                   "bidir_interval", "splits", "split_amplitude", "split_on_time", "amplitudes",
                   "sweep_duration", "sweep_repeats", "pulse_counts", "count_amplitude", "count_duration",
                   "count_frequency", "common_weight", "common_step", "common_window", "sweep_age",
                   "bias_voltages", "update_weights", "retention_pulse_duration", "elapsed", "init_voltages",
                   "energy_samples", "energy_offset"});
    positive(r, "regime_window", g.regime_window);
    positive(r, "regime_step", g.regime_step);
    count(r, "bidir_pulses", g.bidir_pulses);
    positive(r, "bidir_amplitude", g.bidir_amplitude);
    positive(r, "bidir_duration", g.bidir_duration);
    positive(r, "bidir_interval", g.bidir_interval);
    counts(r, "splits", g.splits);
    positive(r, "split_amplitude", g.split_amplitude);
    positive(r, "split_on_time", g.split_on_time);
    numbers(r, "amplitudes", g.amplitudes);
    positive(r, "sweep_duration", g.sweep_duration);
    count(r, "sweep_repeats", g.sweep_repeats);
    counts(r, "pulse_counts", g.pulse_counts);
    positive(r, "count_amplitude", g.count_amplitude);
    positive(r, "count_duration", g.count_duration);
    positive(r, "count_frequency", g.count_frequency);
    positive(r, "common_weight", g.common_weight);
    positive(r, "common_step", g.common_step);
    positive(r, "common_window", g.common_window);
    non_negative(r, "sweep_age", g.sweep_age);
    numbers(r, "bias_voltages", g.bias_voltages);
    numbers(r, "update_weights", g.update_weights);
    positive(r, "retention_pulse_duration", g.retention_pulse_duration);
    numbers(r, "elapsed", g.elapsed);
    numbers(r, "init_voltages", g.init_voltages);
    count(r, "energy_samples", g.energy_samples);
    non_negative(r, "energy_offset", g.energy_offset);
}

void parse_perceptron(const JsonReader& r, PerceptronConfig& p) {
    r.expect_keys({"n_points", "margin", "spread", "max_slope", "max_intercept", "learning_rate", "unit_step",
                   "pulse_frequency", "pulse_duration", "sample_interval", "epochs", "max_pulses", "amp_max",
                   "mismatch_sigma"});
    count(r, "n_points", p.dataset.n);
    positive(r, "margin", p.dataset.margin);
    non_negative(r, "spread", p.dataset.spread);
    non_negative(r, "max_slope", p.dataset.max_slope);
    non_negative(r, "max_intercept", p.dataset.max_intercept);
    positive(r, "learning_rate", p.trainer.learning_rate);
    positive(r, "unit_step", p.trainer.unit_step);
    positive(r, "pulse_frequency", p.trainer.pulse_frequency);
    positive(r, "pulse_duration", p.trainer.pulse_duration);
    positive(r, "sample_interval", p.trainer.sample_interval);
    count(r, "epochs", p.trainer.epochs);
    count(r, "max_pulses", p.trainer.max_pulses);
    positive(r, "amp_max", p.trainer.amp_max);
    non_negative(r, "mismatch_sigma", p.mismatch_sigma);
}

void parse_network(const JsonReader& r, NetworkSection& n) {
    r.expect_keys({"n_train", "n_test", "features", "classes", "center_scale", "noise", "hidden", "epochs",
                   "batch_size", "learning_rate", "momentum", "iteration_time", "weight_scale_mv",
                   "mismatch_sigma", "decay_enabled", "max_params"});
    count(r, "n_train", n.blobs.n_train);
    count(r, "n_test", n.blobs.n_test);
    count(r, "features", n.blobs.features);
    count(r, "classes", n.blobs.classes);
    positive(r, "center_scale", n.blobs.center_scale);
    positive(r, "noise", n.blobs.noise);
    count(r, "hidden", n.shape.hidden);
    count(r, "epochs", n.config.epochs);
    count(r, "batch_size", n.config.batch_size);
    positive(r, "learning_rate", n.config.learning_rate);
    non_negative(r, "momentum", n.config.momentum);
    positive(r, "iteration_time", n.config.iteration_time);
    positive(r, "weight_scale_mv", n.config.weight_scale_mv);
    non_negative(r, "mismatch_sigma", n.config.mismatch_sigma);
    if (r.has("decay_enabled")) {
        n.config.decay_enabled = r.boolean("decay_enabled");
    }
    count(r, "max_params", n.config.max_params);
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& doc) {
    const JsonReader root(doc, "");
    if (!doc.is_object()) {
        throw ParseError("/", "config must be a JSON object");
    }
    root.expect_keys({"device", "noise", "read", "experiment", "output_dir"});
    ExperimentConfig c;
    if (root.has("device")) {
        const JsonReader d = root.at("device");
        d.expect_keys({"k1", "k2", "c_total", "c_couple", "c_in", "v0"});
        positive(d, "k1", c.device.k1);
        positive(d, "k2", c.device.k2);
        positive(d, "c_total", c.device.c_total);
        positive(d, "c_couple", c.device.c_couple);
        positive(d, "c_in", c.device.c_in);
        positive(d, "v0", c.device.v0);
    }
    if (root.has("noise")) {
        const JsonReader n = root.at("noise");
        n.expect_keys({"sigma0", "sigma_coeff"});
        positive(n, "sigma0", c.noise.sigma0);
        positive(n, "sigma_coeff", c.noise.sigma_coeff);
    }
    if (root.has("read")) {
        const JsonReader r = root.at("read");
        r.expect_keys({"u_t", "kappa", "v_dd"});
        positive(r, "u_t", c.read.u_t);
        positive(r, "kappa", c.read.kappa);
        positive(r, "v_dd", c.read.v_dd);
    }
    if (root.has("experiment")) {
        const JsonReader e = root.at("experiment");
        e.expect_keys({"name", "horizon", "seeds", "grids", "perceptron", "network", "resume_state"});
        if (e.has("name")) {
            c.experiment = e.string("name");
        }
        positive(e, "horizon", c.horizon);
        counts(e, "seeds", c.seeds);
        if (e.has("grids")) {
            parse_grids(e.at("grids"), c.grids);
        }
        if (e.has("perceptron")) {
            parse_perceptron(e.at("perceptron"), c.perceptron);
        }
        if (e.has("network")) {
            parse_network(e.at("network"), c.network);
        }
        if (e.has("resume_state")) {
            c.resume_state = e.string("resume_state");
        }
    }
    if (root.has("output_dir")) {
        c.output_dir = root.string("output_dir");
    }
    c.validate();
    return c;
}

void ExperimentConfig::validate() const {
    try {
        device.params().validate();
    } catch (const Error& e) {
        throw ParseError("/device", e.what());
    }
    if (device.v0 >= device.k2) {
        throw ParseError("/device/v0", "v0 must be below k2");
    }
    try {
        perceptron.trainer.validate();
    } catch (const Error& e) {
        throw ParseError("/experiment/perceptron", e.what());
    }
    try {
        network.config.validate();
    } catch (const Error& e) {
        throw ParseError("/experiment/network", e.what());
    }
    if (network.shape.hidden == 0) {
        throw ParseError("/experiment/network/hidden", "must be >= 1");
    }
    if (grids.energy_samples < 2) {
        throw ParseError("/experiment/grids/energy_samples", "need at least two samples");
    }
    if (output_dir.empty()) {
        throw ParseError("/output_dir", "must not be empty");
    }
}

LoadedConfig load_config(const std::filesystem::path& path) {
    LoadedConfig out;
    out.path = path;
    std::string text = "{}";
    if (!path.empty()) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw ParseError(path.string(), "cannot open config file");
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("/", fmt::format("invalid JSON: {}", e.what()));
    }
    out.config = parse_config(doc);
    out.sha256 = sha256_hex(text);
    return out;
}

}  // namespace fndam
