#pragma once

// Experiment configuration file (JSON). Every block is optional and falls back
// to the shipped calibration; unknown keys anywhere are rejected.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fndam/energy.hpp"
#include "fndam/fn_node.hpp"
#include "fndam/network.hpp"
#include "fndam/trainer.hpp"

namespace fndam {

inline constexpr int kConfigSchemaVersion = 1;

struct DeviceConfig {
    double k1 = 0.0;
    double k2 = 0.0;
    double c_total = 0.0;  // F
    double c_couple = 0.0; // F
    double c_in = 0.0;     // F
    double v0 = 0.0;       // V

    FnParams params() const;
};

DeviceConfig default_device();

struct SweepGrids {
    // regimes: weight trace after the calibrated pulse at each regime age
    double regime_window = 40.0;
    double regime_step = 1.0;
    // bidirectional: SET pulses followed by RESET pulses
    std::size_t bidir_pulses = 5;
    double bidir_amplitude = 1.5;
    double bidir_duration = 0.1;
    double bidir_interval = 1.0;
    // pulse splitting: fixed total on-time inside a window at 50 % duty
    std::vector<std::uint64_t> splits{1, 2, 4, 8};
    double split_amplitude = 3.0;
    double split_on_time = 0.1;
    // amplitude sweep: repeated pulses of one amplitude
    std::vector<double> amplitudes{4.1, 4.2, 4.3, 4.4, 4.5};
    double sweep_duration = 1e-4;
    std::size_t sweep_repeats = 5;
    // pulse-count sweep
    std::vector<std::uint64_t> pulse_counts{1, 2, 5, 10, 20, 50, 100};
    double count_amplitude = 2.0;
    double count_duration = 1e-3;
    double count_frequency = 500.0;
    // common-mode disturbance
    double common_weight = 2.0;  // mV
    double common_step = 0.1;    // V
    double common_window = 60.0;
    // shared age (s after initialization) for the sweeps above
    double sweep_age = 540.0;
    // retention report
    std::vector<double> bias_voltages{6.0, 6.25, 6.5, 6.75, 7.0, 7.25, 7.5};
    std::vector<double> update_weights{0.0, 0.5, 1.0, 2.0, 5.0};  // mV written by one precompensated pulse
    double retention_pulse_duration = 0.5;
    std::vector<double> elapsed{0.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6};
    std::vector<double> init_voltages{7.5, 6.0};
    // energy report
    std::size_t energy_samples = 1201;
    double energy_offset = 0.01;  // V above the initial gate voltage
};

struct PerceptronConfig {
    DatasetSpec dataset;
    TrainerConfig trainer;
    double mismatch_sigma = 0.0;
};

struct NetworkSection {
    BlobsSpec blobs;
    MlpShape shape;
    NetworkConfig config;
};

struct ExperimentConfig {
    DeviceConfig device = default_device();
    NoiseModel noise;
    ReadModel read;
    std::string experiment;        // empty: the command's default
    double horizon = 12.0 * kSecondsPerDay;
    std::vector<std::uint64_t> seeds{0};
    SweepGrids grids;
    PerceptronConfig perceptron;
    NetworkSection network;
    std::string resume_state;      // array state to continue training from
    std::string output_dir = "out";

    void validate() const;
};

ExperimentConfig parse_config(const nlohmann::json& doc);

struct LoadedConfig {
    ExperimentConfig config;
    std::string sha256;  // of the file bytes
    std::filesystem::path path;
};

/// Read and validate a config file. A missing path yields the defaults
/// (hash of the empty document "{}").
LoadedConfig load_config(const std::filesystem::path& path);

/// The device block as written by `calibrate`.
nlohmann::json device_to_json(const DeviceConfig& d);

}  // namespace fndam
