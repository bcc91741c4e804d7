#pragma once

// Experiment runners behind the command-line tool. Each experiment produces
// named tables; run_command writes them as CSV with a metadata sidecar into
// <out>/<command>/, staging everything first so a failed run leaves nothing.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "fndam/config.hpp"

namespace fndam {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kOutputSchemaVersion = 1;

using Field = std::variant<double, std::int64_t, std::string>;

struct Table {
    std::string name;  // file stem
    std::vector<std::string> columns;
    std::vector<std::vector<Field>> rows;

    void add(std::vector<Field> row);
    std::size_t column_index(const std::string& column) const;
    std::vector<double> numbers(const std::string& column) const;
    std::string to_csv() const;
};

/// RFC 4180 quoting for fields containing separators, quotes or line breaks.
std::string csv_quote(const std::string& s);

struct Artifact {
    std::string filename;
    std::string content;
};

struct ExperimentOutput {
    std::vector<Table> tables;
    std::vector<Artifact> extra;  // non-CSV files (JSON state, fitted device block)
};

// characterize
Table regimes_table(const ExperimentConfig& c);
Table bidirectional_table(const ExperimentConfig& c);
Table pulse_splitting_table(const ExperimentConfig& c);
Table amplitude_sweep_table(const ExperimentConfig& c);
Table pulse_count_table(const ExperimentConfig& c);
Table common_mode_table(const ExperimentConfig& c);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

ExperimentOutput run_characterize(const ExperimentConfig& c, const std::string& name);
ExperimentOutput run_energy_report(const ExperimentConfig& c);
ExperimentOutput run_retention_report(const ExperimentConfig& c);
ExperimentOutput run_calibrate(const ExperimentConfig& c);
ExperimentOutput run_train(const ExperimentConfig& c, const std::string& name);

struct RunOptions {
    std::string command;
    std::filesystem::path config;  // empty: defaults
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> experiment;
};

struct RunResult {
    std::filesystem::path directory;
    std::vector<std::string> files;
};

RunResult run_command(const RunOptions& options);

/// Machine-readable failure record printed by the CLI.
nlohmann::json error_record(const std::string& command, const std::exception& e);

}  // namespace fndam
