#pragma once

// Device calibration. k1 and k2 are fitted so that a cell initialized at v0
// reproduces three operating regimes: at each regime age a single pulse of a
// target amplitude desynchronizes the cell by the target weight, and a target
// fraction of that weight survives a fixed observation window.

#include <array>
#include <vector>

#include "fndam/fn_node.hpp"

namespace fndam {

inline constexpr double kDefaultV0 = 7.5;           // V
inline constexpr double kDefaultCTotal = 1e-12;     // F
inline constexpr double kDefaultCouplingRatio = 0.1;
inline constexpr double kDefaultCin = 1e-12;        // F, energy-bearing input capacitance

struct RegimeTarget {
    double age = 0.0;              // s after initialization
    double amplitude = 0.0;        // V expected to produce `desync`
    double retention = 0.0;        // fraction retained after the window
    double retention_tolerance = 0.0;
};

struct CalibrationTargets {
    double v0 = kDefaultV0;
    double c_total = kDefaultCTotal;
    double coupling_ratio = kDefaultCouplingRatio;
    double pulse_duration = 0.5;  // s
    double desync = 1.0;          // mV
    double window = 40.0;         // s
    double amplitude_tolerance = 2.0;  // accepted ratio either way
    std::array<RegimeTarget, 3> regimes{{
        {0.0, 0.1, 0.30, 0.10},
        {90.0, 0.5, 0.70, 0.10},
        {540.0, 1.0, 0.95, 0.05},
    }};
};

struct RegimeResult {
    double age = 0.0;
    double set_voltage = 0.0;  // V at the regime age
    double amplitude = 0.0;    // V needed for the target desync
    double retention = 0.0;    // fraction after the window
};

/// Run one regime experiment on a nominal cell.
RegimeResult measure_regime(const FnParams& params, const CalibrationTargets& targets,
                            const RegimeTarget& regime);

/// Dimensionless fit coordinates: k2 / v0^2 and log of the initial trajectory
/// age k0 / k1 in seconds.
struct FitPoint {
    double barrier_sensitivity = 0.0;
    double log_initial_age = 0.0;
};

FnParams params_from_fit(const FitPoint& p, const CalibrationTargets& targets);
FitPoint fit_from_params(const FnParams& params, double v0);

/// Residuals scaled by their tolerances: (retention - target) / tol for each
/// regime, then log2(amplitude / target) for each regime.
std::vector<double> calibration_residuals(const FnParams& params, const CalibrationTargets& targets);

struct CalibrationResult {
    FnParams params;
    FitPoint fit;
    double cost = 0.0;  // half sum of squared residuals
    int iterations = 0;
    std::vector<RegimeResult> regimes;
};

CalibrationResult calibrate(const CalibrationTargets& targets = {}, FitPoint start = {50.0, 2.6});

/// The shipped device: output of calibrate() with default targets, frozen.
FnParams default_params();

}  // namespace fndam
