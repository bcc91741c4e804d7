#pragma once

// Write-energy bookkeeping and the analytic side models: training voltage,
// retention against the readout noise floor, read noise, programming ratio.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include "fndam/dam_cell.hpp"
#include "fndam/fn_node.hpp"

namespace fndam {

inline constexpr double kSecondsPerDay = 86400.0;
inline constexpr double kDefaultRetentionHorizon = 10.0 * 365.25 * kSecondsPerDay;

/// Error-free floating-point accumulator (Shewchuk partials). value() is the
/// correctly rounded sum, independent of the order terms were added in.
class ExactSum {
public:
    void add(double x);
    void merge(const ExactSum& other);
    double value() const;

private:
    std::vector<double> partials_;
};

struct LedgerEntry {
    std::size_t cell_id = 0;
    double t = 0.0;          // s
    double amplitude = 0.0;  // V
    double duration = 0.0;   // s, per pulse
    std::uint64_t n_pulses = 0;
    double energy = 0.0;     // J
};

/// Append-only record of write events. Energy of an entry is
/// 1/2 C_in A^2 per pulse times the pulse count.
class EnergyLedger {
public:
    explicit EnergyLedger(double c_in = 1e-12);

    const LedgerEntry& record(std::size_t cell_id, double t, const Pulse& pulse, std::uint64_t n_pulses);

    double c_in() const noexcept { return c_in_; }
    const std::vector<LedgerEntry>& entries() const noexcept { return entries_; }
    double total() const { return total_.value(); }
    double cell_total(std::size_t cell_id) const;
    /// Sum of the per-cell totals; equals total() exactly.
    double sum_over_cells() const;
    std::vector<std::size_t> cells() const;

    /// Columns: cell_id,t_s,amplitude_V,duration_s,n_pulses,energy_J
    void write_csv(std::ostream& os) const;

private:
    double c_in_;
    std::vector<LedgerEntry> entries_;
    ExactSum total_;
    std::map<std::size_t, ExactSum> per_cell_;
};

struct NoiseModel {
    double sigma0 = 100e-6;      // readout floor (V)
    double sigma_coeff = 1.4e-6; // thermal desynchronization (V / sqrt(s))
};

struct ReadModel {
    double u_t = 0.026;  // thermal voltage (V)
    double kappa = 0.7;
    double v_dd = 5.0;   // V
    double q = kElectronCharge;
};

/// Control-gate amplitude that moves v_fg to v_target: (v_target - v_fg) / C_R.
double v_train_required(double v_target, double v_fg, double c_ratio);

/// 1/2 C_in V^2.
double write_energy(double c_in, double v_in);

struct EnergySample {
    double t = 0.0;
    double v_fg = 0.0;
    double v_train = 0.0;
    double energy = 0.0;
};

/// Energy to lift the decaying gate to the fixed target v_fg(0) + offset,
/// sampled at n_samples evenly spaced instants on [0, horizon].
std::vector<EnergySample> write_energy_trajectory(const FnParams& params, double k0,
                                                  double v_target_offset, double horizon,
                                                  std::size_t n_samples, double c_in);

/// sigma0 + sigma_coeff sqrt(t), volts.
double noise_floor(const NoiseModel& model, double t);

struct RetentionResult {
    double seconds = 0.0;
    bool saturated = false;  // never crossed the floor within the horizon
};

/// First time the decaying |weight| meets the growing noise floor, located on
/// the exact two-node trajectory to max(1 s, 0.1 %).
RetentionResult retention_time(const DamCell& cell, const NoiseModel& model,
                               double max_horizon = kDefaultRetentionHorizon);

/// sqrt(4 U_T^2 q V_DD df / (kappa P_read)), volts rms.
double read_noise(const ReadModel& model, double p_read, double bandwidth);

/// P_read at which read_noise equals the given floor.
double min_read_power(const ReadModel& model, double noise_floor, double bandwidth);

/// I_FN(v_target) / I_FN(v_fg) = (v_target/v_fg)^2 exp(k2/v_fg - k2/v_target).
double programming_ratio(const FnParams& params, double v_target, double v_fg);

}  // namespace fndam
