#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fndam/dam_cell.hpp"
#include "fndam/kernels.hpp"

namespace fndam {

enum class MismatchDistribution { gaussian, uniform };

/// Relative parameter spread applied independently to k1 and k2 of every node.
struct MismatchSpec {
    double relative_sigma = 0.001;
    std::uint64_t seed = 0;
    MismatchDistribution distribution = MismatchDistribution::gaussian;

    friend bool operator==(const MismatchSpec&, const MismatchSpec&) = default;
};

/// Relative deviations drawn for one cell, in draw order.
struct MismatchDraw {
    double set_k1 = 0.0;
    double set_k2 = 0.0;
    double reset_k1 = 0.0;
    double reset_k2 = 0.0;

    friend bool operator==(const MismatchDraw&, const MismatchDraw&) = default;
};

struct PulseTarget {
    std::size_t index = 0;
    Polarity polarity = Polarity::positive;
    Pulse pulse;
};

struct TrainTarget {
    std::size_t index = 0;
    Polarity polarity = Polarity::positive;
    Pulse pulse;
    std::size_t n_pulses = 1;
    double frequency = 1000.0;
};

inline constexpr int kArrayStateSchemaVersion = 1;
inline constexpr const char* kArrayStateFormat = "fndam-array-state";

/// Cells sharing one global clock. Every operation validates its arguments
/// before touching any cell, so a throwing call leaves the array unchanged.
class DamArray {
public:
    static DamArray build(std::size_t n, const FnParams& nominal, double v0, const MismatchSpec& mismatch);

    std::size_t size() const noexcept { return cells_.size(); }
    std::span<const DamCell> cells() const noexcept { return cells_; }
    const DamCell& cell(std::size_t i) const { return cells_.at(i); }
    std::span<const MismatchDraw> draws() const noexcept { return draws_; }
    const FnParams& nominal() const noexcept { return nominal_; }
    const MismatchSpec& mismatch() const noexcept { return mismatch_; }
    double v0() const noexcept { return v0_; }
    double global_clock() const noexcept { return global_clock_; }
    std::uint64_t rng_draws() const noexcept { return rng_draws_; }

    std::vector<WeightReading> batch_read(kernels::Exec exec = kernels::Exec::parallel) const;

    /// One pulse per targeted cell; the clock advances by the longest pulse (at
    /// least min_wall) and every other cell, or remainder, tunnels freely.
    void batch_pulse(std::span<const PulseTarget> targets, double min_wall = 0.0);

    /// Same contract as batch_pulse with pulse trains; wall time is n / frequency.
    void batch_train(std::span<const TrainTarget> targets);

    void advance(double dt, kernels::Exec exec = kernels::Exec::parallel);

    nlohmann::json save_state() const;
    static DamArray load_state(const nlohmann::json& doc);

    /// Columns: cell_id,weight_mV,set_V,reset_V
    void write_weights_csv(std::ostream& os) const;

    friend bool operator==(const DamArray&, const DamArray&) = default;

private:
    std::vector<DamCell> cells_;
    std::vector<MismatchDraw> draws_;
    FnParams nominal_;
    MismatchSpec mismatch_;
    double v0_ = 0.0;
    double global_clock_ = 0.0;
    std::uint64_t rng_draws_ = 0;
};

std::string to_string(MismatchDistribution d);
MismatchDistribution mismatch_distribution_from(const std::string& name);

nlohmann::json params_to_json(const FnParams& p);
FnParams params_from_json(const nlohmann::json& j, const std::string& path);

}  // namespace fndam
