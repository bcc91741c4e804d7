#include "fndam/energy.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "fndam/errors.hpp"

namespace fndam {

void ExactSum::add(double x) {
    std::size_t used = 0;
    for (double y : partials_) {
        if (std::abs(x) < std::abs(y)) {
            std::swap(x, y);
        }
        const double hi = x + y;
        const double lo = y - (hi - x);
        if (lo != 0.0) {
            partials_[used++] = lo;
        }
        x = hi;
    }
    partials_.resize(used);
    partials_.push_back(x);
}

void ExactSum::merge(const ExactSum& other) {
    for (double p : other.partials_) {
        add(p);
    }
}

double ExactSum::value() const {
    // Round-half-even correction as in Python's math.fsum.
    if (partials_.empty()) {
        return 0.0;
    }
    std::size_t n = partials_.size();
    double hi = partials_[--n];
    double lo = 0.0;
    while (n > 0) {
        const double x = hi;
        const double y = partials_[--n];
        hi = x + y;
        lo = y - (hi - x);
        if (lo != 0.0) {
            break;
        }
    }
    if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) || (lo > 0.0 && partials_[n - 1] > 0.0))) {
        const double y = lo * 2.0;
        const double x = hi + y;
        if (y == x - hi) {
            hi = x;
        }
    }
    return hi;
}

EnergyLedger::EnergyLedger(double c_in) : c_in_(c_in) {
    if (!(c_in > 0.0)) {
        throw DomainError(fmt::format("ledger input capacitance must be > 0 (got {})", c_in));
    }
}

const LedgerEntry& EnergyLedger::record(std::size_t cell_id, double t, const Pulse& pulse,
                                        std::uint64_t n_pulses) {
    LedgerEntry e;
    e.cell_id = cell_id;
    e.t = t;
    e.amplitude = pulse.amplitude;
    e.duration = pulse.duration;
    e.n_pulses = n_pulses;
    e.energy = write_energy(c_in_, pulse.amplitude) * static_cast<double>(n_pulses);
    total_.add(e.energy);
    per_cell_[cell_id].add(e.energy);
    entries_.push_back(e);
    return entries_.back();
}

double EnergyLedger::cell_total(std::size_t cell_id) const {
    const auto it = per_cell_.find(cell_id);
    return it == per_cell_.end() ? 0.0 : it->second.value();
}

double EnergyLedger::sum_over_cells() const {
    ExactSum s;
    for (const auto& [id, partial] : per_cell_) {
        s.merge(partial);
    }
    return s.value();
}

std::vector<std::size_t> EnergyLedger::cells() const {
    std::vector<std::size_t> ids;
    ids.reserve(per_cell_.size());
    for (const auto& kv : per_cell_) {
        ids.push_back(kv.first);
    }
    return ids;
}

void EnergyLedger::write_csv(std::ostream& os) const {
    os << "cell_id,t_s,amplitude_V,duration_s,n_pulses,energy_J\n";
    for (const auto& e : entries_) {
        os << fmt::format("{},{:.17g},{:.17g},{:.17g},{},{:.17g}\n", e.cell_id, e.t, e.amplitude,
                          e.duration, e.n_pulses, e.energy);
    }
}

double v_train_required(double v_target, double v_fg, double c_ratio) {
    if (!(c_ratio > 0.0 && c_ratio < 1.0)) {
        throw DomainError(fmt::format("coupling ratio {} outside (0, 1)", c_ratio));
    }
    return (v_target - v_fg) / c_ratio;
}

double write_energy(double c_in, double v_in) {
    if (!(c_in > 0.0)) {
        throw DomainError(fmt::format("input capacitance must be > 0 (got {})", c_in));
    }
    return 0.5 * c_in * v_in * v_in;
}

std::vector<EnergySample> write_energy_trajectory(const FnParams& params, double k0,
                                                  double v_target_offset, double horizon,
                                                  std::size_t n_samples, double c_in) {
    if (!(horizon > 0.0)) {
        throw DomainError(fmt::format("energy trajectory horizon must be > 0 (got {})", horizon));
    }
    if (n_samples < 2) {
        throw ArgumentError("energy trajectory needs at least two samples");
    }
    const double v_target = voltage_at(params, k0, 0.0) + v_target_offset;
    std::vector<EnergySample> out;
    out.reserve(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        EnergySample s;
        s.t = horizon * static_cast<double>(i) / static_cast<double>(n_samples - 1);
        s.v_fg = voltage_at(params, k0, s.t);
        s.v_train = v_train_required(v_target, s.v_fg, params.coupling_ratio());
        s.energy = write_energy(c_in, s.v_train);
        out.push_back(s);
    }
    return out;
}

double noise_floor(const NoiseModel& model, double t) {
    if (!(t >= 0.0)) {
        throw DomainError(fmt::format("noise_floor: negative time {}", t));
    }
    return model.sigma0 + model.sigma_coeff * std::sqrt(t);
}

RetentionResult retention_time(const DamCell& cell, const NoiseModel& model, double max_horizon) {
    const double scale = cell.weight_scale;
    auto margin = [&](double t) {
        return std::abs(weight_of(decay(cell, t))) - scale * noise_floor(model, t);
    };
    if (margin(0.0) <= 0.0) {
        return {0.0, false};
    }
    if (margin(max_horizon) > 0.0) {
        return {max_horizon, true};
    }
    double lo = 0.0;
    double hi = 1.0;
    while (hi < max_horizon && margin(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
    }
    hi = std::min(hi, max_horizon);
    while (hi - lo > std::max(1.0, 1e-3 * hi)) {
        const double mid = 0.5 * (lo + hi);
        (margin(mid) > 0.0 ? lo : hi) = mid;
    }
    return {hi, false};
}

double read_noise(const ReadModel& model, double p_read, double bandwidth) {
    if (!(p_read > 0.0) || !(bandwidth > 0.0)) {
        throw DomainError("read_noise: read power and bandwidth must be > 0");
    }
    return std::sqrt(4.0 * model.u_t * model.u_t * model.q * model.v_dd * bandwidth /
                     (model.kappa * p_read));
}

double min_read_power(const ReadModel& model, double noise_floor, double bandwidth) {
    if (!(noise_floor > 0.0) || !(bandwidth > 0.0)) {
        throw DomainError("min_read_power: noise floor and bandwidth must be > 0");
    }
    return 4.0 * model.u_t * model.u_t * model.q * model.v_dd * bandwidth /
           (model.kappa * noise_floor * noise_floor);
}

double programming_ratio(const FnParams& params, double v_target, double v_fg) {
    if (!(v_target > 0.0) || !(v_fg > 0.0)) {
        throw DomainError("programming_ratio: voltages must be > 0");
    }
    const double r = v_target / v_fg;
    return r * r * std::exp(params.k2 / v_fg - params.k2 / v_target);
}

}  // namespace fndam
