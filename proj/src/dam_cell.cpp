#include "fndam/dam_cell.hpp"

#include <cmath>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "fndam/errors.hpp"

namespace fndam {

DamCell synchronize(const FnParams& set_params, const FnParams& reset_params, double v0) {
    set_params.validate();
    reset_params.validate();

    DamCell cell;
    cell.set_params = set_params;
    cell.reset_params = reset_params;
    cell.set_node = make_node(set_params, v0);
    if (reset_params == set_params) {
        cell.reset_node = cell.set_node;
        return cell;
    }

    const double target = log_discharge_rate(set_params, v0);
    auto mismatch = [&](double v) { return log_discharge_rate(reset_params, v) - target; };

    const double hi = reset_params.k2 * (1.0 - 1e-12);
    if (!(mismatch(hi) > 0.0)) {
        throw InitializationError(fmt::format(
            "synchronize: RESET node cannot reach the SET discharge rate below k2 = {} V", reset_params.k2));
    }
    double lo = std::min(v0, hi) * 0.5;
    while (mismatch(lo) >= 0.0) {
        lo *= 0.5;
        if (lo < 1e-12) {
            throw InitializationError("synchronize: no lower bracket for the RESET voltage");
        }
    }
    std::uintmax_t max_iter = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        mismatch, lo, hi, boost::math::tools::eps_tolerance<double>(52), max_iter);
    cell.reset_node = make_node(reset_params, 0.5 * (a + b));
    return cell;
}

double weight_of(const DamCell& cell) {
    return cell.weight_scale * (cell.reset_node.v_fg - cell.set_node.v_fg);
}

WeightReading read_weight(const DamCell& cell) { return {weight_of(cell), cell.clock}; }

WeightReading read_weight(const DamCell& cell, double noise_sigma, Rng& rng) {
    WeightReading r = read_weight(cell);
    if (noise_sigma > 0.0) {
        r.weight += cell.weight_scale * noise_sigma * rng.gaussian();
    }
    return r;
}

DamCell program_pulse(const DamCell& cell, const Pulse& pulse, Polarity polarity) {
    DamCell out = cell;
    if (polarity == Polarity::positive) {
        out.set_node = apply_pulse(cell.set_node, cell.set_params, pulse);
        out.reset_node = evolve(cell.reset_node, cell.reset_params, pulse.duration);
    } else {
        out.set_node = evolve(cell.set_node, cell.set_params, pulse.duration);
        out.reset_node = apply_pulse(cell.reset_node, cell.reset_params, pulse);
    }
    out.clock += pulse.duration;
    return out;
}

DamCell set_pulse(const DamCell& cell, const Pulse& pulse) {
    return program_pulse(cell, pulse, Polarity::positive);
}

DamCell reset_pulse(const DamCell& cell, const Pulse& pulse) {
    return program_pulse(cell, pulse, Polarity::negative);
}

DamCell program_train(const DamCell& cell, const Pulse& pulse, std::size_t n_pulses,
                      double frequency, Polarity polarity) {
    DamCell out = cell;
    const double wall = static_cast<double>(n_pulses) / frequency;
    if (polarity == Polarity::positive) {
        out.set_node = pulse_train(cell.set_node, cell.set_params, pulse, n_pulses, frequency);
        out.reset_node = evolve(cell.reset_node, cell.reset_params, wall);
    } else {
        out.set_node = evolve(cell.set_node, cell.set_params, wall);
        out.reset_node = pulse_train(cell.reset_node, cell.reset_params, pulse, n_pulses, frequency);
    }
    out.clock += wall;
    return out;
}

DamCell decay(const DamCell& cell, double dt) {
    DamCell out = cell;
    out.set_node = evolve(cell.set_node, cell.set_params, dt);
    out.reset_node = evolve(cell.reset_node, cell.reset_params, dt);
    out.clock += dt;
    return out;
}

DamCell common_mode_step(const DamCell& cell, double dv) {
    DamCell out = cell;
    out.set_node = step_voltage(cell.set_node, cell.set_params, dv);
    out.reset_node = step_voltage(cell.reset_node, cell.reset_params, dv);
    return out;
}

double linearized_decay(const FnParams& params, double w_s, double dt) {
    if (!(w_s > 0.0)) {
        throw DomainError(fmt::format("linearized_decay: W_S = {} V", w_s));
    }
    // (k1/k2)(2W + k2) exp(-k2/W) = exp(log k1 - log k2 - k2/W) (2W + k2)
    return std::exp(std::log(params.k1) - std::log(params.k2) - params.k2 / w_s) *
           (2.0 * w_s + params.k2) * dt;
}

double discrete_update(double w_n, double w_s, const FnParams& params, double dt,
                       double dv_train, double weight_scale) {
    if (!(dt >= 0.0)) {
        throw DomainError(fmt::format("discrete_update: negative dt {}", dt));
    }
    const double shrink = linearized_decay(params, w_s, dt);
    if (shrink >= 1.0) {
        throw StepSizeError(fmt::format(
            "discrete_update: decay term {} >= 1, dt = {} s is too large", shrink, dt));
    }
    return (1.0 - shrink) * w_n + weight_scale * params.coupling_ratio() * dv_train;
}

double decay_factor(const FnParams& params, double k0, std::uint64_t n, double dt) {
    if (!(dt > 0.0)) {
        throw DomainError(fmt::format("decay_factor: dt must be > 0 (got {})", dt));
    }
    const double log_k0 = std::log(k0);
    const double elapsed = static_cast<double>(n) * dt;
    // s = k1 n dt + k0, kept as log s
    const double log_s =
        n == 0 ? log_k0 : log_k0 + std::log1p(std::exp(std::log(params.k1) + std::log(elapsed) - log_k0));
    return std::exp(std::log(params.k1) - log_s) * (2.0 / log_s + 1.0) * dt;
}

DecaySchedule decay_schedule(const FnParams& params, double k0, std::size_t n_steps, double dt) {
    DecaySchedule sched;
    sched.dt_step = dt;
    sched.alpha_eta.reserve(n_steps);
    for (std::size_t n = 0; n < n_steps; ++n) {
        sched.alpha_eta.push_back(decay_factor(params, k0, n, dt));
    }
    return sched;
}

double pulse_response(const DamCell& cell, const Pulse& pulse, Polarity polarity) {
    const double pulsed = weight_of(program_pulse(cell, pulse, polarity));
    const double reference = weight_of(decay(cell, pulse.duration));
    return pulsed - reference;
}

double precompensated_amplitude(const DamCell& cell, double target_dw, double duration,
                                Polarity polarity, double amp_max) {
    const double target = std::abs(target_dw);
    if (target == 0.0) {
        return 0.0;
    }
    auto reached = [&](double amplitude) {
        return sign_of(polarity) * pulse_response(cell, Pulse{amplitude, duration}, polarity);
    };
    if (reached(amp_max) < target) {
        throw SaturationError(fmt::format(
            "a {} mV step needs more than {} V at cell age {} s", target, amp_max, cell.clock));
    }
    double lo = 0.0;
    double hi = amp_max;
    for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (reached(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace fndam
