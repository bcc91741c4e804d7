#include "fndam/fn_node.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "fndam/errors.hpp"

namespace fndam {

namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

// Largest argument for which exp() stays finite.
const double kMaxExpArg = std::log(std::numeric_limits<double>::max());

double quantize_change(const FnParams& params, double v_old, double v_new) {
    if (!params.quantize_charge) {
        return v_new;
    }
    const double step = kElectronCharge / params.c_total;
    return v_old + std::round((v_new - v_old) / step) * step;
}

}  // namespace

void FnParams::validate() const {
    if (!positive_finite(k1) || !positive_finite(k2)) {
        throw DomainError(fmt::format("FnParams: k1 and k2 must be positive (k1={}, k2={})", k1, k2));
    }
    if (!positive_finite(c_total) || !positive_finite(c_couple) || !(c_couple < c_total)) {
        throw DomainError(fmt::format(
            "FnParams: need 0 < c_couple < c_total (c_couple={}, c_total={})", c_couple, c_total));
    }
}

void Pulse::validate() const {
    if (!std::isfinite(amplitude) || amplitude < 0.0) {
        throw ArgumentError(fmt::format("pulse amplitude must be >= 0 (got {})", amplitude));
    }
    if (!positive_finite(duration)) {
        throw ArgumentError(fmt::format("pulse duration must be > 0 (got {})", duration));
    }
}

double k0_from_initial(const FnParams& params, double v0) {
    if (!(v0 > 0.0) || !(v0 < params.k2)) {
        throw DomainError(fmt::format("initial voltage {} V outside (0, k2 = {} V)", v0, params.k2));
    }
    const double exponent = params.k2 / v0;
    if (exponent >= kMaxExpArg) {
        throw DomainError(fmt::format("k0 = exp({}) is not representable", exponent));
    }
    return std::exp(exponent);
}

double voltage_at(const FnParams& params, double k0, double t) {
    if (!(t >= 0.0)) {
        throw DomainError(fmt::format("voltage_at: negative time {}", t));
    }
    const double log_k0 = std::log(k0);
    if (t == 0.0) {
        return params.k2 / log_k0;
    }
    // log(k1 t + k0) = log k0 + log1p(k1 t / k0)
    const double log_sum = log_k0 + std::log1p(std::exp(std::log(params.k1) + std::log(t) - log_k0));
    return params.k2 / log_sum;
}

double log_discharge_rate(const FnParams& params, double v) {
    if (!(v > 0.0)) {
        throw DomainError(fmt::format("discharge rate undefined at v = {} V", v));
    }
    return std::log(params.k1) - std::log(params.k2) + 2.0 * std::log(v) - params.k2 / v;
}

double discharge_rate(const FnParams& params, double v) {
    return std::exp(log_discharge_rate(params, v));
}

double tunneling_current(const FnParams& params, double v) {
    return params.c_total * discharge_rate(params, v);
}

double log_age(const FnParams& params, double v) {
    if (!(v > 0.0)) {
        throw DomainError(fmt::format("node age undefined at v = {} V", v));
    }
    return params.k2 / v - std::log(params.k1);
}

NodeState make_node(const FnParams& params, double v0) {
    return NodeState{v0, k0_from_initial(params, v0)};
}

NodeState evolve(const NodeState& state, const FnParams& params, double dt) {
    if (!(dt >= 0.0)) {
        throw DomainError(fmt::format("evolve: negative dt {}", dt));
    }
    if (dt == 0.0) {
        return state;
    }
    // log(exp(a) + k1 dt) = a + log1p(k1 dt exp(-a)), a = k2 / v
    const double a = params.k2 / state.v_fg;
    const double log_sum = a + std::log1p(std::exp(std::log(params.k1) + std::log(dt) - a));
    NodeState out = state;
    out.v_fg = quantize_change(params, state.v_fg, params.k2 / log_sum);
    return out;
}

NodeState step_voltage(const NodeState& state, const FnParams& params, double dv) {
    NodeState out = state;
    out.v_fg = state.v_fg + dv;
    if (!(out.v_fg > 0.0) || !std::isfinite(out.v_fg)) {
        throw DomainError(fmt::format("voltage step of {} V drives node to {} V", dv, out.v_fg));
    }
    // A raised node sits on a younger trajectory; keep v_fg <= k2 / log(k0).
    const double a = params.k2 / out.v_fg;
    if (a < std::log(out.k0)) {
        out.k0 = std::exp(a);
    }
    return out;
}

NodeState apply_pulse(const NodeState& state, const FnParams& params, const Pulse& pulse,
                      Polarity polarity) {
    pulse.validate();
    const double shift = sign_of(polarity) * params.coupling_ratio() * pulse.amplitude;
    if (shift == 0.0) {
        return evolve(state, params, pulse.duration);
    }
    NodeState s = step_voltage(state, params, shift);
    s = evolve(s, params, pulse.duration);
    s = step_voltage(s, params, -shift);
    return s;
}

NodeState pulse_train(const NodeState& state, const FnParams& params, const Pulse& pulse,
                      std::size_t n_pulses, double frequency, Polarity polarity) {
    if (n_pulses == 0) {
        throw ArgumentError("pulse_train: need at least one pulse");
    }
    if (!positive_finite(frequency)) {
        throw ArgumentError(fmt::format("pulse_train: frequency must be > 0 (got {})", frequency));
    }
    pulse.validate();
    const double period = 1.0 / frequency;
    if (pulse.duration > period * (1.0 + 1e-12)) {
        throw ArgumentError(fmt::format(
            "pulse_train: {} s pulses overlap at {} Hz (period {} s)", pulse.duration, frequency, period));
    }
    const double idle = std::max(0.0, period - pulse.duration);
    NodeState s = state;
    for (std::size_t i = 0; i < n_pulses; ++i) {
        s = apply_pulse(s, params, pulse, polarity);
        s = evolve(s, params, idle);
    }
    return s;
}

}  // namespace fndam
