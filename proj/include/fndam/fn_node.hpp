#pragma once

// Single Fowler-Nordheim tunneling floating-gate node.
//
// Without input the node follows V(t) = k2 / log(k1 t + k0) and discharges at
// dV/dt = -(k1/k2) V^2 exp(-k2/V). All operations are pure functions on small
// value types; the closed form is re-anchored at the current voltage so no
// absolute time needs to be carried.

#include <cstddef>

namespace fndam {

inline constexpr double kElectronCharge = 1.602176634e-19;  // C

struct FnParams {
    double k1 = 0.0;        // rate constant (1/s)
    double k2 = 0.0;        // barrier constant (V)
    double c_total = 0.0;   // total floating-gate capacitance C_T (F)
    double c_couple = 0.0;  // control-gate coupling capacitance C_C (F)
    // Round every voltage change to whole electrons (q / C_T). Off by default.
    bool quantize_charge = false;

    double coupling_ratio() const noexcept { return c_couple / c_total; }

    /// Throws DomainError unless k1, k2, C_T > 0 and 0 < C_C < C_T.
    void validate() const;

    friend bool operator==(const FnParams&, const FnParams&) = default;
};

struct NodeState {
    double v_fg = 0.0;  // floating-gate voltage (V)
    double k0 = 1.0;    // initial-condition constant of the trajectory

    friend bool operator==(const NodeState&, const NodeState&) = default;
};

/// Rectangular control-gate pulse. Amplitude is unipolar (>= 0).
struct Pulse {
    double amplitude = 0.0;  // V
    double duration = 0.0;   // s

    void validate() const;
};

enum class Polarity : int { positive = 1, negative = -1 };

constexpr double sign_of(Polarity p) noexcept { return static_cast<double>(static_cast<int>(p)); }

/// k0 = exp(k2 / v0), so that voltage_at(t = 0) == v0. Requires 0 < v0 < k2.
double k0_from_initial(const FnParams& params, double v0);

/// V(t) = k2 / log(k1 t + k0), evaluated in log space.
double voltage_at(const FnParams& params, double k0, double t);

/// Magnitude of dV/dt at voltage v: (k1/k2) v^2 exp(-k2/v).
double discharge_rate(const FnParams& params, double v);

/// log of discharge_rate; finite where the rate itself underflows.
double log_discharge_rate(const FnParams& params, double v);

/// I_FN = C_T (k1/k2) v^2 exp(-k2/v). Positive; it lowers v_fg.
double tunneling_current(const FnParams& params, double v);

/// Effective trajectory age exp(k2/v)/k1 of a node sitting at v, as its log.
double log_age(const FnParams& params, double v);

NodeState make_node(const FnParams& params, double v0);

/// Advance the node by dt seconds along the closed-form trajectory.
NodeState evolve(const NodeState& state, const FnParams& params, double dt);

/// Shift the node instantly by dv (capacitive step). Throws if v_fg leaves (0, inf).
NodeState step_voltage(const NodeState& state, const FnParams& params, double dv);

/// Rectangular pulse through the coupling capacitor: raise by polarity * C_R * A,
/// tunnel for the pulse duration, then drop back by the same amount.
NodeState apply_pulse(const NodeState& state, const FnParams& params, const Pulse& pulse,
                      Polarity polarity = Polarity::positive);

/// n pulses whose leading edges are 1/frequency apart; ends after n full periods.
NodeState pulse_train(const NodeState& state, const FnParams& params, const Pulse& pulse,
                      std::size_t n_pulses, double frequency,
                      Polarity polarity = Polarity::positive);

}  // namespace fndam
