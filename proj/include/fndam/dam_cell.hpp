#pragma once

// Differential SET/RESET dynamic analog memory cell.
//
// The stored weight is weight_scale * (W_R - W_S): pulsing the SET node makes it
// tunnel faster, so it ends below the RESET node and the weight grows. Both
// nodes keep discharging, and because the discharge rate falls with age the
// two trajectories re-converge; that resynchronization is the weight decay.

#include <cstdint>
#include <vector>

#include "fndam/fn_node.hpp"
#include "fndam/rng.hpp"

namespace fndam {

inline constexpr double kDefaultWeightScale = 1000.0;  // mV per V
inline constexpr double kDefaultMaxAmplitude = 32.0;   // V

struct DamCell {
    NodeState set_node;    // W_S
    NodeState reset_node;  // W_R
    FnParams set_params;
    FnParams reset_params;
    double weight_scale = kDefaultWeightScale;
    double clock = 0.0;  // seconds since synchronization

    friend bool operator==(const DamCell&, const DamCell&) = default;
};

struct WeightReading {
    double weight = 0.0;     // mV
    double timestamp = 0.0;  // s

    friend bool operator==(const WeightReading&, const WeightReading&) = default;
};

/// Per-step weight-decay multipliers alpha*eta_n for a fixed step dt.
struct DecaySchedule {
    std::vector<double> alpha_eta;
    double dt_step = 0.0;
};

/// Initialize both nodes so their tunneling rates match. With identical
/// parameters both nodes sit at v0; otherwise the RESET voltage is solved for.
DamCell synchronize(const FnParams& set_params, const FnParams& reset_params, double v0);

/// Noiseless weight in mV.
double weight_of(const DamCell& cell);

WeightReading read_weight(const DamCell& cell);

/// Reading with Gaussian noise of sigma volts on the differential readout.
WeightReading read_weight(const DamCell& cell, double noise_sigma, Rng& rng);

/// Pulse one node (positive: SET, negative: RESET); the other node evolves unpulsed.
DamCell program_pulse(const DamCell& cell, const Pulse& pulse, Polarity polarity);
DamCell set_pulse(const DamCell& cell, const Pulse& pulse);
DamCell reset_pulse(const DamCell& cell, const Pulse& pulse);

/// Pulse train on one node; the cell clock advances by n_pulses / frequency.
DamCell program_train(const DamCell& cell, const Pulse& pulse, std::size_t n_pulses,
                      double frequency, Polarity polarity);

/// Let both nodes tunnel freely for dt seconds.
DamCell decay(const DamCell& cell, double dt);

/// Identical instantaneous perturbation dv on both nodes.
DamCell common_mode_step(const DamCell& cell, double dv);

/// Linearized per-step decay (k1/k2)(2 W_S + k2) exp(-k2/W_S) dt.
double linearized_decay(const FnParams& params, double w_s, double dt);

/// One step of the small-weight update
///   w_{n+1} = (1 - linearized_decay) w_n + weight_scale * C_R * dv_train.
/// Throws StepSizeError when the decay term reaches 1.
double discrete_update(double w_n, double w_s, const FnParams& params, double dt,
                       double dv_train, double weight_scale = kDefaultWeightScale);

/// Weight-decay factor of step n for a node that started on the k0 trajectory:
///   k1 (2 / log(k1 n dt + k0) + 1) / (k1 n dt + k0) * dt
double decay_factor(const FnParams& params, double k0, std::uint64_t n, double dt);

DecaySchedule decay_schedule(const FnParams& params, double k0, std::size_t n_steps, double dt);

/// Net weight change (mV, signed) of one pulse relative to the unpulsed cell.
double pulse_response(const DamCell& cell, const Pulse& pulse, Polarity polarity);

/// Amplitude whose single pulse of `duration` changes the weight by |target_dw|
/// mV in the direction of `polarity`. Throws SaturationError beyond amp_max.
double precompensated_amplitude(const DamCell& cell, double target_dw, double duration,
                                Polarity polarity, double amp_max = kDefaultMaxAmplitude);

}  // namespace fndam
