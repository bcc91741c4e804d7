#include "fndam/calibration.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "fndam/dam_cell.hpp"
#include "fndam/errors.hpp"

namespace fndam {

RegimeResult measure_regime(const FnParams& params, const CalibrationTargets& targets,
                            const RegimeTarget& regime) {
    DamCell cell = decay(synchronize(params, params, targets.v0), regime.age);
    RegimeResult r;
    r.age = regime.age;
    r.set_voltage = cell.set_node.v_fg;
    r.amplitude = precompensated_amplitude(cell, targets.desync, targets.pulse_duration, Polarity::positive);
    cell = set_pulse(cell, Pulse{r.amplitude, targets.pulse_duration});
    const double w0 = weight_of(cell);
    r.retention = weight_of(decay(cell, targets.window)) / w0;
    return r;
}

FnParams params_from_fit(const FitPoint& p, const CalibrationTargets& targets) {
    FnParams params;
    params.k2 = p.barrier_sensitivity * targets.v0 * targets.v0;
    params.k1 = std::exp(params.k2 / targets.v0 - p.log_initial_age);
    params.c_total = targets.c_total;
    params.c_couple = targets.coupling_ratio * targets.c_total;
    return params;
}

FitPoint fit_from_params(const FnParams& params, double v0) {
    return {params.k2 / (v0 * v0), params.k2 / v0 - std::log(params.k1)};
}

std::vector<double> calibration_residuals(const FnParams& params, const CalibrationTargets& targets) {
    std::vector<double> r;
    std::vector<double> amp;
    for (const auto& regime : targets.regimes) {
        const RegimeResult m = measure_regime(params, targets, regime);
        r.push_back((m.retention - regime.retention) / regime.retention_tolerance);
        amp.push_back(std::log2(m.amplitude / regime.amplitude));
    }
    r.insert(r.end(), amp.begin(), amp.end());
    return r;
}

namespace {

struct ResidualFunctor {
    using Scalar = double;
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

    const CalibrationTargets* targets;

    int inputs() const { return 2; }
    int values() const { return static_cast<int>(2 * targets->regimes.size()); }

    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& fvec) const {
        try {
            const auto r = calibration_residuals(params_from_fit({x[0], x[1]}, *targets), *targets);
            for (int i = 0; i < values(); ++i) {
                fvec[i] = r[static_cast<std::size_t>(i)];
            }
        } catch (const Error&) {
            return -1;  // outside the physical domain; LM backs off
        }
        return 0;
    }
};

}  // namespace

CalibrationResult calibrate(const CalibrationTargets& targets, FitPoint start) {
    ResidualFunctor functor{&targets};
    Eigen::NumericalDiff<ResidualFunctor, Eigen::Central> numdiff(functor, 1e-7);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<ResidualFunctor, Eigen::Central>> lm(numdiff);
    lm.parameters.xtol = 1e-14;
    lm.parameters.ftol = 1e-14;
    lm.parameters.maxfev = 2000;

    Eigen::VectorXd x(2);
    x << start.barrier_sensitivity, start.log_initial_age;
    lm.minimize(x);

    CalibrationResult out;
    out.fit = {x[0], x[1]};
    out.params = params_from_fit(out.fit, targets);
    out.iterations = static_cast<int>(lm.iter);
    double cost = 0.0;
    for (double r : calibration_residuals(out.params, targets)) {
        cost += r * r;
    }
    out.cost = 0.5 * cost;
    for (const auto& regime : targets.regimes) {
        out.regimes.push_back(measure_regime(out.params, targets, regime));
    }
    return out;
}

FnParams default_params() {
    // Fitted by calibrate() with default targets; see tests/test_calibration.cpp.
    FnParams p;
    p.k1 = 1.9235934750073299e+163;
    p.k2 = 2839.1381365285265;
    p.c_total = kDefaultCTotal;
    p.c_couple = kDefaultCouplingRatio * kDefaultCTotal;
    return p;
}

}  // namespace fndam
