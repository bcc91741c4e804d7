#include "fndam/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "fndam/errors.hpp"
#include "fndam/kernels.hpp"
#include "fndam/rng.hpp"

namespace fndam {

BlobsData make_blobs(const BlobsSpec& spec) {
    if (spec.features == 0 || spec.classes < 2 || spec.n_train == 0 || spec.n_test == 0) {
        throw ArgumentError("make_blobs: need features >= 1, classes >= 2 and non-empty splits");
    }
    Rng rng(spec.seed);
    std::vector<double> centers(spec.classes * spec.features);
    for (double& c : centers) {
        c = spec.center_scale * rng.gaussian();
    }
    auto fill = [&](std::size_t n) {
        Dataset d;
        d.features = spec.features;
        d.classes = spec.classes;
        d.x.resize(n * spec.features);
        d.y.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(rng.index(spec.classes));
            d.y[i] = static_cast<int>(k);
            for (std::size_t j = 0; j < spec.features; ++j) {
                d.x[i * spec.features + j] = centers[k * spec.features + j] + spec.noise * rng.gaussian();
            }
        }
        return d;
    };
    BlobsData out;
    out.train = fill(spec.n_train);
    out.test = fill(spec.n_test);
    return out;
}

std::vector<double> init_mlp(const MlpShape& shape, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> theta(shape.param_count(), 0.0);
    const double a1 = std::sqrt(6.0 / static_cast<double>(shape.inputs + shape.hidden));
    const double a2 = std::sqrt(6.0 / static_cast<double>(shape.hidden + shape.outputs));
    const std::size_t w1 = shape.hidden * shape.inputs;
    const std::size_t w2 = w1 + shape.hidden;
    for (std::size_t i = 0; i < w1; ++i) {
        theta[i] = rng.uniform(-a1, a1);
    }
    for (std::size_t i = 0; i < shape.outputs * shape.hidden; ++i) {
        theta[w2 + i] = rng.uniform(-a2, a2);
    }
    return theta;
}

namespace {

struct Views {
    const double* w1;
    const double* b1;
    const double* w2;
    const double* b2;
};

Views views(const MlpShape& s, std::span<const double> theta) {
    const double* p = theta.data();
    Views v{};
    v.w1 = p;
    v.b1 = v.w1 + s.hidden * s.inputs;
    v.w2 = v.b1 + s.hidden;
    v.b2 = v.w2 + s.outputs * s.hidden;
    return v;
}

void check_theta(const MlpShape& s, std::span<const double> theta, const Dataset& data) {
    if (theta.size() != s.param_count()) {
        throw ArgumentError(fmt::format("MLP expects {} parameters (got {})", s.param_count(), theta.size()));
    }
    if (data.features != s.inputs || data.classes != s.outputs) {
        throw ArgumentError("dataset shape does not match the MLP");
    }
}

// Hidden activations and logits for one row.
void forward(const MlpShape& s, const Views& v, const double* x, std::vector<double>& h, std::vector<double>& z) {
    for (std::size_t i = 0; i < s.hidden; ++i) {
        double a = v.b1[i];
        for (std::size_t j = 0; j < s.inputs; ++j) {
            a += v.w1[i * s.inputs + j] * x[j];
        }
        h[i] = std::tanh(a);
    }
    for (std::size_t k = 0; k < s.outputs; ++k) {
        double a = v.b2[k];
        for (std::size_t i = 0; i < s.hidden; ++i) {
            a += v.w2[k * s.hidden + i] * h[i];
        }
        z[k] = a;
    }
}

}  // namespace

double loss_and_gradient(const MlpShape& s, std::span<const double> theta, const Dataset& data,
                         std::span<const std::size_t> batch, std::span<double> grad) {
    check_theta(s, theta, data);
    if (grad.size() != theta.size() || batch.empty()) {
        throw ArgumentError("loss_and_gradient: gradient size mismatch or empty batch");
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    const Views v = views(s, theta);
    double* g_w1 = grad.data();
    double* g_b1 = g_w1 + s.hidden * s.inputs;
    double* g_w2 = g_b1 + s.hidden;
    double* g_b2 = g_w2 + s.outputs * s.hidden;

    std::vector<double> h(s.hidden), z(s.outputs), dz(s.outputs), dh(s.hidden);
    const double inv = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    for (const std::size_t r : batch) {
        const double* x = &data.x[r * s.inputs];
        forward(s, v, x, h, z);
        const double zmax = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (std::size_t k = 0; k < s.outputs; ++k) {
            dz[k] = std::exp(z[k] - zmax);
            sum += dz[k];
        }
        const auto label = static_cast<std::size_t>(data.y[r]);
        loss += (std::log(sum) + zmax - z[label]) * inv;
        for (std::size_t k = 0; k < s.outputs; ++k) {
            dz[k] = (dz[k] / sum - (k == label ? 1.0 : 0.0)) * inv;
        }
        std::fill(dh.begin(), dh.end(), 0.0);
        for (std::size_t k = 0; k < s.outputs; ++k) {
            g_b2[k] += dz[k];
            for (std::size_t i = 0; i < s.hidden; ++i) {
                g_w2[k * s.hidden + i] += dz[k] * h[i];
                dh[i] += dz[k] * v.w2[k * s.hidden + i];
            }
        }
        for (std::size_t i = 0; i < s.hidden; ++i) {
            const double da = dh[i] * (1.0 - h[i] * h[i]);
            g_b1[i] += da;
            for (std::size_t j = 0; j < s.inputs; ++j) {
                g_w1[i * s.inputs + j] += da * x[j];
            }
        }
    }
    return loss;
}

double mlp_accuracy(const MlpShape& s, std::span<const double> theta, const Dataset& data) {
    check_theta(s, theta, data);
    const Views v = views(s, theta);
    std::vector<double> h(s.hidden), z(s.outputs);
    std::size_t correct = 0;
    for (std::size_t r = 0; r < data.size(); ++r) {
        forward(s, v, &data.x[r * s.inputs], h, z);
        const auto pred = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
        correct += pred == static_cast<std::size_t>(data.y[r]) ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::string to_string(NetworkArm arm) {
    switch (arm) {
        case NetworkArm::standard: return "standard";
        case NetworkArm::fn_dam: return "fn_dam";
        case NetworkArm::fn_dam_mismatch: return "fn_dam_mismatch";
    }
    return "unknown";
}

void NetworkConfig::validate() const {
    if (epochs < 2) {
        throw ArgumentError("network: need at least one gradient epoch plus the decay-only epoch");
    }
    if (batch_size == 0 || !(learning_rate > 0.0) || momentum < 0.0 || momentum >= 1.0) {
        throw ArgumentError("network: bad batch size, learning rate or momentum");
    }
    if (!(iteration_time > 0.0) || !(weight_scale_mv > 0.0) || !(v0 > 0.0) || !(mismatch_sigma >= 0.0)) {
        throw ArgumentError("network: iteration time, weight scale and v0 must be > 0");
    }
}

NetworkTrace train_network_with_dam_decay(const MlpShape& shape, const BlobsData& data,
                                          const NetworkConfig& config, NetworkArm arm,
                                          const FnParams& nominal) {
    config.validate();
    const std::size_t p = shape.param_count();
    if (p > config.max_params) {
        throw ArgumentError(fmt::format("network has {} parameters, array limit is {}", p, config.max_params));
    }
    const Dataset& train = data.train;

    NetworkTrace trace;
    trace.arm = arm;
    trace.theta = init_mlp(shape, config.seed);
    std::vector<double>& theta = trace.theta;
    std::vector<double> grad(p), velocity(p, 0.0);

    const bool dam = arm != NetworkArm::standard;
    DamArray& array = trace.array;
    std::vector<WeightReading> before, after;
    std::vector<double> factor(p, 0.0), drift(p, 0.0);
    if (dam) {
        const double sigma = arm == NetworkArm::fn_dam_mismatch ? config.mismatch_sigma : 0.0;
        array = DamArray::build(p, nominal, config.v0, MismatchSpec{sigma, config.seed, MismatchDistribution::gaussian});
        before = array.batch_read();
    }

    // Data order comes from its own stream so every arm sees the same batches.
    Rng order_rng(config.seed ^ 0x5eedULL);
    std::vector<std::size_t> order(train.size());
    std::uint64_t iteration = 0;
    const std::size_t n_batches = (train.size() + config.batch_size - 1) / config.batch_size;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const bool decay_only = epoch + 1 == config.epochs;
        std::iota(order.begin(), order.end(), std::size_t{0});
        shuffle(order, order_rng);
        double loss_sum = 0.0;
        for (std::size_t b = 0; b < n_batches; ++b, ++iteration) {
            const std::size_t lo = b * config.batch_size;
            const std::size_t hi = std::min(lo + config.batch_size, order.size());
            const std::span<const std::size_t> batch(order.data() + lo, hi - lo);
            if (!decay_only) {
                loss_sum += loss_and_gradient(shape, theta, train, batch, grad);
                for (std::size_t i = 0; i < p; ++i) {
                    velocity[i] = config.momentum * velocity[i] - config.learning_rate * grad[i];
                    theta[i] += velocity[i];
                }
            }
            if (!dam) {
                continue;
            }
            if (config.decay_enabled) {
                kernels::decay_factors_parallel(array.cells(), iteration, config.iteration_time, factor);
                array.advance(config.iteration_time);
                after = array.batch_read();
                for (std::size_t i = 0; i < p; ++i) {
                    drift[i] = (after[i].weight - before[i].weight) / config.weight_scale_mv;
                }
                before.swap(after);
            }
            kernels::apply_decay_parallel(theta, factor, drift);
        }
        NetworkEpoch e;
        e.epoch = epoch;
        e.decay_only = decay_only;
        e.train_loss = decay_only ? 0.0 : loss_sum / static_cast<double>(n_batches);
        e.train_accuracy = mlp_accuracy(shape, theta, train);
        e.test_accuracy = mlp_accuracy(shape, theta, data.test);
        double abs_sum = 0.0;
        for (const double t : theta) {
            abs_sum += std::abs(t);
        }
        e.mean_abs_weight = abs_sum / static_cast<double>(p);
        e.device_time = static_cast<double>(iteration) * config.iteration_time;
        trace.epochs.push_back(e);
    }
    trace.final_test_accuracy = trace.epochs.back().test_accuracy;
    return trace;
}

NetworkExperiment run_network_experiment(const MlpShape& shape, const BlobsData& data,
                                         const NetworkConfig& config, const FnParams& nominal) {
    NetworkExperiment exp;
    for (const NetworkArm arm : {NetworkArm::standard, NetworkArm::fn_dam, NetworkArm::fn_dam_mismatch}) {
        exp.arms.push_back(train_network_with_dam_decay(shape, data, config, arm, nominal));
    }
    return exp;
}

void write_network_epochs_csv(std::ostream& os, const NetworkExperiment& exp) {
    os << "arm,epoch,decay_only,train_loss,train_accuracy,test_accuracy,mean_abs_weight,device_time_s\n";
    for (const auto& arm : exp.arms) {
        for (const auto& e : arm.epochs) {
            os << fmt::format("{},{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", to_string(arm.arm), e.epoch,
                              e.decay_only ? 1 : 0, e.train_loss, e.train_accuracy, e.test_accuracy,
                              e.mean_abs_weight, e.device_time);
        }
    }
}

void write_network_summary_csv(std::ostream& os, const NetworkExperiment& exp) {
    os << "arm,final_test_accuracy,delta_vs_standard\n";
    const double base = exp.arms.empty() ? 0.0 : exp.arms.front().final_test_accuracy;
    for (const auto& arm : exp.arms) {
        os << fmt::format("{},{:.17g},{:.17g}\n", to_string(arm.arm), arm.final_test_accuracy,
                          arm.final_test_accuracy - base);
    }
}

}  // namespace fndam
