#pragma once

// Desk-scale stand-in for the network-training experiment: a two-layer MLP
// trained with SGD + momentum, where every parameter is backed by one DAM
// cell whose decay acts as the weight-decay regularizer.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fndam/dam_array.hpp"
#include "fndam/fn_node.hpp"

namespace fndam {

struct BlobsSpec {
    std::size_t n_train = 800;
    std::size_t n_test = 400;
    std::size_t features = 8;
    std::size_t classes = 4;
    double center_scale = 1.0;  // class centers ~ N(0, center_scale^2) per feature
    double noise = 1.0;         // within-class std
    std::uint64_t seed = 0;
};

struct Dataset {
    std::size_t features = 0;
    std::size_t classes = 0;
    std::vector<double> x;  // row-major, size() * features
    std::vector<int> y;
    std::size_t size() const noexcept { return y.size(); }
};

struct BlobsData {
    Dataset train;
    Dataset test;
};

BlobsData make_blobs(const BlobsSpec& spec);

/// D -> H (tanh) -> K (softmax). Parameters are stored flat:
/// W1 (H x D), b1 (H), W2 (K x H), b2 (K).
struct MlpShape {
    std::size_t inputs = 8;
    std::size_t hidden = 32;
    std::size_t outputs = 4;
    std::size_t param_count() const noexcept { return hidden * inputs + hidden + outputs * hidden + outputs; }
};

std::vector<double> init_mlp(const MlpShape& shape, std::uint64_t seed);

/// Mean cross-entropy over the rows in `batch`; writes its gradient into grad.
double loss_and_gradient(const MlpShape& shape, std::span<const double> theta, const Dataset& data,
                         std::span<const std::size_t> batch, std::span<double> grad);

double mlp_accuracy(const MlpShape& shape, std::span<const double> theta, const Dataset& data);

enum class NetworkArm { standard, fn_dam, fn_dam_mismatch };
std::string to_string(NetworkArm arm);

struct NetworkConfig {
    std::size_t epochs = 10;            // the last one is decay-only
    std::size_t batch_size = 32;
    double learning_rate = 0.05;
    double momentum = 0.9;
    double iteration_time = 1.0;        // s of device time per iteration
    double weight_scale_mv = 0.02;      // mV of cell weight per unit of network weight
    double mismatch_sigma = 0.001;      // used by the mismatch arm
    double v0 = 7.5;
    bool decay_enabled = true;          // false forces every decay factor and drift to 0
    std::size_t max_params = 10000;
    std::uint64_t seed = 0;

    void validate() const;
};

struct NetworkEpoch {
    std::size_t epoch = 0;
    bool decay_only = false;
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    double mean_abs_weight = 0.0;
    double device_time = 0.0;
};

struct NetworkTrace {
    NetworkArm arm = NetworkArm::standard;
    std::vector<NetworkEpoch> epochs;
    std::vector<double> theta;
    double final_test_accuracy = 0.0;
    DamArray array;  // empty for the standard arm
};

/// Train one arm. The standard arm keeps its memory static; the DAM arms run
/// one cell per parameter, apply each cell's decay factor every iteration and
/// add the drift of the cell's own (unprogrammed) weight, which is zero for
/// matched nodes and nonzero once k1/k2 mismatch desynchronizes them.
NetworkTrace train_network_with_dam_decay(const MlpShape& shape, const BlobsData& data,
                                          const NetworkConfig& config, NetworkArm arm,
                                          const FnParams& nominal);

struct NetworkExperiment {
    std::vector<NetworkTrace> arms;  // standard, fn_dam, fn_dam_mismatch
};

NetworkExperiment run_network_experiment(const MlpShape& shape, const BlobsData& data,
                                         const NetworkConfig& config, const FnParams& nominal);

/// Columns: arm,epoch,decay_only,train_loss,train_accuracy,test_accuracy,mean_abs_weight,device_time_s
void write_network_epochs_csv(std::ostream& os, const NetworkExperiment& exp);
/// Columns: arm,final_test_accuracy,delta_vs_standard
void write_network_summary_csv(std::ostream& os, const NetworkExperiment& exp);

}  // namespace fndam
