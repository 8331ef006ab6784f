#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "fer/errors.hpp"
#include "fer/features.hpp"

namespace fer {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct DenseLayer {
    Matrix weight;  // out x in
    Vector bias;    // out
};

struct BatchNormLayer {
    Vector gamma;
    Vector beta;
    Vector running_mean;
    Vector running_var;
};

// The network stack: Dense -> BatchNorm -> LeakyReLU -> Dropout, twice,
// then Dense -> Softmax. Hidden width defaults to 1024.
struct MlpModel {
    int input_dim = 0;
    int hidden_dim = 0;
    int n_classes = 0;
    double bn_momentum = 0.99;
    double bn_epsilon = 1e-5;
    double dropout_rate = 0.3;
    double leaky_slope = 0.01;
    std::vector<std::string> labels;  // one per class
    std::string feature_format;       // e.g. "fer-features v1 dims=32"

    DenseLayer dense1, dense2, dense3;
    BatchNormLayer bn1, bn2;
};

enum class Mode { train, infer };

struct TrainConfig {
    int epochs = 300;
    int batch_size = 32;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;
    bool shuffle = true;
};

struct Prediction {
    int class_index = 0;
    std::string label;
    std::vector<double> probabilities;
};

// Gradients in the same shapes as the trainable parameters.
struct Gradients {
    Matrix dW1;
    Vector db1, dgamma1, dbeta1;
    Matrix dW2;
    Vector db2, dgamma2, dbeta2;
    Matrix dW3;
    Vector db3;
};

struct LossAndGrad {
    double loss = 0.0;
    Matrix probabilities;  // train-mode softmax outputs for the batch
    Gradients grads;
};

struct EpochStats {
    double loss = 0.0;      // mean cross-entropy over the epoch
    double accuracy = 0.0;  // percent, from the train-mode batch outputs
};

// Named view over one trainable tensor's storage.
struct ParamView {
    const char* name;
    double* data;
    std::size_t size;
};

// He-uniform dense weights (bound sqrt(6/fan_in)), zero biases, identity
// batch-norm (gamma 1, beta 0, running mean 0, running var 1).
// Deterministic for a given seed. Class labels default to "class<i>".
MlpModel init_model(int input_dim, int n_classes, std::uint64_t seed, int hidden_dim = 1024);

// Trainable tensors in serialization order (running stats excluded).
std::vector<ParamView> parameter_views(MlpModel& model);
std::vector<ParamView> gradient_views(Gradients& grads);
std::size_t trainable_parameter_count(const MlpModel& model);

// Softmax probabilities for a batch (rows = samples). Train mode uses batch
// statistics in the batch-norm layers, updates their running statistics and
// applies inverted dropout seeded by dropout_seed; infer mode uses running
// statistics and no dropout.
Matrix forward(MlpModel& model, const Matrix& batch, Mode mode, std::uint64_t dropout_seed = 0);

// Pre-softmax logits under the same semantics as forward().
Matrix forward_logits(MlpModel& model, const Matrix& batch, Mode mode,
                      std::uint64_t dropout_seed = 0);

// Mean categorical cross-entropy and its gradients via backpropagation,
// using train-mode forward semantics (batch statistics, dropout masks from
// dropout_seed). Updates BN running statistics like any train-mode forward.
LossAndGrad loss_and_grad(MlpModel& model, const Matrix& batch, const std::vector<int>& labels,
                          std::uint64_t dropout_seed);

// Train-mode loss without touching the model; the finite-difference oracle
// hook.
double loss_value(const MlpModel& model, const Matrix& batch, const std::vector<int>& labels,
                  std::uint64_t dropout_seed);

// Adam over shuffled mini-batches. Mutates model in place and returns the
// per-epoch history. Deterministic for a given cfg.seed.
std::vector<EpochStats> train(MlpModel& model, const Matrix& features,
                              const std::vector<int>& labels, const TrainConfig& cfg);

// Infer-mode forward on one feature vector; argmax with lowest-index
// tie-break.
Prediction predict(const MlpModel& model, const FeatureVector& fv);
Prediction predict_row(const MlpModel& model, const Eigen::RowVectorXd& row);

// Versioned container "fer-model v1": text header with an explicit shape
// table, then little-endian float64 blobs. Round-trips bit-exactly.
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace fer
