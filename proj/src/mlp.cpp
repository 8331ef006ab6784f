#include "fer/mlp.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "fer/rng.hpp"

namespace fer {

namespace {

using RowVector = Eigen::RowVectorXd;
using json = nlohmann::json;

void validate_hyper(int input_dim, int n_classes, int hidden_dim) {
    if (input_dim < 1) throw ShapeMismatch("input_dim must be >= 1");
    if (n_classes < 2) throw ShapeMismatch("n_classes must be >= 2");
    if (hidden_dim < 1) throw ShapeMismatch("hidden_dim must be >= 1");
}

void fill_he_uniform(Matrix& w, std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(w.cols()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
            w(r, c) = bound * (2.0 * uniform01(rng) - 1.0);
        }
    }
}

Matrix leaky_relu(const Matrix& x, double slope) {
    return (x.array() > 0.0).select(x, slope * x);
}

Matrix leaky_relu_backward(const Matrix& x, const Matrix& dy, double slope) {
    return (x.array() > 0.0).select(dy, slope * dy);
}

// Inverted dropout: zero with probability rate, scale survivors by
// 1/(1-rate). Elements are drawn row-major so the mask depends only on the
// seed and the batch shape.
Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, std::mt19937_64& rng) {
    Matrix mask(rows, cols);
    const double keep_scale = 1.0 / (1.0 - rate);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            mask(r, c) = uniform01(rng) < rate ? 0.0 : keep_scale;
        }
    }
    return mask;
}

struct BnCache {
    RowVector mean;
    RowVector var;   // population (divisor B)
    RowVector istd;  // 1/sqrt(var + eps)
    Matrix centered;
    Matrix xhat;
};

Matrix bn_forward_train(const BatchNormLayer& bn, const Matrix& x, double eps, BnCache& cache) {
    cache.mean = x.colwise().mean();
    cache.centered = x.rowwise() - cache.mean;
    cache.var = cache.centered.array().square().colwise().mean();
    cache.istd = (cache.var.array() + eps).rsqrt();
    cache.xhat = cache.centered.array().rowwise() * cache.istd.array();
    Matrix y = cache.xhat.array().rowwise() * bn.gamma.transpose().array();
    y.rowwise() += bn.beta.transpose();
    return y;
}

Matrix bn_forward_infer(const BatchNormLayer& bn, const Matrix& x, double eps) {
    const RowVector scale =
        bn.gamma.transpose().array() * (bn.running_var.transpose().array() + eps).rsqrt();
    const RowVector shift =
        bn.beta.transpose().array() - bn.running_mean.transpose().array() * scale.array();
    Matrix y = x.array().rowwise() * scale.array();
    y.rowwise() += shift;
    return y;
}

// Full batch-norm backward, including the gradient paths through the batch
// mean and variance.
Matrix bn_backward(const BatchNormLayer& bn, const BnCache& cache, const Matrix& dy,
                   Vector& dgamma, Vector& dbeta) {
    const double inv_b = 1.0 / static_cast<double>(dy.rows());

    dgamma = (dy.array() * cache.xhat.array()).colwise().sum();
    dbeta = dy.colwise().sum();

    const Matrix dxhat = dy.array().rowwise() * bn.gamma.transpose().array();
    const RowVector dvar = (dxhat.array() * cache.centered.array()).colwise().sum() *
                           (-0.5) * cache.istd.array().cube();
    const RowVector dmean =
        (dxhat.colwise().sum().array() * -cache.istd.array()) +
        dvar.array() * (-2.0 * inv_b) * cache.centered.colwise().sum().array();

    Matrix dx = dxhat.array().rowwise() * cache.istd.array();
    dx += (2.0 * inv_b) * (cache.centered.array().rowwise() * dvar.array()).matrix();
    dx.rowwise() += inv_b * dmean;
    return dx;
}

Matrix softmax_rows(const Matrix& logits) {
    const Vector rowmax = logits.rowwise().maxCoeff();
    Matrix p = (logits.colwise() - rowmax).array().exp();
    const Vector sums = p.rowwise().sum();
    p.array().colwise() /= sums.array();
    return p;
}

double mean_cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
    const Vector rowmax = logits.rowwise().maxCoeff();
    const Vector lse =
        rowmax.array() + (logits.colwise() - rowmax).array().exp().rowwise().sum().log();
    double total = 0.0;
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        total += lse(r) - logits(r, labels[static_cast<std::size_t>(r)]);
    }
    return total / static_cast<double>(logits.rows());
}

struct Trace {
    Matrix z1, n1, a1, d1, mask1;
    Matrix z2, n2, a2, d2, mask2;
    Matrix logits, probs;
    BnCache bn1, bn2;
};

struct BnUpdates {
    RowVector mean1, var1, mean2, var2;
};

void check_batch(const MlpModel& m, const Matrix& x, Mode mode) {
    if (x.cols() != m.input_dim) {
        throw ShapeMismatch("batch has " + std::to_string(x.cols()) + " columns, model expects " +
                            std::to_string(m.input_dim));
    }
    if (x.rows() < 1) throw ShapeMismatch("empty batch");
    if (mode == Mode::train && x.rows() < 2) {
        throw BatchTooSmall("train-mode forward needs >= 2 rows for batch statistics");
    }
}

// The one forward path. Train mode reports the batch statistics through
// `updates`; the caller decides whether to fold them into the running
// statistics (so this stays const and usable for finite differences).
Matrix run_forward(const MlpModel& m, const Matrix& x, Mode mode, std::uint64_t dropout_seed,
                   Trace& t, BnUpdates* updates) {
    check_batch(m, x, mode);

    t.z1 = (x * m.dense1.weight.transpose()).rowwise() + m.dense1.bias.transpose();
    if (mode == Mode::train) {
        t.n1 = bn_forward_train(m.bn1, t.z1, m.bn_epsilon, t.bn1);
    } else {
        t.n1 = bn_forward_infer(m.bn1, t.z1, m.bn_epsilon);
    }
    t.a1 = leaky_relu(t.n1, m.leaky_slope);

    const bool drop = mode == Mode::train && m.dropout_rate > 0.0;
    std::mt19937_64 drop_rng(mix_seed(dropout_seed, 0xd0));
    if (drop) {
        t.mask1 = dropout_mask(t.a1.rows(), t.a1.cols(), m.dropout_rate, drop_rng);
        t.d1 = t.a1.array() * t.mask1.array();
    } else {
        t.d1 = t.a1;
    }

    t.z2 = (t.d1 * m.dense2.weight.transpose()).rowwise() + m.dense2.bias.transpose();
    if (mode == Mode::train) {
        t.n2 = bn_forward_train(m.bn2, t.z2, m.bn_epsilon, t.bn2);
    } else {
        t.n2 = bn_forward_infer(m.bn2, t.z2, m.bn_epsilon);
    }
    t.a2 = leaky_relu(t.n2, m.leaky_slope);
    if (drop) {
        t.mask2 = dropout_mask(t.a2.rows(), t.a2.cols(), m.dropout_rate, drop_rng);
        t.d2 = t.a2.array() * t.mask2.array();
    } else {
        t.d2 = t.a2;
    }

    t.logits = (t.d2 * m.dense3.weight.transpose()).rowwise() + m.dense3.bias.transpose();
    t.probs = softmax_rows(t.logits);

    if (mode == Mode::train && updates != nullptr) {
        updates->mean1 = t.bn1.mean;
        updates->var1 = t.bn1.var;
        updates->mean2 = t.bn2.mean;
        updates->var2 = t.bn2.var;
    }
    return t.probs;
}

void apply_running_updates(MlpModel& m, const BnUpdates& u) {
    const double mom = m.bn_momentum;
    m.bn1.running_mean = mom * m.bn1.running_mean + (1.0 - mom) * u.mean1.transpose();
    m.bn1.running_var = mom * m.bn1.running_var + (1.0 - mom) * u.var1.transpose();
    m.bn2.running_mean = mom * m.bn2.running_mean + (1.0 - mom) * u.mean2.transpose();
    m.bn2.running_var = mom * m.bn2.running_var + (1.0 - mom) * u.var2.transpose();
}

void check_labels(const Matrix& batch, const std::vector<int>& labels, int n_classes) {
    if (static_cast<Eigen::Index>(labels.size()) != batch.rows()) {
        throw ShapeMismatch("label count does not match batch rows");
    }
    for (int label : labels) {
        if (label < 0 || label >= n_classes) {
            throw LabelOutOfRange("label " + std::to_string(label) + " outside [0, " +
                                  std::to_string(n_classes) + ")");
        }
    }
}

}  // namespace

MlpModel init_model(int input_dim, int n_classes, std::uint64_t seed, int hidden_dim) {
    validate_hyper(input_dim, n_classes, hidden_dim);

    MlpModel m;
    m.input_dim = input_dim;
    m.hidden_dim = hidden_dim;
    m.n_classes = n_classes;
    m.feature_format = "fer-features v1 dims=" + std::to_string(input_dim);
    m.labels.reserve(static_cast<std::size_t>(n_classes));
    for (int i = 0; i < n_classes; ++i) m.labels.push_back("class" + std::to_string(i));

    std::mt19937_64 rng(seed);
    m.dense1.weight.resize(hidden_dim, input_dim);
    fill_he_uniform(m.dense1.weight, rng);
    m.dense1.bias = Vector::Zero(hidden_dim);
    m.dense2.weight.resize(hidden_dim, hidden_dim);
    fill_he_uniform(m.dense2.weight, rng);
    m.dense2.bias = Vector::Zero(hidden_dim);
    m.dense3.weight.resize(n_classes, hidden_dim);
    fill_he_uniform(m.dense3.weight, rng);
    m.dense3.bias = Vector::Zero(n_classes);

    for (BatchNormLayer* bn : {&m.bn1, &m.bn2}) {
        bn->gamma = Vector::Ones(hidden_dim);
        bn->beta = Vector::Zero(hidden_dim);
        bn->running_mean = Vector::Zero(hidden_dim);
        bn->running_var = Vector::Ones(hidden_dim);
    }
    return m;
}

std::vector<ParamView> parameter_views(MlpModel& m) {
    return {
        {"dense1.weight", m.dense1.weight.data(), static_cast<std::size_t>(m.dense1.weight.size())},
        {"dense1.bias", m.dense1.bias.data(), static_cast<std::size_t>(m.dense1.bias.size())},
        {"bn1.gamma", m.bn1.gamma.data(), static_cast<std::size_t>(m.bn1.gamma.size())},
        {"bn1.beta", m.bn1.beta.data(), static_cast<std::size_t>(m.bn1.beta.size())},
        {"dense2.weight", m.dense2.weight.data(), static_cast<std::size_t>(m.dense2.weight.size())},
        {"dense2.bias", m.dense2.bias.data(), static_cast<std::size_t>(m.dense2.bias.size())},
        {"bn2.gamma", m.bn2.gamma.data(), static_cast<std::size_t>(m.bn2.gamma.size())},
        {"bn2.beta", m.bn2.beta.data(), static_cast<std::size_t>(m.bn2.beta.size())},
        {"dense3.weight", m.dense3.weight.data(), static_cast<std::size_t>(m.dense3.weight.size())},
        {"dense3.bias", m.dense3.bias.data(), static_cast<std::size_t>(m.dense3.bias.size())},
    };
}

std::vector<ParamView> gradient_views(Gradients& g) {
    return {
        {"dense1.weight", g.dW1.data(), static_cast<std::size_t>(g.dW1.size())},
        {"dense1.bias", g.db1.data(), static_cast<std::size_t>(g.db1.size())},
        {"bn1.gamma", g.dgamma1.data(), static_cast<std::size_t>(g.dgamma1.size())},
        {"bn1.beta", g.dbeta1.data(), static_cast<std::size_t>(g.dbeta1.size())},
        {"dense2.weight", g.dW2.data(), static_cast<std::size_t>(g.dW2.size())},
        {"dense2.bias", g.db2.data(), static_cast<std::size_t>(g.db2.size())},
        {"bn2.gamma", g.dgamma2.data(), static_cast<std::size_t>(g.dgamma2.size())},
        {"bn2.beta", g.dbeta2.data(), static_cast<std::size_t>(g.dbeta2.size())},
        {"dense3.weight", g.dW3.data(), static_cast<std::size_t>(g.dW3.size())},
        {"dense3.bias", g.db3.data(), static_cast<std::size_t>(g.db3.size())},
    };
}

std::size_t trainable_parameter_count(const MlpModel& m) {
    std::size_t total = 0;
    for (const ParamView& v : parameter_views(const_cast<MlpModel&>(m))) total += v.size;
    return total;
}

Matrix forward(MlpModel& model, const Matrix& batch, Mode mode, std::uint64_t dropout_seed) {
    Trace t;
    BnUpdates u;
    const Matrix probs =
        run_forward(model, batch, mode, dropout_seed, t, mode == Mode::train ? &u : nullptr);
    if (mode == Mode::train) apply_running_updates(model, u);
    return probs;
}

Matrix forward_logits(MlpModel& model, const Matrix& batch, Mode mode,
                      std::uint64_t dropout_seed) {
    Trace t;
    BnUpdates u;
    run_forward(model, batch, mode, dropout_seed, t, mode == Mode::train ? &u : nullptr);
    if (mode == Mode::train) apply_running_updates(model, u);
    return t.logits;
}

LossAndGrad loss_and_grad(MlpModel& model, const Matrix& batch, const std::vector<int>& labels,
                          std::uint64_t dropout_seed) {
    check_labels(batch, labels, model.n_classes);

    Trace t;
    BnUpdates u;
    run_forward(model, batch, Mode::train, dropout_seed, t, &u);
    apply_running_updates(model, u);

    LossAndGrad out;
    out.loss = mean_cross_entropy(t.logits, labels);
    out.probabilities = t.probs;

    const double inv_b = 1.0 / static_cast<double>(batch.rows());
    const bool drop = model.dropout_rate > 0.0;

    // Fused softmax + cross-entropy gradient.
    Matrix dlogits = t.probs;
    for (Eigen::Index r = 0; r < dlogits.rows(); ++r) {
        dlogits(r, labels[static_cast<std::size_t>(r)]) -= 1.0;
    }
    dlogits *= inv_b;

    Gradients& g = out.grads;
    g.dW3 = dlogits.transpose() * t.d2;
    g.db3 = dlogits.colwise().sum();
    Matrix dd2 = dlogits * model.dense3.weight;

    Matrix da2 = drop ? Matrix(dd2.array() * t.mask2.array()) : std::move(dd2);
    Matrix dn2 = leaky_relu_backward(t.n2, da2, model.leaky_slope);
    Matrix dz2 = bn_backward(model.bn2, t.bn2, dn2, g.dgamma2, g.dbeta2);

    g.dW2 = dz2.transpose() * t.d1;
    g.db2 = dz2.colwise().sum();
    Matrix dd1 = dz2 * model.dense2.weight;

    Matrix da1 = drop ? Matrix(dd1.array() * t.mask1.array()) : std::move(dd1);
    Matrix dn1 = leaky_relu_backward(t.n1, da1, model.leaky_slope);
    Matrix dz1 = bn_backward(model.bn1, t.bn1, dn1, g.dgamma1, g.dbeta1);

    g.dW1 = dz1.transpose() * batch;
    g.db1 = dz1.colwise().sum();
    return out;
}

double loss_value(const MlpModel& model, const Matrix& batch, const std::vector<int>& labels,
                  std::uint64_t dropout_seed) {
    check_labels(batch, labels, model.n_classes);
    Trace t;
    run_forward(model, batch, Mode::train, dropout_seed, t, nullptr);
    return mean_cross_entropy(t.logits, labels);
}

std::vector<EpochStats> train(MlpModel& model, const Matrix& features,
                              const std::vector<int>& labels, const TrainConfig& cfg) {
    if (features.rows() == 0) throw EmptyDataset("no training samples");
    check_labels(features, labels, model.n_classes);
    if (cfg.epochs < 1) throw Error("epochs must be >= 1");
    if (cfg.batch_size < 1) throw Error("batch size must be >= 1");
    if (!(cfg.learning_rate >= 0.0)) throw Error("learning rate must be >= 0");

    const Eigen::Index n = features.rows();
    auto params = parameter_views(model);
    std::size_t total = 0;
    for (const ParamView& v : params) total += v.size;
    std::vector<double> adam_m(total, 0.0), adam_v(total, 0.0);
    long step = 0;

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, 1));

    std::vector<EpochStats> history;
    history.reserve(static_cast<std::size_t>(cfg.epochs));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.shuffle) shuffle_indices(order, shuffle_rng);

        // Batch boundaries; a trailing 1-sample batch is merged into its
        // predecessor because train-mode BN needs >= 2 rows.
        std::vector<std::pair<Eigen::Index, Eigen::Index>> batches;  // [begin, end)
        for (Eigen::Index begin = 0; begin < n; begin += cfg.batch_size) {
            batches.emplace_back(begin, std::min<Eigen::Index>(begin + cfg.batch_size, n));
        }
        if (batches.size() > 1 && batches.back().second - batches.back().first == 1) {
            batches[batches.size() - 2].second = n;
            batches.pop_back();
        }

        double loss_sum = 0.0;
        long correct = 0;
        for (const auto& [begin, end] : batches) {
            const Eigen::Index rows = end - begin;
            Matrix xb(rows, features.cols());
            std::vector<int> yb(static_cast<std::size_t>(rows));
            for (Eigen::Index r = 0; r < rows; ++r) {
                const Eigen::Index src = order[static_cast<std::size_t>(begin + r)];
                xb.row(r) = features.row(src);
                yb[static_cast<std::size_t>(r)] = labels[static_cast<std::size_t>(src)];
            }

            const std::uint64_t step_seed = mix_seed(cfg.seed, 0xd20 + static_cast<std::uint64_t>(step));
            LossAndGrad lg = loss_and_grad(model, xb, yb, step_seed);
            loss_sum += lg.loss * static_cast<double>(rows);
            for (Eigen::Index r = 0; r < rows; ++r) {
                Eigen::Index arg = 0;
                lg.probabilities.row(r).maxCoeff(&arg);
                if (static_cast<int>(arg) == yb[static_cast<std::size_t>(r)]) ++correct;
            }

            ++step;
            const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
            auto gviews = gradient_views(lg.grads);
            std::size_t off = 0;
            for (std::size_t k = 0; k < params.size(); ++k) {
                double* p = params[k].data;
                const double* gr = gviews[k].data;
                for (std::size_t i = 0; i < params[k].size; ++i) {
                    double& mi = adam_m[off + i];
                    double& vi = adam_v[off + i];
                    mi = cfg.adam_beta1 * mi + (1.0 - cfg.adam_beta1) * gr[i];
                    vi = cfg.adam_beta2 * vi + (1.0 - cfg.adam_beta2) * gr[i] * gr[i];
                    p[i] -= cfg.learning_rate * (mi / bc1) / (std::sqrt(vi / bc2) + cfg.adam_epsilon);
                }
                off += params[k].size;
            }
        }
        history.push_back({loss_sum / static_cast<double>(n),
                           100.0 * static_cast<double>(correct) / static_cast<double>(n)});
    }
    return history;
}

Prediction predict_row(const MlpModel& model, const Eigen::RowVectorXd& row) {
    if (row.cols() != model.input_dim) {
        throw ShapeMismatch("feature vector has " + std::to_string(row.cols()) +
                            " values, model expects " + std::to_string(model.input_dim));
    }
    Trace t;
    run_forward(model, row, Mode::infer, 0, t, nullptr);

    Prediction pred;
    pred.probabilities.resize(static_cast<std::size_t>(model.n_classes));
    int best = 0;
    for (int c = 0; c < model.n_classes; ++c) {
        pred.probabilities[static_cast<std::size_t>(c)] = t.probs(0, c);
        if (t.probs(0, c) > t.probs(0, best)) best = c;
    }
    pred.class_index = best;
    pred.label = model.labels[static_cast<std::size_t>(best)];
    return pred;
}

Prediction predict(const MlpModel& model, const FeatureVector& fv) {
    Eigen::RowVectorXd row(kFeatureCount);
    for (int i = 0; i < kFeatureCount; ++i) row(i) = fv.values[static_cast<std::size_t>(i)];
    return predict_row(model, row);
}

// ---------------------------------------------------------------------------
// Serialization: "fer-model v1"
//
//   line 1  magic "fer-model v1"
//   line 2  JSON header: hyperparameters, labels, feature-format tag and the
//           shape table (row-major blob order)
//   then    raw little-endian float64 data, one blob after another
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kModelMagic = "fer-model v1";

struct BlobRef {
    std::string name;
    const Matrix* matrix = nullptr;
    const Vector* vector = nullptr;
};

std::vector<BlobRef> blob_refs(const MlpModel& m) {
    return {
        {"dense1.weight", &m.dense1.weight, nullptr},
        {"dense1.bias", nullptr, &m.dense1.bias},
        {"bn1.gamma", nullptr, &m.bn1.gamma},
        {"bn1.beta", nullptr, &m.bn1.beta},
        {"bn1.running_mean", nullptr, &m.bn1.running_mean},
        {"bn1.running_var", nullptr, &m.bn1.running_var},
        {"dense2.weight", &m.dense2.weight, nullptr},
        {"dense2.bias", nullptr, &m.dense2.bias},
        {"bn2.gamma", nullptr, &m.bn2.gamma},
        {"bn2.beta", nullptr, &m.bn2.beta},
        {"bn2.running_mean", nullptr, &m.bn2.running_mean},
        {"bn2.running_var", nullptr, &m.bn2.running_var},
        {"dense3.weight", &m.dense3.weight, nullptr},
        {"dense3.bias", nullptr, &m.dense3.bias},
    };
}

void put_f64_le(std::string& buf, double v) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double get_f64_le(const char* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    }
    return std::bit_cast<double>(bits);
}

}  // namespace

void save_model(const MlpModel& m, const std::string& path) {
    json header;
    header["format"] = kModelMagic;
    header["input_dim"] = m.input_dim;
    header["hidden_dim"] = m.hidden_dim;
    header["n_classes"] = m.n_classes;
    header["labels"] = m.labels;
    header["feature_format"] = m.feature_format;
    header["bn_momentum"] = m.bn_momentum;
    header["bn_epsilon"] = m.bn_epsilon;
    header["dropout_rate"] = m.dropout_rate;
    header["leaky_slope"] = m.leaky_slope;

    json blobs = json::array();
    std::string data;
    for (const BlobRef& b : blob_refs(m)) {
        json entry;
        entry["name"] = b.name;
        if (b.matrix != nullptr) {
            entry["rows"] = b.matrix->rows();
            entry["cols"] = b.matrix->cols();
            for (Eigen::Index r = 0; r < b.matrix->rows(); ++r) {
                for (Eigen::Index c = 0; c < b.matrix->cols(); ++c) {
                    put_f64_le(data, (*b.matrix)(r, c));
                }
            }
        } else {
            entry["rows"] = 1;
            entry["cols"] = b.vector->size();
            for (Eigen::Index i = 0; i < b.vector->size(); ++i) put_f64_le(data, (*b.vector)(i));
        }
        blobs.push_back(entry);
    }
    header["blobs"] = blobs;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << kModelMagic << "\n" << header.dump() << "\n" << data;
    if (!out) throw IoError("failed writing " + path);
}

MlpModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);

    std::string magic;
    if (!std::getline(in, magic)) throw CorruptModel(path + ": empty file");
    if (magic != kModelMagic) {
        throw FormatVersionMismatch(path + ": expected '" + std::string(kModelMagic) + "', got '" +
                                    magic + "'");
    }

    std::string header_line;
    if (!std::getline(in, header_line)) throw CorruptModel(path + ": missing header");

    json header;
    try {
        header = json::parse(header_line);
    } catch (const json::exception& e) {
        throw CorruptModel(path + ": bad header: " + e.what());
    }

    MlpModel m;
    try {
        if (header.at("format").get<std::string>() != kModelMagic) {
            throw FormatVersionMismatch(path + ": header format mismatch");
        }
        m.input_dim = header.at("input_dim").get<int>();
        m.hidden_dim = header.at("hidden_dim").get<int>();
        m.n_classes = header.at("n_classes").get<int>();
        m.labels = header.at("labels").get<std::vector<std::string>>();
        m.feature_format = header.at("feature_format").get<std::string>();
        m.bn_momentum = header.at("bn_momentum").get<double>();
        m.bn_epsilon = header.at("bn_epsilon").get<double>();
        m.dropout_rate = header.at("dropout_rate").get<double>();
        m.leaky_slope = header.at("leaky_slope").get<double>();
    } catch (const json::exception& e) {
        throw CorruptModel(path + ": incomplete header: " + e.what());
    }

    if (m.input_dim < 1 || m.hidden_dim < 1 || m.n_classes < 2) {
        throw CorruptModel(path + ": invalid layer dimensions");
    }
    if (static_cast<int>(m.labels.size()) != m.n_classes) {
        throw CorruptModel(path + ": label list does not match n_classes");
    }

    // Expected shape chain input -> hidden -> hidden -> classes.
    const auto expect =
        std::vector<std::pair<std::string, std::pair<Eigen::Index, Eigen::Index>>>{
            {"dense1.weight", {m.hidden_dim, m.input_dim}},
            {"dense1.bias", {1, m.hidden_dim}},
            {"bn1.gamma", {1, m.hidden_dim}},
            {"bn1.beta", {1, m.hidden_dim}},
            {"bn1.running_mean", {1, m.hidden_dim}},
            {"bn1.running_var", {1, m.hidden_dim}},
            {"dense2.weight", {m.hidden_dim, m.hidden_dim}},
            {"dense2.bias", {1, m.hidden_dim}},
            {"bn2.gamma", {1, m.hidden_dim}},
            {"bn2.beta", {1, m.hidden_dim}},
            {"bn2.running_mean", {1, m.hidden_dim}},
            {"bn2.running_var", {1, m.hidden_dim}},
            {"dense3.weight", {m.n_classes, m.hidden_dim}},
            {"dense3.bias", {1, m.n_classes}},
        };

    json blobs;
    try {
        blobs = header.at("blobs");
    } catch (const json::exception&) {
        throw CorruptModel(path + ": missing shape table");
    }
    if (!blobs.is_array() || blobs.size() != expect.size()) {
        throw CorruptModel(path + ": shape table has wrong blob count");
    }
    for (std::size_t i = 0; i < expect.size(); ++i) {
        try {
            if (blobs[i].at("name").get<std::string>() != expect[i].first ||
                blobs[i].at("rows").get<Eigen::Index>() != expect[i].second.first ||
                blobs[i].at("cols").get<Eigen::Index>() != expect[i].second.second) {
                throw CorruptModel(path + ": shape table entry '" + expect[i].first +
                                   "' inconsistent with declared dimensions");
            }
        } catch (const json::exception&) {
            throw CorruptModel(path + ": malformed shape table");
        }
    }

    // Read the parameter data; a short file must never yield a model.
    std::size_t total_values = 0;
    for (const auto& e : expect) {
        total_values += static_cast<std::size_t>(e.second.first) *
                        static_cast<std::size_t>(e.second.second);
    }
    std::string data(total_values * 8, '\0');
    in.read(data.data(), static_cast<std::streamsize>(data.size()));
    if (static_cast<std::size_t>(in.gcount()) != data.size()) {
        throw CorruptModel(path + ": truncated parameter data");
    }
    if (in.get() != std::char_traits<char>::eof()) {
        throw CorruptModel(path + ": trailing bytes after parameter data");
    }

    const char* p = data.data();
    auto read_matrix = [&p](Eigen::Index rows, Eigen::Index cols) {
        Matrix w(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                w(r, c) = get_f64_le(p);
                p += 8;
            }
        }
        return w;
    };
    auto read_vector = [&p](Eigen::Index size) {
        Vector v(size);
        for (Eigen::Index i = 0; i < size; ++i) {
            v(i) = get_f64_le(p);
            p += 8;
        }
        return v;
    };

    m.dense1.weight = read_matrix(m.hidden_dim, m.input_dim);
    m.dense1.bias = read_vector(m.hidden_dim);
    m.bn1.gamma = read_vector(m.hidden_dim);
    m.bn1.beta = read_vector(m.hidden_dim);
    m.bn1.running_mean = read_vector(m.hidden_dim);
    m.bn1.running_var = read_vector(m.hidden_dim);
    m.dense2.weight = read_matrix(m.hidden_dim, m.hidden_dim);
    m.dense2.bias = read_vector(m.hidden_dim);
    m.bn2.gamma = read_vector(m.hidden_dim);
    m.bn2.beta = read_vector(m.hidden_dim);
    m.bn2.running_mean = read_vector(m.hidden_dim);
    m.bn2.running_var = read_vector(m.hidden_dim);
    m.dense3.weight = read_matrix(m.n_classes, m.hidden_dim);
    m.dense3.bias = read_vector(m.n_classes);

    for (const BlobRef& b : blob_refs(m)) {
        const bool finite = b.matrix != nullptr ? b.matrix->allFinite() : b.vector->allFinite();
        if (!finite) throw CorruptModel(path + ": non-finite values in " + b.name);
    }
    if ((m.bn1.running_var.array() <= 0.0).any() || (m.bn2.running_var.array() <= 0.0).any()) {
        throw CorruptModel(path + ": running variance must be strictly positive");
    }
    return m;
}

}  // namespace fer
