#include "fer/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <json.hpp>

#include "fer/rng.hpp"

namespace fer {

namespace {

void check_fold_args(std::size_t n, int k) {
    if (k < 2) throw InvalidFoldCount("fold count must be >= 2, got " + std::to_string(k));
    if (n < static_cast<std::size_t>(k)) {
        throw InvalidFoldCount("need at least " + std::to_string(k) + " samples for " +
                               std::to_string(k) + " folds, got " + std::to_string(n));
    }
}

std::string two_dp(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

// Two-letter class tags as the published confusion matrix uses (AN, DI, ...).
std::string tag(const std::string& label) {
    std::string t = label.substr(0, 2);
    for (char& c : t) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return t;
}

}  // namespace

FoldPlan kfold_split(std::size_t n, int k, std::uint64_t seed) {
    check_fold_args(n, k);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(mix_seed(seed, 0xf01d));
    shuffle_indices(order, rng);

    FoldPlan plan;
    plan.k = k;
    plan.assignments.assign(n, 0);
    const std::size_t base = n / static_cast<std::size_t>(k);
    const std::size_t extra = n % static_cast<std::size_t>(k);
    std::size_t pos = 0;
    for (int f = 0; f < k; ++f) {
        const std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) {
            plan.assignments[order[pos++]] = f;
        }
    }
    return plan;
}

FoldPlan stratified_kfold_split(const std::vector<int>& labels, int k, std::uint64_t seed) {
    check_fold_args(labels.size(), k);

    int n_classes = 0;
    for (int label : labels) {
        if (label < 0) throw LabelOutOfRange("negative label");
        n_classes = std::max(n_classes, label + 1);
    }

    FoldPlan plan;
    plan.k = k;
    plan.assignments.assign(labels.size(), 0);

    // Deal each class round-robin, carrying the fold cursor across classes so
    // overall fold sizes stay within 1 of each other too.
    std::mt19937_64 rng(mix_seed(seed, 0x57a7));
    int cursor = 0;
    for (int c = 0; c < n_classes; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == c) members.push_back(i);
        }
        shuffle_indices(members, rng);
        for (std::size_t m : members) {
            plan.assignments[m] = cursor;
            cursor = (cursor + 1) % k;
        }
    }
    return plan;
}

double accuracy(const std::vector<int>& predictions, const std::vector<int>& truths) {
    if (predictions.empty() || truths.empty()) throw EmptyInput("accuracy of nothing");
    if (predictions.size() != truths.size()) {
        throw ShapeMismatch("prediction/truth length mismatch");
    }
    std::size_t matches = 0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (predictions[i] == truths[i]) ++matches;
    }
    return 100.0 * static_cast<double>(matches) / static_cast<double>(truths.size());
}

long ConfusionMatrix::total() const {
    long sum = 0;
    for (const auto& row : counts) {
        for (long v : row) sum += v;
    }
    return sum;
}

std::vector<std::vector<double>> ConfusionMatrix::row_percent() const {
    std::vector<std::vector<double>> out(counts.size());
    for (std::size_t r = 0; r < counts.size(); ++r) {
        out[r].assign(counts[r].size(), 0.0);
        long row_sum = 0;
        for (long v : counts[r]) row_sum += v;
        if (row_sum == 0) continue;
        for (std::size_t c = 0; c < counts[r].size(); ++c) {
            out[r][c] = 100.0 * static_cast<double>(counts[r][c]) / static_cast<double>(row_sum);
        }
    }
    return out;
}

ConfusionMatrix confusion_matrix(const std::vector<int>& predictions,
                                 const std::vector<int>& truths,
                                 const std::vector<std::string>& labels) {
    if (predictions.size() != truths.size()) {
        throw ShapeMismatch("prediction/truth length mismatch");
    }
    const int n_classes = static_cast<int>(labels.size());
    ConfusionMatrix cm;
    cm.labels = labels;
    cm.counts.assign(labels.size(), std::vector<long>(labels.size(), 0));
    for (std::size_t i = 0; i < truths.size(); ++i) {
        const int t = truths[i];
        const int p = predictions[i];
        if (t < 0 || t >= n_classes || p < 0 || p >= n_classes) {
            throw LabelOutOfRange("class index outside [0, " + std::to_string(n_classes) + ")");
        }
        ++cm.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    }
    return cm;
}

ConfidenceInterval confidence_interval(const std::vector<double>& fold_values) {
    if (fold_values.size() < 2) {
        throw TooFewValues("confidence interval needs >= 2 values, got " +
                           std::to_string(fold_values.size()));
    }
    const double n = static_cast<double>(fold_values.size());
    const double mean = std::accumulate(fold_values.begin(), fold_values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : fold_values) ss += (v - mean) * (v - mean);
    // Population sigma, not divided by sqrt(n). This is what the published
    // fold tables actually use; see the tests that pin it.
    return {mean, 1.96 * std::sqrt(ss / n)};
}

EvalReport run_crossval(const Matrix& features, const std::vector<int>& labels,
                        const std::vector<std::string>& label_names,
                        const CrossvalOptions& options) {
    const std::size_t n = static_cast<std::size_t>(features.rows());
    if (n == 0) throw EmptyDataset("no samples");
    if (labels.size() != n) throw ShapeMismatch("label count does not match feature rows");
    if (label_names.size() < 2) throw Error("need at least 2 classes");

    const FoldPlan plan = options.stratified
                              ? stratified_kfold_split(labels, options.k, options.seed)
                              : kfold_split(n, options.k, options.seed);

    EvalReport report;
    report.k = options.k;
    report.seed = options.seed;
    report.folds.resize(static_cast<std::size_t>(options.k));

    std::vector<int> all_truths = labels;
    std::vector<std::vector<int>> fold_confusion_preds(static_cast<std::size_t>(options.k));
    std::vector<std::vector<int>> fold_confusion_truths(static_cast<std::size_t>(options.k));

    for (int f = 0; f < options.k; ++f) {
        std::vector<std::size_t> train_idx, test_idx;
        for (std::size_t i = 0; i < n; ++i) {
            (plan.assignments[i] == f ? test_idx : train_idx).push_back(i);
        }

        Matrix train_x(static_cast<Eigen::Index>(train_idx.size()), features.cols());
        std::vector<int> train_y(train_idx.size());
        for (std::size_t i = 0; i < train_idx.size(); ++i) {
            train_x.row(static_cast<Eigen::Index>(i)) =
                features.row(static_cast<Eigen::Index>(train_idx[i]));
            train_y[i] = labels[train_idx[i]];
        }

        MlpModel model = init_model(static_cast<int>(features.cols()),
                                    static_cast<int>(label_names.size()),
                                    mix_seed(options.seed, 0x100 + static_cast<std::uint64_t>(f)));
        model.labels = label_names;

        TrainConfig cfg = options.train;
        cfg.seed = mix_seed(options.seed, 0x200 + static_cast<std::uint64_t>(f));
        train(model, train_x, train_y, cfg);

        // One inference pass over everything, then slice it per split.
        std::vector<int> all_preds(n);
        for (std::size_t i = 0; i < n; ++i) {
            all_preds[i] =
                predict_row(model, features.row(static_cast<Eigen::Index>(i))).class_index;
        }

        std::vector<int> train_preds, test_preds, test_truths;
        for (std::size_t i : train_idx) train_preds.push_back(all_preds[i]);
        for (std::size_t i : test_idx) {
            test_preds.push_back(all_preds[i]);
            test_truths.push_back(labels[i]);
        }

        FoldResult& fr = report.folds[static_cast<std::size_t>(f)];
        fr.train_accuracy = accuracy(train_preds, train_y);
        fr.test_accuracy = accuracy(test_preds, test_truths);
        fr.all_accuracy = accuracy(all_preds, all_truths);

        fold_confusion_preds[static_cast<std::size_t>(f)] = std::move(test_preds);
        fold_confusion_truths[static_cast<std::size_t>(f)] = std::move(test_truths);
    }

    std::vector<double> train_vals, test_vals, all_vals;
    for (const FoldResult& fr : report.folds) {
        train_vals.push_back(fr.train_accuracy);
        test_vals.push_back(fr.test_accuracy);
        all_vals.push_back(fr.all_accuracy);
    }
    report.train_ci = confidence_interval(train_vals);
    report.test_ci = confidence_interval(test_vals);
    report.all_ci = confidence_interval(all_vals);

    report.best_fold = 0;
    for (int f = 1; f < options.k; ++f) {
        if (report.folds[static_cast<std::size_t>(f)].test_accuracy >
            report.folds[static_cast<std::size_t>(report.best_fold)].test_accuracy) {
            report.best_fold = f;
        }
    }
    report.best_confusion =
        confusion_matrix(fold_confusion_preds[static_cast<std::size_t>(report.best_fold)],
                         fold_confusion_truths[static_cast<std::size_t>(report.best_fold)],
                         label_names);
    return report;
}

std::string render_report(const EvalReport& report) {
    std::string out;

    out += "Data";
    for (int f = 1; f <= report.k; ++f) out += "\tFold-" + std::to_string(f);
    out += "\tTotal\n";

    const auto row = [&](const char* name, double FoldResult::*field,
                         const ConfidenceInterval& ci) {
        out += name;
        for (const FoldResult& fr : report.folds) out += "\t" + two_dp(fr.*field);
        out += "\t" + two_dp(ci.mean) + "±" + two_dp(ci.half_width) + "\n";
    };
    row("Train", &FoldResult::train_accuracy, report.train_ci);
    row("Test", &FoldResult::test_accuracy, report.test_ci);
    row("All", &FoldResult::all_accuracy, report.all_ci);

    out += "\nConfusion matrix of fold " + std::to_string(report.best_fold + 1) +
           " (highest test accuracy), row percent\n";
    out += "True \\ Predicted";
    for (const std::string& label : report.best_confusion.labels) out += "\t" + tag(label);
    out += "\n";
    const auto pct = report.best_confusion.row_percent();
    for (std::size_t r = 0; r < pct.size(); ++r) {
        out += tag(report.best_confusion.labels[r]);
        for (double v : pct[r]) out += "\t" + two_dp(v);
        out += "\n";
    }
    return out;
}

std::string report_json(const EvalReport& report) {
    nlohmann::json j;
    j["k"] = report.k;
    j["seed"] = report.seed;
    j["folds"] = nlohmann::json::array();
    for (const FoldResult& fr : report.folds) {
        j["folds"].push_back({{"train", fr.train_accuracy},
                              {"test", fr.test_accuracy},
                              {"all", fr.all_accuracy}});
    }
    j["total"] = {
        {"train", {{"mean", report.train_ci.mean}, {"half_width", report.train_ci.half_width}}},
        {"test", {{"mean", report.test_ci.mean}, {"half_width", report.test_ci.half_width}}},
        {"all", {{"mean", report.all_ci.mean}, {"half_width", report.all_ci.half_width}}},
    };
    j["best_fold"] = report.best_fold;
    j["confusion"] = {{"labels", report.best_confusion.labels},
                      {"counts", report.best_confusion.counts}};
    return j.dump();
}

}  // namespace fer
