#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fer/errors.hpp"
#include "fer/mlp.hpp"

namespace fer {

struct FoldPlan {
    int k = 0;
    std::vector<int> assignments;  // per-sample fold index, values in [0, k)
};

// Shuffle 0..n-1 with the seed, then cut into k contiguous folds. The first
// n % k folds get one extra sample.
FoldPlan kfold_split(std::size_t n, int k, std::uint64_t seed);

// Same size guarantees per class: shuffles within each class and deals the
// samples round-robin across folds. Off by default in crossval.
FoldPlan stratified_kfold_split(const std::vector<int>& labels, int k, std::uint64_t seed);

// Percent of positions where predictions[i] == truths[i].
double accuracy(const std::vector<int>& predictions, const std::vector<int>& truths);

struct ConfusionMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<long>> counts;  // rows = true class, cols = predicted

    long total() const;
    // Each row divided by its sum, x100. All-zero rows stay all zero.
    std::vector<std::vector<double>> row_percent() const;
};

ConfusionMatrix confusion_matrix(const std::vector<int>& predictions,
                                 const std::vector<int>& truths,
                                 const std::vector<std::string>& labels);

struct ConfidenceInterval {
    double mean = 0.0;
    double half_width = 0.0;
};

// mean +- 1.96 x population standard deviation (divisor n, no sqrt(n)).
// Non-standard but it is the convention that reproduces the published fold
// totals, so it is pinned here deliberately.
ConfidenceInterval confidence_interval(const std::vector<double>& fold_values);

struct FoldResult {
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    double all_accuracy = 0.0;  // this fold's model over the entire dataset
};

struct EvalReport {
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<FoldResult> folds;
    ConfidenceInterval train_ci, test_ci, all_ci;
    int best_fold = 0;  // highest test accuracy, ties to the lowest index
    ConfusionMatrix best_confusion;
};

struct CrossvalOptions {
    int k = 5;
    std::uint64_t seed = 0;
    bool stratified = false;
    TrainConfig train;  // train.seed is re-derived per fold from `seed`
};

// Train one fresh model per fold on the other k-1 folds and score it on
// train, test and the whole dataset.
EvalReport run_crossval(const Matrix& features, const std::vector<int>& labels,
                        const std::vector<std::string>& label_names,
                        const CrossvalOptions& options);

// Per-fold accuracy table plus the best fold's row-percent confusion matrix,
// tab-separated.
std::string render_report(const EvalReport& report);

// The same report as a single-line JSON record.
std::string report_json(const EvalReport& report);

}  // namespace fer
