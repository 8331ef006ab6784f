#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fer/dataset.hpp"
#include "fer/evaluation.hpp"
#include "fer/features.hpp"
#include "fer/image_io.hpp"
#include "fer/mlp.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

std::string feature_format_tag() {
    return "fer-features v1 dims=" + std::to_string(fer::kFeatureCount);
}

int cmd_extract(const std::string& manifest_path, const std::string& out_path) {
    const fer::Manifest manifest = fer::load_manifest(manifest_path);
    const fer::Dataset ds = fer::build_dataset(manifest);

    fer::write_features(out_path, ds.features, ds.labels, ds.ids, manifest.label_map.names);

    for (const fer::BuildFailure& f : ds.failures) {
        std::cerr << "failed " << f.sample_id << ": " << f.message << "\n";
    }
    std::map<std::string, std::size_t> counts;
    for (int label : ds.labels) ++counts[manifest.label_map.names[static_cast<std::size_t>(label)]];
    for (const auto& [name, count] : counts) std::cout << name << ": " << count << "\n";
    std::cout << "extracted " << ds.ids.size() << " of " << manifest.records.size()
              << " samples -> " << out_path << "\n";
    return kExitOk;
}

fer::TrainConfig train_config(int epochs, int batch, double lr, std::uint64_t seed) {
    fer::TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.batch_size = batch;
    cfg.learning_rate = lr;
    cfg.seed = seed;
    return cfg;
}

int cmd_train(const std::string& features_path, const std::string& out_path,
              const fer::TrainConfig& cfg) {
    const fer::FeatureFile file = fer::read_features(features_path);
    if (file.features.rows() == 0) throw fer::EmptyDataset(features_path + " has no samples");

    fer::MlpModel model =
        fer::init_model(fer::kFeatureCount, static_cast<int>(file.label_list.size()), cfg.seed);
    model.labels = file.label_list;
    model.feature_format = feature_format_tag();

    const std::vector<fer::EpochStats> history = fer::train(model, file.features, file.labels, cfg);
    fer::save_model(model, out_path);

    const std::string log_path = out_path + ".log";
    std::ofstream log(log_path, std::ios::binary);
    if (!log) throw fer::IoError("cannot write " + log_path);
    char line[128];
    for (std::size_t e = 0; e < history.size(); ++e) {
        std::snprintf(line, sizeof(line), "epoch %zu loss %.6f acc %.2f\n", e + 1,
                      history[e].loss, history[e].accuracy);
        log << line;
    }

    std::cout << "trained " << history.size() << " epochs on " << file.features.rows()
              << " samples, final loss " << history.back().loss << ", train accuracy "
              << history.back().accuracy << "\n";
    std::cout << "model -> " << out_path << ", history -> " << log_path << "\n";
    return kExitOk;
}

int cmd_crossval(const std::string& features_path, int folds, std::uint64_t seed, bool stratify,
                 const fer::TrainConfig& cfg, const std::string& out_path) {
    const fer::FeatureFile file = fer::read_features(features_path);

    fer::CrossvalOptions options;
    options.k = folds;
    options.seed = seed;
    options.stratified = stratify;
    options.train = cfg;

    const fer::EvalReport report =
        fer::run_crossval(file.features, file.labels, file.label_list, options);
    std::cout << fer::render_report(report);
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw fer::IoError("cannot write " + out_path);
        out << fer::report_json(report) << "\n";
    }
    return kExitOk;
}

int cmd_predict(const std::string& model_path, const std::string& image_path,
                const std::string& landmarks_path) {
    const fer::MlpModel model = fer::load_model(model_path);
    if (model.feature_format != feature_format_tag()) {
        throw fer::FormatVersionMismatch("model expects features '" + model.feature_format +
                                         "', this build produces '" + feature_format_tag() + "'");
    }

    const fer::GrayImage image = fer::read_image_gray(image_path);
    const fer::LandmarkSet lm = fer::parse_landmark_file(landmarks_path);
    const fer::Prediction pred = fer::predict(model, fer::extract(image, lm));

    nlohmann::json j;
    j["label"] = pred.label;
    j["class_index"] = pred.class_index;
    j["probabilities"] = pred.probabilities;
    std::cout << j.dump() << "\n";
    return kExitOk;
}

struct PhaseStats {
    double mean = 0.0, min = 0.0, max = 0.0, median = 0.0;
};

PhaseStats stats_of(std::vector<double> samples) {
    PhaseStats s;
    std::sort(samples.begin(), samples.end());
    s.min = samples.front();
    s.max = samples.back();
    const std::size_t n = samples.size();
    s.median = n % 2 == 1 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
    double total = 0.0;
    for (double v : samples) total += v;
    s.mean = total / static_cast<double>(n);
    return s;
}

int cmd_bench(const std::string& model_path, const std::string& manifest_path, int iterations) {
    const fer::MlpModel model = fer::load_model(model_path);
    const fer::Manifest manifest = fer::load_manifest(manifest_path);
    if (manifest.records.empty()) throw fer::EmptyDataset(manifest_path + " has no records");

    // Decode everything up front; only the pipeline phases are timed.
    std::vector<fer::GrayImage> images;
    std::vector<fer::LandmarkSet> landmark_sets;
    for (const fer::ManifestRecord& rec : manifest.records) {
        images.push_back(fer::read_image_gray(rec.image_path));
        landmark_sets.push_back(fer::parse_landmark_file(rec.landmarks_path));
    }

    using clock = std::chrono::steady_clock;
    const auto seconds_since = [](clock::time_point t0) {
        return std::chrono::duration<double>(clock::now() - t0).count();
    };

    std::vector<double> extract_times, predict_times;
    double sink = 0.0;  // keeps the timed work observable
    for (int it = -1; it < iterations; ++it) {
        for (std::size_t i = 0; i < images.size(); ++i) {
            const auto t0 = clock::now();
            const fer::FeatureVector fv = fer::extract(images[i], landmark_sets[i]);
            const double t_extract = seconds_since(t0);

            const auto t1 = clock::now();
            const fer::Prediction pred = fer::predict(model, fv);
            const double t_predict = seconds_since(t1);

            sink += pred.probabilities[0] + fv[0];
            if (it >= 0) {  // iteration -1 is the warm-up pass
                extract_times.push_back(t_extract);
                predict_times.push_back(t_predict);
            }
        }
    }

    const PhaseStats ext = stats_of(extract_times);
    const PhaseStats prd = stats_of(predict_times);
    const double total = ext.mean + prd.mean;
    const double fps = 1.0 / total;

    char line[256];
    std::cout << "Phase\tMean (s)\tMin (s)\tMax (s)\tMedian (s)\n";
    std::snprintf(line, sizeof(line), "Feature Extraction\t%.6f\t%.6f\t%.6f\t%.6f\n", ext.mean,
                  ext.min, ext.max, ext.median);
    std::cout << line;
    std::snprintf(line, sizeof(line), "Prediction\t%.6f\t%.6f\t%.6f\t%.6f\n", prd.mean, prd.min,
                  prd.max, prd.median);
    std::cout << line;
    std::snprintf(line, sizeof(line), "Total\t%.6f\n", total);
    std::cout << line;
    std::snprintf(line, sizeof(line), "FPS\t%.2f\n", fps);
    std::cout << line;
    std::cout << "(landmark detection is external and not included in Total)\n";

    nlohmann::json j;
    j["extract"] = {{"mean", ext.mean}, {"min", ext.min}, {"max", ext.max}, {"median", ext.median}};
    j["predict"] = {{"mean", prd.mean}, {"min", prd.min}, {"max", prd.max}, {"median", prd.median}};
    j["total"] = total;
    j["fps"] = fps;
    j["frames"] = images.size();
    j["iterations"] = iterations;
    std::cout << j.dump() << "\n";
    return sink == sink ? kExitOk : kExitData;  // sink is always finite here
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Facial-expression recognition from 68-point landmarks"};
    app.require_subcommand(1);

    std::string manifest_path, features_path, model_path, image_path, landmarks_path, out_path;
    int epochs = fer::TrainConfig{}.epochs;
    int batch = fer::TrainConfig{}.batch_size;
    double lr = fer::TrainConfig{}.learning_rate;
    std::uint64_t seed = 0;
    int folds = 5;
    bool stratify = false;
    int iterations = 5;

    CLI::App* extract = app.add_subcommand("extract", "Extract feature vectors for a manifest");
    extract->add_option("--manifest", manifest_path, "Manifest CSV")
        ->required()
        ->envname("FER_MANIFEST");
    extract->add_option("--out", out_path, "Feature file to write")
        ->required()
        ->envname("FER_OUT");

    const auto add_train_flags = [&](CLI::App* cmd) {
        cmd->add_option("--epochs", epochs, "Training epochs")
            ->check(CLI::PositiveNumber)
            ->envname("FER_EPOCHS");
        cmd->add_option("--batch", batch, "Mini-batch size")
            ->check(CLI::PositiveNumber)
            ->envname("FER_BATCH");
        cmd->add_option("--lr", lr, "Adam learning rate")
            ->check(CLI::NonNegativeNumber)
            ->envname("FER_LR");
        cmd->add_option("--seed", seed, "RNG seed")->envname("FER_SEED");
    };

    CLI::App* train = app.add_subcommand("train", "Train a model on a feature file");
    train->add_option("--features", features_path, "Feature file")
        ->required()
        ->envname("FER_FEATURES");
    train->add_option("--out", out_path, "Model file to write")->required()->envname("FER_OUT");
    add_train_flags(train);

    CLI::App* crossval = app.add_subcommand("crossval", "K-fold cross-validation");
    crossval->add_option("--features", features_path, "Feature file")
        ->required()
        ->envname("FER_FEATURES");
    crossval->add_option("--folds", folds, "Fold count")
        ->check(CLI::Range(2, 1000))
        ->envname("FER_FOLDS");
    crossval->add_flag("--stratify", stratify, "Stratified folds")->envname("FER_STRATIFY");
    crossval->add_option("--out", out_path, "Write the JSON report here")->envname("FER_OUT");
    add_train_flags(crossval);

    CLI::App* predict = app.add_subcommand("predict", "Classify one image");
    predict->add_option("--model", model_path, "Model file")->required()->envname("FER_MODEL");
    predict->add_option("--image", image_path, "PNG or PGM image")
        ->required()
        ->envname("FER_IMAGE");
    predict->add_option("--landmarks", landmarks_path, "68-point landmark file")
        ->required()
        ->envname("FER_LANDMARKS");

    CLI::App* bench = app.add_subcommand("bench", "Per-frame latency of extract and predict");
    bench->add_option("--model", model_path, "Model file")->required()->envname("FER_MODEL");
    bench->add_option("--manifest", manifest_path, "Manifest CSV of frames")
        ->required()
        ->envname("FER_MANIFEST");
    bench->add_option("--iterations", iterations, "Timed passes over the manifest")
        ->check(CLI::PositiveNumber)
        ->envname("FER_ITERATIONS");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (extract->parsed()) return cmd_extract(manifest_path, out_path);
        if (train->parsed()) {
            return cmd_train(features_path, out_path, train_config(epochs, batch, lr, seed));
        }
        if (crossval->parsed()) {
            return cmd_crossval(features_path, folds, seed, stratify,
                                train_config(epochs, batch, lr, seed), out_path);
        }
        if (predict->parsed()) return cmd_predict(model_path, image_path, landmarks_path);
        if (bench->parsed()) return cmd_bench(model_path, manifest_path, iterations);
    } catch (const fer::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
