#pragma once

#include <string>
#include <vector>

#include "fer/errors.hpp"
#include "fer/geometry.hpp"
#include "fer/mlp.hpp"

namespace fer {

struct LabelMap {
    std::vector<std::string> names;  // index = class id

    static LabelMap default_emotions();  // anger..surprise, alphabetical
    int index_of(const std::string& name) const;  // -1 when absent
    std::size_t size() const { return names.size(); }
};

struct ManifestRecord {
    std::string sample_id;
    std::string image_path;      // resolved against the manifest directory
    std::string landmarks_path;  // defaults to image path with .lms extension
    std::string label;
};

struct Manifest {
    std::vector<ManifestRecord> records;
    LabelMap label_map;  // the set the records were validated against
};

// 68 lines of "x y"; blank lines and #-comments allowed.
LandmarkSet parse_landmark_file(const std::string& path);

// CSV with header sample_id,image_path,label or
// sample_id,image_path,landmarks_path,label.
Manifest load_manifest(const std::string& path, const LabelMap& label_map = LabelMap::default_emotions());

struct BuildFailure {
    std::string sample_id;
    std::string message;
};

struct Dataset {
    Matrix features;  // n x 32, manifest order of the successful samples
    std::vector<int> labels;
    std::vector<std::string> ids;
    std::vector<BuildFailure> failures;
};

// Decode + extract per record. One bad sample lands in failures instead of
// aborting the batch; throws only when nothing succeeds.
Dataset build_dataset(const Manifest& manifest);

struct FeatureFile {
    Matrix features;
    std::vector<int> labels;  // indices into label_list
    std::vector<std::string> ids;
    std::vector<std::string> label_list;  // distinct labels in the file, sorted
    int declared_classes = 0;             // classes=<n> from the header
};

// "fer-features v1 dims=32 classes=<n>" header, then
// sample_id,label,<32 reals at 9 significant digits> per line. LF, UTF-8.
void write_features(const std::string& path, const Matrix& features,
                    const std::vector<int>& labels, const std::vector<std::string>& ids,
                    const std::vector<std::string>& label_names);
FeatureFile read_features(const std::string& path);

}  // namespace fer
