#include "fer/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fer/features.hpp"
#include "fer/image_io.hpp"

namespace fs = std::filesystem;

namespace fer {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

bool parse_double(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size() && std::isfinite(out);
    } catch (const std::exception&) {
        return false;
    }
}

std::string resolve_against(const fs::path& dir, const std::string& p) {
    fs::path path(p);
    if (path.is_absolute()) return path.string();
    return (dir / path).string();
}

std::string default_landmarks_path(const std::string& image_path) {
    fs::path p(image_path);
    p.replace_extension(".lms");
    return p.string();
}

}  // namespace

LabelMap LabelMap::default_emotions() {
    return {{"anger", "disgust", "fear", "happy", "neutral", "sadness", "surprise"}};
}

int LabelMap::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return static_cast<int>(i);
    }
    return -1;
}

LandmarkSet parse_landmark_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    LandmarkSet lm{};
    std::size_t count = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string body = trim(line);
        if (body.empty() || body[0] == '#') continue;

        std::istringstream fields(body);
        std::string xs, ys, extra;
        fields >> xs >> ys;
        if (fields >> extra) {
            throw MalformedLandmarks(path + ":" + std::to_string(line_no) +
                                     ": expected 'x y', got extra fields");
        }
        double x = 0.0, y = 0.0;
        if (ys.empty() || !parse_double(xs, x) || !parse_double(ys, y)) {
            throw MalformedLandmarks(path + ":" + std::to_string(line_no) +
                                     ": expected two finite reals");
        }
        if (count >= kLandmarkCount) {
            throw MalformedLandmarks(path + ": more than " + std::to_string(kLandmarkCount) +
                                     " points");
        }
        lm.points[count++] = {x, y};
    }
    if (count != kLandmarkCount) {
        throw MalformedLandmarks(path + ": expected " + std::to_string(kLandmarkCount) +
                                 " points, got " + std::to_string(count));
    }
    return lm;
}

Manifest load_manifest(const std::string& path, const LabelMap& label_map) {
    if (label_map.names.empty()) throw MalformedManifest("empty label set");

    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    const fs::path dir = fs::path(path).parent_path();

    std::string line;
    if (!std::getline(in, line)) throw MalformedManifest(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string> header = split_csv(line);
    bool has_landmarks_col = false;
    if (header == std::vector<std::string>{"sample_id", "image_path", "label"}) {
        has_landmarks_col = false;
    } else if (header ==
               std::vector<std::string>{"sample_id", "image_path", "landmarks_path", "label"}) {
        has_landmarks_col = true;
    } else {
        throw MalformedManifest(path + ": unrecognized header '" + line + "'");
    }
    const std::size_t n_cols = header.size();

    Manifest manifest;
    manifest.label_map = label_map;
    std::set<std::string> seen_ids;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;

        const std::vector<std::string> fields = split_csv(line);
        const std::string where = path + ":" + std::to_string(line_no);
        if (fields.size() != n_cols) {
            throw MalformedManifest(where + ": expected " + std::to_string(n_cols) +
                                    " fields, got " + std::to_string(fields.size()));
        }

        ManifestRecord rec;
        rec.sample_id = fields[0];
        rec.image_path = resolve_against(dir, fields[1]);
        if (has_landmarks_col) {
            rec.landmarks_path = resolve_against(dir, fields[2]);
            rec.label = fields[3];
        } else {
            rec.landmarks_path = default_landmarks_path(rec.image_path);
            rec.label = fields[2];
        }

        if (rec.sample_id.empty()) throw MalformedManifest(where + ": empty sample_id");
        if (!seen_ids.insert(rec.sample_id).second) {
            throw MalformedManifest(where + ": duplicate sample_id '" + rec.sample_id + "'");
        }
        if (label_map.index_of(rec.label) < 0) {
            throw MalformedManifest(where + ": unknown label '" + rec.label + "'");
        }
        manifest.records.push_back(std::move(rec));
    }
    return manifest;
}

Dataset build_dataset(const Manifest& manifest) {
    std::vector<std::array<double, kFeatureCount>> rows;
    Dataset out;
    for (const ManifestRecord& rec : manifest.records) {
        try {
            const GrayImage image = read_image_gray(rec.image_path);
            const LandmarkSet lm = parse_landmark_file(rec.landmarks_path);
            const FeatureVector fv = extract(image, lm);
            rows.push_back(fv.values);
            out.labels.push_back(manifest.label_map.index_of(rec.label));
            out.ids.push_back(rec.sample_id);
        } catch (const Error& e) {
            out.failures.push_back({rec.sample_id, e.what()});
        }
    }
    if (rows.empty()) {
        throw EmptyDataset("no sample could be processed (" +
                           std::to_string(out.failures.size()) + " failures)");
    }
    out.features.resize(static_cast<Eigen::Index>(rows.size()), kFeatureCount);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < kFeatureCount; ++c) {
            out.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return out;
}

void write_features(const std::string& path, const Matrix& features,
                    const std::vector<int>& labels, const std::vector<std::string>& ids,
                    const std::vector<std::string>& label_names) {
    const std::size_t n = static_cast<std::size_t>(features.rows());
    if (labels.size() != n || ids.size() != n) {
        throw ShapeMismatch("feature rows, labels and ids must have equal lengths");
    }
    for (int label : labels) {
        if (label < 0 || label >= static_cast<int>(label_names.size())) {
            throw LabelOutOfRange("label index " + std::to_string(label));
        }
    }
    std::set<std::string> unique_ids;
    for (const std::string& id : ids) {
        if (id.empty() || id.find(',') != std::string::npos || id.find('\n') != std::string::npos) {
            throw IoError("sample id '" + id + "' cannot be serialized");
        }
        if (!unique_ids.insert(id).second) {
            throw IoError("duplicate sample id '" + id + "'");
        }
    }

    std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
    if (!out) throw IoError("cannot write " + path);

    out << "fer-features v1 dims=" << features.cols() << " classes=" << label_names.size()
        << "\n";
    char buf[32];
    for (std::size_t r = 0; r < n; ++r) {
        out << ids[r] << ',' << label_names[static_cast<std::size_t>(labels[r])];
        for (Eigen::Index c = 0; c < features.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.9g", features(static_cast<Eigen::Index>(r), c));
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing " + path);
}

FeatureFile read_features(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw FormatVersionMismatch(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    int dims = 0, classes = 0;
    if (std::sscanf(line.c_str(), "fer-features v1 dims=%d classes=%d", &dims, &classes) != 2 ||
        line.rfind("fer-features v1 ", 0) != 0) {
        throw FormatVersionMismatch(path + ": unrecognized header '" + line + "'");
    }
    if (dims != kFeatureCount) {
        throw FormatVersionMismatch(path + ": dims=" + std::to_string(dims) + ", expected " +
                                    std::to_string(kFeatureCount));
    }
    if (classes < 1) throw FormatVersionMismatch(path + ": classes must be >= 1");

    std::vector<std::array<double, kFeatureCount>> rows;
    std::vector<std::string> ids;
    std::vector<std::string> names;  // per sample
    std::set<std::string> seen_ids;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;

        const std::vector<std::string> fields = split_csv(line);
        const std::string where = path + ":" + std::to_string(line_no);
        if (fields.size() != 2 + kFeatureCount) {
            throw FormatVersionMismatch(where + ": expected " +
                                        std::to_string(2 + kFeatureCount) + " fields, got " +
                                        std::to_string(fields.size()));
        }
        if (fields[0].empty() || !seen_ids.insert(fields[0]).second) {
            throw FormatVersionMismatch(where + ": missing or duplicate sample id");
        }
        if (fields[1].empty()) throw FormatVersionMismatch(where + ": empty label");

        std::array<double, kFeatureCount> row{};
        for (std::size_t c = 0; c < kFeatureCount; ++c) {
            if (!parse_double(fields[2 + c], row[c])) {
                throw FormatVersionMismatch(where + ": bad value '" + fields[2 + c] + "'");
            }
        }
        rows.push_back(row);
        ids.push_back(fields[0]);
        names.push_back(fields[1]);
    }

    FeatureFile file;
    file.declared_classes = classes;
    file.ids = std::move(ids);

    std::set<std::string> distinct(names.begin(), names.end());
    if (static_cast<int>(distinct.size()) > classes) {
        throw FormatVersionMismatch(path + ": " + std::to_string(distinct.size()) +
                                    " distinct labels exceed declared classes=" +
                                    std::to_string(classes));
    }
    file.label_list.assign(distinct.begin(), distinct.end());  // std::set sorts

    file.labels.reserve(names.size());
    for (const std::string& name : names) {
        const auto it = std::lower_bound(file.label_list.begin(), file.label_list.end(), name);
        file.labels.push_back(static_cast<int>(it - file.label_list.begin()));
    }

    file.features.resize(static_cast<Eigen::Index>(rows.size()), kFeatureCount);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < kFeatureCount; ++c) {
            file.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                rows[r][c];
        }
    }
    return file;
}

}  // namespace fer
