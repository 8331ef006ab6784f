#include "synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "fer/features.hpp"
#include "fer/image_io.hpp"
#include "fer/rng.hpp"

namespace fs = std::filesystem;

namespace fer::testing {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 480;
constexpr double kFaceCx = 320.0;
constexpr double kFaceCy = 230.0;

void draw_disc(GrayImage& img, double cx, double cy, double r, std::uint8_t v) {
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - r)));
    const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(cx + r)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - r)));
    const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(cy + r)));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double dx = x - cx, dy = y - cy;
            if (dx * dx + dy * dy <= r * r) img.at(x, y) = v;
        }
    }
}

void draw_line(GrayImage& img, Point2 a, Point2 b, double thickness, std::uint8_t v) {
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const int steps = std::max(1, static_cast<int>(std::ceil(len / 0.5)));
    for (int i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) / steps;
        draw_disc(img, a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), thickness / 2.0, v);
    }
}

void draw_polyline(GrayImage& img, const LandmarkSet& lm, const std::vector<std::size_t>& idx,
                   bool closed, double thickness, std::uint8_t v) {
    for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
        draw_line(img, lm[idx[i]], lm[idx[i + 1]], thickness, v);
    }
    if (closed && idx.size() > 2) draw_line(img, lm[idx.back()], lm[idx.front()], thickness, v);
}

void shift(LandmarkSet& lm, std::size_t i, double dx, double dy) {
    lm[i].x += dx;
    lm[i].y += dy;
}

// Horizontal wrinkle strokes per texture ROI, indexed
// glabella, right eye side, left eye side, right cheek, left cheek.
const std::array<std::array<int, 5>, kExpressionCount> kStrokePlan = {{
    {3, 0, 0, 0, 0},  // anger: frown lines between the brows
    {2, 1, 1, 2, 2},  // disgust: nose scrunch plus nasolabial folds
    {2, 2, 2, 1, 1},  // fear: tension around both eyes
    {0, 0, 0, 3, 3},  // happy: cheek folds only
    {0, 0, 0, 0, 0},  // neutral
    {1, 0, 0, 1, 1},  // sadness: faint lines
    {4, 3, 3, 0, 0},  // surprise: forehead and eye-side creases
}};

}  // namespace

LandmarkSet base_face() {
    LandmarkSet lm{};

    // Jaw: half-ellipse, subject's right (image left) first.
    for (std::size_t i = 0; i <= 16; ++i) {
        const double t = static_cast<double>(i) * M_PI / 16.0;
        lm[i] = {kFaceCx - 110.0 * std::cos(t), 230.0 + 150.0 * std::sin(t)};
    }

    const std::array<Point2, 5> right_brow = {
        {{235, 196}, {252, 189}, {270, 186}, {288, 189}, {305, 194}}};
    for (std::size_t i = 0; i < 5; ++i) {
        lm[17 + i] = right_brow[i];
        lm[26 - i] = {2.0 * kFaceCx - right_brow[i].x, right_brow[i].y};
    }

    lm[27] = {320, 218};
    lm[28] = {320, 238};
    lm[29] = {320, 258};
    lm[30] = {320, 278};
    lm[31] = {300, 292};
    lm[32] = {310, 296};
    lm[33] = {320, 298};
    lm[34] = {330, 296};
    lm[35] = {340, 292};

    const std::array<Point2, 6> right_eye = {
        {{248, 220}, {261, 212}, {279, 212}, {292, 220}, {279, 228}, {261, 228}}};
    const std::array<std::size_t, 6> left_partner = {45, 44, 43, 42, 47, 46};
    for (std::size_t i = 0; i < 6; ++i) {
        lm[36 + i] = right_eye[i];
        lm[left_partner[i]] = {2.0 * kFaceCx - right_eye[i].x, right_eye[i].y};
    }

    const std::array<Point2, 12> outer_lip = {{{290, 330},
                                               {302, 322},
                                               {312, 318},
                                               {320, 316},
                                               {328, 318},
                                               {338, 322},
                                               {350, 330},
                                               {338, 338},
                                               {328, 342},
                                               {320, 344},
                                               {312, 342},
                                               {302, 338}}};
    for (std::size_t i = 0; i < 12; ++i) lm[48 + i] = outer_lip[i];

    const std::array<Point2, 8> inner_lip = {{{296, 330},
                                              {310, 326},
                                              {320, 325},
                                              {330, 326},
                                              {344, 330},
                                              {330, 334},
                                              {320, 335},
                                              {310, 334}}};
    for (std::size_t i = 0; i < 8; ++i) lm[60 + i] = inner_lip[i];

    return lm;
}

LandmarkSet expression_face(int expression) {
    LandmarkSet lm = base_face();
    switch (expression) {
        case 0: {  // anger
            const std::array<double, 5> brow_dy = {2, 4, 6, 8, 10};
            for (std::size_t i = 0; i < 5; ++i) {
                shift(lm, 17 + i, 0, brow_dy[i]);
                shift(lm, 26 - i, 0, brow_dy[i]);
            }
            shift(lm, 21, 4, 0);
            shift(lm, 22, -4, 0);
            for (std::size_t i : {37u, 38u, 43u, 44u}) shift(lm, i, 0, 3);
            for (std::size_t i : {40u, 41u, 46u, 47u}) shift(lm, i, 0, -3);
            for (std::size_t i = 49; i <= 53; ++i) shift(lm, i, 0, 3);
            for (std::size_t i = 55; i <= 59; ++i) shift(lm, i, 0, -3);
            for (std::size_t i = 60; i <= 67; ++i) lm[i].y = 330;  // lips pressed flat
            break;
        }
        case 1: {  // disgust
            const std::array<double, 5> brow_dy = {1, 2, 3, 3, 4};
            for (std::size_t i = 0; i < 5; ++i) {
                shift(lm, 17 + i, 0, brow_dy[i]);
                shift(lm, 26 - i, 0, brow_dy[i]);
            }
            for (std::size_t i : {37u, 38u, 43u, 44u}) shift(lm, i, 0, 2);
            for (std::size_t i : {40u, 41u, 46u, 47u}) shift(lm, i, 0, -2);
            shift(lm, 49, 0, -5);
            shift(lm, 53, 0, -5);
            shift(lm, 50, 0, -7);
            shift(lm, 52, 0, -7);
            shift(lm, 51, 0, -8);
            shift(lm, 61, 0, -5);
            shift(lm, 63, 0, -5);
            shift(lm, 62, 0, -7);
            for (std::size_t i = 31; i <= 35; ++i) shift(lm, i, 0, -4);
            for (std::size_t i = 28; i <= 30; ++i) shift(lm, i, 0, -2);
            shift(lm, 48, 0, 3);
            shift(lm, 54, 0, 3);
            break;
        }
        case 2: {  // fear
            const std::array<double, 5> brow_dy = {-8, -9, -10, -11, -12};
            for (std::size_t i = 0; i < 5; ++i) {
                shift(lm, 17 + i, 0, brow_dy[i]);
                shift(lm, 26 - i, 0, brow_dy[i]);
            }
            for (std::size_t i : {37u, 38u, 43u, 44u}) shift(lm, i, 0, -4);
            for (std::size_t i : {40u, 41u, 46u, 47u}) shift(lm, i, 0, 4);
            shift(lm, 48, -8, 0);
            shift(lm, 54, 8, 0);
            shift(lm, 49, -4, 0);
            shift(lm, 53, 4, 0);
            for (std::size_t i = 55; i <= 59; ++i) shift(lm, i, 0, 6);
            for (std::size_t i : {61u, 62u, 63u}) shift(lm, i, 0, -1);
            for (std::size_t i : {65u, 66u, 67u}) shift(lm, i, 0, 8);
            break;
        }
        case 3: {  // happy
            shift(lm, 48, -6, -10);
            shift(lm, 54, 6, -10);
            shift(lm, 49, 0, -6);
            shift(lm, 53, 0, -6);
            shift(lm, 50, 0, -3);
            shift(lm, 52, 0, -3);
            shift(lm, 55, 0, -5);
            shift(lm, 59, 0, -5);
            shift(lm, 57, 0, 2);
            shift(lm, 60, -5, -8);
            shift(lm, 64, 5, -8);
            for (std::size_t i : {61u, 62u, 63u}) shift(lm, i, 0, -3);
            for (std::size_t i : {65u, 66u, 67u}) shift(lm, i, 0, 3);
            for (std::size_t i : {40u, 41u, 46u, 47u}) shift(lm, i, 0, -3);
            break;
        }
        case 4:  // neutral
            break;
        case 5: {  // sadness
            shift(lm, 21, 0, -8);
            shift(lm, 20, 0, -4);
            shift(lm, 22, 0, -8);
            shift(lm, 23, 0, -4);
            for (std::size_t i : {37u, 38u, 43u, 44u}) shift(lm, i, 0, 2);
            shift(lm, 48, 0, 8);
            shift(lm, 54, 0, 8);
            shift(lm, 49, 0, 4);
            shift(lm, 53, 0, 4);
            shift(lm, 55, 0, 6);
            shift(lm, 59, 0, 6);
            shift(lm, 57, 0, 2);
            shift(lm, 60, 0, 6);
            shift(lm, 64, 0, 6);
            shift(lm, 61, 0, 2);
            shift(lm, 63, 0, 2);
            shift(lm, 65, 0, 3);
            shift(lm, 67, 0, 3);
            break;
        }
        case 6: {  // surprise
            const std::array<double, 5> brow_dy = {-12, -14, -16, -14, -12};
            for (std::size_t i = 0; i < 5; ++i) {
                shift(lm, 17 + i, 0, brow_dy[i]);
                shift(lm, 26 - i, 0, brow_dy[i]);
            }
            for (std::size_t i : {37u, 38u, 43u, 44u}) shift(lm, i, 0, -5);
            for (std::size_t i : {40u, 41u, 46u, 47u}) shift(lm, i, 0, 5);
            const std::array<double, 5> chin_dy = {6, 10, 12, 10, 6};
            for (std::size_t i = 0; i < 5; ++i) shift(lm, 6 + i, 0, chin_dy[i]);
            shift(lm, 51, 0, -4);
            shift(lm, 49, 0, -2);
            shift(lm, 53, 0, -2);
            shift(lm, 48, 4, 0);
            shift(lm, 54, -4, 0);
            const std::array<double, 5> lower_dy = {12, 16, 18, 16, 12};
            for (std::size_t i = 0; i < 5; ++i) shift(lm, 55 + i, 0, lower_dy[i]);
            shift(lm, 60, 4, 0);
            shift(lm, 64, -4, 0);
            for (std::size_t i : {61u, 62u, 63u}) shift(lm, i, 0, -2);
            shift(lm, 65, 0, 12);
            shift(lm, 66, 0, 14);
            shift(lm, 67, 0, 12);
            break;
        }
        default:
            throw Error("expression index out of range");
    }
    return lm;
}

SyntheticSample make_sample(int expression, std::uint64_t seed) {
    std::mt19937_64 rng(mix_seed(seed, 0xface));

    LandmarkSet lm = expression_face(expression);
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
        lm[i].x += 2.4 * (uniform01(rng) - 0.5);
        lm[i].y += 2.4 * (uniform01(rng) - 0.5);
    }

    const double scale = 0.9 + 0.25 * uniform01(rng);
    const double theta = 0.24 * (uniform01(rng) - 0.5);
    const double tx = 30.0 * (uniform01(rng) - 0.5);
    const double ty = 30.0 * (uniform01(rng) - 0.5);
    const double c = std::cos(theta), s = std::sin(theta);
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
        const double x = lm[i].x - kFaceCx, y = lm[i].y - kFaceCy;
        lm[i].x = kFaceCx + tx + scale * (c * x - s * y);
        lm[i].y = kFaceCy + ty + scale * (s * x + c * y);
    }

    SyntheticSample sample;
    sample.expression = expression;
    sample.landmarks = lm;
    sample.image = GrayImage::filled(kWidth, kHeight, 200);
    GrayImage& img = sample.image;

    // Mild pixel noise so flat regions are not exactly flat.
    for (std::uint8_t& p : img.pixels) {
        p = static_cast<std::uint8_t>(static_cast<int>(p) +
                                      static_cast<int>(7.0 * uniform01(rng)) - 3);
    }

    auto range = [](std::size_t a, std::size_t b) {
        std::vector<std::size_t> idx;
        for (std::size_t i = a; i <= b; ++i) idx.push_back(i);
        return idx;
    };
    draw_polyline(img, lm, range(0, 16), false, 2.0, 120);
    draw_polyline(img, lm, range(17, 21), false, 3.0, 70);
    draw_polyline(img, lm, range(22, 26), false, 3.0, 70);
    draw_polyline(img, lm, range(27, 30), false, 1.5, 150);
    draw_polyline(img, lm, range(31, 35), false, 1.5, 150);
    draw_polyline(img, lm, range(36, 41), true, 2.0, 60);
    draw_polyline(img, lm, range(42, 47), true, 2.0, 60);
    draw_polyline(img, lm, range(48, 59), true, 2.0, 90);
    draw_polyline(img, lm, range(60, 67), true, 1.5, 110);

    // Class wrinkles, placed inside the very ROIs the extractor will read.
    const std::array<Rect, kTextureFeatureCount> rois = texture_rois(lm);
    for (std::size_t k = 0; k < rois.size(); ++k) {
        const int n_strokes = kStrokePlan[static_cast<std::size_t>(expression)][k];
        const Rect& r = rois[k];
        for (int j = 1; j <= n_strokes; ++j) {
            const double y = r.y0 + static_cast<double>(j) * r.h / (n_strokes + 1);
            const double x_lo = r.x0 + 0.15 * r.w;
            const double x_hi = r.x0 + 0.85 * r.w;
            draw_line(img, {x_lo, y}, {x_hi, y}, 2.0, 90);
        }
    }
    return sample;
}

std::string write_corpus(const std::string& dir, int per_class, std::uint64_t seed) {
    fs::create_directories(dir);
    const LabelMap labels = LabelMap::default_emotions();

    const std::string manifest_path = (fs::path(dir) / "manifest.csv").string();
    std::ofstream manifest(manifest_path, std::ios::binary);
    if (!manifest) throw IoError("cannot write " + manifest_path);
    manifest << "sample_id,image_path,label\n";

    char buf[64];
    for (int c = 0; c < kExpressionCount; ++c) {
        for (int j = 0; j < per_class; ++j) {
            const SyntheticSample sample =
                make_sample(c, mix_seed(seed, static_cast<std::uint64_t>(c) * 10007 +
                                                  static_cast<std::uint64_t>(j)));
            std::snprintf(buf, sizeof(buf), "%s_%03d", labels.names[static_cast<std::size_t>(c)].c_str(), j);
            const std::string id(buf);

            write_png_gray(sample.image, (fs::path(dir) / (id + ".png")).string());

            const std::string lms_path = (fs::path(dir) / (id + ".lms")).string();
            std::ofstream lms(lms_path, std::ios::binary);
            if (!lms) throw IoError("cannot write " + lms_path);
            lms << "# 68 landmarks, x y per line\n";
            for (std::size_t i = 0; i < kLandmarkCount; ++i) {
                std::snprintf(buf, sizeof(buf), "%.9g %.9g\n", sample.landmarks[i].x,
                              sample.landmarks[i].y);
                lms << buf;
            }

            manifest << id << "," << id << ".png," << labels.names[static_cast<std::size_t>(c)]
                     << "\n";
        }
    }
    return manifest_path;
}

void make_separable(int n, int dims, int classes, std::uint64_t seed, Matrix& features,
                    std::vector<int>& labels) {
    features.resize(n, dims);
    labels.resize(static_cast<std::size_t>(n));
    std::mt19937_64 rng(mix_seed(seed, 0x5e9));
    for (int i = 0; i < n; ++i) {
        const int c = i % classes;
        labels[static_cast<std::size_t>(i)] = c;
        for (int k = 0; k < dims; ++k) {
            double center = 0.0;
            if (k == c % dims) center = 8.0;
            if (k == (2 * c + 1) % dims) center = -8.0;
            features(i, k) = center + 2.0 * (uniform01(rng) - 0.5);
        }
    }
}

std::string make_temp_dir(const std::string& tag) {
    std::string tmpl = (fs::temp_directory_path() / ("fer_" + tag + "_XXXXXX")).string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (mkdtemp(buf.data()) == nullptr) throw IoError("mkdtemp failed for " + tmpl);
    return std::string(buf.data());
}

}  // namespace fer::testing
