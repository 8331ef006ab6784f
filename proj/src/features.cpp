#include "fer/features.hpp"

#include <cmath>

namespace fer {

namespace {

constexpr double kPi = 3.14159265358979323846;

Point2 midpoint(const Point2& a, const Point2& b) {
    return {(a.x + b.x) / 2.0, (a.y + b.y) / 2.0};
}

// Integer rect centered at (cx, cy), dimensions rounded half away from zero.
Rect centered_rect(double cx, double cy, double w, double h) {
    const int wi = static_cast<int>(std::lround(w));
    const int hi = static_cast<int>(std::lround(h));
    const int x0 = static_cast<int>(std::lround(cx - w / 2.0));
    const int y0 = static_cast<int>(std::lround(cy - h / 2.0));
    return {x0, y0, wi, hi};
}

}  // namespace

void validate_features(const FeatureVector& fv) {
    for (int i = 0; i < kFeatureCount; ++i) {
        const double v = fv.values[i];
        if (!std::isfinite(v)) {
            throw Error("feature " + std::to_string(i) + " is not finite");
        }
        if (i < kGeometricFeatureCount) {
            if (v < -kPi || v > kPi) {
                throw Error("angle feature " + std::to_string(i) + " outside [-pi, pi]");
            }
        } else if (v < 0.0 || v > 1.0) {
            throw Error("density feature " + std::to_string(i) + " outside [0, 1]");
        }
    }
}

const std::vector<RegionSpec>& geometric_regions() {
    static const std::vector<RegionSpec> kRegions = {
        {"right_eyebrow", {17, 18, 19, 20, 21}},
        {"right_upper_eyelid", {36, 37, 38, 39}},
        {"upper_outer_lip", {48, 49, 50, 51, 52, 53, 54}},
        {"upper_inner_lip", {60, 61, 62, 63, 64}},
        {"lower_inner_lip", {60, 67, 66, 65, 64}},
        {"lower_outer_lip", {48, 59, 58, 57, 56, 55, 54}},
    };
    return kRegions;
}

std::vector<double> segment_angles(const LandmarkSet& lm, const RegionSpec& region) {
    std::vector<double> angles;
    angles.reserve(region.indices.size() - 1);
    for (std::size_t k = 0; k + 1 < region.indices.size(); ++k) {
        const Point2& a = lm[region.indices[k]];
        const Point2& b = lm[region.indices[k + 1]];
        const double dx = b.x - a.x;
        const double dy = b.y - a.y;
        if (dx == 0.0 && dy == 0.0) {
            throw DegenerateSegment("coincident landmarks " +
                                    std::to_string(region.indices[k]) + " and " +
                                    std::to_string(region.indices[k + 1]) + " in region " +
                                    region.name);
        }
        angles.push_back(std::atan2(dy, dx));
    }
    return angles;
}

std::array<double, kGeometricFeatureCount> geometric_features(const LandmarkSet& lm) {
    std::array<double, kGeometricFeatureCount> out{};
    std::size_t pos = 0;
    for (const RegionSpec& region : geometric_regions()) {
        for (double angle : segment_angles(lm, region)) {
            out[pos++] = angle;
        }
    }
    return out;
}

std::array<Rect, kTextureFeatureCount> texture_rois(const LandmarkSet& lm) {
    const double d = interocular_distance(lm);
    if (d == 0.0) {
        throw DegenerateFace("zero inter-ocular distance; cannot size texture ROIs");
    }

    const Point2 between = midpoint(lm[21], lm[22]);
    const Point2 right_cheek = midpoint(lm[41], lm[48]);
    const Point2 left_cheek = midpoint(lm[46], lm[54]);

    return {
        centered_rect(between.x, between.y, 0.5 * d, 0.6 * d),
        centered_rect(lm[36].x - 0.35 * d, lm[36].y, 0.3 * d, 0.5 * d),
        centered_rect(lm[45].x + 0.35 * d, lm[45].y, 0.3 * d, 0.5 * d),
        centered_rect(right_cheek.x, right_cheek.y, 0.5 * d, 0.5 * d),
        centered_rect(left_cheek.x, left_cheek.y, 0.5 * d, 0.5 * d),
    };
}

std::array<double, kTextureFeatureCount> texture_features(const GrayImage& edges,
                                                          const LandmarkSet& lm) {
    std::array<double, kTextureFeatureCount> out{};
    const auto rois = texture_rois(lm);
    for (int i = 0; i < kTextureFeatureCount; ++i) {
        out[i] = region_density(edges, rois[i]);
    }
    return out;
}

FeatureVector extract(const GrayImage& img, const LandmarkSet& lm) {
    const GrayImage edges = sobel_horizontal(img);
    const auto densities = texture_features(edges, lm);
    const auto angles = geometric_features(pose_normalize(lm));

    FeatureVector fv;
    for (int i = 0; i < kGeometricFeatureCount; ++i) fv.values[i] = angles[i];
    for (int i = 0; i < kTextureFeatureCount; ++i) fv.values[kGeometricFeatureCount + i] = densities[i];
    return fv;
}

}  // namespace fer
