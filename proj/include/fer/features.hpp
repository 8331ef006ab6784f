#pragma once

#include <array>
#include <string>
#include <vector>

#include "fer/geometry.hpp"
#include "fer/image.hpp"

namespace fer {

inline constexpr int kGeometricFeatureCount = 27;
inline constexpr int kTextureFeatureCount = 5;
inline constexpr int kFeatureCount = kGeometricFeatureCount + kTextureFeatureCount;

// 32 scalars: indices 0-26 are segment angles in radians from the five
// geometric regions, indices 27-31 are wrinkle densities in [0, 1].
struct FeatureVector {
    std::array<double, kFeatureCount> values{};

    double operator[](std::size_t i) const { return values[i]; }
};

// Throws on non-finite or out-of-range entries.
void validate_features(const FeatureVector& fv);

// A named polyline over landmark indices.
struct RegionSpec {
    std::string name;
    std::vector<std::size_t> indices;
};

// The fixed extraction order: right eyebrow, right upper eyelid, upper
// outer lip, upper inner lip, lower inner lip, lower outer lip (27 segment
// angles in total).
const std::vector<RegionSpec>& geometric_regions();

// atan2 orientation of each consecutive polyline segment, in [-pi, pi].
// Throws DegenerateSegment when two consecutive points coincide.
std::vector<double> segment_angles(const LandmarkSet& lm, const RegionSpec& region);

// The 27 angles over geometric_regions(). Landmarks must be roll- then
// yaw-normalized.
std::array<double, kGeometricFeatureCount> geometric_features(const LandmarkSet& lm);

// The five texture ROIs, anchored on landmarks and sized by the
// inter-ocular distance d:
//   0 between the eyes      center mid(21, 22)            0.5d x 0.6d
//   1 right of right eye    center lm36 + (-0.35d, 0)     0.3d x 0.5d
//   2 left of left eye      center lm45 + (+0.35d, 0)     0.3d x 0.5d
//   3 right cheek           center mid(41, 48)            0.5d x 0.5d
//   4 left cheek            center mid(46, 54)            0.5d x 0.5d
// Landmarks are taken in original image coordinates. Throws DegenerateFace
// when d = 0.
std::array<Rect, kTextureFeatureCount> texture_rois(const LandmarkSet& lm);

// region_density of each texture ROI over the whole-face edge map.
std::array<double, kTextureFeatureCount> texture_features(const GrayImage& edges,
                                                          const LandmarkSet& lm);

// Full 32-dimensional vector: geometric part from the pose-normalized
// landmarks, texture part from sobel_horizontal(img) with the raw
// landmarks. No further scaling is applied.
FeatureVector extract(const GrayImage& img, const LandmarkSet& lm);

}  // namespace fer
