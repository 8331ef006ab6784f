#pragma once

#include <array>
#include <cstddef>
#include <utility>

#include "fer/errors.hpp"

namespace fer {

// A point in image pixel coordinates. y grows downward.
struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline constexpr std::size_t kLandmarkCount = 68;

// 68 ordered key points in the standard 68-point scheme:
//   jaw 0-16, right brow 17-21, left brow 22-26, nose 27-35,
//   right eye 36-41, left eye 42-47, outer lip 48-59, inner lip 60-67.
// "right" is the subject's right (image-left for a frontal photo).
struct LandmarkSet {
    std::array<Point2, kLandmarkCount> points{};

    const Point2& operator[](std::size_t i) const { return points[i]; }
    Point2& operator[](std::size_t i) { return points[i]; }
};

// Throws MalformedLandmarks if any coordinate is NaN/Inf.
void validate_landmarks(const LandmarkSet& lm);

// Roll-normalization parameters: the rotation origin (midpoint of the two
// eye centers) and the roll angle alpha in [-pi, pi].
struct PoseNormalization {
    Point2 origin;
    double alpha = 0.0;
};

struct RollResult {
    LandmarkSet landmarks;
    PoseNormalization pose;
};

// (right-eye center, left-eye center): arithmetic means of points 36-41
// and 42-47.
std::pair<Point2, Point2> eye_centers(const LandmarkSet& lm);

// Euclidean distance between the two eye centers.
double interocular_distance(const LandmarkSet& lm);

// Rotates all points by -alpha about the inter-eye midpoint so the eye
// centers end up level. alpha = atan2 of the vector from right-eye center
// to left-eye center. Throws DegenerateFace when the eye centers coincide.
RollResult roll_normalize(const LandmarkSet& lm);

// Bilateral-symmetry partner of landmark i under the fixed 68-point
// pairing table. Involution; fixed points are the midline landmarks
// {8, 27, 28, 29, 30, 33, 51, 57, 62, 66}. Throws IndexOutOfRange.
std::size_t mirror_index(std::size_t i);

// Averages every point with the reflection of its mirror partner across
// the vertical line x = origin_x. Input must already be roll-normalized.
// The output is exactly bilaterally symmetric about that line.
LandmarkSet yaw_normalize(const LandmarkSet& lm, double origin_x);

// roll_normalize followed by yaw_normalize about the roll origin.
LandmarkSet pose_normalize(const LandmarkSet& lm);

}  // namespace fer
