#include "fer/geometry.hpp"

#include <cmath>

namespace fer {

namespace {

Point2 mean_of_range(const LandmarkSet& lm, std::size_t first, std::size_t last) {
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t i = first; i <= last; ++i) {
        sx += lm[i].x;
        sy += lm[i].y;
    }
    const double n = static_cast<double>(last - first + 1);
    return {sx / n, sy / n};
}

}  // namespace

void validate_landmarks(const LandmarkSet& lm) {
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
        if (!std::isfinite(lm[i].x) || !std::isfinite(lm[i].y)) {
            throw MalformedLandmarks("landmark " + std::to_string(i) + " is not finite");
        }
    }
}

std::pair<Point2, Point2> eye_centers(const LandmarkSet& lm) {
    return {mean_of_range(lm, 36, 41), mean_of_range(lm, 42, 47)};
}

double interocular_distance(const LandmarkSet& lm) {
    const auto [right, left] = eye_centers(lm);
    return std::hypot(left.x - right.x, left.y - right.y);
}

RollResult roll_normalize(const LandmarkSet& lm) {
    const auto [right, left] = eye_centers(lm);
    const double dx = left.x - right.x;
    const double dy = left.y - right.y;
    if (dx == 0.0 && dy == 0.0) {
        throw DegenerateFace("eye centers coincide; cannot define a roll angle");
    }

    RollResult out;
    out.pose.origin = {(right.x + left.x) / 2.0, (right.y + left.y) / 2.0};
    out.pose.alpha = std::atan2(dy, dx);

    // Rotate by -alpha about the origin so the inter-eye line becomes
    // horizontal.
    const double c = std::cos(-out.pose.alpha);
    const double s = std::sin(-out.pose.alpha);
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
        const double px = lm[i].x - out.pose.origin.x;
        const double py = lm[i].y - out.pose.origin.y;
        out.landmarks[i].x = out.pose.origin.x + c * px - s * py;
        out.landmarks[i].y = out.pose.origin.y + s * px + c * py;
    }
    return out;
}

std::size_t mirror_index(std::size_t i) {
    // Canonical bilateral pairing of the 68-point scheme.
    static constexpr std::array<std::size_t, kLandmarkCount> kMirror = {
        // jaw 0-16: i <-> 16-i
        16, 15, 14, 13, 12, 11, 10, 9, 8, 7, 6, 5, 4, 3, 2, 1, 0,
        // brows 17-26
        26, 25, 24, 23, 22, 21, 20, 19, 18, 17,
        // nose bridge 27-30 (self), nostrils 31-35
        27, 28, 29, 30, 35, 34, 33, 32, 31,
        // eyes 36-47
        45, 44, 43, 42, 47, 46, 39, 38, 37, 36, 41, 40,
        // outer lip 48-59
        54, 53, 52, 51, 50, 49, 48, 59, 58, 57, 56, 55,
        // inner lip 60-67
        64, 63, 62, 61, 60, 67, 66, 65};
    if (i >= kLandmarkCount) {
        throw IndexOutOfRange("landmark index " + std::to_string(i) + " out of range");
    }
    return kMirror[i];
}

LandmarkSet yaw_normalize(const LandmarkSet& lm, double origin_x) {
    // out[i] = midpoint(in[i], reflect(in[mirror(i)])). Each unordered pair
    // is computed once and the partner is set to the exact reflection, so
    // the result is bit-exactly symmetric about x = origin_x.
    LandmarkSet out;
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
        const std::size_t j = mirror_index(i);
        if (j == i) {
            out[i] = {origin_x, lm[i].y};
        } else if (i < j) {
            const double reflected_x = 2.0 * origin_x - lm[j].x;
            out[i].x = (lm[i].x + reflected_x) / 2.0;
            out[i].y = (lm[i].y + lm[j].y) / 2.0;
            out[j].x = 2.0 * origin_x - out[i].x;
            out[j].y = out[i].y;
        }
    }
    return out;
}

LandmarkSet pose_normalize(const LandmarkSet& lm) {
    const RollResult rolled = roll_normalize(lm);
    return yaw_normalize(rolled.landmarks, rolled.pose.origin.x);
}

}  // namespace fer
