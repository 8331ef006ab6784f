#include <cmath>
#include <limits>
#include <random>
#include <set>

#include <doctest.h>

#include "fer/geometry.hpp"
#include "fer/rng.hpp"
#include "support/synthetic.hpp"

using namespace fer;

namespace {

// Random non-degenerate landmark set: the synthetic template under a random
// similarity transform plus per-point jitter.
LandmarkSet random_face(std::mt19937_64& rng) {
    LandmarkSet lm = fer::testing::base_face();
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
        lm[i].x += 8.0 * (uniform01(rng) - 0.5);
        lm[i].y += 8.0 * (uniform01(rng) - 0.5);
    }
    const double scale = 0.5 + 1.5 * uniform01(rng);
    const double theta = 2.0 * M_PI * (uniform01(rng) - 0.5);
    const double tx = 200.0 * (uniform01(rng) - 0.5);
    const double ty = 200.0 * (uniform01(rng) - 0.5);
    const double c = std::cos(theta), s = std::sin(theta);
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
        const double x = lm[i].x - 320.0, y = lm[i].y - 230.0;
        lm[i].x = 320.0 + tx + scale * (c * x - s * y);
        lm[i].y = 230.0 + ty + scale * (s * x + c * y);
    }
    return lm;
}

}  // namespace

TEST_CASE("eye centers are the means of the six eye points") {
    LandmarkSet lm{};
    for (std::size_t i = 36; i <= 41; ++i) lm[i] = {double(i - 36), 2.0 * double(i - 36)};
    for (std::size_t i = 42; i <= 47; ++i) lm[i] = {10.0, 20.0};
    const auto [right, left] = eye_centers(lm);
    CHECK(right.x == doctest::Approx(2.5).epsilon(1e-12));  // mean of 0..5
    CHECK(right.y == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(left.x == 10.0);
    CHECK(left.y == 20.0);
}

TEST_CASE("roll normalization on a hand-built 45 degree case") {
    // All six right-eye points at (0,0), all six left-eye points at (2,2):
    // centers (0,0) and (2,2), alpha = pi/4, origin (1,1). After rotating by
    // -pi/4 the centers land at (1 -/+ sqrt(2), 1).
    LandmarkSet lm{};
    for (std::size_t i = 0; i < kLandmarkCount; ++i) lm[i] = {5.0, -3.0};
    for (std::size_t i = 36; i <= 41; ++i) lm[i] = {0.0, 0.0};
    for (std::size_t i = 42; i <= 47; ++i) lm[i] = {2.0, 2.0};

    const RollResult r = roll_normalize(lm);
    CHECK(r.pose.alpha == doctest::Approx(M_PI / 4.0).epsilon(1e-14));
    CHECK(r.pose.origin.x == 1.0);
    CHECK(r.pose.origin.y == 1.0);

    const auto [right, left] = eye_centers(r.landmarks);
    const double sqrt2 = std::sqrt(2.0);
    CHECK(right.x == doctest::Approx(1.0 - sqrt2).epsilon(1e-12));
    CHECK(right.y == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(left.x == doctest::Approx(1.0 + sqrt2).epsilon(1e-12));
    CHECK(left.y == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(interocular_distance(r.landmarks) ==
          doctest::Approx(interocular_distance(lm)).epsilon(1e-12));
}

TEST_CASE("roll levels the eyes and is idempotent") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        const LandmarkSet lm = random_face(rng);
        const RollResult once = roll_normalize(lm);
        const auto [right, left] = eye_centers(once.landmarks);
        const double d = interocular_distance(lm);
        CHECK(std::abs(left.y - right.y) < 1e-9 * d);

        const RollResult twice = roll_normalize(once.landmarks);
        CHECK(std::abs(twice.pose.alpha) < 1e-9);
        for (std::size_t i = 0; i < kLandmarkCount; ++i) {
            CHECK(twice.landmarks[i].x == doctest::Approx(once.landmarks[i].x).epsilon(1e-9));
            CHECK(twice.landmarks[i].y == doctest::Approx(once.landmarks[i].y).epsilon(1e-9));
        }
    }
}

TEST_CASE("coincident eye centers are rejected") {
    LandmarkSet lm{};  // every point at the origin
    CHECK_THROWS_AS(roll_normalize(lm), DegenerateFace);
}

TEST_CASE("validate_landmarks rejects non-finite points") {
    LandmarkSet lm = fer::testing::base_face();
    CHECK_NOTHROW(validate_landmarks(lm));
    lm[13].y = std::nan("");
    CHECK_THROWS_AS(validate_landmarks(lm), MalformedLandmarks);
    lm[13].y = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(validate_landmarks(lm), MalformedLandmarks);
}

TEST_CASE("mirror table is an involution with the midline fixed") {
    const std::set<std::size_t> midline = {8, 27, 28, 29, 30, 33, 51, 57, 62, 66};
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
        CHECK(mirror_index(mirror_index(i)) == i);
        CHECK((mirror_index(i) == i) == (midline.count(i) == 1));
    }
    CHECK(mirror_index(0) == 16);
    CHECK(mirror_index(17) == 26);
    CHECK(mirror_index(21) == 22);
    CHECK(mirror_index(31) == 35);
    CHECK(mirror_index(36) == 45);
    CHECK(mirror_index(39) == 42);
    CHECK(mirror_index(40) == 47);
    CHECK(mirror_index(48) == 54);
    CHECK(mirror_index(55) == 59);
    CHECK(mirror_index(60) == 64);
    CHECK(mirror_index(61) == 63);
    CHECK(mirror_index(65) == 67);
    CHECK_THROWS_AS(mirror_index(kLandmarkCount), IndexOutOfRange);
}

TEST_CASE("yaw averaging on a hand case") {
    // Pair (21, 22) about x = 0: inputs (-1, 5) and (3, 7). Reflecting the
    // partner gives (-3, 7); the average is (-2, 6), and 22 must be its
    // exact reflection.
    LandmarkSet lm = fer::testing::base_face();
    lm[21] = {-1.0, 5.0};
    lm[22] = {3.0, 7.0};
    lm[8] = {4.0, 9.0};  // midline point snaps onto the axis

    const LandmarkSet out = yaw_normalize(lm, 0.0);
    CHECK(out[21].x == -2.0);
    CHECK(out[21].y == 6.0);
    CHECK(out[22].x == 2.0);
    CHECK(out[22].y == 6.0);
    CHECK(out[8].x == 0.0);
    CHECK(out[8].y == 9.0);
}

TEST_CASE("yaw output is bitwise symmetric and idempotent") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const LandmarkSet lm = random_face(rng);
        const double origin_x = 320.0 + 50.0 * (uniform01(rng) - 0.5);
        const LandmarkSet out = yaw_normalize(lm, origin_x);

        for (std::size_t i = 0; i < kLandmarkCount; ++i) {
            const std::size_t j = mirror_index(i);
            if (j == i) {
                CHECK(out[i].x == origin_x);  // midline points sit on the axis
            } else if (i < j) {
                // Exact, not approximate: the partner is stored as the
                // computed reflection of its mate. (The reverse direction
                // would re-round, so only this orientation is bitwise.)
                CHECK(out[j].x == 2.0 * origin_x - out[i].x);
                CHECK(out[j].y == out[i].y);
            }
        }

        const LandmarkSet again = yaw_normalize(out, origin_x);
        for (std::size_t i = 0; i < kLandmarkCount; ++i) {
            CHECK(again[i].x == doctest::Approx(out[i].x).epsilon(1e-12));
            CHECK(again[i].y == out[i].y);
        }
    }
}

TEST_CASE("pose_normalize levels and symmetrizes") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const LandmarkSet lm = random_face(rng);
        const LandmarkSet out = pose_normalize(lm);
        const auto [right, left] = eye_centers(out);
        CHECK(std::abs(left.y - right.y) < 1e-9 * interocular_distance(lm));
        // Symmetric output: mirrored eye points share y exactly.
        for (std::size_t i = 36; i <= 41; ++i) CHECK(out[i].y == out[mirror_index(i)].y);
    }
}
