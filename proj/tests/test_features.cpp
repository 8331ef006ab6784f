#include <cmath>
#include <random>

#include <doctest.h>

#include "fer/features.hpp"
#include "support/synthetic.hpp"

using namespace fer;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Difference between two angles on the circle, so a pi/-pi flip counts as 0.
double angle_diff(double a, double b) {
    return std::abs(std::remainder(a - b, 2.0 * kPi));
}

LandmarkSet rois_fixture() {
    LandmarkSet lm;
    for (std::size_t i = 36; i <= 41; ++i) lm[i] = {200.0, 300.0};
    for (std::size_t i = 42; i <= 47; ++i) lm[i] = {300.0, 300.0};
    lm[21] = {240.0, 260.0};
    lm[22] = {260.0, 260.0};
    lm[48] = {220.0, 380.0};
    lm[54] = {420.0, 380.0};
    return lm;
}

LandmarkSet transformed(const LandmarkSet& lm, double scale, double theta, double tx, double ty) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    LandmarkSet out;
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
        const double x = lm[i].x;
        const double y = lm[i].y;
        out[i] = {scale * (c * x - s * y) + tx, scale * (s * x + c * y) + ty};
    }
    return out;
}

}  // namespace

TEST_CASE("geometric regions cover the expected polylines") {
    const auto& regions = geometric_regions();
    REQUIRE(regions.size() == 6);
    CHECK(regions[0].name == "right_eyebrow");
    CHECK(regions[0].indices == std::vector<std::size_t>{17, 18, 19, 20, 21});
    CHECK(regions[1].name == "right_upper_eyelid");
    CHECK(regions[1].indices == std::vector<std::size_t>{36, 37, 38, 39});
    CHECK(regions[2].indices == std::vector<std::size_t>{48, 49, 50, 51, 52, 53, 54});
    CHECK(regions[3].indices == std::vector<std::size_t>{60, 61, 62, 63, 64});
    CHECK(regions[4].indices == std::vector<std::size_t>{60, 67, 66, 65, 64});
    CHECK(regions[5].indices == std::vector<std::size_t>{48, 59, 58, 57, 56, 55, 54});

    int segments = 0;
    for (const auto& r : regions) segments += static_cast<int>(r.indices.size()) - 1;
    CHECK(segments == kGeometricFeatureCount);
}

TEST_CASE("segment angles match atan2 by hand") {
    LandmarkSet lm;
    lm[0] = {0.0, 0.0};
    lm[1] = {1.0, 1.0};
    lm[2] = {0.0, 1.0};
    lm[3] = {0.0, -4.0};
    const RegionSpec region{"probe", {0, 1, 2, 3}};

    const auto angles = segment_angles(lm, region);
    REQUIRE(angles.size() == 3);
    CHECK(angles[0] == doctest::Approx(kPi / 4.0).epsilon(1e-15));
    CHECK(angles[1] == doctest::Approx(kPi).epsilon(1e-15));  // straight left
    CHECK(angles[2] == doctest::Approx(-kPi / 2.0).epsilon(1e-15));
}

TEST_CASE("coincident consecutive landmarks are rejected") {
    LandmarkSet lm;
    lm[5] = {2.0, 3.0};
    lm[6] = {2.0, 3.0};
    const RegionSpec region{"probe", {5, 6}};
    CHECK_THROWS_AS(segment_angles(lm, region), DegenerateSegment);
}

TEST_CASE("texture ROIs are anchored and sized from the inter-ocular distance") {
    const LandmarkSet lm = rois_fixture();
    REQUIRE(interocular_distance(lm) == 100.0);

    const auto rois = texture_rois(lm);
    CHECK(rois[0].x0 == 225); CHECK(rois[0].y0 == 230);
    CHECK(rois[0].w == 50);   CHECK(rois[0].h == 60);

    CHECK(rois[1].x0 == 150); CHECK(rois[1].y0 == 275);
    CHECK(rois[1].w == 30);   CHECK(rois[1].h == 50);

    CHECK(rois[2].x0 == 320); CHECK(rois[2].y0 == 275);
    CHECK(rois[2].w == 30);   CHECK(rois[2].h == 50);

    // cheeks: midpoints of (41,48) and (46,54)
    CHECK(rois[3].x0 == 185); CHECK(rois[3].y0 == 315);
    CHECK(rois[3].w == 50);   CHECK(rois[3].h == 50);
    CHECK(rois[4].x0 == 335); CHECK(rois[4].y0 == 315);
    CHECK(rois[4].w == 50);   CHECK(rois[4].h == 50);
}

TEST_CASE("coincident eye centers make ROI sizing impossible") {
    LandmarkSet lm;
    for (std::size_t i = 36; i <= 47; ++i) lm[i] = {100.0, 100.0};
    CHECK_THROWS_AS(texture_rois(lm), DegenerateFace);
}

TEST_CASE("feature validation rejects out-of-domain values") {
    FeatureVector fv;  // all zeros is valid
    CHECK_NOTHROW(validate_features(fv));

    fv.values[3] = std::nan("");
    CHECK_THROWS_AS(validate_features(fv), Error);

    fv.values[3] = 4.0;  // outside [-pi, pi]
    CHECK_THROWS_AS(validate_features(fv), Error);
    fv.values[3] = 0.0;

    fv.values[30] = 1.5;  // densities live in [0, 1]
    CHECK_THROWS_AS(validate_features(fv), Error);
}

TEST_CASE("extract produces a valid, deterministic 32-vector") {
    const auto sample = fer::testing::make_sample(3, 99);
    const FeatureVector a = extract(sample.image, sample.landmarks);
    const FeatureVector b = extract(sample.image, sample.landmarks);
    CHECK_NOTHROW(validate_features(a));
    for (int i = 0; i < kFeatureCount; ++i) {
        CHECK(std::isfinite(a.values[i]));
        CHECK(a.values[i] == b.values[i]);
    }
    for (int i = kGeometricFeatureCount; i < kFeatureCount; ++i) {
        CHECK(a.values[i] >= 0.0);
        CHECK(a.values[i] <= 1.0);
    }
}

TEST_CASE("normalized geometric features ignore in-plane rotation, scale and shift") {
    std::mt19937_64 rng(20240811);
    std::uniform_real_distribution<double> uangle(-1.2, 1.2);
    std::uniform_real_distribution<double> uscale(0.4, 2.5);
    std::uniform_real_distribution<double> ushift(-300.0, 300.0);

    for (int trial = 0; trial < 200; ++trial) {
        const LandmarkSet face = fer::testing::expression_face(trial % fer::testing::kExpressionCount);
        const auto base = geometric_features(pose_normalize(face));

        const LandmarkSet moved =
            transformed(face, uscale(rng), uangle(rng), ushift(rng), ushift(rng));
        const auto got = geometric_features(pose_normalize(moved));

        for (int i = 0; i < kGeometricFeatureCount; ++i) {
            CHECK(angle_diff(got[i], base[i]) < 1e-9);
        }
    }
}
