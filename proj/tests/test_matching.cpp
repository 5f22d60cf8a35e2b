#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "omnistereo/errors.hpp"
#include "omnistereo/matching.hpp"
#include "omnistereo/triangulation.hpp"
#include "support/test_support.hpp"

using namespace omnistereo;

namespace {

// Scene point placed so the left/right relative geometry equals the reference
// benchmark: cameras 150 mm apart along x, target range 6128.26 mm.
const Eigen::Vector3d kScenePoint(-2925.0, 2000.0, 5000.0);

TriangulationResult triangulate_pair(const MatchPair& pair, const RigidTransform& rig,
                                     const FisheyeIntrinsics& left,
                                     const FisheyeIntrinsics& right) {
    const RigidTransform right_to_left = rig.inverse();
    const Ray ray_left{Eigen::Vector3d::Zero(), left.unproject(pair.left)};
    const Ray ray_right =
        right_to_left.apply(Ray{Eigen::Vector3d::Zero(), right.unproject(pair.right)});
    return triangulate_pseudo(ray_left, ray_right);
}

}  // namespace

TEST_CASE("match CSV round trips exactly") {
    MatchSet ms;
    ms.pairs.push_back({{640.123456789, 512.0}, {655.5, 511.75}, 0.875});
    ms.pairs.push_back({{100.0, 200.0}, {101.0, 201.0}, 1.0});
    ms.pairs.push_back({{1.0 / 3.0, 2.0 / 3.0}, {0.1, 0.2}, 1.0 / 3.0});
    const std::string dir = testsupport::make_temp_dir();
    const std::string path = dir + "/matches.csv";
    save_matches(path, ms);
    const MatchSet back = load_matches(path);
    CHECK(back == ms);
    std::remove(path.c_str());
}

TEST_CASE("confidence column is optional and defaults to 1") {
    const std::string dir = testsupport::make_temp_dir();
    const std::string path = dir + "/m.csv";
    testsupport::write_file(path, "uL,vL,uR,vR\n640,640,641,642\n10,20,30,40\n");
    const MatchSet ms = load_matches(path);
    REQUIRE(ms.pairs.size() == 2);
    CHECK(ms.pairs[0].confidence == 1.0);
    CHECK(ms.pairs[0].left.u == 640.0);
    CHECK(ms.pairs[1].right.v == 40.0);
    std::remove(path.c_str());
}

TEST_CASE("match CSV parse failures carry context") {
    const std::string dir = testsupport::make_temp_dir();
    const std::string path = dir + "/bad.csv";

    testsupport::write_file(path, "");
    CHECK_THROWS_AS(load_matches(path), ParseError);

    testsupport::write_file(path, "uL,vL,uR,vR,confidence\n");
    CHECK_THROWS_AS(load_matches(path), ParseError);  // no data rows

    testsupport::write_file(path, "uL,vL,wrong,vR\n1,2,3,4\n");
    CHECK_THROWS_AS(load_matches(path), ParseError);

    testsupport::write_file(path, "uL,vL,uR,vR\n1,2,3\n");
    CHECK_THROWS_AS(load_matches(path), ParseError);

    testsupport::write_file(path, "uL,vL,uR,vR\n1,2,three,4\n");
    CHECK_THROWS_AS(load_matches(path), ParseError);

    testsupport::write_file(path, "uL,vL,uR,vR,confidence\n1,2,3,4,1.5\n");
    CHECK_THROWS_AS(load_matches(path), ParseError);

    testsupport::write_file(path, "uL,vL,uR,vR,confidence\n1,2,3,4,-0.1\n");
    CHECK_THROWS_AS(load_matches(path), ParseError);

    CHECK_THROWS_AS(load_matches(dir + "/does_not_exist.csv"), ParseError);
    std::remove(path.c_str());
}

TEST_CASE("bounded loading rejects pixels outside the image circle") {
    const FisheyeIntrinsics cam = FisheyeIntrinsics::default_synthetic();
    const std::string dir = testsupport::make_temp_dir();
    const std::string path = dir + "/oob.csv";
    // Left pixel far beyond the rim radius.
    testsupport::write_file(path, "uL,vL,uR,vR\n5000,640,641,640\n");
    CHECK_THROWS_AS(load_matches(path, cam, cam), OutOfBoundsPixel);
    // In-bounds rows load fine through the same overload.
    testsupport::write_file(path, "uL,vL,uR,vR\n640,640,641,640\n");
    CHECK(load_matches(path, cam, cam).pairs.size() == 1);
    std::remove(path.c_str());
}

TEST_CASE("noiseless synthesis reproduces the scene through triangulation") {
    const FisheyeIntrinsics cam = FisheyeIntrinsics::default_synthetic();
    const RigidTransform rig = testsupport::make_rig(0.0);
    std::mt19937_64 rng(42u);
    const std::vector<Eigen::Vector3d> scene{kScenePoint, {500.0, -300.0, 2500.0},
                                             {-100.0, 50.0, 900.0}};
    const SynthesisResult syn =
        synthesize_matches(scene, rig, cam, cam, NoiseSpec::none(), rng);
    REQUIRE(syn.matches.pairs.size() == 3);
    CHECK(syn.skipped == 0);
    for (size_t i = 0; i < syn.matches.pairs.size(); ++i) {
        const TriangulationResult tri =
            triangulate_pair(syn.matches.pairs[i], rig, cam, cam);
        CHECK((tri.point - scene[syn.source_index[i]]).norm() < 1e-3);
    }
}

TEST_CASE("direction noise (0.02, 0) drives the range error beyond the filter") {
    const FisheyeIntrinsics cam = FisheyeIntrinsics::default_synthetic();
    const RigidTransform rig = testsupport::make_rig(0.0);
    std::mt19937_64 rng(42u);
    const SynthesisResult syn = synthesize_matches(
        {kScenePoint}, rig, cam, cam, NoiseSpec::direction_xy(0.02, 0.0), rng);
    REQUIRE(syn.matches.pairs.size() == 1);
    const TriangulationResult tri = triangulate_pair(syn.matches.pairs[0], rig, cam, cam);
    const double err = (tri.point - Eigen::Vector3d::Zero()).norm() - kScenePoint.norm();
    CHECK(std::abs(err) > 500.0);
    // Agrees with the frozen oracle value for this cell; the pixel round trip
    // through both cameras costs a few nanoradians of direction.
    CHECK(err == doctest::Approx(29261.406779616987).epsilon(2e-5));
}

TEST_CASE("points outside both polar ranges are skipped, not errors") {
    const FisheyeIntrinsics cam = FisheyeIntrinsics::default_synthetic();
    const RigidTransform rig = testsupport::make_rig(0.0);
    std::mt19937_64 rng(1u);
    const SynthesisResult syn = synthesize_matches(
        {Eigen::Vector3d(0.0, 0.0, -1000.0)}, rig, cam, cam, NoiseSpec::none(), rng);
    CHECK(syn.matches.pairs.empty());
    CHECK(syn.skipped == 1);

    CHECK_THROWS_AS(
        synthesize_matches({}, rig, cam, cam, NoiseSpec::none(), rng), EmptyScene);
}

TEST_CASE("pixel noise perturbs every coordinate but keeps the pair count") {
    const FisheyeIntrinsics cam = FisheyeIntrinsics::default_synthetic();
    const RigidTransform rig = testsupport::make_rig(0.0);
    std::mt19937_64 rng_a(9u);
    std::mt19937_64 rng_b(9u);
    const std::vector<Eigen::Vector3d> scene{kScenePoint, {200.0, 100.0, 3000.0}};
    const SynthesisResult clean =
        synthesize_matches(scene, rig, cam, cam, NoiseSpec::none(), rng_a);
    const SynthesisResult noisy =
        synthesize_matches(scene, rig, cam, cam, NoiseSpec::pixel_sigma(0.5), rng_b);
    REQUIRE(noisy.matches.pairs.size() == clean.matches.pairs.size());
    for (size_t i = 0; i < clean.matches.pairs.size(); ++i) {
        CHECK(noisy.matches.pairs[i].left.u != clean.matches.pairs[i].left.u);
        CHECK(noisy.matches.pairs[i].right.v != clean.matches.pairs[i].right.v);
        CHECK(std::abs(noisy.matches.pairs[i].left.u - clean.matches.pairs[i].left.u) < 5.0);
    }
    // Same seed, same draw sequence: synthesis is reproducible.
    std::mt19937_64 rng_c(9u);
    const SynthesisResult again =
        synthesize_matches(scene, rig, cam, cam, NoiseSpec::pixel_sigma(0.5), rng_c);
    CHECK(again.matches == noisy.matches);
}

TEST_CASE("scene CSV loads points and validates its header") {
    const std::string dir = testsupport::make_temp_dir();
    const std::string path = dir + "/scene.csv";
    testsupport::write_file(path, "x,y,z\n-2925,2000,5000\n1,2.5,3\n");
    const auto scene = load_scene_csv(path);
    REQUIRE(scene.size() == 2);
    CHECK(scene[0] == Eigen::Vector3d(-2925.0, 2000.0, 5000.0));
    CHECK(scene[1] == Eigen::Vector3d(1.0, 2.5, 3.0));

    testsupport::write_file(path, "a,b,c\n1,2,3\n");
    CHECK_THROWS_AS(load_scene_csv(path), ParseError);
    testsupport::write_file(path, "x,y,z\n");
    CHECK_THROWS_AS(load_scene_csv(path), EmptyScene);
    std::remove(path.c_str());
}
