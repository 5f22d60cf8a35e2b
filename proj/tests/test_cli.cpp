#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "omnistereo/calibration.hpp"
#include "omnistereo/matching.hpp"
#include "omnistereo/numtext.hpp"
#include "support/test_support.hpp"

using namespace omnistereo;
using testsupport::run_cli;

namespace {

nlohmann::json parse_stdout_json(const std::string& text) {
    return nlohmann::json::parse(text);
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        rows.push_back(split_csv_line(line));
    }
    return rows;
}

}  // namespace

TEST_CASE("cli: zones presets and errors") {
    const auto gecko = run_cli({"zones", "--preset", "gecko"});
    REQUIRE(gecko.exit_code == 0);
    const nlohmann::json j = parse_stdout_json(gecko.output);
    CHECK(j.at("name") == "gecko");
    CHECK(j.at("S").get<double>() == 76.0);
    CHECK(j.at("M").get<double>() == 240.0);
    CHECK(j.at("B").get<double>() == 44.0);
    CHECK(j.at("total_fov").get<double>() == 316.0);

    const auto custom = run_cli({"zones", "--H", "150", "--O", "40"});
    REQUIRE(custom.exit_code == 0);
    const nlohmann::json c = parse_stdout_json(custom.output);
    CHECK(c.at("name") == "custom");
    CHECK(c.at("M").get<double>() == 220.0);

    const auto no_blind = run_cli({"zones", "--H", "196", "--O", "0"});
    CHECK(no_blind.exit_code == 2);
    CHECK(no_blind.output.find("exceeds") != std::string::npos);

    CHECK(run_cli({"zones"}).exit_code == 2);
    CHECK(run_cli({"zones", "--preset", "eagle"}).exit_code == 2);
    CHECK(run_cli({"zones", "--H", "196"}).exit_code == 2);
}

TEST_CASE("cli: no subcommand is a usage error, help succeeds") {
    CHECK(run_cli({}).exit_code == 2);
    CHECK(run_cli({"--help"}).exit_code == 0);
    CHECK(run_cli({"frobnicate"}).exit_code == 2);
}

TEST_CASE("cli: bench emits the documented artifacts deterministically") {
    const std::string dir = testsupport::make_temp_dir();
    const std::vector<std::string> args = {
        "bench",           "--xmin", "-0.002", "--xmax",  "0.002",
        "--ymin",          "-0.002", "--ymax", "0.002",   "--step",
        "0.001",           "--output", dir + "/cells.csv", "--summary",
        dir + "/summary.json", "--heatmap-pseudo", dir + "/heat.pgm"};
    const auto first = run_cli(args);
    REQUIRE(first.exit_code == 0);
    const nlohmann::json summary = parse_stdout_json(first.output);
    CHECK(summary.at("total_cells").get<long>() == 25);
    CHECK(summary.at("degenerate_cells").get<long>() == 0);
    CHECK(summary.at("zones").contains("vertical"));

    const auto rows = read_csv(dir + "/cells.csv");
    CHECK(rows.size() == 26);  // header + 5x5 cells
    CHECK(rows[0][0] == "x");

    const std::string cells_a = testsupport::read_file(dir + "/cells.csv");
    const std::string summary_a = testsupport::read_file(dir + "/summary.json");
    const std::string heat_a = testsupport::read_file(dir + "/heat.pgm");
    CHECK(heat_a.rfind("P2\n5 5\n255\n", 0) == 0);

    const auto second = run_cli(args);
    REQUIRE(second.exit_code == 0);
    CHECK(testsupport::read_file(dir + "/cells.csv") == cells_a);
    CHECK(testsupport::read_file(dir + "/summary.json") == summary_a);
    CHECK(testsupport::read_file(dir + "/heat.pgm") == heat_a);
    CHECK(second.output == first.output);
}

TEST_CASE("cli: default bench covers the full 81x81 grid") {
    const std::string dir = testsupport::make_temp_dir();
    const auto run = run_cli({"bench", "--output", dir + "/cells.csv"});
    REQUIRE(run.exit_code == 0);
    const auto rows = read_csv(dir + "/cells.csv");
    CHECK(rows.size() == 6562);  // header + 6561 data rows
}

TEST_CASE("cli: triangulate recovers a noiseless scene and gates severe pairs") {
    const FisheyeIntrinsics cam = FisheyeIntrinsics::default_synthetic();
    const RigidTransform rig = testsupport::make_rig(0.0);
    const std::string dir = testsupport::make_temp_dir();
    const std::string rig_path = dir + "/rig.json";
    save_rig_json(rig_path, rig);

    const std::vector<Eigen::Vector3d> scene{{-2925.0, 2000.0, 5000.0},
                                             {0.0, 500.0, 2000.0},
                                             {300.0, -200.0, 1200.0},
                                             {-400.0, 100.0, 3500.0},
                                             {50.0, 50.0, 800.0}};
    std::mt19937_64 rng(42u);
    const SynthesisResult syn =
        synthesize_matches(scene, rig, cam, cam, NoiseSpec::none(), rng);
    REQUIRE(syn.matches.pairs.size() == scene.size());
    const std::string matches_path = dir + "/matches.csv";
    save_matches(matches_path, syn.matches);

    const std::string cloud_path = dir + "/cloud.csv";
    const auto run = run_cli({"triangulate", "--rig", rig_path, "--matches", matches_path,
                              "--output", cloud_path});
    REQUIRE(run.exit_code == 0);
    const nlohmann::json stats = parse_stdout_json(run.output);
    CHECK(stats.at("pairs").get<int>() == 5);
    CHECK(stats.at("accepted").get<int>() == 5);

    const auto rows = read_csv(cloud_path);
    REQUIRE(rows.size() == scene.size() + 1);
    CHECK(rows[0] == std::vector<std::string>{"uL", "vL", "uR", "vR", "X", "Y", "Z",
                                              "skew_mm", "accepted"});
    for (size_t i = 1; i < rows.size(); ++i) {
        const Eigen::Vector3d got(parse_double(rows[i][4], "X"),
                                  parse_double(rows[i][5], "Y"),
                                  parse_double(rows[i][6], "Z"));
        CHECK((got - scene[i - 1]).norm() < 1e-3);
        CHECK(rows[i][8] == "1");
    }

    // A vertical mismatch bends the right ray out of the epipolar plane, so
    // the skew gate rejects it; the row is still written.
    std::mt19937_64 rng2(42u);
    const SynthesisResult severe = synthesize_matches(
        {scene[0]}, rig, cam, cam, NoiseSpec::direction_xy(0.0, 0.02), rng2);
    save_matches(matches_path, severe.matches);
    const auto gated = run_cli({"triangulate", "--rig", rig_path, "--matches", matches_path,
                                "--output", cloud_path});
    REQUIRE(gated.exit_code == 0);
    const auto gated_rows = read_csv(cloud_path);
    REQUIRE(gated_rows.size() == 2);
    CHECK(gated_rows[1][8] == "0");
    CHECK(parse_stdout_json(gated.output).at("accepted").get<int>() == 0);

    // A purely horizontal mismatch keeps the rays coplanar: the skew gate has
    // nothing to measure and accepts the pair despite the huge range error.
    std::mt19937_64 rng3(42u);
    const SynthesisResult horizontal = synthesize_matches(
        {scene[0]}, rig, cam, cam, NoiseSpec::direction_xy(0.02, 0.0), rng3);
    save_matches(matches_path, horizontal.matches);
    const auto blind = run_cli({"triangulate", "--rig", rig_path, "--matches", matches_path,
                                "--output", cloud_path});
    REQUIRE(blind.exit_code == 0);
    CHECK(parse_stdout_json(blind.output).at("accepted").get<int>() == 1);

    // Parse failures exit 2.
    testsupport::write_file(matches_path, "");
    CHECK(run_cli({"triangulate", "--rig", rig_path, "--matches", matches_path,
                   "--output", cloud_path})
              .exit_code == 2);
}

TEST_CASE("cli: calibrate reproduces the rig from noiseless corners") {
    const BoardSpec board;
    const FisheyeIntrinsics cam = FisheyeIntrinsics::default_synthetic();
    const RigidTransform rig = testsupport::make_rig(30.0);
    const std::string dir = testsupport::make_temp_dir();
    const std::string corners_path = dir + "/corners.csv";
    save_corner_csv(corners_path, testsupport::synthetic_paired_views(rig, board, cam),
                    board);

    const std::string report_path = dir + "/report.json";
    const auto run =
        run_cli({"calibrate", "--corners", corners_path, "--output", report_path});
    REQUIRE(run.exit_code == 0);
    const nlohmann::json report = parse_stdout_json(run.output);
    REQUIRE(report.at("rotation").size() == 9);
    Eigen::Matrix3d rot;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            rot(r, c) = report.at("rotation")[3 * r + c].get<double>();
        }
    }
    const Eigen::Vector3d t(report.at("translation_mm")[0].get<double>(),
                            report.at("translation_mm")[1].get<double>(),
                            report.at("translation_mm")[2].get<double>());
    CHECK((t - rig.translation).norm() < 1e-4);
    CHECK(rotation_angle(rot * rig.rotation.transpose()) < 1e-7);
    CHECK(report.at("rms_mm").get<double>() < 1e-6);

    // The saved report parses back as a rig.
    const RigidTransform loaded = load_rig_json(report_path);
    CHECK((loaded.translation - t).norm() < 1e-12);

    // Missing corner file and one-sided views are input errors.
    CHECK(run_cli({"calibrate", "--corners", dir + "/nope.csv"}).exit_code == 2);
    std::string one_sided = "view,camera,i,j,u,v\n";
    const auto views = testsupport::synthetic_paired_views(rig, board, cam, 0.0, nullptr, 1);
    for (int i = 0; i < board.rows; ++i) {
        for (int j = 0; j < board.cols; ++j) {
            const PixelPoint& px = views[0].left.pixels[i * board.cols + j];
            one_sided += "0,L," + std::to_string(i) + "," + std::to_string(j) + "," +
                         to_decimal_string(px.u) + "," + to_decimal_string(px.v) + "\n";
        }
    }
    testsupport::write_file(corners_path, one_sided);
    const auto missing_side = run_cli({"calibrate", "--corners", corners_path});
    CHECK(missing_side.exit_code == 2);
    CHECK(missing_side.output.find("error") != std::string::npos);
}

TEST_CASE("cli: seeded simulate runs are byte-identical") {
    const std::string dir = testsupport::make_temp_dir();
    const std::string scene_path = dir + "/scene.csv";
    std::ostringstream scene;
    scene << "x,y,z\n";
    std::mt19937_64 rng(11u);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int i = 0; i < 10; ++i) {
        scene << to_decimal_string(500.0 * uni(rng)) << ','
              << to_decimal_string(500.0 * uni(rng)) << ','
              << to_decimal_string(1500.0 + 700.0 * uni(rng)) << '\n';
    }
    testsupport::write_file(scene_path, scene.str());

    const std::vector<std::string> args = {
        "simulate", "--scene", scene_path,          "--pixel-sigma", "0.5",
        "--seed",   "7",       "--output",          dir + "/points.csv",
        "--stats",  dir + "/stats.json"};
    const auto first = run_cli(args);
    REQUIRE(first.exit_code == 0);
    const nlohmann::json stats = parse_stdout_json(first.output);
    CHECK(stats.at("points").get<int>() == 10);
    CHECK(stats.at("skipped").get<int>() == 0);

    const std::string points_a = testsupport::read_file(dir + "/points.csv");
    const std::string stats_a = testsupport::read_file(dir + "/stats.json");
    const auto second = run_cli(args);
    REQUIRE(second.exit_code == 0);
    CHECK(testsupport::read_file(dir + "/points.csv") == points_a);
    CHECK(testsupport::read_file(dir + "/stats.json") == stats_a);
    CHECK(second.output == first.output);

    // Noise flags are mutually exclusive.
    CHECK(run_cli({"simulate", "--scene", scene_path, "--pixel-sigma", "0.5",
                   "--dir-noise", "0.01,0"})
              .exit_code == 2);
    // A different seed changes the artifact.
    const auto third = run_cli({"simulate", "--scene", scene_path, "--pixel-sigma", "0.5",
                                "--seed", "8", "--output", dir + "/points.csv"});
    REQUIRE(third.exit_code == 0);
    CHECK(testsupport::read_file(dir + "/points.csv") != points_a);
}
