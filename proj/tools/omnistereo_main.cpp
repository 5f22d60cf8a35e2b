#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "omnistereo/calibration.hpp"
#include "omnistereo/camera_model.hpp"
#include "omnistereo/fov_zones.hpp"
#include "omnistereo/matching.hpp"
#include "omnistereo/numtext.hpp"
#include "omnistereo/simbench.hpp"
#include "omnistereo/triangulation.hpp"

namespace {

using namespace omnistereo;

FisheyeIntrinsics load_or_default(const std::string& path) {
    if (path.empty()) {
        return FisheyeIntrinsics::default_synthetic();
    }
    return FisheyeIntrinsics::load(path);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write file: " + path);
    }
    out << text;
}

void run_calibrate(const std::string& left_path, const std::string& right_path,
                   const std::string& corners_path, int rows, int cols,
                   double square_size, const std::string& output) {
    const FisheyeIntrinsics left = load_or_default(left_path);
    const FisheyeIntrinsics right = load_or_default(right_path);
    BoardSpec board{rows, cols, square_size};
    board.validate();
    const auto views = load_corner_csv(corners_path, board);
    const ExtrinsicCalibration calib = calibrate_extrinsics(views, board, left, right);
    if (!output.empty()) {
        save_calibration_report(output, calib);
    }
    std::cout << calibration_report_json(calib).dump(1) << "\n";
}

void run_triangulate(const std::string& left_path, const std::string& right_path,
                     const std::string& rig_path, const std::string& matches_path,
                     double tau, const std::string& output) {
    const FisheyeIntrinsics left = load_or_default(left_path);
    const FisheyeIntrinsics right = load_or_default(right_path);
    const RigidTransform rig = load_rig_json(rig_path);
    const MatchSet matches = load_matches(matches_path, left, right);
    const RigidTransform right_to_left = rig.inverse();

    std::ofstream out(output);
    if (!out) {
        throw Error("cannot write point cloud file: " + output);
    }
    out << "uL,vL,uR,vR,X,Y,Z,skew_mm,accepted\n";
    long accepted_count = 0;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const MatchPair& pair : matches.pairs) {
        const Ray ray_left{Eigen::Vector3d::Zero(), left.unproject(pair.left)};
        const Ray ray_right =
            right_to_left.apply(Ray{Eigen::Vector3d::Zero(), right.unproject(pair.right)});
        Eigen::Vector3d point(nan, nan, nan);
        double skew = nan;
        bool accepted = false;
        try {
            const TriangulationResult tri = triangulate_pseudo(ray_left, ray_right);
            point = tri.point;
            skew = tri.skew_distance;
            accepted = runtime_accept(tri, tau);
        } catch (const ParallelRays&) {
        } catch (const ParallelProjectedLines&) {
        }
        accepted_count += accepted ? 1 : 0;
        out << to_decimal_string(pair.left.u) << ',' << to_decimal_string(pair.left.v)
            << ',' << to_decimal_string(pair.right.u) << ','
            << to_decimal_string(pair.right.v) << ',' << to_decimal_string(point.x())
            << ',' << to_decimal_string(point.y()) << ',' << to_decimal_string(point.z())
            << ',' << to_decimal_string(skew) << ',' << (accepted ? '1' : '0') << '\n';
    }
    const nlohmann::json stats{
        {"pairs", matches.pairs.size()},
        {"accepted", accepted_count},
    };
    std::cout << stats.dump(1) << "\n";
}

void run_zones(const std::string& preset, const std::optional<double>& h,
               const std::optional<double>& o, const std::string& output) {
    FovZones z;
    if (!preset.empty()) {
        z = zones_for_preset(preset);
    } else if (h.has_value() && o.has_value()) {
        z = compute_zones(*h, *o);
    } else {
        throw InvalidArgument("zones needs --preset or both --H and --O");
    }
    const std::string text = zones_to_json(z).dump(1) + "\n";
    if (!output.empty()) {
        write_text(output, text);
    }
    std::cout << text;
}

void run_bench(const BenchConfig& config, const std::string& output,
               const std::string& heatmap_pseudo, const std::string& heatmap_midpoint,
               const std::string& summary_path) {
    const BenchGrid grid = run_noise_grid(config);
    if (!output.empty()) {
        save_bench_csv(output, grid);
    }
    if (!heatmap_pseudo.empty()) {
        save_heatmap_pgm(heatmap_pseudo, grid, TriangulationMethod::PseudoIntersection);
    }
    if (!heatmap_midpoint.empty()) {
        save_heatmap_pgm(heatmap_midpoint, grid, TriangulationMethod::Midpoint);
    }
    const std::string text = summary_to_json(summarize(grid)).dump(1) + "\n";
    if (!summary_path.empty()) {
        write_text(summary_path, text);
    }
    std::cout << text;
}

void run_simulate(const std::string& scene_path, const std::string& rig_path,
                  const std::string& left_path, const std::string& right_path,
                  const std::optional<double>& pixel_sigma,
                  const std::vector<double>& dir_noise, uint64_t seed, double tau,
                  double display_max, const std::string& output,
                  const std::string& stats_path) {
    const FisheyeIntrinsics left = load_or_default(left_path);
    const FisheyeIntrinsics right = load_or_default(right_path);
    RigidTransform rig;
    if (rig_path.empty()) {
        // Default synthetic rig: parallel cameras 150 mm apart, the right
        // camera offset along +x in the left frame.
        rig.translation = Eigen::Vector3d(-150.0, 0.0, 0.0);
    } else {
        rig = load_rig_json(rig_path);
    }
    const auto scene = load_scene_csv(scene_path);

    NoiseSpec noise = NoiseSpec::none();
    if (pixel_sigma.has_value() && !dir_noise.empty()) {
        throw InvalidArgument("choose one of --pixel-sigma and --dir-noise");
    }
    if (pixel_sigma.has_value()) {
        if (*pixel_sigma < 0.0) {
            throw InvalidArgument("--pixel-sigma must be nonnegative");
        }
        noise = NoiseSpec::pixel_sigma(*pixel_sigma);
    } else if (!dir_noise.empty()) {
        noise = NoiseSpec::direction_xy(dir_noise[0], dir_noise[1]);
    }

    const SimulationReport report =
        simulate_scene(scene, rig, left, right, noise, seed, tau, display_max);
    if (!output.empty()) {
        save_simulation_csv(output, report);
    }
    const std::string text = simulation_stats_json(report).dump(1) + "\n";
    if (!stats_path.empty()) {
        write_text(stats_path, text);
    }
    std::cout << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"geometry toolkit for nonrectified omnidirectional stereo"};
    app.require_subcommand(1);

    // calibrate
    auto* calibrate = app.add_subcommand(
        "calibrate", "estimate the left-to-right rig pose from board corners");
    std::string cal_left, cal_right, cal_corners, cal_output;
    int cal_rows = 6, cal_cols = 9;
    double cal_square = 60.0;
    calibrate->add_option("--left-intrinsics", cal_left, "left camera JSON (default synthetic)");
    calibrate->add_option("--right-intrinsics", cal_right, "right camera JSON (default synthetic)");
    calibrate->add_option("--corners", cal_corners, "corner CSV: view,camera,i,j,u,v")
        ->required();
    calibrate->add_option("--rows", cal_rows, "board corner rows");
    calibrate->add_option("--cols", cal_cols, "board corner cols");
    calibrate->add_option("--square-size", cal_square, "board square size in mm");
    calibrate->add_option("--output", cal_output, "report JSON path");
    calibrate->callback([&]() {
        run_calibrate(cal_left, cal_right, cal_corners, cal_rows, cal_cols, cal_square,
                      cal_output);
    });

    // triangulate
    auto* triangulate = app.add_subcommand(
        "triangulate", "triangulate a match file into a point cloud");
    std::string tri_left, tri_right, tri_rig, tri_matches, tri_output;
    double tri_tau = kDefaultSkewTau;
    triangulate->add_option("--left-intrinsics", tri_left, "left camera JSON (default synthetic)");
    triangulate->add_option("--right-intrinsics", tri_right, "right camera JSON (default synthetic)");
    triangulate->add_option("--rig", tri_rig, "rig JSON (rotation + translation_mm)")
        ->required();
    triangulate->add_option("--matches", tri_matches, "match CSV: uL,vL,uR,vR[,confidence]")
        ->required();
    triangulate->add_option("--tau", tri_tau, "skew acceptance ratio");
    triangulate->add_option("--output", tri_output, "point cloud CSV path")->required();
    triangulate->callback([&]() {
        run_triangulate(tri_left, tri_right, tri_rig, tri_matches, tri_tau, tri_output);
    });

    // zones
    auto* zones = app.add_subcommand("zones", "horizontal coverage zones of a rig");
    std::string zones_preset, zones_output;
    std::optional<double> zones_h, zones_o;
    zones->add_option("--preset", zones_preset, "gecko, spider, human, or stick_bug");
    zones->add_option("--H,--fov", zones_h, "horizontal field of view, degrees");
    zones->add_option("--O,--overlap", zones_o, "binocular overlap, degrees");
    zones->add_option("--output", zones_output, "also write the JSON here");
    zones->callback([&]() { run_zones(zones_preset, zones_h, zones_o, zones_output); });

    // bench
    auto* bench = app.add_subcommand(
        "bench", "direction-noise sweep over both triangulation methods");
    BenchConfig bench_config;
    std::string bench_output, bench_hm_pseudo, bench_hm_mid, bench_summary;
    std::vector<double> bench_origin_left, bench_origin_right, bench_target;
    bench->add_option("--xmin", bench_config.xmin, "noise grid x lower bound");
    bench->add_option("--xmax", bench_config.xmax, "noise grid x upper bound");
    bench->add_option("--ymin", bench_config.ymin, "noise grid y lower bound");
    bench->add_option("--ymax", bench_config.ymax, "noise grid y upper bound");
    bench->add_option("--step", bench_config.step, "noise grid step");
    bench->add_option("--e-max", bench_config.e_max_mm, "error filter bound, mm");
    bench->add_option("--origin-left", bench_origin_left, "left origin x,y,z mm")
        ->delimiter(',')
        ->expected(3);
    bench->add_option("--origin-right", bench_origin_right, "right origin x,y,z mm")
        ->delimiter(',')
        ->expected(3);
    bench->add_option("--target", bench_target, "target point x,y,z mm")
        ->delimiter(',')
        ->expected(3);
    bench->add_option("--output", bench_output, "cell CSV path");
    bench->add_option("--heatmap-pseudo", bench_hm_pseudo, "P2 graymap of |err| (pseudo)");
    bench->add_option("--heatmap-midpoint", bench_hm_mid, "P2 graymap of |err| (midpoint)");
    bench->add_option("--summary", bench_summary, "summary JSON path");
    bench->callback([&]() {
        if (!bench_origin_left.empty()) {
            bench_config.origin_left =
                Eigen::Vector3d(bench_origin_left[0], bench_origin_left[1], bench_origin_left[2]);
        }
        if (!bench_origin_right.empty()) {
            bench_config.origin_right = Eigen::Vector3d(
                bench_origin_right[0], bench_origin_right[1], bench_origin_right[2]);
        }
        if (!bench_target.empty()) {
            bench_config.target =
                Eigen::Vector3d(bench_target[0], bench_target[1], bench_target[2]);
        }
        run_bench(bench_config, bench_output, bench_hm_pseudo, bench_hm_mid, bench_summary);
    });

    // simulate
    auto* simulate = app.add_subcommand(
        "simulate", "synthesize matches for a scene and report depth errors");
    std::string sim_scene, sim_rig, sim_left, sim_right, sim_output, sim_stats;
    std::optional<double> sim_pixel_sigma;
    std::vector<double> sim_dir_noise;
    uint64_t sim_seed = 42;
    double sim_tau = kDefaultSkewTau;
    double sim_display_max = 5000.0;
    simulate->add_option("--scene", sim_scene, "scene CSV: x,y,z in mm")->required();
    simulate->add_option("--rig", sim_rig,
                         "rig JSON (default: parallel cameras, 150 mm baseline)");
    simulate->add_option("--left-intrinsics", sim_left, "left camera JSON (default synthetic)");
    simulate->add_option("--right-intrinsics", sim_right, "right camera JSON (default synthetic)");
    simulate->add_option("--pixel-sigma", sim_pixel_sigma, "Gaussian pixel noise sigma");
    simulate->add_option("--dir-noise", sim_dir_noise, "right ray direction offset x,y")
        ->delimiter(',')
        ->expected(2);
    simulate->add_option("--seed", sim_seed, "noise RNG seed");
    simulate->add_option("--tau", sim_tau, "skew acceptance ratio");
    simulate->add_option("--display-max", sim_display_max, "depth display cutoff, mm");
    simulate->add_option("--output", sim_output, "per-point CSV path");
    simulate->add_option("--stats", sim_stats, "stats JSON path");
    simulate->callback([&]() {
        run_simulate(sim_scene, sim_rig, sim_left, sim_right, sim_pixel_sigma,
                     sim_dir_noise, sim_seed, sim_tau, sim_display_max, sim_output,
                     sim_stats);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const OutOfBoundsPixel& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const EmptyScene& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InsufficientViews& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const UnknownPreset& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidOverlap& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const CoverageExceeds360& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidConfig& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidIntrinsics& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidRotation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DivergedOptimization& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const DegenerateGeometry& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
