#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "omnistereo/camera_model.hpp"
#include "omnistereo/geometry.hpp"
#include "omnistereo/matching.hpp"
#include "omnistereo/triangulation.hpp"

namespace omnistereo {

// Noise sweep reproducing the reference experiment: a fixed target observed
// from two origins, with the right ray direction perturbed by (x, y) over a
// regular grid. Distances in mm.
struct BenchConfig {
    Eigen::Vector3d origin_left{-75.0, 0.0, 0.0};
    Eigen::Vector3d origin_right{75.0, 0.0, 0.0};
    Eigen::Vector3d target{-3000.0, 2000.0, 5000.0};
    double xmin = -0.02;
    double xmax = 0.02;
    double ymin = -0.02;
    double ymax = 0.02;
    double step = 0.0005;
    double e_max_mm = 500.0;

    // Throws InvalidConfig for unordered bounds, nonpositive step or e_max,
    // a target coinciding with an origin, or coinciding origins.
    void validate() const;
};

struct BenchCell {
    double x = 0.0;
    double y = 0.0;
    MismatchZone zone = MismatchZone::SlightlyMismatched;
    double err_pseudo_mm = 0.0;    // signed range error, left origin
    double err_midpoint_mm = 0.0;
    double eucl_pseudo_mm = 0.0;   // Euclidean point error
    double eucl_midpoint_mm = 0.0;
    double skew_mm = 0.0;
    Eigen::Vector3d point_pseudo = Eigen::Vector3d::Zero();
    Eigen::Vector3d point_midpoint = Eigen::Vector3d::Zero();
    bool pass_pseudo = false;      // |err| <= e_max
    bool pass_midpoint = false;
    bool degenerate = false;       // triangulation failed or fell back
};

struct BenchGrid {
    BenchConfig config;
    int nx = 0;
    int ny = 0;
    std::vector<double> xs;  // exact decimal grid coordinates
    std::vector<double> ys;
    std::vector<BenchCell> cells;  // row major, y outer, x inner
    double true_range_mm = 0.0;
    double vergence_rad = 0.0;

    const BenchCell& at(int ix, int iy) const { return cells[iy * nx + ix]; }
};

// Evaluates both triangulation methods on every grid cell. Deterministic;
// cell order is fixed by the (y, x) grid regardless of thread count.
BenchGrid run_noise_grid(const BenchConfig& config);

struct ZoneMethodStats {
    long cells = 0;
    long pass = 0;
    double pass_fraction = 0.0;
    double max_abs_err_passing_mm = 0.0;
};

struct BenchSummary {
    long total_cells = 0;
    long degenerate_cells = 0;
    ZoneMethodStats pseudo[3];    // indexed by MismatchZone
    ZoneMethodStats midpoint[3];
    int total_slices = 0;
    int monotone_slices_pseudo = 0;
    int monotone_slices_midpoint = 0;
    bool all_slices_monotone_pseudo = false;
    // Largest |err(x, y) + err(-x, -y)| of the pseudo range error over cell
    // pairs that both pass the filter; measures how far the sweep is from
    // odd symmetry.
    double symmetry_max_abs_pair_sum_passing_mm = 0.0;
    double true_range_mm = 0.0;
    double vergence_rad = 0.0;
};

// Per-zone, per-method statistics plus slice monotonicity and the symmetry
// diagnostic. Degenerate cells are excluded from every statistic.
BenchSummary summarize(const BenchGrid& grid);

nlohmann::json summary_to_json(const BenchSummary& summary);

// CSV: x,y,zone,err_pseudo_mm,err_midpoint_mm,eucl_pseudo_mm,eucl_midpoint_mm,
// pass_pseudo,pass_midpoint,degenerate. Flags are 0/1; numbers round trip.
void save_bench_csv(const std::string& path, const BenchGrid& grid);

// PGM (P2) image of |err| clipped at e_max, scaled to 0..255; degenerate
// cells render 255. Rows follow the CSV order: first image row is ymin.
void save_heatmap_pgm(const std::string& path, const BenchGrid& grid,
                      TriangulationMethod method);

struct SimulatedPoint {
    int index = 0;               // scene row
    Eigen::Vector3d truth = Eigen::Vector3d::Zero();
    Eigen::Vector3d estimate = Eigen::Vector3d::Zero();
    double error_mm = 0.0;       // |estimate - truth|
    double range_mm = 0.0;       // |estimate - left origin|
    bool accepted = false;       // skew gate at tau
    bool beyond_display_range = false;  // range_mm > display_max_mm
};

struct SimulationReport {
    std::vector<SimulatedPoint> points;
    int skipped = 0;
    long accepted = 0;
    long flagged = 0;            // beyond_display_range count
    double max_error_mm = 0.0;
    double mean_error_mm = 0.0;
};

// Synthesizes matches for the scene through the rig with the given noise and
// seed, triangulates every pair by pseudo-intersection, and compares against
// ground truth. display_max_mm reproduces the depth display cutoff.
SimulationReport simulate_scene(const std::vector<Eigen::Vector3d>& scene,
                                const RigidTransform& left_to_right,
                                const FisheyeIntrinsics& left,
                                const FisheyeIntrinsics& right,
                                const NoiseSpec& noise, uint64_t seed,
                                double tau = kDefaultSkewTau,
                                double display_max_mm = 5000.0);

// CSV: index,x_true,y_true,z_true,x_est,y_est,z_est,error_mm,range_mm,
// accepted,beyond_display_range.
void save_simulation_csv(const std::string& path, const SimulationReport& report);

nlohmann::json simulation_stats_json(const SimulationReport& report);

}  // namespace omnistereo
