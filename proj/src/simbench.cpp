#include "omnistereo/simbench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "omnistereo/numtext.hpp"
#include "omnistereo/parallel.hpp"

namespace omnistereo {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Decimal axis in units of 1e-7, so grid coordinates equal their decimal
// literals bitwise and zone boundaries classify exactly.
struct DecimalAxis {
    bool exact = false;
    long long base = 0;
    long long step = 0;
};

bool to_scaled(double v, long long& out) {
    const double scaled = v * 1e7;
    if (!(std::abs(scaled) < 9e15)) {
        return false;
    }
    const long long rounded = std::llround(scaled);
    if (std::abs(scaled - static_cast<double>(rounded)) > 1e-6) {
        return false;
    }
    out = rounded;
    return true;
}

std::vector<double> axis_coordinates(double lo, double hi, double step) {
    long long slo = 0;
    long long shi = 0;
    long long sstep = 0;
    std::vector<double> out;
    if (to_scaled(lo, slo) && to_scaled(hi, shi) && to_scaled(step, sstep) && sstep > 0) {
        const long long count = (shi - slo) / sstep + 1;
        out.reserve(static_cast<size_t>(count));
        for (long long i = 0; i < count; ++i) {
            out.push_back(static_cast<double>(slo + i * sstep) / 1e7);
        }
        return out;
    }
    const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
    out.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        out.push_back(lo + i * step);
    }
    return out;
}

}  // namespace

void BenchConfig::validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw InvalidConfig("grid step must be positive");
    }
    if (!(xmin <= xmax) || !(ymin <= ymax)) {
        throw InvalidConfig("grid bounds must be ordered");
    }
    if (!(e_max_mm > 0.0)) {
        throw InvalidConfig("error filter e_max must be positive");
    }
    if ((origin_left - origin_right).norm() == 0.0) {
        throw InvalidConfig("camera origins coincide");
    }
    if ((target - origin_left).norm() == 0.0 || (target - origin_right).norm() == 0.0) {
        throw InvalidConfig("target coincides with a camera origin");
    }
}

BenchGrid run_noise_grid(const BenchConfig& config) {
    config.validate();

    BenchGrid grid;
    grid.config = config;
    grid.xs = axis_coordinates(config.xmin, config.xmax, config.step);
    grid.ys = axis_coordinates(config.ymin, config.ymax, config.step);
    grid.nx = static_cast<int>(grid.xs.size());
    grid.ny = static_cast<int>(grid.ys.size());
    grid.true_range_mm = (config.target - config.origin_left).norm();
    grid.vergence_rad =
        angle_between(config.target - config.origin_left, config.target - config.origin_right);

    const Ray left = Ray::through(config.origin_left, config.target);
    const Eigen::Vector3d dir_right_exact =
        (config.target - config.origin_right).normalized();

    const int total = grid.nx * grid.ny;
    grid.cells.assign(static_cast<size_t>(total), BenchCell{});
    parallel_for(total, [&](int idx) {
        const int ix = idx % grid.nx;
        const int iy = idx / grid.nx;
        BenchCell& cell = grid.cells[static_cast<size_t>(idx)];
        cell.x = grid.xs[static_cast<size_t>(ix)];
        cell.y = grid.ys[static_cast<size_t>(iy)];
        cell.zone = classify_mismatch(cell.x, cell.y);
        cell.err_pseudo_mm = kNan;
        cell.err_midpoint_mm = kNan;
        cell.eucl_pseudo_mm = kNan;
        cell.eucl_midpoint_mm = kNan;
        cell.skew_mm = kNan;
        cell.point_pseudo = Eigen::Vector3d::Constant(kNan);
        cell.point_midpoint = Eigen::Vector3d::Constant(kNan);

        Ray right;
        try {
            right = Ray{config.origin_right,
                        perturb_direction(dir_right_exact, cell.x, cell.y)};
            const TriangulationResult mid = triangulate_midpoint(left, right);
            cell.point_midpoint = mid.point;
            cell.err_midpoint_mm = mid.range_left - grid.true_range_mm;
            cell.eucl_midpoint_mm = (mid.point - config.target).norm();
            cell.skew_mm = mid.skew_distance;

            const TriangulationResult pseudo = triangulate_pseudo(left, right);
            if (pseudo.degenerate_plane) {
                cell.degenerate = true;
                return;
            }
            cell.point_pseudo = pseudo.point;
            cell.err_pseudo_mm = pseudo.range_left - grid.true_range_mm;
            cell.eucl_pseudo_mm = (pseudo.point - config.target).norm();
        } catch (const Error&) {
            cell.degenerate = true;
            return;
        }
        cell.pass_pseudo = std::abs(cell.err_pseudo_mm) <= config.e_max_mm;
        cell.pass_midpoint = std::abs(cell.err_midpoint_mm) <= config.e_max_mm;
    });
    return grid;
}

namespace {

// A slice is monotone when its consecutive differences never change sign
// beyond a 1e-9 mm allowance; degenerate cells are skipped.
bool slice_monotone(const BenchGrid& grid, int iy, bool pseudo) {
    bool nondecreasing = true;
    bool nonincreasing = true;
    bool have_prev = false;
    double prev = 0.0;
    for (int ix = 0; ix < grid.nx; ++ix) {
        const BenchCell& cell = grid.at(ix, iy);
        if (cell.degenerate) {
            continue;
        }
        const double err = pseudo ? cell.err_pseudo_mm : cell.err_midpoint_mm;
        if (have_prev) {
            const double diff = err - prev;
            if (diff < -1e-9) {
                nondecreasing = false;
            }
            if (diff > 1e-9) {
                nonincreasing = false;
            }
        }
        prev = err;
        have_prev = true;
    }
    return nondecreasing || nonincreasing;
}

}  // namespace

BenchSummary summarize(const BenchGrid& grid) {
    BenchSummary s;
    s.total_cells = grid.nx * static_cast<long>(grid.ny);
    s.true_range_mm = grid.true_range_mm;
    s.vergence_rad = grid.vergence_rad;

    for (const BenchCell& cell : grid.cells) {
        const int z = static_cast<int>(cell.zone);
        ++s.pseudo[z].cells;
        ++s.midpoint[z].cells;
        if (cell.degenerate) {
            ++s.degenerate_cells;
            continue;
        }
        if (cell.pass_pseudo) {
            ++s.pseudo[z].pass;
            s.pseudo[z].max_abs_err_passing_mm =
                std::max(s.pseudo[z].max_abs_err_passing_mm, std::abs(cell.err_pseudo_mm));
        }
        if (cell.pass_midpoint) {
            ++s.midpoint[z].pass;
            s.midpoint[z].max_abs_err_passing_mm =
                std::max(s.midpoint[z].max_abs_err_passing_mm,
                         std::abs(cell.err_midpoint_mm));
        }
    }
    for (int z = 0; z < 3; ++z) {
        if (s.pseudo[z].cells > 0) {
            s.pseudo[z].pass_fraction =
                static_cast<double>(s.pseudo[z].pass) / s.pseudo[z].cells;
            s.midpoint[z].pass_fraction =
                static_cast<double>(s.midpoint[z].pass) / s.midpoint[z].cells;
        }
    }

    s.total_slices = grid.ny;
    for (int iy = 0; iy < grid.ny; ++iy) {
        if (slice_monotone(grid, iy, true)) {
            ++s.monotone_slices_pseudo;
        }
        if (slice_monotone(grid, iy, false)) {
            ++s.monotone_slices_midpoint;
        }
    }
    s.all_slices_monotone_pseudo = s.monotone_slices_pseudo == s.total_slices;

    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            const BenchCell& a = grid.at(ix, iy);
            const BenchCell& b = grid.at(grid.nx - 1 - ix, grid.ny - 1 - iy);
            if (a.degenerate || b.degenerate || !a.pass_pseudo || !b.pass_pseudo) {
                continue;
            }
            s.symmetry_max_abs_pair_sum_passing_mm =
                std::max(s.symmetry_max_abs_pair_sum_passing_mm,
                         std::abs(a.err_pseudo_mm + b.err_pseudo_mm));
        }
    }
    return s;
}

nlohmann::json summary_to_json(const BenchSummary& summary) {
    auto zone_block = [](const ZoneMethodStats& z) {
        return nlohmann::json{
            {"cells", z.cells},
            {"pass", z.pass},
            {"pass_fraction", z.pass_fraction},
            {"max_abs_err_passing_mm", z.max_abs_err_passing_mm},
        };
    };
    nlohmann::json zones;
    for (int z = 0; z < 3; ++z) {
        const char* name = zone_name(static_cast<MismatchZone>(z));
        zones[name] = nlohmann::json{
            {"pseudo", zone_block(summary.pseudo[z])},
            {"midpoint", zone_block(summary.midpoint[z])},
        };
    }
    return nlohmann::json{
        {"total_cells", summary.total_cells},
        {"degenerate_cells", summary.degenerate_cells},
        {"zones", zones},
        {"total_slices", summary.total_slices},
        {"monotone_slices_pseudo", summary.monotone_slices_pseudo},
        {"monotone_slices_midpoint", summary.monotone_slices_midpoint},
        {"all_slices_monotone_pseudo", summary.all_slices_monotone_pseudo},
        {"symmetry_max_abs_pair_sum_passing_mm",
         summary.symmetry_max_abs_pair_sum_passing_mm},
        {"true_range_mm", summary.true_range_mm},
        {"vergence_rad", summary.vergence_rad},
    };
}

void save_bench_csv(const std::string& path, const BenchGrid& grid) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write benchmark file: " + path);
    }
    out << "x,y,zone,err_pseudo_mm,err_midpoint_mm,eucl_pseudo_mm,eucl_midpoint_mm,"
           "pass_pseudo,pass_midpoint,degenerate\n";
    for (const BenchCell& cell : grid.cells) {
        out << to_decimal_string(cell.x) << ',' << to_decimal_string(cell.y) << ','
            << zone_name(cell.zone) << ',' << to_decimal_string(cell.err_pseudo_mm)
            << ',' << to_decimal_string(cell.err_midpoint_mm) << ','
            << to_decimal_string(cell.eucl_pseudo_mm) << ','
            << to_decimal_string(cell.eucl_midpoint_mm) << ','
            << (cell.pass_pseudo ? '1' : '0') << ',' << (cell.pass_midpoint ? '1' : '0')
            << ',' << (cell.degenerate ? '1' : '0') << '\n';
    }
}

void save_heatmap_pgm(const std::string& path, const BenchGrid& grid,
                      TriangulationMethod method) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write heatmap file: " + path);
    }
    out << "P2\n" << grid.nx << ' ' << grid.ny << "\n255\n";
    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            const BenchCell& cell = grid.at(ix, iy);
            int value = 255;
            if (!cell.degenerate) {
                const double err = method == TriangulationMethod::PseudoIntersection
                                       ? cell.err_pseudo_mm
                                       : cell.err_midpoint_mm;
                const double clipped =
                    std::min(std::abs(err), grid.config.e_max_mm) / grid.config.e_max_mm;
                value = static_cast<int>(std::lround(clipped * 255.0));
            }
            out << value << (ix + 1 == grid.nx ? '\n' : ' ');
        }
    }
}

SimulationReport simulate_scene(const std::vector<Eigen::Vector3d>& scene,
                                const RigidTransform& left_to_right,
                                const FisheyeIntrinsics& left,
                                const FisheyeIntrinsics& right,
                                const NoiseSpec& noise, uint64_t seed, double tau,
                                double display_max_mm) {
    std::mt19937_64 rng(seed);
    const SynthesisResult synth =
        synthesize_matches(scene, left_to_right, left, right, noise, rng);
    const RigidTransform right_to_left = left_to_right.inverse();

    SimulationReport report;
    report.skipped = synth.skipped;
    double error_sum = 0.0;
    for (size_t k = 0; k < synth.matches.pairs.size(); ++k) {
        const MatchPair& pair = synth.matches.pairs[k];
        SimulatedPoint sp;
        sp.index = synth.source_index[k];
        sp.truth = scene[static_cast<size_t>(sp.index)];

        const Ray ray_left{Eigen::Vector3d::Zero(), left.unproject(pair.left)};
        const Ray ray_right =
            right_to_left.apply(Ray{Eigen::Vector3d::Zero(), right.unproject(pair.right)});
        TriangulationResult tri;
        try {
            tri = triangulate_pseudo(ray_left, ray_right);
        } catch (const Error&) {
            // Rays made parallel by noise cannot be triangulated.
            ++report.skipped;
            continue;
        }

        sp.estimate = tri.point;
        sp.error_mm = (tri.point - sp.truth).norm();
        sp.range_mm = tri.range_left;
        sp.accepted = runtime_accept(tri, tau);
        sp.beyond_display_range = sp.range_mm > display_max_mm;
        if (sp.accepted) {
            ++report.accepted;
        }
        if (sp.beyond_display_range) {
            ++report.flagged;
        }
        error_sum += sp.error_mm;
        report.max_error_mm = std::max(report.max_error_mm, sp.error_mm);
        report.points.push_back(sp);
    }
    if (!report.points.empty()) {
        report.mean_error_mm = error_sum / static_cast<double>(report.points.size());
    }
    return report;
}

void save_simulation_csv(const std::string& path, const SimulationReport& report) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write simulation file: " + path);
    }
    out << "index,x_true,y_true,z_true,x_est,y_est,z_est,error_mm,range_mm,"
           "accepted,beyond_display_range\n";
    for (const SimulatedPoint& sp : report.points) {
        out << sp.index << ',' << to_decimal_string(sp.truth.x()) << ','
            << to_decimal_string(sp.truth.y()) << ',' << to_decimal_string(sp.truth.z())
            << ',' << to_decimal_string(sp.estimate.x()) << ','
            << to_decimal_string(sp.estimate.y()) << ','
            << to_decimal_string(sp.estimate.z()) << ','
            << to_decimal_string(sp.error_mm) << ',' << to_decimal_string(sp.range_mm)
            << ',' << (sp.accepted ? '1' : '0') << ','
            << (sp.beyond_display_range ? '1' : '0') << '\n';
    }
}

nlohmann::json simulation_stats_json(const SimulationReport& report) {
    return nlohmann::json{
        {"points", report.points.size()},
        {"skipped", report.skipped},
        {"accepted", report.accepted},
        {"beyond_display_range", report.flagged},
        {"max_error_mm", report.max_error_mm},
        {"mean_error_mm", report.mean_error_mm},
    };
}

}  // namespace omnistereo
