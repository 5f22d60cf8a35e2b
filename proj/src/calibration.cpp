#include "omnistereo/calibration.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "omnistereo/numtext.hpp"
#include "omnistereo/parallel.hpp"

namespace omnistereo {

void BoardSpec::validate() const {
    if (rows < 2 || cols < 2) {
        throw InvalidArgument("board needs at least 2 rows and 2 cols of corners");
    }
    if (!(square_size_mm > 0.0)) {
        throw InvalidArgument("board square size must be positive");
    }
}

namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
    Eigen::Matrix3d m;
    m << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
         -v.y(), v.x(), 0.0;
    return m;
}

Eigen::Matrix3d rotation_exp(const Eigen::Vector3d& w) {
    const double angle = w.norm();
    if (angle == 0.0) {
        return Eigen::Matrix3d::Identity();
    }
    return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

// Orthonormal pair completing an observed unit ray to a frame; residuals are
// the components of the predicted ray in this tangent plane.
void tangent_basis(const Eigen::Vector3d& v, Eigen::Vector3d& a, Eigen::Vector3d& b) {
    const Eigen::Vector3d pick =
        std::abs(v.z()) < 0.9 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitY();
    a = v.cross(pick).normalized();
    b = v.cross(a);
}

// Sum of squared sines of the angles between observed and predicted rays.
double angular_objective(const std::vector<Eigen::Vector3d>& observed,
                         const std::vector<Eigen::Vector3d>& board_points,
                         const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
    double total = 0.0;
    for (size_t i = 0; i < observed.size(); ++i) {
        const Eigen::Vector3d y = r * board_points[i] + t;
        const double rho = y.norm();
        if (rho == 0.0) {
            return std::numeric_limits<double>::infinity();
        }
        const Eigen::Vector3d u = y / rho;
        total += observed[i].cross(u).squaredNorm();
    }
    return total;
}

// The 24 proper rotations that map coordinate axes onto coordinate axes.
std::vector<Eigen::Matrix3d> axis_aligned_rotations() {
    std::vector<Eigen::Matrix3d> out;
    const Eigen::Vector3d axes[6] = {
        Eigen::Vector3d::UnitX(), -Eigen::Vector3d::UnitX(),
        Eigen::Vector3d::UnitY(), -Eigen::Vector3d::UnitY(),
        Eigen::Vector3d::UnitZ(), -Eigen::Vector3d::UnitZ(),
    };
    for (const auto& c0 : axes) {
        for (const auto& c1 : axes) {
            if (std::abs(c0.dot(c1)) > 0.5) {
                continue;
            }
            Eigen::Matrix3d r;
            r.col(0) = c0;
            r.col(1) = c1;
            r.col(2) = c0.cross(c1);
            out.push_back(r);
        }
    }
    return out;
}

}  // namespace

BoardPose board_pose_from_rays(const BoardObservations& obs, const BoardSpec& board,
                               const FisheyeIntrinsics& intrinsics) {
    board.validate();
    const int n = board.corner_count();
    if (static_cast<int>(obs.pixels.size()) != n) {
        std::ostringstream msg;
        msg << "expected " << n << " corners, got " << obs.pixels.size();
        throw InvalidArgument(msg.str());
    }

    std::vector<Eigen::Vector3d> observed(n);
    std::vector<Eigen::Vector3d> board_points(n);
    for (int i = 0; i < board.rows; ++i) {
        for (int j = 0; j < board.cols; ++j) {
            const int idx = i * board.cols + j;
            observed[idx] = intrinsics.unproject(obs.pixels[idx]);
            board_points[idx] = board.corner(i, j);
        }
    }

    // Depth seed: the local radial scale (px per rad) at the central corner,
    // divided into the metric pitch, converts mean adjacent pixel spacing to
    // a distance estimate.
    const int center = (board.rows / 2) * board.cols + board.cols / 2;
    double spacing_sum = 0.0;
    int spacing_count = 0;
    for (int i = 0; i < board.rows; ++i) {
        for (int j = 0; j < board.cols; ++j) {
            const int idx = i * board.cols + j;
            if (j + 1 < board.cols) {
                const int right = idx + 1;
                spacing_sum += std::hypot(obs.pixels[right].u - obs.pixels[idx].u,
                                          obs.pixels[right].v - obs.pixels[idx].v);
                ++spacing_count;
            }
            if (i + 1 < board.rows) {
                const int down = idx + board.cols;
                spacing_sum += std::hypot(obs.pixels[down].u - obs.pixels[idx].u,
                                          obs.pixels[down].v - obs.pixels[idx].v);
                ++spacing_count;
            }
        }
    }
    const double mean_spacing = spacing_sum / std::max(spacing_count, 1);
    const double du = (obs.pixels[center].u - intrinsics.cx()) / intrinsics.mu();
    const double dv = (obs.pixels[center].v - intrinsics.cy()) / intrinsics.mv();
    const double theta_center = intrinsics.solve_theta(std::hypot(du, dv));
    double depth = board.square_size_mm * intrinsics.radius_slope(theta_center) /
                   std::max(mean_spacing, 1e-9);
    depth = std::clamp(depth, 10.0, 1e6);

    std::vector<Eigen::Vector3d> basis_a(n), basis_b(n);
    for (int i = 0; i < n; ++i) {
        tangent_basis(observed[i], basis_a[i], basis_b[i]);
    }

    struct Refined {
        Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
        Eigen::Vector3d t = Eigen::Vector3d::Zero();
        double obj = std::numeric_limits<double>::infinity();
        int iterations = 0;
    };

    const auto refine = [&](Eigen::Matrix3d r, Eigen::Vector3d t) {
        double obj = angular_objective(observed, board_points, r, t);
        double lambda = 1e-3;
        int iterations = 0;
        for (int iter = 0; iter < 200; ++iter) {
            iterations = iter + 1;
            Eigen::Matrix<double, 6, 6> jtj = Eigen::Matrix<double, 6, 6>::Zero();
            Eigen::Matrix<double, 6, 1> jtr = Eigen::Matrix<double, 6, 1>::Zero();
            for (int i = 0; i < n; ++i) {
                const Eigen::Vector3d y = r * board_points[i] + t;
                const double rho = y.norm();
                const Eigen::Vector3d u = y / rho;
                const Eigen::Vector2d resid(basis_a[i].dot(u), basis_b[i].dot(u));
                // d(resid)/dY through the normalization, then Y's derivatives:
                // dY/d(rotation twist) = -[R X]x, dY/d(translation) = I.
                Eigen::Matrix<double, 2, 3> d_du;
                d_du.row(0) = basis_a[i].transpose();
                d_du.row(1) = basis_b[i].transpose();
                const Eigen::Matrix3d du_dy =
                    (Eigen::Matrix3d::Identity() - u * u.transpose()) / rho;
                const Eigen::Matrix<double, 2, 3> d_dy = d_du * du_dy;
                Eigen::Matrix<double, 2, 6> jac;
                jac.block<2, 3>(0, 0) = d_dy * (-skew(r * board_points[i]));
                jac.block<2, 3>(0, 3) = d_dy;
                jtj += jac.transpose() * jac;
                jtr += jac.transpose() * resid;
            }

            bool accepted = false;
            while (true) {
                Eigen::Matrix<double, 6, 6> damped = jtj;
                for (int k = 0; k < 6; ++k) {
                    damped(k, k) += lambda * std::max(jtj(k, k), 1e-12);
                }
                const Eigen::Matrix<double, 6, 1> delta = damped.ldlt().solve(-jtr);
                const Eigen::Matrix3d r_next = rotation_exp(delta.head<3>()) * r;
                const Eigen::Vector3d t_next = t + delta.tail<3>();
                const double obj_next =
                    angular_objective(observed, board_points, r_next, t_next);
                if (obj_next < obj) {
                    const double decrease = obj - obj_next;
                    r = r_next;
                    t = t_next;
                    obj = obj_next;
                    lambda = std::max(lambda / 10.0, 1e-12);
                    accepted = true;
                    if (decrease < 1e-12 * std::max(obj, 1e-30)) {
                        iter = 200;  // converged
                    }
                    break;
                }
                lambda *= 10.0;
                if (lambda > 1e12) {
                    break;
                }
            }
            if (!accepted) {
                break;
            }
        }
        return Refined{r, t, obj, iterations};
    };

    // A single start refined from the best-scoring candidate can settle in a
    // local minimum that still clears the divergence gate. Refining every
    // candidate and keeping the lowest objective is what makes the solve
    // global in practice; candidate order is fixed, so the result is
    // deterministic.
    Refined best;
    for (const Eigen::Matrix3d& r0 : axis_aligned_rotations()) {
        const Eigen::Vector3d t0 = depth * observed[center] - r0 * board_points[center];
        const Refined cand = refine(r0, t0);
        if (cand.obj < best.obj) {
            best = cand;
        }
        if (best.obj < 1e-18) {
            break;  // exact data; later starts cannot do better
        }
    }

    if (!(best.obj <= 1e-2)) {
        std::ostringstream msg;
        msg << "board pose objective " << best.obj << " rad^2 after " << best.iterations
            << " iterations";
        throw DivergedOptimization(msg.str());
    }

    double sq_angle_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector3d y = best.r * board_points[i] + best.t;
        const double angle = angle_between(observed[i], y);
        sq_angle_sum += angle * angle;
    }

    BoardPose pose;
    pose.board_to_camera = RigidTransform{best.r, best.t};
    pose.rms_angle_rad = std::sqrt(sq_angle_sum / n);
    pose.iterations = best.iterations;
    return pose;
}

RigidTransform fit_rigid_transform(const std::vector<Eigen::Vector3d>& a,
                                   const std::vector<Eigen::Vector3d>& b) {
    if (a.size() != b.size()) {
        throw DegenerateGeometry("point sets differ in size");
    }
    if (a.size() < 3) {
        throw DegenerateGeometry("rigid registration needs at least 3 points");
    }
    const double n = static_cast<double>(a.size());
    Eigen::Vector3d ca = Eigen::Vector3d::Zero();
    Eigen::Vector3d cb = Eigen::Vector3d::Zero();
    for (size_t i = 0; i < a.size(); ++i) {
        ca += a[i];
        cb += b[i];
    }
    ca /= n;
    cb /= n;

    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    for (size_t i = 0; i < a.size(); ++i) {
        h += (a[i] - ca) * (b[i] - cb).transpose();
    }

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d sigma = svd.singularValues();
    // Rank below 2 means a collinear (or coincident) cloud: rotation about
    // that axis is unobservable.
    if (sigma(1) <= 1e-12 * std::max(sigma(0), 1e-300)) {
        throw DegenerateGeometry("point cloud is collinear; rotation is underdetermined");
    }

    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) {
        d(2, 2) = -1.0;
    }
    RigidTransform out;
    out.rotation = svd.matrixV() * d * svd.matrixU().transpose();
    out.translation = cb - out.rotation * ca;
    return out;
}

ExtrinsicCalibration calibrate_extrinsics(const std::vector<PairedView>& views,
                                          const BoardSpec& board,
                                          const FisheyeIntrinsics& left,
                                          const FisheyeIntrinsics& right) {
    if (views.empty()) {
        throw InsufficientViews("extrinsic calibration needs at least one paired view");
    }
    board.validate();

    const int n = board.corner_count();
    const int v = static_cast<int>(views.size());
    std::vector<RigidTransform> pose_left(v), pose_right(v);
    std::vector<std::exception_ptr> failures(v);
    parallel_for(v, [&](int i) {
        try {
            pose_left[i] = board_pose_from_rays(views[i].left, board, left).board_to_camera;
            pose_right[i] = board_pose_from_rays(views[i].right, board, right).board_to_camera;
        } catch (...) {
            failures[i] = std::current_exception();
        }
    });
    for (const auto& failure : failures) {
        if (failure) {
            std::rethrow_exception(failure);
        }
    }

    std::vector<Eigen::Vector3d> cloud_left, cloud_right;
    cloud_left.reserve(static_cast<size_t>(n) * v);
    cloud_right.reserve(static_cast<size_t>(n) * v);
    for (int i = 0; i < v; ++i) {
        for (int r = 0; r < board.rows; ++r) {
            for (int c = 0; c < board.cols; ++c) {
                const Eigen::Vector3d x = board.corner(r, c);
                cloud_left.push_back(pose_left[i].apply(x));
                cloud_right.push_back(pose_right[i].apply(x));
            }
        }
    }

    ExtrinsicCalibration out;
    out.left_to_right = fit_rigid_transform(cloud_left, cloud_right);
    out.views = v;

    double pooled = 0.0;
    for (int i = 0; i < v; ++i) {
        double view_sq = 0.0;
        for (int k = 0; k < n; ++k) {
            const size_t idx = static_cast<size_t>(i) * n + k;
            const double sq =
                (out.left_to_right.apply(cloud_left[idx]) - cloud_right[idx]).squaredNorm();
            view_sq += sq;
            pooled += sq;
        }
        out.per_view_rms_mm.push_back(std::sqrt(view_sq / n));
    }
    out.rms_mm = std::sqrt(pooled / (static_cast<double>(n) * v));
    return out;
}

std::vector<PairedView> load_corner_csv(const std::string& path, const BoardSpec& board) {
    board.validate();
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open corner file: " + path);
    }
    std::string line;
    size_t line_no = 0;
    if (!std::getline(in, line)) {
        throw ParseError(path + ": empty corner file");
    }
    ++line_no;
    const auto header = split_csv_line(line);
    if (header.size() != 6 || header[0] != "view" || header[1] != "camera" ||
        header[2] != "i" || header[3] != "j" || header[4] != "u" || header[5] != "v") {
        throw ParseError(path + ": header must be view,camera,i,j,u,v");
    }

    struct SideGrid {
        std::vector<PixelPoint> pixels;
        std::vector<bool> seen;
    };
    std::map<int, std::array<SideGrid, 2>> grids;
    const int n = board.corner_count();

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto fields = split_csv_line(line);
        std::ostringstream ctxs;
        ctxs << path << " line " << line_no;
        const std::string ctx = ctxs.str();
        if (fields.size() != 6) {
            throw ParseError(ctx + ": expected 6 fields");
        }
        const long view = parse_long(fields[0], ctx);
        int side;
        if (fields[1] == "L") {
            side = 0;
        } else if (fields[1] == "R") {
            side = 1;
        } else {
            throw ParseError(ctx + ": camera must be L or R");
        }
        const long i = parse_long(fields[2], ctx);
        const long j = parse_long(fields[3], ctx);
        if (i < 0 || i >= board.rows || j < 0 || j >= board.cols) {
            std::ostringstream msg;
            msg << ctx << ": corner (" << i << ", " << j << ") outside the "
                << board.rows << "x" << board.cols << " grid";
            throw ParseError(msg.str());
        }
        auto& grid = grids[static_cast<int>(view)][side];
        if (grid.pixels.empty()) {
            grid.pixels.resize(n);
            grid.seen.assign(n, false);
        }
        const int idx = static_cast<int>(i) * board.cols + static_cast<int>(j);
        if (grid.seen[idx]) {
            std::ostringstream msg;
            msg << ctx << ": duplicate corner (" << i << ", " << j << ")";
            throw ParseError(msg.str());
        }
        grid.seen[idx] = true;
        grid.pixels[idx] = PixelPoint{parse_double(fields[4], ctx), parse_double(fields[5], ctx)};
    }
    if (grids.empty()) {
        throw ParseError(path + ": no corner rows");
    }

    std::vector<PairedView> views;
    for (auto& [view_id, sides] : grids) {
        for (int side = 0; side < 2; ++side) {
            const char* name = side == 0 ? "L" : "R";
            if (sides[side].pixels.empty()) {
                std::ostringstream msg;
                msg << path << ": view " << view_id << " has no camera " << name << " corners";
                throw InsufficientViews(msg.str());
            }
            for (int idx = 0; idx < n; ++idx) {
                if (!sides[side].seen[idx]) {
                    std::ostringstream msg;
                    msg << path << ": view " << view_id << " camera " << name
                        << " is missing corner (" << idx / board.cols << ", "
                        << idx % board.cols << ")";
                    throw ParseError(msg.str());
                }
            }
        }
        PairedView pv;
        pv.view = view_id;
        pv.left = BoardObservations{view_id, CameraSide::Left, std::move(sides[0].pixels)};
        pv.right = BoardObservations{view_id, CameraSide::Right, std::move(sides[1].pixels)};
        views.push_back(std::move(pv));
    }
    return views;
}

void save_corner_csv(const std::string& path, const std::vector<PairedView>& views,
                     const BoardSpec& board) {
    board.validate();
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write corner file: " + path);
    }
    out << "view,camera,i,j,u,v\n";
    for (const PairedView& pv : views) {
        for (int side = 0; side < 2; ++side) {
            const BoardObservations& obs = side == 0 ? pv.left : pv.right;
            const char* name = side == 0 ? "L" : "R";
            if (static_cast<int>(obs.pixels.size()) != board.corner_count()) {
                throw InvalidArgument("corner count does not match the board grid");
            }
            for (int i = 0; i < board.rows; ++i) {
                for (int j = 0; j < board.cols; ++j) {
                    const PixelPoint& px = obs.pixels[i * board.cols + j];
                    out << pv.view << ',' << name << ',' << i << ',' << j << ','
                        << to_decimal_string(px.u) << ',' << to_decimal_string(px.v) << '\n';
                }
            }
        }
    }
}

nlohmann::json calibration_report_json(const ExtrinsicCalibration& calib) {
    std::vector<double> rot(9);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            rot[r * 3 + c] = calib.left_to_right.rotation(r, c);
        }
    }
    return nlohmann::json{
        {"rotation", rot},
        {"translation_mm",
         {calib.left_to_right.translation.x(), calib.left_to_right.translation.y(),
          calib.left_to_right.translation.z()}},
        {"rms_mm", calib.rms_mm},
        {"per_view_rms_mm", calib.per_view_rms_mm},
        {"views", calib.views},
    };
}

void save_calibration_report(const std::string& path, const ExtrinsicCalibration& calib) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write calibration report: " + path);
    }
    out << calibration_report_json(calib).dump(1) << "\n";
}

RigidTransform load_rig_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open rig file: " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("invalid rig JSON in " + path + ": " + e.what());
    }
    if (!j.contains("rotation") || !j.contains("translation_mm")) {
        throw ParseError(path + ": rig JSON needs rotation and translation_mm");
    }
    const auto& jr = j.at("rotation");
    const auto& jt = j.at("translation_mm");
    if (!jr.is_array() || jr.size() != 9 || !jt.is_array() || jt.size() != 3) {
        throw ParseError(path + ": rotation must have 9 entries (row major), translation_mm 3");
    }
    RigidTransform rig;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            rig.rotation(r, c) = jr.at(r * 3 + c).get<double>();
        }
    }
    for (int k = 0; k < 3; ++k) {
        rig.translation(k) = jt.at(k).get<double>();
    }
    rig.validate();
    return rig;
}

void save_rig_json(const std::string& path, const RigidTransform& rig) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write rig file: " + path);
    }
    std::vector<double> rot(9);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            rot[r * 3 + c] = rig.rotation(r, c);
        }
    }
    const nlohmann::json j{
        {"rotation", rot},
        {"translation_mm", {rig.translation.x(), rig.translation.y(), rig.translation.z()}},
    };
    out << j.dump(1) << "\n";
}

}  // namespace omnistereo
