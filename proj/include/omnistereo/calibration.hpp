#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "omnistereo/camera_model.hpp"
#include "omnistereo/geometry.hpp"

namespace omnistereo {

// Planar calibration target: rows x cols inner corners on a square_size_mm
// pitch. Corner (i, j) sits at (j * s, i * s, 0) in board coordinates,
// enumerated row major (i outer, j inner).
struct BoardSpec {
    int rows = 6;
    int cols = 9;
    double square_size_mm = 60.0;

    int corner_count() const { return rows * cols; }
    Eigen::Vector3d corner(int i, int j) const {
        return Eigen::Vector3d(j * square_size_mm, i * square_size_mm, 0.0);
    }
    // Throws InvalidArgument for fewer than 2 rows or cols or a nonpositive
    // pitch.
    void validate() const;
};

enum class CameraSide { Left, Right };

// Detected corners of one board in one camera, row major by (i, j).
struct BoardObservations {
    int view = 0;
    CameraSide camera = CameraSide::Left;
    std::vector<PixelPoint> pixels;
};

struct BoardPose {
    RigidTransform board_to_camera;
    double rms_angle_rad = 0.0;  // root mean square ray angle residual
    int iterations = 0;
};

// Recovers the board pose that best aligns predicted corner rays with the
// observed ones, minimizing the sum of squared angles between them.
// Initialization seeds depth from the mean adjacent corner spacing and picks
// the best of the 24 axis-aligned orientations; refinement is damped
// Gauss-Newton on the angular objective with analytic derivatives (damping
// 1e-3 initially, x10 on a rejected step, /10 on acceptance), stopping when
// the objective decreases by less than 1e-12 rad^2 or after 200 iterations.
// Throws DivergedOptimization when the final objective exceeds 1e-2 rad^2,
// InvalidArgument on a corner-count mismatch, and unprojection errors
// propagate.
BoardPose board_pose_from_rays(const BoardObservations& obs, const BoardSpec& board,
                               const FisheyeIntrinsics& intrinsics);

// Least-squares rigid motion taking a onto b: minimizes sum |R a_i + t - b_i|^2
// over rotations. Centroids are subtracted, the 3x3 covariance is factored by
// SVD, and when det(V U^T) is -1 the last singular direction is flipped so the
// result is a proper rotation. Throws DegenerateGeometry for fewer than 3
// points, mismatched sizes, or collinear input.
RigidTransform fit_rigid_transform(const std::vector<Eigen::Vector3d>& a,
                                   const std::vector<Eigen::Vector3d>& b);

// Corner observations of one board placement seen by both cameras.
struct PairedView {
    int view = 0;
    BoardObservations left;
    BoardObservations right;
};

struct ExtrinsicCalibration {
    RigidTransform left_to_right;
    double rms_mm = 0.0;  // pooled corner residual after alignment
    std::vector<double> per_view_rms_mm;
    int views = 0;
};

// Per view: solve both board poses, reconstruct the corner cloud in each
// camera frame; then register the pooled left cloud onto the pooled right
// cloud. Throws InsufficientViews for an empty view list; board pose errors
// propagate.
ExtrinsicCalibration calibrate_extrinsics(const std::vector<PairedView>& views,
                                          const BoardSpec& board,
                                          const FisheyeIntrinsics& left,
                                          const FisheyeIntrinsics& right);

// Reads "view,camera,i,j,u,v" CSV (camera is L or R). Every view must carry
// the full corner grid for both cameras, each (i, j) exactly once. Views are
// returned sorted by id, corners row major. Throws ParseError with the line
// number for malformed input, InsufficientViews when a view lacks one side.
std::vector<PairedView> load_corner_csv(const std::string& path, const BoardSpec& board);

// Writes the same format, corners row major, numbers in shortest round-trip
// form.
void save_corner_csv(const std::string& path, const std::vector<PairedView>& views,
                     const BoardSpec& board);

// Report carries the rotation (9 entries, row major), translation in mm, the
// pooled rms, per-view rms, and the view count.
nlohmann::json calibration_report_json(const ExtrinsicCalibration& calib);
void save_calibration_report(const std::string& path, const ExtrinsicCalibration& calib);

// Reads a rig pose from report JSON or any {"rotation": [9], "translation_mm":
// [3]} file and validates the rotation. Throws ParseError, InvalidRotation.
RigidTransform load_rig_json(const std::string& path);
void save_rig_json(const std::string& path, const RigidTransform& rig);

}  // namespace omnistereo
