#pragma once

#include <Eigen/Dense>

#include "omnistereo/errors.hpp"
#include "omnistereo/geometry.hpp"

namespace omnistereo {

enum class TriangulationMethod { Midpoint, PseudoIntersection };

// Severity of a stereo correspondence's ray mismatch, judged by the direction
// perturbation (x, y) that separates the right ray from an exact match.
enum class MismatchZone { SlightlyMismatched, VerticalTolerance, SeverelyMismatched };

// |x| and |y| at most this: slight mismatch.
inline constexpr double kSlightMismatchBound = 0.005;
// |x| within the slight bound and |y| at most this: vertical-tolerance zone.
inline constexpr double kVerticalToleranceBound = 0.015;

// Default acceptance ratio of skew distance to left-camera range.
inline constexpr double kDefaultSkewTau = 0.01;

struct ClosestPointsResult {
    Eigen::Vector3d point_left;   // closest point on the left ray
    Eigen::Vector3d point_right;  // closest point on the right ray
    Eigen::Vector3d midpoint;
    double s = 0.0;             // left ray parameter of point_left
    double t = 0.0;             // right ray parameter of point_right
    double distance = 0.0;      // length of the common perpendicular segment
    bool behind_origin = false; // s < 0 or t < 0
};

// Closest pair of points between two skew lines, closed form. Throws
// ParallelRays when |dir_left x dir_right| <= 1e-12, NonUnitDirection for
// non-unit ray directions.
ClosestPointsResult closest_points(const Ray& left, const Ray& right);

struct TriangulationResult {
    Eigen::Vector3d point = Eigen::Vector3d::Zero();
    TriangulationMethod method = TriangulationMethod::Midpoint;
    double skew_distance = 0.0;    // common perpendicular length, mm
    double plane_deviation = 0.0;  // largest angle between a ray and the
                                   // pseudo-intersection plane, rad
    double range_left = 0.0;       // |point - left.origin|, mm
    bool degenerate_plane = false; // pseudo-intersection fell back to midpoint
    bool behind_origin = false;    // solution lies behind a ray origin
};

// Midpoint of the common perpendicular segment.
TriangulationResult triangulate_midpoint(const Ray& left, const Ray& right);

// Pseudo-intersection: both rays are projected onto the plane through the two
// ray origins and the skew midpoint, and the projected lines are intersected
// within that plane. When the midpoint is collinear with the origins the
// plane is undefined and the midpoint result is returned with
// degenerate_plane set. Throws ParallelRays, ParallelProjectedLines.
TriangulationResult triangulate_pseudo(const Ray& left, const Ray& right);

// Zone of a direction perturbation (x, y). Boundaries belong to the less
// severe zone.
MismatchZone classify_mismatch(double x, double y);

// Stable lowercase label: "slight", "vertical", "severe".
const char* zone_name(MismatchZone zone);

// Division-free skew gate: skew_distance <= tau * range_left. Throws
// InvalidArgument for tau <= 0.
bool runtime_accept(const TriangulationResult& result, double tau = kDefaultSkewTau);

}  // namespace omnistereo
