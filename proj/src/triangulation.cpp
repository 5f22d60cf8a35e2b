#include "omnistereo/triangulation.hpp"

#include <algorithm>
#include <cmath>

namespace omnistereo {

ClosestPointsResult closest_points(const Ray& left, const Ray& right) {
    left.validate();
    right.validate();
    const Eigen::Vector3d cross = left.dir.cross(right.dir);
    if (cross.norm() <= 1e-12) {
        throw ParallelRays("ray directions are parallel within 1e-12");
    }

    const Eigen::Vector3d w0 = left.origin - right.origin;
    const double b = left.dir.dot(right.dir);
    const double d = left.dir.dot(w0);
    const double e = right.dir.dot(w0);
    // For unit directions 1 - b^2 equals |cross|^2; the cross form avoids
    // cancellation when the rays are nearly parallel.
    const double denom = cross.squaredNorm();

    ClosestPointsResult out;
    out.s = (b * e - d) / denom;
    out.t = (e - b * d) / denom;
    out.point_left = left.at(out.s);
    out.point_right = right.at(out.t);
    out.midpoint = 0.5 * (out.point_left + out.point_right);
    out.distance = (out.point_left - out.point_right).norm();
    out.behind_origin = out.s < 0.0 || out.t < 0.0;
    return out;
}

TriangulationResult triangulate_midpoint(const Ray& left, const Ray& right) {
    const ClosestPointsResult cp = closest_points(left, right);
    TriangulationResult out;
    out.point = cp.midpoint;
    out.method = TriangulationMethod::Midpoint;
    out.skew_distance = cp.distance;
    out.plane_deviation = 0.0;
    out.range_left = (cp.midpoint - left.origin).norm();
    out.behind_origin = cp.behind_origin;
    return out;
}

TriangulationResult triangulate_pseudo(const Ray& left, const Ray& right) {
    const ClosestPointsResult cp = closest_points(left, right);

    const Eigen::Vector3d baseline = right.origin - left.origin;
    const Eigen::Vector3d spoke = cp.midpoint - left.origin;
    const Eigen::Vector3d plane_cross = baseline.cross(spoke);
    const double degeneracy_scale = baseline.norm() * spoke.norm();
    if (plane_cross.norm() <= 1e-12 * std::max(degeneracy_scale, 1e-300)) {
        // Midpoint collinear with the origins: the plane is undefined.
        TriangulationResult out = triangulate_midpoint(left, right);
        out.degenerate_plane = true;
        return out;
    }

    // Orthonormal in-plane basis anchored at the left origin. Projected
    // directions drop the normal component; their in-plane coordinates are
    // plain dot products.
    const Eigen::Vector3d n = plane_cross.normalized();
    const Eigen::Vector3d e1 = baseline.normalized();
    const Eigen::Vector3d e2 = n.cross(e1);

    const Eigen::Vector2d u_left(left.dir.dot(e1), left.dir.dot(e2));
    const Eigen::Vector2d u_right(right.dir.dot(e1), right.dir.dot(e2));
    const Eigen::Vector2d q_right(baseline.dot(e1), baseline.dot(e2));

    // Solve a*u_left - b*u_right = q_right for the in-plane line parameters.
    const double det = -u_left.x() * u_right.y() + u_left.y() * u_right.x();
    if (std::abs(det) <= 1e-12 * std::max(u_left.norm() * u_right.norm(), 1e-300)) {
        throw ParallelProjectedLines("projected ray directions are parallel in the plane");
    }
    const double a = (-q_right.x() * u_right.y() + q_right.y() * u_right.x()) / det;
    const double bpar = (u_left.x() * q_right.y() - u_left.y() * q_right.x()) / det;

    // Compose the point inside span{e1, e2}: membership in the plane is then
    // exact up to rounding.
    const Eigen::Vector2d in_plane = a * u_left;
    TriangulationResult out;
    out.point = left.origin + in_plane.x() * e1 + in_plane.y() * e2;
    out.method = TriangulationMethod::PseudoIntersection;
    out.skew_distance = cp.distance;
    const double sin_left = std::clamp(std::abs(left.dir.dot(n)), 0.0, 1.0);
    const double sin_right = std::clamp(std::abs(right.dir.dot(n)), 0.0, 1.0);
    out.plane_deviation = std::max(std::asin(sin_left), std::asin(sin_right));
    out.range_left = in_plane.norm();
    out.behind_origin = a < 0.0 || bpar < 0.0;
    return out;
}

MismatchZone classify_mismatch(double x, double y) {
    const double ax = std::abs(x);
    const double ay = std::abs(y);
    if (ax <= kSlightMismatchBound && ay <= kSlightMismatchBound) {
        return MismatchZone::SlightlyMismatched;
    }
    if (ax <= kSlightMismatchBound && ay <= kVerticalToleranceBound) {
        return MismatchZone::VerticalTolerance;
    }
    return MismatchZone::SeverelyMismatched;
}

const char* zone_name(MismatchZone zone) {
    switch (zone) {
        case MismatchZone::SlightlyMismatched: return "slight";
        case MismatchZone::VerticalTolerance: return "vertical";
        case MismatchZone::SeverelyMismatched: return "severe";
    }
    return "severe";
}

bool runtime_accept(const TriangulationResult& result, double tau) {
    if (!(tau > 0.0)) {
        throw InvalidArgument("acceptance ratio tau must be positive");
    }
    return result.skew_distance <= tau * result.range_left;
}

}  // namespace omnistereo
