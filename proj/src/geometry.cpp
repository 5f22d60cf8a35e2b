#include "omnistereo/geometry.hpp"

#include <cmath>

namespace omnistereo {

Ray Ray::through(const Eigen::Vector3d& origin, const Eigen::Vector3d& target) {
    const Eigen::Vector3d delta = target - origin;
    const double n = delta.norm();
    if (n == 0.0) {
        throw InvalidArgument("ray target coincides with its origin");
    }
    return Ray{origin, delta / n};
}

void Ray::validate() const {
    if (std::abs(dir.norm() - 1.0) > kUnitNormTolerance) {
        throw NonUnitDirection("ray direction norm deviates from 1 by more than 1e-9");
    }
}

Eigen::Vector3d perturb_direction(const Eigen::Vector3d& dir, double dx, double dy) {
    if (std::abs(dir.norm() - 1.0) > kUnitNormTolerance) {
        throw NonUnitDirection("perturb_direction expects a unit direction");
    }
    Eigen::Vector3d v = dir;
    v.x() += dx;
    v.y() += dy;
    const double n = v.norm();
    if (n == 0.0) {
        throw InvalidArgument("perturbation cancels the direction to zero");
    }
    return v / n;
}

double angle_between(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) {
        throw InvalidArgument("angle_between expects nonzero vectors");
    }
    return std::atan2(a.cross(b).norm(), a.dot(b));
}

double rotation_angle(const Eigen::Matrix3d& r) {
    Eigen::AngleAxisd aa(r);
    double angle = std::abs(aa.angle());
    if (angle > kPi) {
        angle = 2.0 * kPi - angle;
    }
    return angle;
}

Ray RigidTransform::apply(const Ray& r) const {
    return Ray{apply(r.origin), rotation * r.dir};
}

RigidTransform RigidTransform::inverse() const {
    RigidTransform inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.rotation * translation);
    return inv;
}

RigidTransform RigidTransform::then(const RigidTransform& next) const {
    RigidTransform out;
    out.rotation = next.rotation * rotation;
    out.translation = next.rotation * translation + next.translation;
    return out;
}

void RigidTransform::validate() const {
    const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
                             .cwiseAbs()
                             .maxCoeff();
    if (ortho > 1e-9 || std::abs(rotation.determinant() - 1.0) > 1e-9) {
        throw InvalidRotation("matrix is not a proper rotation within 1e-9");
    }
    if (!translation.allFinite()) {
        throw InvalidRotation("translation has nonfinite components");
    }
}

}  // namespace omnistereo
