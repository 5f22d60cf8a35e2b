#pragma once

#include <Eigen/Dense>

#include "omnistereo/errors.hpp"

namespace omnistereo {

// Tolerance on |dir| - 1 for vectors that must be unit length.
inline constexpr double kUnitNormTolerance = 1e-9;

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Half line: origin plus nonnegative multiples of a unit direction.
struct Ray {
    Eigen::Vector3d origin = Eigen::Vector3d::Zero();
    Eigen::Vector3d dir = Eigen::Vector3d::UnitZ();

    // Ray from origin toward target. Throws InvalidArgument if they coincide.
    static Ray through(const Eigen::Vector3d& origin, const Eigen::Vector3d& target);

    Eigen::Vector3d at(double s) const { return origin + s * dir; }

    // Throws NonUnitDirection unless |dir| is 1 within kUnitNormTolerance.
    void validate() const;
};

// Adds (dx, dy) to the first two components of a unit direction, then
// renormalizes. Throws NonUnitDirection on non-unit input, InvalidArgument if
// the perturbed vector has zero norm.
Eigen::Vector3d perturb_direction(const Eigen::Vector3d& dir, double dx, double dy);

// Angle between two nonzero vectors in [0, pi], robust near 0 and pi.
double angle_between(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

// Rotation angle of a rotation matrix, in [0, pi].
double rotation_angle(const Eigen::Matrix3d& r);

// p -> rotation * p + translation.
struct RigidTransform {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
        return rotation * p + translation;
    }

    // Transforms origin and direction; direction stays unit length.
    Ray apply(const Ray& r) const;

    RigidTransform inverse() const;

    // Composition: result(p) == next(this->apply(p)).
    RigidTransform then(const RigidTransform& next) const;

    // Throws InvalidRotation unless rotation is orthonormal with det +1
    // within 1e-9.
    void validate() const;
};

}  // namespace omnistereo
