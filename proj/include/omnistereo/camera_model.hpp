#pragma once

#include <array>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "omnistereo/errors.hpp"
#include "omnistereo/geometry.hpp"

namespace omnistereo {

// Half of a 195.95 degree horizontal field of view.
inline constexpr double kDefaultThetaMaxDeg = 97.975;

struct PixelPoint {
    double u = 0.0;
    double v = 0.0;

    bool operator==(const PixelPoint&) const = default;
};

// Fisheye camera with a polynomial radial profile
//   r(theta) = k1*theta + k2*theta^3 + k3*theta^5 + k4*theta^7 + k5*theta^9
// mapping polar angle theta (radians off the optical axis, +z) to image
// radius in pixels. Azimuth is preserved: the pixel offset from the principal
// point lies along (cos phi, sin phi) scaled per axis by (mu, mv).
//
// The profile must be strictly increasing on [0, theta_max]; this is checked
// at construction by sampling the derivative at 1001 points.
class FisheyeIntrinsics {
  public:
    FisheyeIntrinsics(const std::array<double, 5>& k, double cx, double cy,
                      double mu = 1.0, double mv = 1.0,
                      double theta_max = deg2rad(kDefaultThetaMaxDeg));

    // Equidistant profile r = 300*theta, principal point (640, 640).
    static FisheyeIntrinsics default_synthetic();

    const std::array<double, 5>& k() const { return k_; }
    double cx() const { return cx_; }
    double cy() const { return cy_; }
    double mu() const { return mu_; }
    double mv() const { return mv_; }
    double theta_max() const { return theta_max_; }

    // Image radius at theta_max; largest radius the model accepts.
    double max_radius() const { return max_radius_; }

    // r(theta) and its derivative.
    double radius(double theta) const;
    double radius_slope(double theta) const;

    // Inverse of radius() on [0, theta_max] by bracketed Newton iteration,
    // absolute tolerance 1e-12 rad, at most 100 iterations. Throws
    // RadiusOutOfRange if r < 0 or r exceeds max_radius() beyond a relative
    // rounding allowance.
    double solve_theta(double r) const;

    // Unit direction (camera frame, +z optical axis) to pixel. Throws
    // NonUnitDirection, PolarAngleOutOfRange.
    PixelPoint project(const Eigen::Vector3d& dir) const;

    // Pixel to unit direction. Throws RadiusOutOfRange for pixels beyond the
    // theta_max circle.
    Eigen::Vector3d unproject(const PixelPoint& p) const;

    // True when the pixel's elliptical radius is at most max_radius().
    bool pixel_in_fov(const PixelPoint& p) const;

    static FisheyeIntrinsics from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    static FisheyeIntrinsics load(const std::string& path);
    void save(const std::string& path) const;

    bool operator==(const FisheyeIntrinsics&) const = default;

  private:
    std::array<double, 5> k_;
    double cx_, cy_, mu_, mv_, theta_max_, max_radius_;
};

}  // namespace omnistereo
