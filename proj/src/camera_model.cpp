#include "omnistereo/camera_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace omnistereo {

namespace {

double poly_radius(const std::array<double, 5>& k, double theta) {
    const double t2 = theta * theta;
    // Horner over theta^2, one final multiply by theta.
    return theta * (k[0] + t2 * (k[1] + t2 * (k[2] + t2 * (k[3] + t2 * k[4]))));
}

double poly_slope(const std::array<double, 5>& k, double theta) {
    const double t2 = theta * theta;
    return k[0] + t2 * (3.0 * k[1] + t2 * (5.0 * k[2] + t2 * (7.0 * k[3] + t2 * 9.0 * k[4])));
}

}  // namespace

FisheyeIntrinsics::FisheyeIntrinsics(const std::array<double, 5>& k, double cx,
                                     double cy, double mu, double mv,
                                     double theta_max)
    : k_(k), cx_(cx), cy_(cy), mu_(mu), mv_(mv), theta_max_(theta_max) {
    for (double c : k_) {
        if (!std::isfinite(c)) {
            throw InvalidIntrinsics("radial coefficient is not finite");
        }
    }
    if (!std::isfinite(cx_) || !std::isfinite(cy_)) {
        throw InvalidIntrinsics("principal point is not finite");
    }
    if (!(mu_ > 0.0) || !(mv_ > 0.0) || !std::isfinite(mu_) || !std::isfinite(mv_)) {
        throw InvalidIntrinsics("axis scales mu, mv must be positive");
    }
    if (!(theta_max_ > 0.0) || theta_max_ > kPi || !std::isfinite(theta_max_)) {
        throw InvalidIntrinsics("theta_max must lie in (0, pi]");
    }
    constexpr int kSamples = 1000;
    for (int i = 0; i <= kSamples; ++i) {
        const double theta = theta_max_ * static_cast<double>(i) / kSamples;
        if (!(poly_slope(k_, theta) > 0.0)) {
            std::ostringstream msg;
            msg << "radial profile is not strictly increasing near theta=" << theta;
            throw InvalidIntrinsics(msg.str());
        }
    }
    max_radius_ = poly_radius(k_, theta_max_);
}

FisheyeIntrinsics FisheyeIntrinsics::default_synthetic() {
    return FisheyeIntrinsics({300.0, 0.0, 0.0, 0.0, 0.0}, 640.0, 640.0);
}

double FisheyeIntrinsics::radius(double theta) const {
    return poly_radius(k_, theta);
}

double FisheyeIntrinsics::radius_slope(double theta) const {
    return poly_slope(k_, theta);
}

double FisheyeIntrinsics::solve_theta(double r) const {
    if (r < 0.0) {
        throw RadiusOutOfRange("negative image radius");
    }
    const double slack = 1e-9 * std::max(1.0, max_radius_);
    if (r > max_radius_ + slack) {
        std::ostringstream msg;
        msg << "radius " << r << " exceeds the profile maximum " << max_radius_;
        throw RadiusOutOfRange(msg.str());
    }
    if (r >= max_radius_) {
        return theta_max_;
    }
    if (r == 0.0) {
        return 0.0;
    }

    // Monotone profile: keep a bracket [lo, hi] with radius(lo) < r <
    // radius(hi), take Newton steps, fall back to bisection when a step
    // leaves the bracket.
    double lo = 0.0;
    double hi = theta_max_;
    double theta = std::clamp(r / k_[0], 0.0, theta_max_);
    constexpr double kTolerance = 1e-12;
    for (int iter = 0; iter < 100; ++iter) {
        const double f = poly_radius(k_, theta) - r;
        if (f == 0.0) {
            return theta;
        }
        if (f > 0.0) {
            hi = theta;
        } else {
            lo = theta;
        }
        const double slope = poly_slope(k_, theta);
        double next = theta - f / slope;
        if (!(next > lo) || !(next < hi)) {
            next = 0.5 * (lo + hi);
        }
        const double moved = std::abs(next - theta);
        theta = next;
        if (moved < kTolerance) {
            break;
        }
    }
    return theta;
}

PixelPoint FisheyeIntrinsics::project(const Eigen::Vector3d& dir) const {
    if (std::abs(dir.norm() - 1.0) > kUnitNormTolerance) {
        throw NonUnitDirection("projection expects a unit direction");
    }
    const double theta = std::acos(std::clamp(dir.z(), -1.0, 1.0));
    if (theta > theta_max_) {
        std::ostringstream msg;
        msg << "polar angle " << theta << " rad exceeds theta_max " << theta_max_;
        throw PolarAngleOutOfRange(msg.str());
    }
    const double phi = std::atan2(dir.y(), dir.x());
    const double r = poly_radius(k_, theta);
    return PixelPoint{cx_ + mu_ * r * std::cos(phi), cy_ + mv_ * r * std::sin(phi)};
}

Eigen::Vector3d FisheyeIntrinsics::unproject(const PixelPoint& p) const {
    const double du = (p.u - cx_) / mu_;
    const double dv = (p.v - cy_) / mv_;
    const double r = std::hypot(du, dv);
    const double theta = solve_theta(r);
    const double phi = std::atan2(dv, du);
    const double st = std::sin(theta);
    return Eigen::Vector3d(st * std::cos(phi), st * std::sin(phi), std::cos(theta));
}

bool FisheyeIntrinsics::pixel_in_fov(const PixelPoint& p) const {
    const double du = (p.u - cx_) / mu_;
    const double dv = (p.v - cy_) / mv_;
    return std::hypot(du, dv) <= max_radius_ + 1e-9 * std::max(1.0, max_radius_);
}

FisheyeIntrinsics FisheyeIntrinsics::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("k") || !j.contains("cx") || !j.contains("cy")) {
        throw ParseError("intrinsics JSON needs k, cx, cy");
    }
    const auto& jk = j.at("k");
    if (!jk.is_array() || jk.size() != 5) {
        throw ParseError("intrinsics k must be an array of 5 coefficients");
    }
    std::array<double, 5> k{};
    for (size_t i = 0; i < 5; ++i) {
        k[i] = jk.at(i).get<double>();
    }
    const double mu = j.value("mu", 1.0);
    const double mv = j.value("mv", 1.0);
    const double theta_max_deg = j.value("theta_max_deg", kDefaultThetaMaxDeg);
    return FisheyeIntrinsics(k, j.at("cx").get<double>(), j.at("cy").get<double>(),
                             mu, mv, deg2rad(theta_max_deg));
}

nlohmann::json FisheyeIntrinsics::to_json() const {
    return nlohmann::json{
        {"k", k_},
        {"cx", cx_},
        {"cy", cy_},
        {"mu", mu_},
        {"mv", mv_},
        {"theta_max_deg", rad2deg(theta_max_)},
    };
}

FisheyeIntrinsics FisheyeIntrinsics::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open intrinsics file: " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("invalid intrinsics JSON in " + path + ": " + e.what());
    }
    return from_json(j);
}

void FisheyeIntrinsics::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write intrinsics file: " + path);
    }
    out << to_json().dump(1) << "\n";
}

}  // namespace omnistereo
