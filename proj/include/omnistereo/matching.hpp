#pragma once

#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "omnistereo/camera_model.hpp"
#include "omnistereo/geometry.hpp"

namespace omnistereo {

// One stereo correspondence in pixel coordinates.
struct MatchPair {
    PixelPoint left;
    PixelPoint right;
    double confidence = 1.0;

    bool operator==(const MatchPair&) const = default;
};

struct MatchSet {
    std::vector<MatchPair> pairs;

    bool operator==(const MatchSet&) const = default;
};

// Reads "uL,vL,uR,vR[,confidence]" CSV. Header row is required; confidence
// defaults to 1.0 and must lie in [0, 1]. Throws ParseError (with the line
// number) for malformed rows, bad headers, or a file with no data rows.
MatchSet load_matches(const std::string& path);

// Same, and additionally requires every pixel to lie inside its camera's
// field-of-view circle; throws OutOfBoundsPixel naming the offending line.
MatchSet load_matches(const std::string& path, const FisheyeIntrinsics& left,
                      const FisheyeIntrinsics& right);

// Writes the same format with shortest round-trip number formatting, so
// load_matches(save_matches(m)) compares equal.
void save_matches(const std::string& path, const MatchSet& matches);

enum class NoiseKind { None, PixelSigma, DirectionXY };

// Observation noise for synthetic matches. PixelSigma adds independent
// Gaussian noise to all four pixel coordinates. DirectionXY perturbs the
// right ray direction by a fixed (dx, dy) before reprojection.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::None;
    double sigma_px = 0.0;
    double dx = 0.0;
    double dy = 0.0;

    static NoiseSpec none() { return {}; }
    static NoiseSpec pixel_sigma(double sigma) {
        return {NoiseKind::PixelSigma, sigma, 0.0, 0.0};
    }
    static NoiseSpec direction_xy(double dx, double dy) {
        return {NoiseKind::DirectionXY, 0.0, dx, dy};
    }
};

struct SynthesisResult {
    MatchSet matches;
    // Scene index behind each pair, for ground-truth lookup.
    std::vector<int> source_index;
    int skipped = 0;
};

// Projects scene points (left-camera frame, mm) into both cameras of a rig
// (left_to_right maps left-frame points into the right frame) and applies the
// noise model. Points outside either camera's polar range, at zero distance,
// or knocked out of the image by noise are skipped and counted. Throws
// EmptyScene for an empty input.
SynthesisResult synthesize_matches(const std::vector<Eigen::Vector3d>& scene,
                                   const RigidTransform& left_to_right,
                                   const FisheyeIntrinsics& left,
                                   const FisheyeIntrinsics& right,
                                   const NoiseSpec& noise, std::mt19937_64& rng);

// Reads "x,y,z" CSV (header required) of left-frame points in mm.
std::vector<Eigen::Vector3d> load_scene_csv(const std::string& path);

}  // namespace omnistereo
