#pragma once

#include <stdexcept>

namespace omnistereo {

// Base of every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Intrinsic parameters violate a construction invariant (nonpositive scale,
// nonmonotone radial polynomial, theta_max outside (0, pi], nonfinite value).
struct InvalidIntrinsics : Error { using Error::Error; };

// A direction vector was expected to have unit norm within 1e-9.
struct NonUnitDirection : Error { using Error::Error; };

// Polar angle exceeds the model's theta_max.
struct PolarAngleOutOfRange : Error { using Error::Error; };

// Image radius is negative or beyond the radius at theta_max.
struct RadiusOutOfRange : Error { using Error::Error; };

// Ray directions are parallel; no unique closest-point pair exists.
struct ParallelRays : Error { using Error::Error; };

// Directions projected into the pseudo-intersection plane are parallel.
struct ParallelProjectedLines : Error { using Error::Error; };

// Point sets are too small or collinear; rigid registration is underdetermined.
struct DegenerateGeometry : Error { using Error::Error; };

// Pose optimization ended with an objective too large to trust.
struct DivergedOptimization : Error { using Error::Error; };

// Extrinsic calibration needs at least one paired view.
struct InsufficientViews : Error { using Error::Error; };

// Malformed or incomplete input file; message carries the line number.
struct ParseError : Error { using Error::Error; };

// Pixel lies outside the valid image region of its camera.
struct OutOfBoundsPixel : Error { using Error::Error; };

// Scene contains no points.
struct EmptyScene : Error { using Error::Error; };

// Field-of-view preset name is not registered.
struct UnknownPreset : Error { using Error::Error; };

// Overlap angle is negative or exceeds the horizontal field of view.
struct InvalidOverlap : Error { using Error::Error; };

// Requested zones would cover more than a full circle.
struct CoverageExceeds360 : Error { using Error::Error; };

// Matrix is not a proper rotation within tolerance.
struct InvalidRotation : Error { using Error::Error; };

// Benchmark configuration violates an invariant (bounds order, step sign).
struct InvalidConfig : Error { using Error::Error; };

// Generic precondition violation not covered by a more specific type.
struct InvalidArgument : Error { using Error::Error; };

}  // namespace omnistereo
