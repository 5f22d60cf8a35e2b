#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "omnistereo/errors.hpp"

namespace omnistereo {

// Horizontal coverage of a two-camera rig whose cameras share a horizontal
// field of view H and overlap by O degrees:
//   stereo    S = O
//   monocular M = 2H - 2O
//   blind     B = 360 - S - M
struct FovZones {
    std::string name = "custom";      // preset name when applicable
    double horizontal_fov_deg = 0.0;  // H
    double overlap_deg = 0.0;         // O
    double stereo_deg = 0.0;          // S
    double monocular_deg = 0.0;       // M
    double blind_deg = 0.0;           // B

    // Combined visual field S + M, i.e. 360 - B.
    double total_fov_deg() const { return stereo_deg + monocular_deg; }
};

// Throws InvalidArgument for H outside (0, 360], InvalidOverlap for O < 0 or
// O > H, CoverageExceeds360 when 2H - O > 360.
FovZones compute_zones(double horizontal_fov_deg, double overlap_deg);

// Registered animal-inspired configurations, all with H = 196:
//   gecko (alias herbivorous)  O = 76
//   spider (alias carnivorous) O = 136
//   human                      O = 196
//   stick_bug                  O = 150
// Throws UnknownPreset for anything else.
FovZones zones_for_preset(const std::string& name);

// Canonical preset names, sorted.
std::vector<std::string> preset_names();

nlohmann::json zones_to_json(const FovZones& z);

}  // namespace omnistereo
