#include "omnistereo/fov_zones.hpp"

#include <algorithm>
#include <sstream>

namespace omnistereo {

FovZones compute_zones(double horizontal_fov_deg, double overlap_deg) {
    if (!(horizontal_fov_deg > 0.0) || horizontal_fov_deg > 360.0) {
        throw InvalidArgument("horizontal field of view must lie in (0, 360]");
    }
    if (overlap_deg < 0.0 || overlap_deg > horizontal_fov_deg) {
        std::ostringstream msg;
        msg << "overlap " << overlap_deg << " must lie in [0, " << horizontal_fov_deg << "]";
        throw InvalidOverlap(msg.str());
    }
    FovZones z;
    z.horizontal_fov_deg = horizontal_fov_deg;
    z.overlap_deg = overlap_deg;
    z.stereo_deg = overlap_deg;
    z.monocular_deg = 2.0 * horizontal_fov_deg - 2.0 * overlap_deg;
    const double covered = z.stereo_deg + z.monocular_deg;
    if (covered > 360.0) {
        std::ostringstream msg;
        msg << "stereo plus monocular coverage " << covered << " exceeds 360";
        throw CoverageExceeds360(msg.str());
    }
    z.blind_deg = 360.0 - covered;
    return z;
}

namespace {

struct Preset {
    const char* name;
    double h_deg;
    double o_deg;
};

constexpr Preset kPresets[] = {
    {"gecko", 196.0, 76.0},
    {"human", 196.0, 196.0},
    {"spider", 196.0, 136.0},
    {"stick_bug", 196.0, 150.0},
};

}  // namespace

FovZones zones_for_preset(const std::string& name) {
    std::string key = name;
    if (key == "herbivorous") {
        key = "gecko";
    } else if (key == "carnivorous") {
        key = "spider";
    }
    for (const Preset& p : kPresets) {
        if (key == p.name) {
            FovZones z = compute_zones(p.h_deg, p.o_deg);
            z.name = p.name;
            return z;
        }
    }
    throw UnknownPreset("unknown field-of-view preset: " + name);
}

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const Preset& p : kPresets) {
        names.emplace_back(p.name);
    }
    return names;
}

nlohmann::json zones_to_json(const FovZones& z) {
    return nlohmann::json{
        {"name", z.name},
        {"H", z.horizontal_fov_deg},
        {"O", z.overlap_deg},
        {"S", z.stereo_deg},
        {"M", z.monocular_deg},
        {"B", z.blind_deg},
        {"total_fov", z.total_fov_deg()},
    };
}

}  // namespace omnistereo
