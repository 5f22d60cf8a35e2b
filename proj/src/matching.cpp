#include "omnistereo/matching.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "omnistereo/numtext.hpp"

namespace omnistereo {

namespace {

std::string line_context(const std::string& path, size_t line_no) {
    std::ostringstream msg;
    msg << path << " line " << line_no;
    return msg.str();
}

MatchSet load_matches_impl(const std::string& path, const FisheyeIntrinsics* left,
                           const FisheyeIntrinsics* right) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open match file: " + path);
    }
    std::string line;
    size_t line_no = 0;
    if (!std::getline(in, line)) {
        throw ParseError(path + ": empty match file");
    }
    ++line_no;
    auto header = split_csv_line(line);
    const bool has_confidence = header.size() == 5 && header[4] == "confidence";
    if (!(header.size() == 4 || has_confidence) || header[0] != "uL" ||
        header[1] != "vL" || header[2] != "uR" || header[3] != "vR") {
        throw ParseError(path + ": header must be uL,vL,uR,vR[,confidence]");
    }

    MatchSet out;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto fields = split_csv_line(line);
        const std::string ctx = line_context(path, line_no);
        if (fields.size() != header.size()) {
            std::ostringstream msg;
            msg << ctx << ": expected " << header.size() << " fields, got " << fields.size();
            throw ParseError(msg.str());
        }
        MatchPair pair;
        pair.left.u = parse_double(fields[0], ctx);
        pair.left.v = parse_double(fields[1], ctx);
        pair.right.u = parse_double(fields[2], ctx);
        pair.right.v = parse_double(fields[3], ctx);
        if (has_confidence) {
            pair.confidence = parse_double(fields[4], ctx);
            if (!(pair.confidence >= 0.0 && pair.confidence <= 1.0)) {
                throw ParseError(ctx + ": confidence must lie in [0, 1]");
            }
        }
        if (left != nullptr && !left->pixel_in_fov(pair.left)) {
            throw OutOfBoundsPixel(ctx + ": left pixel outside the field of view");
        }
        if (right != nullptr && !right->pixel_in_fov(pair.right)) {
            throw OutOfBoundsPixel(ctx + ": right pixel outside the field of view");
        }
        out.pairs.push_back(pair);
    }
    if (out.pairs.empty()) {
        throw ParseError(path + ": no data rows");
    }
    return out;
}

}  // namespace

MatchSet load_matches(const std::string& path) {
    return load_matches_impl(path, nullptr, nullptr);
}

MatchSet load_matches(const std::string& path, const FisheyeIntrinsics& left,
                      const FisheyeIntrinsics& right) {
    return load_matches_impl(path, &left, &right);
}

void save_matches(const std::string& path, const MatchSet& matches) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write match file: " + path);
    }
    out << "uL,vL,uR,vR,confidence\n";
    for (const MatchPair& p : matches.pairs) {
        out << to_decimal_string(p.left.u) << ',' << to_decimal_string(p.left.v) << ','
            << to_decimal_string(p.right.u) << ',' << to_decimal_string(p.right.v) << ','
            << to_decimal_string(p.confidence) << '\n';
    }
}

SynthesisResult synthesize_matches(const std::vector<Eigen::Vector3d>& scene,
                                   const RigidTransform& left_to_right,
                                   const FisheyeIntrinsics& left,
                                   const FisheyeIntrinsics& right,
                                   const NoiseSpec& noise, std::mt19937_64& rng) {
    if (scene.empty()) {
        throw EmptyScene("scene has no points");
    }
    left_to_right.validate();

    SynthesisResult out;
    std::normal_distribution<double> gauss(0.0, 1.0);

    for (size_t idx = 0; idx < scene.size(); ++idx) {
        const Eigen::Vector3d& p_left = scene[idx];
        const Eigen::Vector3d p_right = left_to_right.apply(p_left);
        const double n_left = p_left.norm();
        const double n_right = p_right.norm();
        if (n_left == 0.0 || n_right == 0.0) {
            ++out.skipped;
            continue;
        }

        MatchPair pair;
        try {
            pair.left = left.project(p_left / n_left);
            PixelPoint px_right = right.project(p_right / n_right);
            if (noise.kind == NoiseKind::DirectionXY) {
                const Eigen::Vector3d perturbed =
                    perturb_direction(right.unproject(px_right), noise.dx, noise.dy);
                px_right = right.project(perturbed);
            }
            pair.right = px_right;
        } catch (const PolarAngleOutOfRange&) {
            ++out.skipped;
            continue;
        }

        if (noise.kind == NoiseKind::PixelSigma) {
            pair.left.u += noise.sigma_px * gauss(rng);
            pair.left.v += noise.sigma_px * gauss(rng);
            pair.right.u += noise.sigma_px * gauss(rng);
            pair.right.v += noise.sigma_px * gauss(rng);
        }

        // Noise may push a pixel beyond the valid circle; such an
        // observation would not unproject, so it is dropped.
        if (!left.pixel_in_fov(pair.left) || !right.pixel_in_fov(pair.right)) {
            ++out.skipped;
            continue;
        }

        out.matches.pairs.push_back(pair);
        out.source_index.push_back(static_cast<int>(idx));
    }
    return out;
}

std::vector<Eigen::Vector3d> load_scene_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open scene file: " + path);
    }
    std::string line;
    size_t line_no = 0;
    if (!std::getline(in, line)) {
        throw ParseError(path + ": empty scene file");
    }
    ++line_no;
    const auto header = split_csv_line(line);
    if (header.size() != 3 || header[0] != "x" || header[1] != "y" || header[2] != "z") {
        throw ParseError(path + ": header must be x,y,z");
    }
    std::vector<Eigen::Vector3d> scene;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto fields = split_csv_line(line);
        const std::string ctx = line_context(path, line_no);
        if (fields.size() != 3) {
            throw ParseError(ctx + ": expected 3 fields");
        }
        scene.emplace_back(parse_double(fields[0], ctx), parse_double(fields[1], ctx),
                           parse_double(fields[2], ctx));
    }
    if (scene.empty()) {
        throw EmptyScene(path + ": no scene points");
    }
    return scene;
}

}  // namespace omnistereo
