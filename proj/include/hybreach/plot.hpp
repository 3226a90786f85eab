#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace hybreach {

/// Renders a run artifact: one SVG per timestep for 2-state systems (target, BR partitions,
/// BPOA boxes, Monte Carlo members at the final step), otherwise a single CSV of box
/// coordinates. Returns the files written. Throws Error(Parse) on a malformed artifact.
std::vector<std::filesystem::path> plot_artifact(const nlohmann::json& artifact, const std::filesystem::path& out_dir,
                                                 const std::string& stem);

std::vector<std::filesystem::path> plot_file(const std::filesystem::path& artifact_path,
                                             const std::filesystem::path& out_dir);

}  // namespace hybreach
