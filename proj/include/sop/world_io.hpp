#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "sop/expert.hpp"
#include "sop/worldgen.hpp"

namespace sop {

/// World document: dimension, bounds, level, seed, generation_attempt, peaks
/// and the cached analysis. Doubles are written in shortest round-trip form.
std::string world_to_json(const GeneratedWorld& world);
/// A document without an "analysis" member is analysed on load. Throws
/// ConfigError("world") for malformed input.
GeneratedWorld world_from_json(std::string_view text);

std::string analysis_to_json(const WorldAnalysis& analysis);

void save_world(const std::filesystem::path& path, const GeneratedWorld& world);
GeneratedWorld load_world(const std::filesystem::path& path);

std::string budget_to_json(const BudgetReport& report);
BudgetReport budget_from_json(std::string_view text);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary file and a rename, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace sop
