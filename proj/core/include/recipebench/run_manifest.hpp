#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace recipebench::manifest {

/// FNV-1a 64-bit digest of a file's bytes, as "fnv1a64:<16 hex digits>".
std::string file_digest(const std::filesystem::path& path);

/// ISO-8601 UTC timestamp; honors SOURCE_DATE_EPOCH so reruns can be
/// byte-identical.
std::string timestamp_utc();

/// Every artifact-producing run writes exactly one manifest alongside its
/// outputs: subcommand, fully resolved configuration (seeds included),
/// content digests of the inputs, toolkit version and timestamp.
void write_run_manifest(const std::filesystem::path& path, const std::string& subcommand,
                        const nlohmann::json& config,
                        const std::vector<std::pair<std::string, std::filesystem::path>>& inputs);

} // namespace recipebench::manifest
