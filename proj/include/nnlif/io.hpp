#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace nnlif {

inline constexpr const char* kVersion = "0.1.0";

/// Deterministic CSV: header row, 17 significant digits, LF endings.
/// Non-finite values are rejected with the column name and row index.
void emit_csv(const std::string& path, const std::vector<std::string>& headers,
              const std::vector<std::vector<double>>& columns);

/// Deterministic JSON (ordered keys, 2-space indent, trailing LF).
void emit_json(const std::string& path, const nlohmann::ordered_json& j);

/// Run manifest, written last: its presence implies a completed run.
struct RunManifest {
    std::string subcommand;
    std::string version = kVersion;
    std::map<std::string, std::string> config_snapshot;
    std::vector<std::string> outputs;
    double wall_time_s = 0.0;
    nlohmann::ordered_json key_results;

    void write(const std::string& path) const;
};

}  // namespace nnlif
