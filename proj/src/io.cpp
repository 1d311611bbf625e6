#include "nnlif/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace nnlif {

void emit_csv(const std::string& path, const std::vector<std::string>& headers,
              const std::vector<std::vector<double>>& columns) {
    if (headers.size() != columns.size())
        throw std::invalid_argument("emit_csv: header/column count mismatch");
    const size_t rows = columns.empty() ? 0 : columns[0].size();
    for (size_t c = 0; c < columns.size(); ++c) {
        if (columns[c].size() != rows)
            throw std::invalid_argument("emit_csv: ragged columns");
        for (size_t r = 0; r < rows; ++r) {
            if (!std::isfinite(columns[c][r]))
                throw std::runtime_error("emit_csv: non-finite value in series `" +
                                         headers[c] + "` at index " +
                                         std::to_string(r));
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_csv: cannot open " + path);
    for (size_t c = 0; c < headers.size(); ++c)
        out << (c ? "," : "") << headers[c];
    out << '\n';
    char buf[64];
    for (size_t r = 0; r < rows; ++r) {
        for (size_t c = 0; c < columns.size(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", columns[c][r]);
            out << (c ? "," : "") << buf;
        }
        out << '\n';
    }
}

void emit_json(const std::string& path, const nlohmann::ordered_json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_json: cannot open " + path);
    out << j.dump(2) << '\n';
}

void RunManifest::write(const std::string& path) const {
    nlohmann::ordered_json j;
    j["subcommand"] = subcommand;
    j["version"] = version;
    j["config"] = config_snapshot;
    j["outputs"] = outputs;
    j["wall_time_s"] = wall_time_s;
    j["key_results"] = key_results;
    emit_json(path, j);
}

}  // namespace nnlif
