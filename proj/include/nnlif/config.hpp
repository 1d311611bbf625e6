#pragma once

#include <map>
#include <optional>
#include <string>

#include "nnlif/fp_solver.hpp"
#include "nnlif/model.hpp"

namespace nnlif {

/// Flat `key = value` configuration with dotted section keys. Lines starting
/// with '#' and blank lines are ignored.
class Config {
  public:
    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    bool has(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

    /// Throws naming the first key not in the documented registry.
    void validate_keys() const;

  private:
    std::map<std::string, std::string> entries_;
};

/// Fully resolved run configuration with documented defaults filled in.
struct FullConfig {
    ModelParams params;                      // b0, b, v_R
    std::optional<PhysicalParams> physical;  // present if a physical.* block was given
    Grid1D grid;
    ProfileSpec init;
    std::string init_profile_name = "gaussian";
    FPSchemeConfig fp;
    double horizon = 2.0;
    double rate_cap = 1e3;
    std::map<std::string, std::string> snapshot;  // raw entries for the manifest
};

/// Parses and validates; unknown keys and invariant violations throw with the
/// offending key named. A physical.* block, when present, is rescaled into
/// the dimensionless parameters (and both sets are kept for the manifest).
FullConfig parse_config(const std::string& path);
FullConfig parse_config_text(const std::string& text);

}  // namespace nnlif
