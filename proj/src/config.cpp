#include "nnlif/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace nnlif {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "b0", "b", "v_R",
        "grid.x_min", "grid.n_cells",
        "init.profile", "init.center", "init.width",
        "fp.dt", "fp.drift_treatment", "fp.stencil_order", "fp.delta_deposit",
        "fp.diffusion_cfl", "fp.adaptive_dt",
        "run.horizon", "run.rate_cap",
        "physical.B", "physical.nu_ext", "physical.a0", "physical.v_th",
        "physical.v_L", "physical.v_R",
    };
    return keys;
}

}  // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: line " + std::to_string(lineno) +
                                     " is not `key = value`");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw std::runtime_error("config: empty key or value on line " +
                                     std::to_string(lineno));
        cfg.entries_[key] = val;
    }
    return cfg;
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

double Config::get_double(const std::string& key, double fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config: key `" + key + "` is not a number: " +
                                 it->second);
    }
}

int Config::get_int(const std::string& key, int fallback) const {
    const double v = get_double(key, fallback);
    const int i = static_cast<int>(std::lround(v));
    if (std::abs(v - i) > 1e-9)
        throw std::runtime_error("config: key `" + key + "` is not an integer");
    return i;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

void Config::validate_keys() const {
    for (const auto& [key, value] : entries_) {
        if (!known_keys().count(key))
            throw std::runtime_error("config: unknown key `" + key + "`");
    }
}

namespace {

FullConfig resolve(const Config& cfg) {
    cfg.validate_keys();
    FullConfig fc;
    fc.snapshot = cfg.entries();

    if (cfg.has("physical.B") || cfg.has("physical.a0")) {
        PhysicalParams phys;
        phys.B = cfg.get_double("physical.B", 0.0);
        phys.nu_ext = cfg.get_double("physical.nu_ext", 0.0);
        phys.a0 = cfg.get_double("physical.a0", 1.0);
        phys.v_th = cfg.get_double("physical.v_th", 0.0);
        phys.v_L = cfg.get_double("physical.v_L", -2.0);
        phys.v_R_phys = cfg.get_double("physical.v_R", -1.0);
        if (!(phys.a0 > 0.0))
            throw std::runtime_error("config: physical.a0 violates a0 > 0");
        if (!(phys.v_L < phys.v_R_phys && phys.v_R_phys < phys.v_th))
            throw std::runtime_error(
                "config: physical block violates v_L < v_R < v_th");
        fc.physical = phys;
        fc.params = rescale(phys);
    }

    fc.params.b0 = cfg.get_double("b0", fc.params.b0);
    fc.params.b = cfg.get_double("b", fc.params.b);
    fc.params.v_R = cfg.get_double("v_R", fc.params.v_R);
    if (!(fc.params.v_R < 0.0))
        throw std::runtime_error("config: key `v_R` violates the invariant v_R < 0");

    fc.grid.x_min = cfg.get_double("grid.x_min", -8.0);
    fc.grid.x_max = 0.0;
    fc.grid.n_cells = cfg.get_int("grid.n_cells", 800);
    if (!(fc.grid.x_min < 0.0))
        throw std::runtime_error("config: key `grid.x_min` must be negative");
    if (fc.grid.n_cells < 4)
        throw std::runtime_error("config: key `grid.n_cells` must be >= 4");
    if (!(fc.params.v_R > fc.grid.x_min))
        throw std::runtime_error("config: v_R must lie inside the grid");

    fc.init_profile_name = cfg.get_string("init.profile", "gaussian");
    if (fc.init_profile_name != "steady")
        fc.init.kind = profile_kind_from_name(fc.init_profile_name);
    fc.init.center = cfg.get_double("init.center", -2.0);
    fc.init.width = cfg.get_double("init.width", 0.25);
    if (!(fc.init.width > 0.0))
        throw std::runtime_error("config: key `init.width` must be > 0");

    fc.fp.dt = cfg.get_double("fp.dt", 1e-5);
    if (!(fc.fp.dt > 0.0))
        throw std::runtime_error("config: key `fp.dt` must be > 0");
    const std::string drift = cfg.get_string("fp.drift_treatment", "semi-implicit");
    if (drift == "semi-implicit")
        fc.fp.drift_treatment = DriftTreatment::SemiImplicit;
    else if (drift == "explicit")
        fc.fp.drift_treatment = DriftTreatment::Explicit;
    else
        throw std::runtime_error("config: key `fp.drift_treatment` must be "
                                 "semi-implicit or explicit");
    fc.fp.flux_stencil_order = cfg.get_int("fp.stencil_order", 2);
    if (fc.fp.flux_stencil_order != 1 && fc.fp.flux_stencil_order != 2)
        throw std::runtime_error("config: key `fp.stencil_order` must be 1 or 2");
    const std::string dep = cfg.get_string("fp.delta_deposit", "linear-split");
    if (dep == "linear-split")
        fc.fp.delta_deposit = DeltaDeposit::LinearSplit;
    else if (dep == "nearest-cell")
        fc.fp.delta_deposit = DeltaDeposit::NearestCell;
    else
        throw std::runtime_error("config: key `fp.delta_deposit` must be "
                                 "linear-split or nearest-cell");
    fc.fp.diffusion_cfl = cfg.get_double("fp.diffusion_cfl", 0.5);
    fc.fp.adaptive_dt = cfg.get_int("fp.adaptive_dt", 0) != 0;

    fc.horizon = cfg.get_double("run.horizon", 2.0);
    fc.rate_cap = cfg.get_double("run.rate_cap", 1e3);
    if (!(fc.horizon > 0.0))
        throw std::runtime_error("config: key `run.horizon` must be > 0");
    if (!(fc.rate_cap > 0.0))
        throw std::runtime_error("config: key `run.rate_cap` must be > 0");
    return fc;
}

}  // namespace

FullConfig parse_config(const std::string& path) {
    return resolve(Config::from_file(path));
}

FullConfig parse_config_text(const std::string& text) {
    return resolve(Config::from_string(text));
}

}  // namespace nnlif
