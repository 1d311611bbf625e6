// Command-line driver: simulate | transform-check | firing-rate |
// blowup-scan | spectrum. Every subcommand writes its data artifacts first
// and a JSON manifest last, so the manifest's presence marks a completed run.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "nnlif/blowup.hpp"
#include "nnlif/config.hpp"
#include "nnlif/fp_solver.hpp"
#include "nnlif/io.hpp"
#include "nnlif/model.hpp"
#include "nnlif/quadrature.hpp"
#include "nnlif/spectrum.hpp"
#include "nnlif/stefan_map.hpp"
#include "nnlif/volterra.hpp"

namespace {

using namespace nnlif;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

DensityState build_initial(const FullConfig& fc) {
    if (fc.init_profile_name == "steady")
        return steady_state(fc.params.v_R, fc.grid, true);
    return make_initial_density(fc.init, fc.grid).state;
}

std::string regime_name(ContinuationRegime r) {
    switch (r) {
        case ContinuationRegime::GlobalHorizonReached: return "global";
        case ContinuationRegime::BlowupDetected: return "blowup_detected";
        case ContinuationRegime::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

int run_simulate(const std::string& config_path, double horizon_override,
                 double rate_cap_override, const std::string& prefix) {
    const auto t0 = Clock::now();
    FullConfig fc = parse_config(config_path);
    if (horizon_override > 0.0) fc.horizon = horizon_override;
    if (rate_cap_override > 0.0) fc.rate_cap = rate_cap_override;

    DensityState initial = build_initial(fc);
    FPRunResult run = fp_run(initial, fc.params, fc.fp, fc.horizon, fc.rate_cap);

    RunManifest manifest;
    manifest.subcommand = "simulate";
    manifest.config_snapshot = fc.snapshot;

    const std::string rate_path = prefix + "_rate.csv";
    emit_csv(rate_path, {"t", "N"}, {run.rate_series.times, run.rate_series.rates});
    manifest.outputs.push_back(rate_path);

    const std::string mass_path = prefix + "_mass.csv";
    emit_csv(mass_path, {"t", "mass"}, {run.mass_times, run.mass_values});
    manifest.outputs.push_back(mass_path);

    const std::string dens_path = prefix + "_final_density.csv";
    std::vector<double> vs, ps;
    for (int i = 0; i < run.final_state.grid.n_nodes(); ++i) {
        vs.push_back(run.final_state.grid.node(i));
        ps.push_back(run.final_state.values[i]);
    }
    emit_csv(dens_path, {"v", "p"}, {vs, ps});
    manifest.outputs.push_back(dens_path);

    manifest.key_results["status"] =
        run.status == RunStatus::Completed
            ? "completed"
            : (run.status == RunStatus::RateExceededThreshold ? "rate_exceeded_threshold"
                                                              : "unstable");
    manifest.key_results["max_mass_deviation"] = run.max_mass_dev;
    manifest.key_results["rate_peak"] = run.rate_peak;
    manifest.key_results["halt_time"] = run.halt_time;
    manifest.wall_time_s = seconds_since(t0);
    manifest.write(prefix + "_manifest.json");

    std::cout << "simulate: status=" << manifest.key_results["status"]
              << " max|mass-1|=" << run.max_mass_dev << " rate_peak=" << run.rate_peak
              << "\n";
    return run.status == RunStatus::Unstable ? 1 : 0;
}

int run_transform_check(const std::string& config_path, double horizon_override,
                        const std::string& out_path) {
    const auto t0 = Clock::now();
    FullConfig fc = parse_config(config_path);
    if (horizon_override > 0.0) fc.horizon = horizon_override;

    DensityState initial = build_initial(fc);

    std::vector<double> phys_times;
    for (int k = 1; k <= 10; ++k) phys_times.push_back(fc.horizon * k / 10.0);

    RunOptions fp_opts;
    fp_opts.snapshot_times = phys_times;
    fp_opts.record_every = 1;
    FPRunResult fp = fp_run(initial, fc.params, fc.fp, fc.horizon, fc.rate_cap, fp_opts);

    RunOptions st_opts;
    for (double t : phys_times) st_opts.snapshot_times.push_back(tau_of_t(t));
    st_opts.record_every = 1;
    StefanRunResult st = stefan_run(initial, fc.params, fc.fp, tau_of_t(fc.horizon),
                                    fc.rate_cap, st_opts);

    DiscrepancyReport rep = equivalence_check(fp, st);

    RunManifest manifest;
    manifest.subcommand = "transform-check";
    manifest.config_snapshot = fc.snapshot;
    nlohmann::ordered_json j;
    j["sup_norm"] = rep.sup_norm;
    j["l1"] = rep.l1;
    j["rate_rel_err"] = rep.rate_rel_err;
    emit_json(out_path, j);
    manifest.outputs.push_back(out_path);
    manifest.key_results = j;
    manifest.wall_time_s = seconds_since(t0);
    manifest.write(out_path + ".manifest.json");

    std::cout << "transform-check: sup=" << rep.sup_norm << " l1=" << rep.l1
              << " rate_rel_err=" << rep.rate_rel_err << "\n";
    return 0;
}

int run_firing_rate(const std::string& config_path, int n_windows, double tol,
                    const std::string& prefix) {
    const auto t0 = Clock::now();
    FullConfig fc = parse_config(config_path);
    if (fc.init_profile_name == "steady")
        throw std::runtime_error("firing-rate: closed-form profiles only");

    VolterraData data = VolterraData::from_profile(fc.init, fc.grid);
    nlohmann::ordered_json windows_json = nlohmann::ordered_json::array();

    std::vector<double> glob_tau, glob_m;
    double t_phys = 0.0;
    for (int k = 0; k < n_windows; ++k) {
        ChainResult one = chain_windows(data, fc.params, 1e9, 1, fc.rate_cap, tol);
        const auto& rec = one.windows.front();
        nlohmann::ordered_json wj;
        wj["index"] = k;
        wj["t_phys_start"] = t_phys;
        wj["sigma"] = rec.window.sigma;
        wj["m"] = rec.window.m;
        wj["conditions"] = {{"alpha_inv_max", rec.window.alpha_inv_max},
                            {"cond_ii_lhs", rec.window.cond_ii_lhs},
                            {"lambda", rec.window.lambda},
                            {"cond_iv_lhs", rec.window.cond_iv_lhs},
                            {"all_hold", rec.window.all_hold()}};
        wj["picard_iterations"] = rec.picard_iterations;
        wj["final_residual"] = rec.final_residual;
        wj["contraction_ratios"] = rec.contraction_ratios;
        windows_json.push_back(wj);

        // global Stefan-frame series: M(tau) = alpha^2(tau) N(t)
        for (size_t i = (k == 0 ? 0 : 1); i < one.n_series.size(); ++i) {
            const double t = t_phys + one.n_series.times[i];
            const double tau = tau_of_t(t);
            glob_tau.push_back(tau);
            glob_m.push_back(one.n_series.rates[i] / (1.0 + 2.0 * tau));
        }
        t_phys += one.t_phys_end;
        data = std::move(one.final_data);
        if (one.rate_capped) break;
    }

    RunManifest manifest;
    manifest.subcommand = "firing-rate";
    manifest.config_snapshot = fc.snapshot;
    emit_csv(prefix + "M.csv", {"tau", "M"}, {glob_tau, glob_m});
    manifest.outputs.push_back(prefix + "M.csv");
    nlohmann::ordered_json rj;
    rj["windows"] = windows_json;
    emit_json(prefix + "window_report.json", rj);
    manifest.outputs.push_back(prefix + "window_report.json");
    manifest.key_results["n_windows"] = windows_json.size();
    manifest.key_results["t_phys_end"] = t_phys;
    manifest.wall_time_s = seconds_since(t0);
    manifest.write(prefix + "firing_rate_manifest.json");

    std::cout << "firing-rate: " << windows_json.size() << " windows to t=" << t_phys
              << "\n";
    return 0;
}

int run_blowup_scan(const std::string& b_list, const std::string& w_list,
                    double rate_cap, double horizon, const std::string& out_path) {
    const auto t0 = Clock::now();
    auto parse_list = [](const std::string& text) {
        std::vector<double> vals;
        std::string cur;
        for (char c : text + ",") {
            if (c == ',') {
                if (!cur.empty()) vals.push_back(std::stod(cur));
                cur.clear();
            } else {
                cur += c;
            }
        }
        return vals;
    };
    ScanConfig scfg;
    scfg.rate_cap = rate_cap;
    scfg.horizon = horizon;
    auto rows = blowup_scan(parse_list(b_list), parse_list(w_list), scfg);

    // scan.csv holds a regime string and an inf sentinel for global rows,
    // so it is written directly rather than through the numeric emitter
    FILE* f = std::fopen(out_path.c_str(), "wb");
    if (!f) throw std::runtime_error("blowup-scan: cannot open " + out_path);
    std::fprintf(f, "b,width,regime,t_star,rate_peak\n");
    for (const auto& row : rows) {
        std::fprintf(f, "%.17g,%.17g,%s,", row.b, row.width,
                     regime_name(row.regime).c_str());
        if (std::isfinite(row.t_star))
            std::fprintf(f, "%.17g,", row.t_star);
        else
            std::fprintf(f, "inf,");
        std::fprintf(f, "%.17g\n", row.rate_peak);
    }
    std::fclose(f);

    RunManifest manifest;
    manifest.subcommand = "blowup-scan";
    manifest.config_snapshot = {{"b_values", b_list},
                                {"widths", w_list},
                                {"rate_cap", std::to_string(rate_cap)},
                                {"horizon", std::to_string(horizon)}};
    manifest.outputs.push_back(out_path);
    manifest.key_results["rows"] = rows.size();
    int detected = 0;
    for (const auto& row : rows)
        if (row.regime == ContinuationRegime::BlowupDetected) ++detected;
    manifest.key_results["blowup_detected"] = detected;
    auto notes = scan_trend_report(rows);
    manifest.key_results["trend_notes"] = notes;
    manifest.wall_time_s = seconds_since(t0);
    manifest.write(out_path + ".manifest.json");

    std::cout << "blowup-scan: " << rows.size() << " rows, " << detected
              << " blow-ups detected\n";
    for (const auto& n : notes) std::cout << "  trend: " << n << "\n";
    return 0;
}

int run_spectrum(double v_R, int n_max, bool dump, const std::string& prefix) {
    const auto t0 = Clock::now();
    RunManifest manifest;
    manifest.subcommand = "spectrum";
    manifest.config_snapshot = {{"v_R", std::to_string(v_R)},
                                {"n_max", std::to_string(n_max)}};

    std::vector<double> ns, lambdas, roots;
    std::vector<EigenCandidate> to_dump;
    if (std::isnan(v_R)) {
        for (const auto& [n, root] : find_admissible_set(n_max, -10.0, 0.0)) {
            ns.push_back(n);
            lambdas.push_back(-2.0 * n);
            roots.push_back(root);
            if (dump) to_dump.push_back(check_admissible(n, root));
        }
    } else {
        for (int n = 1; n <= n_max; ++n) {
            EigenCandidate cand = check_admissible(n, v_R);
            if (!cand.admissible) continue;
            ns.push_back(n);
            lambdas.push_back(cand.lambda);
            roots.push_back(v_R);
            if (dump) to_dump.push_back(std::move(cand));
        }
    }
    emit_csv(prefix + "admissible.csv", {"n", "lambda", "v_R_root"},
             {ns, lambdas, roots});
    manifest.outputs.push_back(prefix + "admissible.csv");

    for (const auto& cand : to_dump) {
        std::vector<double> vs, ps;
        for (int i = 0; i < cand.grid.n_nodes(); ++i) {
            vs.push_back(cand.grid.node(i));
            ps.push_back(cand.eigenfunction[i]);
        }
        const std::string path =
            prefix + "eigenfunction_n" + std::to_string(cand.n) + ".csv";
        emit_csv(path, {"v", "p"}, {vs, ps});
        manifest.outputs.push_back(path);
    }

    manifest.key_results["admissible_count"] = ns.size();
    manifest.wall_time_s = seconds_since(t0);
    manifest.write(prefix + "spectrum_manifest.json");

    std::cout << "spectrum: " << ns.size() << " admissible eigenvalue(s)\n";
    for (size_t i = 0; i < ns.size(); ++i)
        std::cout << "  n=" << ns[i] << " lambda=" << lambdas[i]
                  << " v_R=" << roots[i] << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Integrate-and-fire Fokker-Planck laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_prefix = "run", out_path;
    double horizon = -1.0, rate_cap = -1.0, tol = 1e-8;
    int n_windows = 1, n_max = 5;
    std::string b_list = "0.5,1,2,4", w_list = "0.05,0.1,0.2";
    double v_R = std::numeric_limits<double>::quiet_NaN();
    bool dump_eigen = false;

    auto* sim = app.add_subcommand("simulate", "direct Fokker-Planck run");
    sim->add_option("--config", config_path, "config file")->required();
    sim->add_option("--horizon", horizon, "override run.horizon");
    sim->add_option("--rate-cap", rate_cap, "override run.rate_cap");
    sim->add_option("--out-prefix", out_prefix, "output file prefix");

    auto* tc = app.add_subcommand("transform-check",
                                  "compare physical and Stefan-frame solvers");
    tc->add_option("--config", config_path, "config file")->required();
    tc->add_option("--horizon", horizon, "override run.horizon");
    tc->add_option("--out", out_path, "report path")->default_val("transform_check.json");

    auto* fr = app.add_subcommand("firing-rate",
                                  "Volterra fixed-point construction of M");
    fr->add_option("--config", config_path, "config file")->required();
    fr->add_option("--windows", n_windows, "number of chained windows");
    fr->add_option("--tol", tol, "Picard tolerance");
    fr->add_option("--out-prefix", out_prefix, "output file prefix")->default_val("");

    auto* bs = app.add_subcommand("blowup-scan", "excitatory blow-up scan");
    bs->add_option("--b-values", b_list, "comma list of connectivity values");
    bs->add_option("--widths", w_list, "comma list of concentration widths");
    bs->add_option("--rate-cap", rate_cap, "numerical blow-up proxy")->default_val(1e3);
    bs->add_option("--horizon", horizon, "per-row horizon")->default_val(2.0);
    bs->add_option("--out", out_path, "table path")->default_val("scan.csv");

    auto* sp = app.add_subcommand("spectrum", "admissible eigenvalues");
    sp->add_option("--v-R", v_R, "reset location (omit to scan the root set)");
    sp->add_option("--n-max", n_max, "largest n for lambda = -2n");
    sp->add_flag("--dump-eigenfunctions", dump_eigen, "write eigenfunction CSVs");
    sp->add_option("--out-prefix", out_prefix, "output file prefix")->default_val("");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return run_simulate(config_path, horizon, rate_cap, out_prefix);
        if (tc->parsed()) return run_transform_check(config_path, horizon, out_path);
        if (fr->parsed()) return run_firing_rate(config_path, n_windows, tol, out_prefix);
        if (bs->parsed()) return run_blowup_scan(b_list, w_list, rate_cap, horizon, out_path);
        if (sp->parsed()) return run_spectrum(v_R, n_max, dump_eigen, out_prefix);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
