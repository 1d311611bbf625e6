// Acceptance suite: one pass/fail line per criterion, every tolerance pinned
// in code. Run all criteria with no arguments or a single one with
// --criterion N (as registered in ctest).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "nnlif/blowup.hpp"
#include "nnlif/fp_solver.hpp"
#include "nnlif/model.hpp"
#include "nnlif/quadrature.hpp"
#include "nnlif/spectrum.hpp"
#include "nnlif/stefan_map.hpp"
#include "nnlif/volterra.hpp"

using namespace nnlif;

namespace {

int g_failures = 0;

struct Checker {
    explicit Checker(std::string n) : name(std::move(n)) {}
    std::string name;
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
    template <typename... Args>
    void notef(const char* fmt, Args... args) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), fmt, args...);
        detail += (detail.empty() ? "" : "; ") + std::string(buf);
    }
    ~Checker() {
        std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", name.c_str(),
                    detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++g_failures;
    }
};

double wall_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

const ModelParams kInhib{-1.0, -1.0, -1.0};

InitialDensity benchmark_init(int n_cells = 800) {
    Grid1D grid{-8.0, 0.0, n_cells};
    ProfileSpec prof{ProfileKind::Gaussian, -2.0, 0.25};
    return make_initial_density(prof, grid);
}

VolterraData vexp_data() {
    Grid1D grid{-20.0, 0.0, 2000};
    ProfileSpec prof{ProfileKind::VExp, 0.0, 1.0};
    return VolterraData::from_profile(prof, grid);
}

// --- criterion 1: mass conservation on the inhibitory benchmark -----------

void criterion1() {
    Checker c{"C1 mass conservation (inhibitory benchmark, dv=1e-2, dt=1e-5)"};
    const auto t0 = std::chrono::steady_clock::now();
    InitialDensity init = benchmark_init();
    FPSchemeConfig cfg;
    cfg.dt = 1e-5;
    FPRunResult run = fp_run(init.state, kInhib, cfg, 2.0, 1e3);
    const double wall = wall_since(t0);
    c.require(run.status == RunStatus::Completed, "run did not complete");
    c.require(run.max_mass_dev <= 1e-6, "max|mass-1| above 1e-6");
    c.require(wall <= 60.0, "runtime above 60 s");
    c.notef("max|mass-1|=%.3g, wall=%.1fs", run.max_mass_dev, wall);
}

// --- criterion 2: formulation equivalence for the uncoupled problem -------

void criterion2() {
    Checker c{"C2 formulation equivalence (b=b0=0, horizon 0.5)"};
    const auto t0 = std::chrono::steady_clock::now();
    InitialDensity init = benchmark_init();
    ModelParams params{0.0, 0.0, -1.0};
    FPSchemeConfig cfg;
    cfg.dt = 1e-5;

    std::vector<double> phys_times;
    for (int k = 1; k <= 10; ++k) phys_times.push_back(0.05 * k);
    RunOptions fo;
    fo.snapshot_times = phys_times;
    fo.record_every = 1;
    FPRunResult fp = fp_run(init.state, params, cfg, 0.5, 1e3, fo);

    RunOptions so;
    for (double t : phys_times) so.snapshot_times.push_back(tau_of_t(t));
    so.record_every = 1;
    StefanRunResult st = stefan_run(init.state, params, cfg, tau_of_t(0.5), 1e3, so);

    DiscrepancyReport rep = equivalence_check(fp, st);
    const double wall = wall_since(t0);
    c.require(fp.status == RunStatus::Completed && st.status == RunStatus::Completed,
              "a solver did not complete");
    c.require(rep.sup_norm <= 5e-3, "sup-norm discrepancy above 5e-3");
    c.require(rep.rate_rel_err <= 0.02, "rate identity above 2%");
    c.require(wall <= 120.0, "runtime above 120 s");
    c.notef("sup=%.3g, l1=%.3g, rate=%.3g%%, wall=%.1fs", rep.sup_norm, rep.l1,
            100.0 * rep.rate_rel_err, wall);
}

// --- criterion 3: certified fixed-point construction ----------------------

void criterion3() {
    Checker c{"C3 Picard fixed point inside certified sigma-windows"};
    VolterraData data = vexp_data();

    ChainResult chain = chain_windows(data, kInhib, 0.005, 50, 1e3);
    c.require(chain.horizon_reached, "window chain stalled");
    c.require(!chain.windows.empty(), "no windows produced");
    double worst_ratio = 0.0;
    int worst_iters = 0;
    double worst_res = 0.0;
    for (const auto& w : chain.windows) {
        worst_iters = std::max(worst_iters, w.picard_iterations);
        worst_res = std::max(worst_res, w.final_residual);
        for (double r : w.contraction_ratios) worst_ratio = std::max(worst_ratio, r);
        // re-verify conditions i-iv independently of the search
        const SigmaWindow& w0 = w.window;
        c.require(inv_alpha_of_tau(w0.sigma) <= 2.0 + 1e-12, "condition i fails");
        const double ii = w0.m *
                          (std::abs(kInhib.b0) + 2.0 * w0.m * std::abs(kInhib.b)) *
                          std::sqrt(w0.sigma) / std::sqrt(M_PI);
        c.require(ii <= 0.5 + 1e-9, "condition ii fails");
        const double lambda = std::abs(kInhib.v_R) - std::abs(kInhib.b0) * w0.sigma;
        c.require(lambda > 0.0, "condition iii fails");
        const double z0 = lambda / std::sqrt(8.0 * w0.sigma);
        const double tail = adaptive_simpson(
            [](double z) { return std::exp(-z * z) / z; }, z0, z0 + 15.0, 1e-14);
        c.require(2.0 * w0.m / std::sqrt(M_PI) * tail <= 0.5 + 1e-9,
                  "condition iv fails");
    }
    c.require(worst_iters <= 25, "Picard exceeded 25 iterations");
    c.require(worst_res <= 1e-8, "residual above 1e-8");
    c.require(worst_ratio <= 0.6, "contraction ratio above 0.6");

    // sigma is non-increasing as sup|u_I'| doubles
    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (double mult : {1.0, 2.0, 4.0}) {
        SigmaWindow w = compute_sigma_window(mult * data.sup_abs_deriv, kInhib);
        if (w.sigma > prev * (1.0 + 1e-12)) monotone = false;
        prev = w.sigma;
    }
    c.require(monotone, "sigma grew when sup|u_I'| doubled");
    c.notef("windows=%zu, max_iters=%d, max_ratio=%.3f", chain.windows.size(),
            worst_iters, worst_ratio);
}

// --- criterion 4: jump condition on the Duhamel-recovered solution --------

void criterion4() {
    Checker c{"C4 jump condition u_x(s1-) - u_x(s1+) = M at 10 times"};
    VolterraData data = vexp_data();
    SigmaWindow w = compute_sigma_window(data.sup_abs_deriv, kInhib);
    MSolution sol = solve_M_picard(data, kInhib, w, 1e-8, 25, 257);
    const double h = sol.taus[1] - sol.taus[0];
    double worst = 0.0;
    for (int j = 1; j <= 10; ++j) {
        const double t = w.sigma * j / 10.0;
        const int it = static_cast<int>(std::lround(t / h));
        const double m_t = sol.m[it];
        const double s1_t = sol.boundary.s1_at(t);
        auto ux = [&](double x) { return duhamel_u_x(sol, data, kInhib, x, t); };
        const double d1 = std::min(0.012, 0.5 * std::sqrt(t));
        const double d2 = 0.5 * d1;
        const double left = 2.0 * ux(s1_t - d2) - ux(s1_t - d1);
        const double right = 2.0 * ux(s1_t + d2) - ux(s1_t + d1);
        const double rel = std::abs(left - right - m_t) / m_t;
        worst = std::max(worst, rel);
    }
    c.require(worst <= 0.05, "jump defect above 5%");
    c.notef("worst relative defect=%.2f%%", 100.0 * worst);
}

// --- criterion 5: global existence for b < 0 via chained windows ----------

void criterion5() {
    Checker c{"C5 global continuation to horizon 5 for b<0 with window floor"};
    const auto t0 = std::chrono::steady_clock::now();
    Grid1D grid{-8.0, 0.0, 800};
    ProfileSpec prof{ProfileKind::Gaussian, -2.0, 0.25};
    VolterraData data = VolterraData::from_profile(prof, grid);
    ChainResult chain = chain_windows(data, kInhib, 5.0, 2000000, 1e3);
    c.require(chain.horizon_reached, "did not reach the horizon");
    c.require(!chain.rate_capped, "rate cap tripped for an inhibitory run");
    double first = 0.0, min_sigma = std::numeric_limits<double>::infinity();
    for (const auto& w : chain.windows) {
        if (first == 0.0) first = w.window.sigma;
        min_sigma = std::min(min_sigma, w.window.sigma);
    }
    c.require(min_sigma >= 0.5 * first, "window length fell below half the first");
    c.notef("windows=%zu, first sigma=%.3g, min sigma=%.3g, wall=%.1fs",
            chain.windows.size(), first, min_sigma, wall_since(t0));
}

// --- criterion 6: excitatory blow-up scan with refinement confirmation ----

void criterion6() {
    Checker c{"C6 blow-up scan (12 points, Cauchy-confirmed t*)"};
    const auto t0 = std::chrono::steady_clock::now();
    ScanConfig scfg;  // production resolution
    auto rows = blowup_scan({0.5, 1.0, 2.0, 4.0}, {0.05, 0.1, 0.2}, scfg);
    const double wall = wall_since(t0);
    c.require(rows.size() == 12, "expected 12 rows");
    int detected = 0;
    for (const auto& row : rows)
        if (row.regime == ContinuationRegime::BlowupDetected) ++detected;
    c.require(detected >= 1, "no blow-up detected anywhere in the scan");
    c.require(wall <= 600.0, "runtime above 10 minutes");

    // re-check the Cauchy confirmation for one detected row
    bool cauchy_ok = false;
    for (const auto& row : rows) {
        if (row.regime != ContinuationRegime::BlowupDetected) continue;
        ModelParams params{0.0, row.b, scfg.v_R};
        ProfileSpec init{ProfileKind::NearThreshold, -row.width, 0.5 * row.width};
        Grid1D grid{scfg.x_min, 0.0,
                    static_cast<int>(std::lround(-scfg.x_min / scfg.dv))};
        FPSchemeConfig cfg;
        cfg.dt = scfg.dt;
        cfg.adaptive_dt = true;
        DetectorConfig det;
        det.rate_cap = scfg.rate_cap;
        ContinuationResult r =
            continue_solution(init, grid, params, cfg, scfg.horizon, det);
        if (r.regime == ContinuationRegime::BlowupDetected &&
            r.refinement_history.size() == 2) {
            const double t1 = r.refinement_history[0].second;
            const double t2 = r.refinement_history[1].second;
            cauchy_ok = std::abs(t1 - t2) <= 0.10 * t2;
        }
        break;
    }
    c.require(cauchy_ok, "refinement history not Cauchy within 10%");
    c.notef("detected=%d/12, wall=%.1fs", detected, wall);
}

// --- criterion 7: free-boundary monotonicity -------------------------------

void criterion7() {
    Checker c{"C7 free-boundary monotonicity in both sign regimes"};
    InitialDensity init = benchmark_init(600);
    FPSchemeConfig cfg;
    cfg.dt = 1e-4;

    StefanRunResult inc = stefan_run(init.state, kInhib, cfg, 0.5, 1e3);
    AuditResult a1 = monotonicity_audit(inc.boundary, kInhib);
    c.require(inc.status == RunStatus::Completed, "inhibitory run failed");
    c.require(a1.status == AuditStatus::Pass, "b0<0, b<0 boundary not increasing");

    ModelParams exc{1.0, 1.0, -1.0};
    StefanRunResult dec = stefan_run(init.state, exc, cfg, 0.5, 1e3);
    AuditResult a2 = monotonicity_audit(dec.boundary, exc);
    c.require(dec.status == RunStatus::Completed, "excitatory run failed");
    c.require(a2.status == AuditStatus::Pass, "b0>0, b>0 boundary not decreasing");

    ModelParams mixed{-1.0, 1.0, -1.0};
    AuditResult a3 = monotonicity_audit(inc.boundary, mixed);
    c.require(a3.status == AuditStatus::NotApplicable, "mixed signs not skipped");
}

// --- criterion 8: spectrum --------------------------------------------------

void criterion8() {
    Checker c{"C8 spectrum: steady state, compatibility set, residuals"};
    // (a) p_inf is a discrete fixed point of the uncoupled solver
    Grid1D grid{-8.0, 0.0, 800};
    DensityState pinf = steady_state(-1.0, grid, true);
    ModelParams params{0.0, 0.0, -1.0};
    FPSchemeConfig cfg;
    cfg.dt = 1e-4;
    FPRunResult run = fp_run(pinf, params, cfg, 1.0, 1e3);
    const double drift = (run.final_state.values - pinf.values).cwiseAbs().maxCoeff();
    c.require(run.status == RunStatus::Completed, "relaxation run failed");
    c.require(drift <= 5e-3, "steady state drifted above 5e-3");

    // (b) lambda = -2 never admissible; lambda = -4 exactly at -sqrt(6)
    bool lambda2_admissible = false;
    for (double v_R = -4.0; v_R < -1e-3; v_R += 0.037)
        if (check_admissible(1, v_R).admissible) lambda2_admissible = true;
    c.require(!lambda2_admissible, "lambda=-2 came out admissible somewhere");
    auto set2 = find_admissible_set(2, -10.0, 0.0);
    bool found = false;
    for (const auto& [n, root] : set2)
        if (n == 2 && std::abs(root + std::sqrt(6.0)) <= 1e-8) found = true;
    c.require(found, "lambda=-4 root not at -sqrt(6) within 1e-8");
    c.require(!check_admissible(2, -std::sqrt(6.0) + 1e-3).admissible &&
                  !check_admissible(2, -std::sqrt(6.0) - 1e-3).admissible,
              "admissibility not sharp around -sqrt(6)");

    // (c) residuals at the admissible point, with a perturbed control
    EigenCandidate good = check_admissible(2, -std::sqrt(6.0), 1e-3);
    ResidualReport rg = eigenfunction_residual(good);
    c.require(rg.ode_interior <= 1e-4, "ODE residual above 1e-4");
    c.require(rg.f2_residual <= 1e-10, "F2 residual above 1e-10");
    c.require(rg.f3_residual <= 1e-6, "F3 residual above 1e-6");
    c.require(rg.f4_residual <= 1e-4, "F4 residual above 1e-4");
    ResidualReport rb =
        eigenfunction_residual(check_admissible(2, -std::sqrt(6.0) + 0.1, 1e-3));
    c.require(rb.f4_residual >= 10.0 * rg.f4_residual,
              "perturbed F4 residual not 10x larger");
    c.notef("drift=%.2g, ode=%.2g, f4=%.2g vs perturbed %.2g", drift,
            rg.ode_interior, rg.f4_residual, rb.f4_residual);
}

// --- criterion 9: relaxation to equilibrium --------------------------------

void criterion9() {
    Checker c{"C9 relaxation to p_inf for the uncoupled network"};
    InitialDensity init = benchmark_init();
    FPSchemeConfig cfg;
    cfg.dt = 1e-4;
    RelaxationReport rep =
        relaxation_to_steady_state(init.state, -1.0, cfg, 10.0, 1.0, 0.1);
    c.require(rep.final_dist <= 1e-3, "L1 distance above 1e-3 at t=10");
    c.require(rep.monotone_after_burnin, "decay not monotone after burn-in");
    c.notef("final L1=%.2g, fitted rate=%.3f +/- %.3f (reported, not asserted)",
            rep.final_dist, rep.fitted_rate, rep.rate_half_width);
}

// --- criterion 10: heat-kernel suite ---------------------------------------

void criterion10() {
    Checker c{"C10 kernel suite: normalization, derivative bound, half-jump"};
    std::mt19937 rng(20260809);
    std::uniform_real_distribution<double> ux(-5.0, 5.0);
    std::uniform_real_distribution<double> udt(1e-6, 10.0);

    double worst_norm = 0.0;
    for (int i = 0; i < 12; ++i) {
        const double dt = udt(rng), x = ux(rng);
        const double L = 14.0 * std::sqrt(dt);
        const double integral = adaptive_simpson(
            [&](double xi) { return heat_kernel(x, dt, xi, 0.0); }, x - L, x + L,
            1e-13);
        worst_norm = std::max(worst_norm, std::abs(integral - 1.0));
    }
    c.require(worst_norm <= 1e-10, "kernel normalization off by more than 1e-10");

    bool bound_ok = true;
    for (int i = 0; i < 10000; ++i) {
        const double x = ux(rng), xi = ux(rng), dt = udt(rng);
        const double gx = heat_kernel_x(x, dt, xi, 0.0);
        const double bound = std::exp(-(x - xi) * (x - xi) / (8.0 * dt)) /
                             (std::sqrt(4.0 * M_PI) * dt);
        if (std::abs(gx) > bound * (1.0 + 1e-12)) bound_ok = false;
    }
    c.require(bound_ok, "derivative bound violated");

    auto rho = [](double tau) { return 1.5 + std::cos(tau); };
    auto curve = [](double) { return -0.4; };
    bool exact = true;
    for (double t : {0.3, 0.8, 2.0})
        if (boundary_derivative(rho, curve, t) != 0.5 * rho(t)) exact = false;
    c.require(exact, "constant-curve boundary derivative not exactly rho/2");
    c.notef("norm dev=%.2g over sampled spans", worst_norm);
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc)
            only = std::atoi(argv[i + 1]);
    }
    const std::function<void()> criteria[] = {
        criterion1, criterion2, criterion3, criterion4, criterion5,
        criterion6, criterion7, criterion8, criterion9, criterion10,
    };
    if (only >= 1 && only <= 10) {
        criteria[only - 1]();
    } else {
        for (const auto& fn : criteria) fn();
    }
    if (g_failures > 0) {
        std::printf("%d criterion(s) FAILED\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
