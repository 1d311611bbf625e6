#include "nnlif/blowup.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

namespace nnlif {

namespace {

struct SingleRun {
    bool capped = false;
    bool unstable = false;
    double t_star = std::numeric_limits<double>::infinity();
    double rate_peak = 0.0;
};

SingleRun run_fp_once(const ProfileSpec& init, const Grid1D& grid,
                      const ModelParams& params, const FPSchemeConfig& cfg,
                      double horizon, double rate_cap) {
    InitialDensity id = make_initial_density(init, grid);
    FPRunResult r = fp_run(id.state, params, cfg, horizon, rate_cap);
    SingleRun out;
    out.rate_peak = r.rate_peak;
    if (r.status == RunStatus::RateExceededThreshold) {
        out.capped = true;
        out.t_star = r.halt_time;
    } else if (r.status == RunStatus::Unstable) {
        out.unstable = true;
    }
    return out;
}

ContinuationResult continue_fp(const ProfileSpec& init, const Grid1D& grid,
                               const ModelParams& params, const FPSchemeConfig& cfg,
                               double horizon, const DetectorConfig& det) {
    ContinuationResult res;
    Grid1D g = grid;
    FPSchemeConfig c = cfg;
    std::vector<double> t_stars;
    for (int level = 0; level < std::max(det.refinement_levels, 1); ++level) {
        SingleRun r = run_fp_once(init, g, params, c, horizon, det.rate_cap);
        res.rate_peak = std::max(res.rate_peak, r.rate_peak);
        if (r.unstable) {
            res.regime = ContinuationRegime::Inconclusive;
            return res;
        }
        if (!r.capped) {
            if (level == 0) {
                res.regime = ContinuationRegime::GlobalHorizonReached;
            } else {
                // coarse run crossed the cap but the refined one does not
                res.regime = ContinuationRegime::Inconclusive;
            }
            return res;
        }
        res.refinement_history.emplace_back(c.dt, r.t_star);
        t_stars.push_back(r.t_star);
        if (level + 1 < std::max(det.refinement_levels, 1)) {
            c.dt *= 0.5;
            g.n_cells *= 2;
        }
    }
    for (size_t i = 0; i + 1 < t_stars.size(); ++i) {
        if (std::abs(t_stars[i] - t_stars[i + 1]) >
            det.cauchy_rel_tol * t_stars[i + 1]) {
            res.regime = ContinuationRegime::Inconclusive;
            res.t_star_estimate = t_stars.back();
            return res;
        }
    }
    res.regime = ContinuationRegime::BlowupDetected;
    res.t_star_estimate = t_stars.back();
    return res;
}

ContinuationResult continue_volterra(const ProfileSpec& init, const Grid1D& grid,
                                     const ModelParams& params, double horizon,
                                     const DetectorConfig& det) {
    ContinuationResult res;
    VolterraData data = VolterraData::from_profile(init, grid);
    ChainResult chain = chain_windows(data, params, horizon, 2000000, det.rate_cap);
    for (const auto& w : chain.windows) res.window_sigmas.push_back(w.window.sigma);
    if (!res.window_sigmas.empty()) {
        res.first_window_sigma = res.window_sigmas.front();
        res.min_window_sigma =
            *std::min_element(res.window_sigmas.begin(), res.window_sigmas.end());
    }
    for (size_t i = 0; i < chain.n_series.size(); ++i)
        res.rate_peak = std::max(res.rate_peak, chain.n_series.rates[i]);
    if (!chain.rate_capped) {
        res.regime = chain.horizon_reached ? ContinuationRegime::GlobalHorizonReached
                                           : ContinuationRegime::Inconclusive;
        return res;
    }
    // confirm the crossing time with a refined window discretization
    ChainResult fine = chain_windows(data, params, horizon, 2000000, det.rate_cap,
                                     1e-8, 129);
    res.refinement_history.emplace_back(0.0, chain.cap_time);
    if (!fine.rate_capped ||
        std::abs(chain.cap_time - fine.cap_time) > det.cauchy_rel_tol * fine.cap_time) {
        res.regime = ContinuationRegime::Inconclusive;
        res.t_star_estimate = chain.cap_time;
        return res;
    }
    res.regime = ContinuationRegime::BlowupDetected;
    res.t_star_estimate = fine.cap_time;
    return res;
}

}  // namespace

ContinuationResult continue_solution(const ProfileSpec& init, const Grid1D& grid,
                                     const ModelParams& params,
                                     const FPSchemeConfig& cfg, double horizon,
                                     const DetectorConfig& detector) {
    params.validate();
    if (detector.backend == ContinuationBackend::Volterra)
        return continue_volterra(init, grid, params, horizon, detector);
    return continue_fp(init, grid, params, cfg, horizon, detector);
}

AuditResult monotonicity_audit(const FreeBoundary& fb, const ModelParams& params) {
    AuditResult res;
    const bool increasing = params.b0 < 0.0 && params.b < 0.0;
    const bool decreasing = params.b0 > 0.0 && params.b > 0.0;
    if (!increasing && !decreasing) {
        res.status = AuditStatus::NotApplicable;
        res.note = "mixed signs: not covered by the monotonicity lemma";
        return res;
    }
    const auto& s = fb.s_samples();
    const auto& taus = fb.taus();
    for (size_t i = 0; i + 1 < s.size(); ++i) {
        const bool ok = increasing ? s[i + 1] > s[i] : s[i + 1] < s[i];
        if (!ok) {
            res.status = AuditStatus::Fail;
            res.first_violation = i + 1;
            res.tau_at_violation = taus[i + 1];
            res.note = "strict monotonicity violated";
            return res;
        }
    }
    res.status = AuditStatus::Pass;
    res.note = increasing ? "strictly increasing" : "strictly decreasing";
    return res;
}

std::vector<ScanRow> blowup_scan(const std::vector<double>& b_values,
                                 const std::vector<double>& widths,
                                 const ScanConfig& scfg) {
    std::vector<ScanRow> rows;
    for (double b : b_values)
        for (double w : widths) rows.push_back(ScanRow{b, w});
    if (rows.empty()) return rows;

    int threads = scfg.threads;
    if (threads <= 0) {
        if (const char* env = std::getenv("NNLIF_THREADS"))
            threads = std::max(1, std::atoi(env));
        else
            threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = std::min<int>(threads, static_cast<int>(rows.size()));

    Grid1D grid;
    grid.x_min = scfg.x_min;
    grid.x_max = 0.0;
    grid.n_cells = static_cast<int>(std::lround(-scfg.x_min / scfg.dv));

    FPSchemeConfig cfg;
    cfg.dt = scfg.dt;
    cfg.adaptive_dt = true;

    DetectorConfig det;
    det.rate_cap = scfg.rate_cap;

    auto work = [&](ScanRow& row) {
        ModelParams params{scfg.b0, row.b, scfg.v_R};
        ProfileSpec init;
        init.kind = ProfileKind::NearThreshold;
        init.center = -row.width;
        init.width = 0.5 * row.width;
        ContinuationResult r =
            continue_solution(init, grid, params, cfg, scfg.horizon, det);
        row.regime = r.regime;
        row.t_star = r.t_star_estimate;
        row.rate_peak = r.rate_peak;
    };

    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                const size_t i = next.fetch_add(1);
                if (i >= rows.size()) return;
                work(rows[i]);
            }
        });
    }
    for (auto& th : pool) th.join();
    return rows;
}

std::vector<std::string> scan_trend_report(const std::vector<ScanRow>& rows) {
    std::vector<std::string> notes;
    // group by b; widths assumed ascending within a group as generated
    for (size_t i = 0; i < rows.size(); ++i) {
        for (size_t j = 0; j < i; ++j) {
            if (rows[j].b != rows[i].b) continue;
            if (rows[j].width < rows[i].width) {
                // narrower row j vs wider row i under the same b
                const bool j_blew = rows[j].regime == ContinuationRegime::BlowupDetected;
                const bool i_blew = rows[i].regime == ContinuationRegime::BlowupDetected;
                if (i_blew && !j_blew) {
                    std::ostringstream os;
                    os << "b=" << rows[i].b << ": width " << rows[i].width
                       << " blew up but narrower " << rows[j].width << " did not";
                    notes.push_back(os.str());
                }
                if (i_blew && j_blew && rows[j].t_star > rows[i].t_star * (1.0 + 1e-9)) {
                    std::ostringstream os;
                    os << "b=" << rows[i].b << ": t_star not monotone in width ("
                       << rows[j].width << " -> " << rows[j].t_star << ", "
                       << rows[i].width << " -> " << rows[i].t_star << ")";
                    notes.push_back(os.str());
                }
                if (rows[j].rate_peak < rows[i].rate_peak * (1.0 - 1e-9)) {
                    std::ostringstream os;
                    os << "b=" << rows[i].b << ": rate_peak decreased for narrower width ("
                       << rows[i].width << " -> " << rows[i].rate_peak << " vs "
                       << rows[j].width << " -> " << rows[j].rate_peak << ")";
                    notes.push_back(os.str());
                }
            }
        }
    }
    return notes;
}

}  // namespace nnlif
