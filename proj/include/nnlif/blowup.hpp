#pragma once

#include <string>
#include <vector>

#include "nnlif/fp_solver.hpp"
#include "nnlif/model.hpp"
#include "nnlif/stefan_map.hpp"
#include "nnlif/volterra.hpp"

namespace nnlif {

enum class ContinuationRegime { GlobalHorizonReached, BlowupDetected, Inconclusive };
enum class ContinuationBackend { FPSolver, Volterra };

struct DetectorConfig {
    double rate_cap = 1e3;
    int refinement_levels = 2;     // base run plus (levels-1) halvings
    double cauchy_rel_tol = 0.10;  // |t*_coarse - t*_fine| <= tol * t*_fine
    ContinuationBackend backend = ContinuationBackend::FPSolver;
};

/// Numerical blow-up is a proxy: the rate crossed the cap AND the crossing
/// time is Cauchy under (dt, dv) halving. A rate that grew without a Cauchy
/// refinement is reported inconclusive, never as blow-up.
struct ContinuationResult {
    ContinuationRegime regime = ContinuationRegime::GlobalHorizonReached;
    double t_star_estimate = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, double>> refinement_history;  // (dt, t_star)
    double rate_peak = 0.0;
    // Volterra-backend window statistics
    std::vector<double> window_sigmas;
    double first_window_sigma = 0.0;
    double min_window_sigma = 0.0;
};

ContinuationResult continue_solution(const ProfileSpec& init, const Grid1D& grid,
                                     const ModelParams& params,
                                     const FPSchemeConfig& cfg, double horizon,
                                     const DetectorConfig& detector);

enum class AuditStatus { Pass, Fail, NotApplicable };

struct AuditResult {
    AuditStatus status = AuditStatus::NotApplicable;
    size_t first_violation = 0;
    double tau_at_violation = 0.0;
    std::string note;
};

/// Strict monotonicity of the recorded free boundary in the direction
/// dictated by sign(b): increasing for b0<0, b<0 and decreasing for
/// b0>0, b>0. Mixed signs are not covered and are skipped explicitly.
AuditResult monotonicity_audit(const FreeBoundary& fb, const ModelParams& params);

struct ScanRow {
    double b = 0.0;
    double width = 0.0;
    ContinuationRegime regime = ContinuationRegime::GlobalHorizonReached;
    double t_star = std::numeric_limits<double>::infinity();
    double rate_peak = 0.0;
};

struct ScanConfig {
    double b0 = 0.0;
    double v_R = -1.0;
    double horizon = 2.0;
    double rate_cap = 1e3;
    double dv = 2e-3;
    double dt = 1e-5;
    double x_min = -4.0;
    int threads = 0;  // 0: NNLIF_THREADS env or hardware concurrency
};

/// Scan over connectivity strengths b > 0 and near-threshold concentration
/// widths; each row runs an independent continuation with refinement
/// confirmation. Rows run concurrently.
std::vector<ScanRow> blowup_scan(const std::vector<double>& b_values,
                                 const std::vector<double>& widths,
                                 const ScanConfig& scfg);

/// Soft trend checks over a finished scan (reported, not asserted): within a
/// fixed b, narrower data should not blow up later or peak lower.
std::vector<std::string> scan_trend_report(const std::vector<ScanRow>& rows);

}  // namespace nnlif
