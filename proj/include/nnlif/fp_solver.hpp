#pragma once

#include <optional>
#include <vector>

#include "nnlif/model.hpp"

namespace nnlif {

enum class DriftTreatment { Explicit, SemiImplicit };
enum class DeltaDeposit { NearestCell, LinearSplit };

/// Scheme knobs for the finite-difference Fokker-Planck solver.
/// Semi-implicit = backward-Euler diffusion + explicit upwind drift; the
/// fully explicit variant is kept for cross-checks and obeys the usual
/// dt <= diffusion_cfl * dv^2 bound.
struct FPSchemeConfig {
    double dt = 1e-5;
    DriftTreatment drift_treatment = DriftTreatment::SemiImplicit;
    int flux_stencil_order = 2;  // one-sided stencil for the reported N(t)
    DeltaDeposit delta_deposit = DeltaDeposit::LinearSplit;
    double diffusion_cfl = 0.5;
    bool deposit_enabled = true;   // diagnostic switch; leaves the source out
    bool adaptive_dt = false;      // shrink dt to the advective CFL when drifts grow
    double advection_cfl = 0.9;

    void validate(double dv) const;
};

enum class RunStatus { Completed, RateExceededThreshold, Unstable };

/// One-sided finite-difference approximation of N = -p_v at the right
/// endpoint (the threshold). Order 1 or 2. Values within -1e-12 are clamped
/// to zero; anything below -1e-6 signals scheme breakdown.
double firing_rate(const DensityState& state, int stencil_order = 2);

struct StepResult {
    DensityState state;
    double rate_reported = 0.0;   // stencil rate on the updated density
    double rate_deposited = 0.0;  // discrete boundary outflux fed to the source
    double deposited_mass = 0.0;
    double leak_left = 0.0;       // mass lost through the truncation boundary
    bool stable = true;
};

/// Advances one time step. The Dirac source deposits exactly the discrete
/// probability flux leaving through the threshold, so the trapezoidal mass
/// is conserved up to the left-boundary leak and roundoff.
StepResult fp_step(const DensityState& state, const ModelParams& params,
                   const FPSchemeConfig& cfg, double prev_rate);

struct RunOptions {
    std::vector<double> snapshot_times;  // must be sorted ascending
    int record_every = 0;                // 0 = choose ~2000 records
    std::optional<double> initial_rate;  // default: stencil rate of the data
};

struct FPRunResult {
    DensityState final_state;
    FiringRateSeries rate_series;     // reported stencil rate vs physical time
    FiringRateSeries deposit_series;  // flux-consistent source rate
    std::vector<double> mass_times;
    std::vector<double> mass_values;
    std::vector<DensityState> snapshots;
    double max_mass_dev = 0.0;   // max |mass - 1| over every step
    double total_deposited = 0.0;
    double total_outflux = 0.0;  // integrated flux through the threshold
    double total_leak = 0.0;
    RunStatus status = RunStatus::Completed;
    double halt_time = 0.0;
    double rate_peak = 0.0;
};

FPRunResult fp_run(const DensityState& initial, const ModelParams& params,
                   const FPSchemeConfig& cfg, double horizon, double rate_cap,
                   const RunOptions& opts = {});

/// Maximum absolute mass deviation from 1 over the recorded run.
double conservation_report(const FPRunResult& result);

}  // namespace nnlif
