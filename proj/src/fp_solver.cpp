#include "nnlif/fp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nnlif/quadrature.hpp"
#include "parabolic_core.hpp"

namespace nnlif {

void FPSchemeConfig::validate(double dv) const {
    if (!(dt > 0.0)) throw std::invalid_argument("FPSchemeConfig: dt must be > 0");
    if (flux_stencil_order != 1 && flux_stencil_order != 2)
        throw std::invalid_argument("FPSchemeConfig: stencil order must be 1 or 2");
    if (drift_treatment == DriftTreatment::Explicit && dt > diffusion_cfl * dv * dv)
        throw std::invalid_argument(
            "FPSchemeConfig: explicit diffusion needs dt <= diffusion_cfl * dv^2");
}

double firing_rate(const DensityState& state, int stencil_order) {
    const int K = state.grid.n_cells;
    const double dv = state.grid.dx();
    if (std::abs(state.values[K]) > 1e-12)
        throw std::invalid_argument("firing_rate: rightmost value must be 0");
    double n;
    if (stencil_order == 1) {
        n = state.values[K - 1] / dv;
    } else {
        n = (4.0 * state.values[K - 1] - state.values[K - 2]) / (2.0 * dv);
    }
    if (n < -1e-6) throw std::runtime_error("firing_rate: negative rate, scheme breakdown");
    if (n < 0.0) n = 0.0;  // within floating slack of Hopf positivity
    return n;
}

namespace {

void fill_ou_drift(VectorXd& a_half, const Grid1D& grid, double mu) {
    const int K = grid.n_cells;
    const double dv = grid.dx();
    for (int i = 0; i < K; ++i) a_half[i] = grid.x_min + (i + 0.5) * dv - mu;
}

double stencil_rate(const VectorXd& p, double dv, int order) {
    const int K = static_cast<int>(p.size()) - 1;
    double n = (order == 1) ? p[K - 1] / dv
                            : (4.0 * p[K - 1] - p[K - 2]) / (2.0 * dv);
    if (n < 0.0 && n >= -1e-12) n = 0.0;
    return n;
}

}  // namespace

StepResult fp_step(const DensityState& state, const ModelParams& params,
                   const FPSchemeConfig& cfg, double prev_rate) {
    const Grid1D& grid = state.grid;
    cfg.validate(grid.dx());
    params.validate();

    detail::ParabolicCore core(grid.n_cells, grid.dx(),
                               cfg.drift_treatment == DriftTreatment::SemiImplicit,
                               cfg.delta_deposit == DeltaDeposit::LinearSplit,
                               cfg.deposit_enabled);
    VectorXd p = state.values;
    VectorXd a_half(grid.n_cells);
    const double mu = params.b0 + params.b * std::max(prev_rate, 0.0);
    fill_ou_drift(a_half, grid, mu);

    auto info = core.advance(p, a_half, cfg.dt, grid.x_min, params.v_R);

    StepResult res;
    res.state = state;
    res.state.time = state.time + cfg.dt;
    res.state.values = std::move(p);
    res.state.refresh_mass();
    res.rate_reported = stencil_rate(res.state.values, grid.dx(), cfg.flux_stencil_order);
    res.rate_deposited = info.rate_deposited;
    res.deposited_mass = info.deposited_mass;
    res.leak_left = info.leak_left;
    res.stable = info.stable && res.rate_reported >= -1e-6;
    return res;
}

FPRunResult fp_run(const DensityState& initial, const ModelParams& params,
                   const FPSchemeConfig& cfg, double horizon, double rate_cap,
                   const RunOptions& opts) {
    const Grid1D& grid = initial.grid;
    cfg.validate(grid.dx());
    params.validate();
    if (!(horizon > 0.0)) throw std::invalid_argument("fp_run: horizon must be > 0");
    if (!(rate_cap > 0.0)) throw std::invalid_argument("fp_run: rate_cap must be > 0");

    const int K = grid.n_cells;
    const double dv = grid.dx();
    detail::ParabolicCore core(K, dv,
                               cfg.drift_treatment == DriftTreatment::SemiImplicit,
                               cfg.delta_deposit == DeltaDeposit::LinearSplit,
                               cfg.deposit_enabled);

    FPRunResult out;
    out.rate_series.frame = Frame::Physical;
    out.deposit_series.frame = Frame::Physical;

    VectorXd p = initial.values;
    VectorXd a_half(K);
    double t = initial.time;
    const double t_end = initial.time + horizon;

    int record_every = opts.record_every;
    if (record_every <= 0)
        record_every = std::max(1, static_cast<int>(horizon / cfg.dt / 2000.0));

    double rate = opts.initial_rate ? *opts.initial_rate
                                    : stencil_rate(p, dv, cfg.flux_stencil_order);
    out.rate_series.append(t, rate);
    out.mass_times.push_back(t);
    out.mass_values.push_back(trapezoid(p, dv));
    out.rate_peak = rate;

    auto snapshot_it = opts.snapshot_times.begin();
    while (snapshot_it != opts.snapshot_times.end() && *snapshot_it <= t + 1e-14) {
        DensityState snap = initial;
        snap.time = t;
        snap.values = p;
        snap.refresh_mass();
        out.snapshots.push_back(std::move(snap));
        ++snapshot_it;
    }

    long step_count = 0;
    out.status = RunStatus::Completed;
    while (t < t_end - 1e-13) {
        double dt_eff = cfg.dt;
        if (cfg.adaptive_dt) {
            const double mu = params.b0 + params.b * std::max(rate, 0.0);
            const double a_max =
                std::max(std::abs(grid.x_min - mu), std::abs(grid.x_max - mu));
            if (a_max > 0.0) dt_eff = std::min(dt_eff, cfg.advection_cfl * dv / a_max);
        }
        bool at_event = false;
        if (snapshot_it != opts.snapshot_times.end() && t + dt_eff >= *snapshot_it - 1e-13) {
            dt_eff = *snapshot_it - t;
            at_event = true;
        }
        if (t + dt_eff > t_end) {
            dt_eff = t_end - t;
            at_event = true;
        }
        if (dt_eff <= 1e-15) {
            if (snapshot_it != opts.snapshot_times.end()) {
                DensityState snap = initial;
                snap.time = t;
                snap.values = p;
                snap.refresh_mass();
                out.snapshots.push_back(std::move(snap));
                ++snapshot_it;
            }
            continue;
        }

        const double mu = params.b0 + params.b * std::max(rate, 0.0);
        fill_ou_drift(a_half, grid, mu);
        auto info = core.advance(p, a_half, dt_eff, grid.x_min, params.v_R);
        t += dt_eff;
        ++step_count;

        out.total_deposited += info.deposited_mass;
        out.total_outflux += dt_eff * info.rate_deposited;
        out.total_leak += info.leak_left;

        rate = stencil_rate(p, dv, cfg.flux_stencil_order);
        out.rate_peak = std::max(out.rate_peak, rate);

        const double m = trapezoid(p, dv);
        out.max_mass_dev = std::max(out.max_mass_dev, std::abs(m - 1.0));

        if (!info.stable || rate < -1e-6) {
            out.status = RunStatus::Unstable;
            out.halt_time = t;
            break;
        }

        if (step_count % record_every == 0 || at_event) {
            out.rate_series.append(t, rate);
            out.deposit_series.append(t, info.rate_deposited);
            out.mass_times.push_back(t);
            out.mass_values.push_back(m);
        }

        if (snapshot_it != opts.snapshot_times.end() && t >= *snapshot_it - 1e-13) {
            DensityState snap = initial;
            snap.time = t;
            snap.values = p;
            snap.refresh_mass();
            out.snapshots.push_back(std::move(snap));
            ++snapshot_it;
        }

        if (rate > rate_cap) {
            out.status = RunStatus::RateExceededThreshold;
            out.halt_time = t;
            break;
        }
    }
    if (out.status == RunStatus::Completed) out.halt_time = t;

    out.final_state = initial;
    out.final_state.time = t;
    out.final_state.values = std::move(p);
    out.final_state.refresh_mass();
    return out;
}

double conservation_report(const FPRunResult& result) { return result.max_mass_dev; }

}  // namespace nnlif
