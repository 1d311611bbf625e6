#include "nnlif/stefan_map.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nnlif/quadrature.hpp"
#include "parabolic_core.hpp"

namespace nnlif {

double alpha_of_tau(double tau) { return 1.0 / std::sqrt(2.0 * tau + 1.0); }
double inv_alpha_of_tau(double tau) { return std::sqrt(2.0 * tau + 1.0); }
double tau_of_t(double t) { return 0.5 * std::expm1(2.0 * t); }
double t_of_tau(double tau) { return 0.5 * std::log1p(2.0 * tau); }

AlphaClock AlphaClock::from_tau(double tau) {
    if (tau < 0.0) throw std::invalid_argument("AlphaClock: tau must be >= 0");
    return {tau, alpha_of_tau(tau), t_of_tau(tau)};
}

AlphaClock AlphaClock::from_t(double t) {
    if (t < 0.0) throw std::invalid_argument("AlphaClock: t must be >= 0");
    return {tau_of_t(t), std::exp(-t), t};
}

FreeBoundary::FreeBoundary(const ModelParams& params, double m0, double s_I)
    : params_(params), s_I_(s_I) {
    params_.validate();
    if (m0 < 0.0) throw std::invalid_argument("FreeBoundary: M must be >= 0");
    last_integrand_ = m0;  // alpha^{-1}(0) = 1
    taus_.push_back(0.0);
    s_.push_back(s_I);
    s1_.push_back(s_I + params_.v_R);
}

void FreeBoundary::advance(double m_new, double dtau) {
    if (m_new < 0.0) throw std::invalid_argument("FreeBoundary::advance: M must be >= 0");
    if (!(dtau > 0.0)) throw std::invalid_argument("FreeBoundary::advance: dtau must be > 0");
    const double tau_new = taus_.back() + dtau;
    const double integrand = m_new * inv_alpha_of_tau(tau_new);
    integral_ += 0.5 * dtau * (last_integrand_ + integrand);
    last_integrand_ = integrand;
    const double s_new = s_I_ - params_.b0 * (inv_alpha_of_tau(tau_new) - 1.0) -
                         params_.b * integral_;
    taus_.push_back(tau_new);
    s_.push_back(s_new);
    s1_.push_back(s_new + params_.v_R * inv_alpha_of_tau(tau_new));
}

namespace {

double interp_series(const std::vector<double>& xs, const std::vector<double>& ys,
                     double x) {
    auto it = std::lower_bound(xs.begin(), xs.end(), x);
    if (it == xs.end()) {
        if (x <= xs.back() + 1e-12 * (1.0 + std::abs(xs.back()))) return ys.back();
        throw std::out_of_range("interp_series: beyond recorded history");
    }
    const size_t i = static_cast<size_t>(it - xs.begin());
    if (i == 0) {
        if (x >= xs.front() - 1e-12) return ys.front();
        throw std::out_of_range("interp_series: before recorded history");
    }
    const double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] + w * (ys[i] - ys[i - 1]);
}

}  // namespace

double FreeBoundary::s_at(double tau) const { return interp_series(taus_, s_, tau); }
double FreeBoundary::s1_at(double tau) const { return interp_series(taus_, s1_, tau); }

FreeBoundary advance_boundary(const FreeBoundary& fb, double m_new, double dtau) {
    FreeBoundary out = fb;
    out.advance(m_new, dtau);
    return out;
}

DensityState to_stefan(const DensityState& p, const FreeBoundary& fb, double tau) {
    if (p.frame != Frame::Physical)
        throw std::invalid_argument("to_stefan: expected a physical-frame state");
    if (std::abs(tau_of_t(p.time) - tau) > 1e-10 * (1.0 + tau))
        throw std::invalid_argument("to_stefan: clock mismatch between state and tau");
    const double alpha = alpha_of_tau(tau);
    const double s = fb.s_at(tau);
    const double s_I = fb.s_samples().front();

    Grid1D sg;
    sg.x_max = s;
    const double span = (p.grid.x_max - p.grid.x_min) / alpha;
    sg.n_cells = static_cast<int>(std::ceil(span / p.grid.dx()));
    sg.x_min = s - sg.n_cells * p.grid.dx();

    VectorXd vals(sg.n_nodes());
    for (int i = 0; i < sg.n_nodes(); ++i) {
        const double v = alpha * (sg.node(i) - s + s_I);
        vals[i] = alpha * cubic_interp_clamped(p.grid.x_min, p.grid.dx(), p.values, v);
    }
    vals[sg.n_nodes() - 1] = 0.0;
    DensityState u;
    u.frame = Frame::Stefan;
    u.time = tau;
    u.grid = sg;
    u.values = std::move(vals);
    u.refresh_mass();
    return u;
}

DensityState from_stefan(const DensityState& u, const FreeBoundary& fb,
                         const Grid1D& physical_grid) {
    if (u.frame != Frame::Stefan)
        throw std::invalid_argument("from_stefan: expected a Stefan-frame state");
    const double tau = u.time;
    const double alpha = alpha_of_tau(tau);
    const double s = fb.s_at(tau);  // throws outside the recorded history
    const double s_I = fb.s_samples().front();

    VectorXd vals(physical_grid.n_nodes());
    for (int i = 0; i < physical_grid.n_nodes(); ++i) {
        const double x = physical_grid.node(i) / alpha + s - s_I;
        vals[i] = cubic_interp_clamped(u.grid.x_min, u.grid.dx(), u.values, x) / alpha;
    }
    vals[physical_grid.n_nodes() - 1] = 0.0;
    DensityState p;
    p.frame = Frame::Physical;
    p.time = t_of_tau(tau);
    p.grid = physical_grid;
    p.values = std::move(vals);
    p.refresh_mass();
    return p;
}

namespace {

double stencil_rate_vec(const VectorXd& u, double dx, int order) {
    const int K = static_cast<int>(u.size()) - 1;
    double m = (order == 1) ? u[K - 1] / dx
                            : (4.0 * u[K - 1] - u[K - 2]) / (2.0 * dx);
    if (m < 0.0 && m >= -1e-12) m = 0.0;
    return m;
}

}  // namespace

StefanRunResult stefan_run(const DensityState& initial_physical,
                           const ModelParams& params, const FPSchemeConfig& cfg,
                           double tau_horizon, double rate_cap,
                           const RunOptions& opts) {
    if (initial_physical.frame != Frame::Physical)
        throw std::invalid_argument("stefan_run: initial state must be physical frame");
    if (initial_physical.time != 0.0)
        throw std::invalid_argument("stefan_run: initial state must be at t = 0");
    params.validate();
    const Grid1D& pg = initial_physical.grid;
    cfg.validate(pg.dx());

    // Boundary-attached grid sized for the whole run: the physical domain
    // stretches by alpha^{-1}; the reset curve drifts to v_R alpha^{-1}.
    const double dz = pg.dx();
    const double stretch = inv_alpha_of_tau(tau_horizon);
    const int extra = static_cast<int>(std::ceil(
        (std::abs(pg.x_min) * (stretch - 1.0) + 1.0) / dz)) + 4;
    const int K = pg.n_cells + extra;
    const double z_min = -K * dz;
    if (params.v_R * stretch < z_min + dz)
        throw std::invalid_argument("stefan_run: grid cannot contain the reset curve");

    VectorXd u = VectorXd::Zero(K + 1);
    u.tail(pg.n_cells + 1) = initial_physical.values;  // nodes align, no resampling

    detail::ParabolicCore core(K, dz,
                               cfg.drift_treatment == DriftTreatment::SemiImplicit,
                               cfg.delta_deposit == DeltaDeposit::LinearSplit,
                               cfg.deposit_enabled);

    StefanRunResult out;
    out.m_series.frame = Frame::Stefan;
    out.m_deposit_series.frame = Frame::Stefan;

    double tau = 0.0;
    double m_rate = opts.initial_rate ? *opts.initial_rate
                                      : stencil_rate_vec(u, dz, cfg.flux_stencil_order);
    out.m_series.append(0.0, m_rate);
    out.boundary = FreeBoundary(params, m_rate);

    int record_every = opts.record_every;
    if (record_every <= 0)
        record_every = std::max(1, static_cast<int>(tau_horizon / cfg.dt / 2000.0));

    VectorXd a_half(K);
    auto snapshot_it = opts.snapshot_times.begin();
    while (snapshot_it != opts.snapshot_times.end() && *snapshot_it <= 1e-14) {
        DensityState snap;
        snap.frame = Frame::Stefan;
        snap.time = 0.0;
        snap.grid = Grid1D{z_min, 0.0, K};
        snap.values = u;
        snap.refresh_mass();
        out.snapshots.push_back(std::move(snap));
        ++snapshot_it;
    }

    long step_count = 0;
    out.status = RunStatus::Completed;
    while (tau < tau_horizon - 1e-13) {
        double dtau = cfg.dt;
        bool at_event = false;
        if (snapshot_it != opts.snapshot_times.end() && tau + dtau >= *snapshot_it - 1e-13) {
            dtau = *snapshot_it - tau;
            at_event = true;
        }
        if (tau + dtau > tau_horizon) {
            dtau = tau_horizon - tau;
            at_event = true;
        }
        if (dtau <= 1e-15) {
            if (snapshot_it != opts.snapshot_times.end()) ++snapshot_it;
            continue;
        }

        const double s_dot = -params.b0 * alpha_of_tau(tau) -
                             params.b * std::max(m_rate, 0.0) * inv_alpha_of_tau(tau);
        a_half.setConstant(s_dot);
        const double z_reset = params.v_R * inv_alpha_of_tau(tau);
        auto info = core.advance(u, a_half, dtau, z_min, z_reset);
        tau += dtau;
        ++step_count;

        m_rate = stencil_rate_vec(u, dz, cfg.flux_stencil_order);
        out.boundary.advance(std::max(info.rate_deposited, 0.0), dtau);

        const double m = trapezoid(u, dz);
        out.max_mass_dev = std::max(out.max_mass_dev, std::abs(m - 1.0));

        if (!info.stable || m_rate < -1e-6) {
            out.status = RunStatus::Unstable;
            out.halt_tau = tau;
            break;
        }
        if (step_count % record_every == 0 || at_event) {
            out.m_series.append(tau, m_rate);
            out.m_deposit_series.append(tau, info.rate_deposited);
        }
        if (snapshot_it != opts.snapshot_times.end() && tau >= *snapshot_it - 1e-13) {
            DensityState snap;
            snap.frame = Frame::Stefan;
            snap.time = tau;
            const double s = out.boundary.s_back();
            snap.grid = Grid1D{z_min + s, s, K};
            snap.values = u;
            snap.refresh_mass();
            out.snapshots.push_back(std::move(snap));
            ++snapshot_it;
        }
        if (m_rate > rate_cap) {
            out.status = RunStatus::RateExceededThreshold;
            out.halt_tau = tau;
            break;
        }
    }
    if (out.status == RunStatus::Completed) out.halt_tau = tau;

    const double s_end = out.boundary.s_back();
    out.final_state.frame = Frame::Stefan;
    out.final_state.time = tau;
    out.final_state.grid = Grid1D{z_min + s_end, s_end, K};
    out.final_state.values = std::move(u);
    out.final_state.refresh_mass();
    return out;
}

DiscrepancyReport equivalence_check(const FPRunResult& fp,
                                    const StefanRunResult& stefan) {
    DiscrepancyReport rep;
    const size_t n = std::min(fp.snapshots.size(), stefan.snapshots.size());
    for (size_t k = 0; k < n; ++k) {
        const DensityState& pk = fp.snapshots[k];
        DensityState mapped = from_stefan(stefan.snapshots[k], stefan.boundary, pk.grid);
        if (std::abs(mapped.time - pk.time) > 1e-9 * (1.0 + pk.time))
            throw std::invalid_argument("equivalence_check: snapshot times do not match");
        const VectorXd diff = (mapped.values - pk.values).cwiseAbs();
        rep.sup_norm = std::max(rep.sup_norm, diff.maxCoeff());
        rep.l1 = std::max(rep.l1, trapezoid(diff, pk.grid.dx()));
    }

    // Firing-rate identity M(tau) = alpha^2(tau) N(t(tau)).
    double sup_m = 0.0, sup_diff = 0.0;
    for (size_t i = 0; i < stefan.m_series.size(); ++i) {
        const double tau = stefan.m_series.times[i];
        const double t = t_of_tau(tau);
        if (t > fp.rate_series.times.back() + 1e-12) break;
        const double n_fp = interp_series(fp.rate_series.times, fp.rate_series.rates, t);
        const double a = alpha_of_tau(tau);
        const double m_fp = a * a * n_fp;
        sup_m = std::max(sup_m, std::abs(stefan.m_series.rates[i]));
        sup_diff = std::max(sup_diff, std::abs(stefan.m_series.rates[i] - m_fp));
    }
    rep.rate_rel_err = (sup_m > 0.0) ? sup_diff / sup_m : 0.0;
    return rep;
}

}  // namespace nnlif
