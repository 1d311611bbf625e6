#include "nnlif/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nnlif/quadrature.hpp"

namespace nnlif {

namespace {
constexpr double kSqrt4Pi = 3.54490770181103205460;
constexpr double kSqrtPi = 1.77245385090551602730;
}  // namespace

double heat_kernel(double x, double t, double xi, double tau) {
    const double dt = t - tau;
    if (!(dt > 0.0)) throw std::invalid_argument("heat_kernel: need t > tau");
    const double d = x - xi;
    return std::exp(-d * d / (4.0 * dt)) / (kSqrt4Pi * std::sqrt(dt));
}

double heat_kernel_x(double x, double t, double xi, double tau) {
    const double dt = t - tau;
    if (!(dt > 0.0)) throw std::invalid_argument("heat_kernel_x: need t > tau");
    const double d = x - xi;
    return -d / (2.0 * dt) * std::exp(-d * d / (4.0 * dt)) / (kSqrt4Pi * std::sqrt(dt));
}

SigmaWindow evaluate_sigma_conditions(double sup_ui_prime, const ModelParams& params,
                                      double sigma) {
    if (!(sigma > 0.0))
        throw std::invalid_argument("evaluate_sigma_conditions: sigma must be > 0");
    SigmaWindow w;
    w.m = 1.0 + 2.0 * sup_ui_prime;
    w.sigma = sigma;
    const double ab0 = std::abs(params.b0), ab = std::abs(params.b);
    const double avr = std::abs(params.v_R);

    w.alpha_inv_max = inv_alpha_of_tau(sigma);
    w.holds_i = w.alpha_inv_max <= 2.0 + 1e-14;

    w.cond_ii_lhs = w.m * (ab0 + 2.0 * w.m * ab) * std::sqrt(sigma) / kSqrtPi;
    w.holds_ii = w.cond_ii_lhs <= 0.5 + 1e-14;

    w.lambda = (params.b > 0.0) ? avr - (ab0 + w.m) * sigma : avr - ab0 * sigma;
    w.holds_iii = w.lambda > 0.0;

    if (w.holds_iii) {
        const double z0 = w.lambda / std::sqrt(8.0 * sigma);
        w.cond_iv_lhs = 2.0 * w.m / kSqrtPi * gaussian_log_tail(z0);
        w.holds_iv = w.cond_iv_lhs <= 0.5 + 1e-14;
    } else {
        w.cond_iv_lhs = std::numeric_limits<double>::infinity();
        w.holds_iv = false;
    }
    return w;
}

SigmaWindow compute_sigma_window(double sup_ui_prime, const ModelParams& params,
                                 double sigma_floor) {
    params.validate();
    if (!(sup_ui_prime >= 0.0) || !std::isfinite(sup_ui_prime))
        throw std::invalid_argument("compute_sigma_window: sup|u_I'| must be finite");

    auto feasible = [&](double s) {
        return evaluate_sigma_conditions(sup_ui_prime, params, s).all_hold();
    };
    if (!feasible(sigma_floor))
        throw std::runtime_error(
            "compute_sigma_window: no admissible sigma above the floor (reset too "
            "close to threshold for this derivative bound)");

    // All four conditions are monotone: the feasible set is (0, sigma*].
    // Condition i alone caps sigma at 1.5, so the doubling always terminates.
    double lo = sigma_floor, hi = 2.0 * sigma_floor;
    while (hi < 4.0 && feasible(hi)) {
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
    }
    return evaluate_sigma_conditions(sup_ui_prime, params, lo);
}

VolterraData VolterraData::from_profile(const ProfileSpec& profile, const Grid1D& grid) {
    InitialDensity init = make_initial_density(profile, grid);
    VolterraData d;
    d.grid = grid;
    d.values = init.state.values;
    const int n = grid.n_nodes();
    d.derivs.resize(n);
    // make_initial_density normalized by the trapezoidal mass; recompute it to
    // scale the analytic derivative identically.
    VectorXd raw(n);
    for (int i = 0; i < n; ++i) raw[i] = profile.value(grid.node(i));
    const double m0 = trapezoid(raw, grid.dx());
    for (int i = 0; i < n; ++i) d.derivs[i] = profile.derivative(grid.node(i)) / m0;
    d.edge_deriv = init.edge_deriv;
    d.sup_abs_deriv = init.sup_abs_deriv;
    return d;
}

namespace {

struct BoundaryArrays {
    VectorXd s, s1, sdot;
};

BoundaryArrays boundary_from_m(const VectorXd& m, const VectorXd& taus,
                               const ModelParams& prm, double s_i) {
    const int n = static_cast<int>(taus.size());
    const double h = (n > 1) ? taus[1] - taus[0] : 0.0;
    VectorXd integrand(n);
    for (int i = 0; i < n; ++i) integrand[i] = m[i] * inv_alpha_of_tau(taus[i]);
    VectorXd cum = cumulative_trapezoid(integrand, h);
    BoundaryArrays b;
    b.s.resize(n);
    b.s1.resize(n);
    b.sdot.resize(n);
    for (int i = 0; i < n; ++i) {
        const double ia = inv_alpha_of_tau(taus[i]);
        b.s[i] = s_i - prm.b0 * (ia - 1.0) - prm.b * cum[i];
        b.s1[i] = b.s[i] + prm.v_R * ia;
        b.sdot[i] = -prm.b0 * alpha_of_tau(taus[i]) - prm.b * m[i] * ia;
    }
    return b;
}

/// Heat-kernel integrals of grid data against G and G_x via xi = x + 2
/// sqrt(t) z, composite Simpson in z. With u(x_max) = 0 pinned,
///   \int G(x,t,xi,0) u'(xi) dxi  =  \int G_x(x,t,xi,0) u(xi) dxi  =  flux,
/// so the data terms never touch a sampled derivative field.
struct DataIntegrals {
    double plain = 0.0;  // int G u dxi
    double flux = 0.0;   // int G_x u dxi
};

DataIntegrals gauss_data_integrals(double x, double t, const Grid1D& grid,
                                   const VectorXd& f) {
    DataIntegrals out;
    const double rt = 2.0 * std::sqrt(t);
    double z_hi = (grid.x_max - x) / rt;
    double z_lo = std::max(-7.5, (grid.x_min - x) / rt);
    if (z_hi > 7.5) z_hi = 7.5;
    if (!(z_hi > z_lo)) return out;
    const int n = 288;  // even
    const double hz = (z_hi - z_lo) / n;
    double sum_plain = 0.0, sum_flux = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double z = z_lo + k * hz;
        // xi <= x_max by construction of z_hi; guard the roundoff spill that
        // would otherwise drop the edge value of f entirely
        const double xi = std::min(x + rt * z, grid.x_max);
        const double g = std::exp(-z * z) * linear_interp(grid.x_min, grid.dx(), f, xi);
        const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        sum_plain += w * g;
        sum_flux += w * z * g;
    }
    out.plain = sum_plain * hz / 3.0 / kSqrtPi;
    out.flux = sum_flux * hz / 3.0 / kSqrtPi / std::sqrt(t);
    return out;
}

// G_x(x,t,c(tau),tau) sqrt(t-tau): the square-root-free kernel factor used
// with the product-integration weights. diag_slope supplies the curve slope
// for the removable limit on the diagonal.
double kernel_phi(double x, double t, double c_tau, double tau, double diag_slope,
                  bool on_curve_at_diag) {
    const double dt = t - tau;
    if (dt <= 0.0) {
        if (on_curve_at_diag) return -diag_slope / (2.0 * kSqrt4Pi);
        return 0.0;
    }
    const double d = x - c_tau;
    return -d / (2.0 * dt) * std::exp(-d * d / (4.0 * dt)) / kSqrt4Pi;
}

// G(x,t,c(tau),tau) sqrt(t-tau) likewise.
double kernel_g(double x, double t, double c_tau, double tau, bool on_curve_at_diag) {
    const double dt = t - tau;
    if (dt <= 0.0) return on_curve_at_diag ? 1.0 / kSqrt4Pi : 0.0;
    const double d = x - c_tau;
    return std::exp(-d * d / (4.0 * dt)) / kSqrt4Pi;
}

}  // namespace

TParts apply_T_parts(const VectorXd& m_samples, const VolterraData& data,
                     const ModelParams& params, const SigmaWindow& window) {
    const int n = static_cast<int>(m_samples.size());
    if (n < 2) throw std::invalid_argument("apply_T: need at least two nodes");
    if (m_samples.cwiseAbs().maxCoeff() > window.m * (1.0 + 1e-9))
        throw std::invalid_argument("apply_T: iterate escapes the ball ||M|| <= m");

    const double h = window.sigma / (n - 1);
    VectorXd taus = VectorXd::LinSpaced(n, 0.0, window.sigma);
    const double s_i0 = data.grid.x_max;
    BoundaryArrays b = boundary_from_m(m_samples, taus, params, s_i0);

    TParts parts;
    parts.j1.resize(n);
    parts.j2 = VectorXd::Zero(n);
    parts.j3 = VectorXd::Zero(n);
    parts.j1[0] = -data.edge_deriv;
    for (int i = 1; i < n; ++i) {
        const double t = taus[i];
        const double x = b.s[i];
        parts.j1[i] = -2.0 * gauss_data_integrals(x, t, data.grid, data.values).flux;
        VectorXd w = singular_sqrt_weights(t, 0.0, h, i + 1);
        double j2 = 0.0, j3 = 0.0;
        for (int k = 0; k <= i; ++k) {
            const double mk = m_samples[k];
            j2 += w[k] * mk * kernel_phi(x, t, b.s[k], taus[k], b.sdot[i], k == i);
            j3 += w[k] * mk * kernel_phi(x, t, b.s1[k], taus[k], 0.0, false);
        }
        parts.j2[i] = 2.0 * j2;
        parts.j3[i] = -2.0 * j3;
    }
    return parts;
}

VectorXd apply_T(const VectorXd& m_samples, const VolterraData& data,
                 const ModelParams& params, const SigmaWindow& window) {
    TParts parts = apply_T_parts(m_samples, data, params, window);
    VectorXd out = parts.j1 + parts.j2 + parts.j3;
    if (out.cwiseAbs().maxCoeff() > window.m * (1.0 + 1e-9))
        throw std::runtime_error("apply_T: ||T(M)|| > m inside a certified window");
    return out;
}

MSolution solve_M_picard(const VolterraData& data, const ModelParams& params,
                         const SigmaWindow& window, double tol, int max_iter,
                         int n_nodes) {
    if (!window.all_hold())
        throw std::invalid_argument("solve_M_picard: window certificate does not hold");
    MSolution sol;
    sol.window = window;
    sol.taus = VectorXd::LinSpaced(n_nodes, 0.0, window.sigma);
    VectorXd m = VectorXd::Constant(n_nodes, std::max(-data.edge_deriv, 0.0));

    double prev_diff = -1.0;
    bool converged = false;
    for (int it = 1; it <= max_iter; ++it) {
        VectorXd next = apply_T(m, data, params, window);
        const double diff = (next - m).cwiseAbs().maxCoeff();
        if (prev_diff > 10.0 * tol)
            sol.contraction_ratios.push_back(diff / prev_diff);
        m = std::move(next);
        sol.picard_iterations = it;
        sol.final_residual = diff;
        prev_diff = diff;
        if (diff <= tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        std::ostringstream os;
        os << "solve_M_picard: no convergence in " << max_iter
           << " iterations; residual " << sol.final_residual << "; ratios";
        for (double r : sol.contraction_ratios) os << ' ' << r;
        throw std::runtime_error(os.str());
    }
    sol.m = m;

    sol.boundary = FreeBoundary(params, std::max(m[0], 0.0), data.grid.x_max);
    const double h = sol.taus[1] - sol.taus[0];
    for (int i = 1; i < n_nodes; ++i)
        sol.boundary.advance(std::max(m[i], 0.0), h);
    return sol;
}

namespace {

struct ResampledWindow {
    VectorXd taus, m;
    BoundaryArrays b;
    double h = 0.0;
};

ResampledWindow resample_window(const MSolution& msol, const ModelParams& params,
                                double s_i0, double t) {
    const double sigma = msol.taus[msol.taus.size() - 1];
    if (t > sigma * (1.0 + 1e-12))
        throw std::invalid_argument("duhamel: t beyond the window");
    ResampledWindow r;
    const int n = static_cast<int>(msol.taus.size());
    if (std::abs(t - sigma) <= 1e-12 * sigma) {
        r.taus = msol.taus;
        r.m = msol.m;
    } else {
        r.taus = VectorXd::LinSpaced(n, 0.0, t);
        r.m.resize(n);
        const double h0 = msol.taus[1] - msol.taus[0];
        for (int i = 0; i < n; ++i)
            r.m[i] = linear_interp(0.0, h0, msol.m, r.taus[i]);
    }
    r.h = r.taus[1] - r.taus[0];
    r.b = boundary_from_m(r.m, r.taus, params, s_i0);
    return r;
}

}  // namespace

namespace {

struct FieldPair {
    VectorXd u, ux;
};

// u and u_x of the Duhamel representation at the given abscissae, sharing the
// resampled window, product-integration weights and data-term quadrature.
FieldPair duhamel_fields(const MSolution& msol, const VolterraData& data,
                         const ModelParams& params,
                         const std::vector<double>& xs, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("duhamel fields: need t > 0");
    ResampledWindow r = resample_window(msol, params, data.grid.x_max, t);
    const int n = static_cast<int>(r.taus.size());
    const VectorXd w = singular_sqrt_weights(t, 0.0, r.h, n);
    FieldPair out;
    const int nx = static_cast<int>(xs.size());
    out.u.resize(nx);
    out.ux.resize(nx);
    for (int j = 0; j < nx; ++j) {
        const double x = xs[j];
        const DataIntegrals di = gauss_data_integrals(x, t, data.grid, data.values);
        const bool on_s = std::abs(x - r.b.s[n - 1]) < 1e-12;
        double i2 = 0.0, i3 = 0.0, di2 = 0.0, di3 = 0.0;
        for (int k = 0; k < n; ++k) {
            const double mk = w[k] * r.m[k];
            i2 += mk * kernel_g(x, t, r.b.s[k], r.taus[k], on_s && k == n - 1);
            i3 += mk * kernel_g(x, t, r.b.s1[k], r.taus[k], false);
            di2 += mk * kernel_phi(x, t, r.b.s[k], r.taus[k], r.b.sdot[n - 1],
                                   on_s && k == n - 1);
            di3 += mk * kernel_phi(x, t, r.b.s1[k], r.taus[k], 0.0, false);
        }
        out.u[j] = di.plain - i2 + i3;
        out.ux[j] = di.flux - di2 + di3;
    }
    return out;
}

}  // namespace

DensityState duhamel_recover_u(const MSolution& msol, const VolterraData& data,
                               const ModelParams& params, double t,
                               const Grid1D& out_grid) {
    std::vector<double> xs;
    for (int j = 0; j < out_grid.n_nodes(); ++j) xs.push_back(out_grid.node(j));
    FieldPair fields = duhamel_fields(msol, data, params, xs, t);
    DensityState st;
    st.frame = Frame::Stefan;
    st.time = t;
    st.grid = out_grid;
    st.values = std::move(fields.u);
    st.refresh_mass();
    return st;
}

double duhamel_u_x(const MSolution& msol, const VolterraData& data,
                   const ModelParams& params, double x, double t) {
    return duhamel_fields(msol, data, params, {x}, t).ux[0];
}

double boundary_derivative(const std::function<double(double)>& rho,
                           const std::function<double(double)>& curve, double t,
                           int n_panels) {
    if (!(t > 0.0)) throw std::invalid_argument("boundary_derivative: need t > 0");
    const int n = n_panels + 1;
    const double h = t / n_panels;
    const double ct = curve(t);
    const double slope = (curve(t) - curve(t - h)) / h;
    VectorXd w = singular_sqrt_weights(t, 0.0, h, n);
    double integral = 0.0;
    for (int k = 0; k < n; ++k) {
        const double tau = k * h;
        integral += w[k] * rho(tau) * kernel_phi(ct, t, curve(tau), tau, slope, k == n - 1);
    }
    return 0.5 * rho(t) + integral;
}

ChainResult chain_windows(VolterraData data, const ModelParams& params,
                          double horizon_phys, int max_windows, double rate_cap,
                          double tol, int n_nodes) {
    params.validate();
    if (!(horizon_phys > 0.0))
        throw std::invalid_argument("chain_windows: horizon must be > 0");
    ChainResult out;
    out.n_series.append(0.0, std::max(-data.edge_deriv, 0.0));

    double t_phys = 0.0;
    const Grid1D grid = data.grid;  // fixed physical grid across restarts
    const double dx = grid.dx();

    while (t_phys < horizon_phys - 1e-12) {
        if (static_cast<int>(out.windows.size()) >= max_windows) break;

        SigmaWindow window = compute_sigma_window(data.sup_abs_deriv, params);
        MSolution msol = solve_M_picard(data, params, window, tol, 25, n_nodes);
        WindowRecord rec;
        rec.t_phys_start = t_phys;
        rec.window = window;
        rec.picard_iterations = msol.picard_iterations;
        rec.final_residual = msol.final_residual;
        rec.contraction_ratios = msol.contraction_ratios;
        out.windows.push_back(std::move(rec));

        const int n = static_cast<int>(msol.taus.size());
        for (int i = 1; i < n; ++i) {
            const double tau = msol.taus[i];
            const double n_phys = msol.m[i] * (1.0 + 2.0 * tau);
            out.n_series.append(t_phys + t_of_tau(tau), n_phys);
            if (n_phys > rate_cap) {
                out.rate_capped = true;
                out.cap_time = t_phys + t_of_tau(tau);
                break;
            }
        }
        if (out.rate_capped) break;

        // Restart the transformation from the recovered physical state:
        // p(v) = alpha^{-1} u(v alpha^{-1} + s(sigma)), p_v = alpha^{-2} u_x.
        const double sigma = window.sigma;
        const double inv_a = inv_alpha_of_tau(sigma);
        const double inv_a2 = inv_a * inv_a;
        const double s_end = msol.boundary.s_back();
        const double m_end = msol.m[n - 1];
        const double sdot_end = -params.b0 * alpha_of_tau(sigma) -
                                params.b * m_end * inv_a;

        const int nn = grid.n_nodes();
        std::vector<double> xs(nn);
        for (int j = 0; j < nn; ++j) xs[j] = grid.node(j) * inv_a + s_end;
        FieldPair fields = duhamel_fields(msol, data, params, xs, sigma);

        VolterraData next;
        next.grid = grid;
        next.values.resize(nn);
        next.derivs.resize(nn);
        for (int j = 0; j < nn - 1; ++j) {
            next.values[j] = inv_a * std::max(fields.u[j], 0.0);
            next.derivs[j] = inv_a2 * fields.ux[j];
        }
        // the boundary-adjacent kernel layers (t - tau ~ delta^2) are thinner
        // than the window grid there; the local expansion of u at the free
        // boundary, u(s - d) = M d (1 + s' d / 2), u_x(s - d) = -M (1 + s' d),
        // is more accurate than the quadrature for the last few nodes
        for (int j = nn - 4; j < nn - 1; ++j) {
            const double d = s_end - xs[j];
            next.values[j] =
                inv_a * std::max(m_end * d * (1.0 + 0.5 * sdot_end * d), 0.0);
            next.derivs[j] = -inv_a2 * m_end * (1.0 + sdot_end * d);
        }
        next.values[nn - 1] = 0.0;
        next.derivs[nn - 1] = -inv_a2 * m_end;
        next.edge_deriv = next.derivs[nn - 1];

        // renormalize: the continuous flow conserves mass exactly, quadrature
        // drift would otherwise accumulate over many windows
        const double mass_now = trapezoid(next.values, dx);
        if (mass_now > 0.1) {
            next.values /= mass_now;
            next.derivs /= mass_now;
            next.edge_deriv /= mass_now;
        }

        double sup = std::abs(next.edge_deriv);
        const double half_jump = 0.5 * inv_a2 * m_end;
        for (int j = 0; j < grid.n_nodes(); ++j) {
            double cand = std::abs(next.derivs[j]);
            if (std::abs(grid.node(j) - params.v_R) <= 2.0 * dx) cand += half_jump;
            sup = std::max(sup, cand);
        }
        next.sup_abs_deriv = sup;

        data = std::move(next);
        t_phys += t_of_tau(sigma);
    }
    out.final_data = std::move(data);
    out.t_phys_end = t_phys;
    out.horizon_reached = t_phys >= horizon_phys - 1e-12;
    return out;
}

}  // namespace nnlif
