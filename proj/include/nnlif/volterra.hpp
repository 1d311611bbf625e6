#pragma once

#include <functional>
#include <vector>

#include "nnlif/model.hpp"
#include "nnlif/stefan_map.hpp"

namespace nnlif {

/// Green's function of the heat equation on the line,
/// G(x,t,xi,tau) = (4 pi (t-tau))^{-1/2} exp(-|x-xi|^2 / (4(t-tau))).
double heat_kernel(double x, double t, double xi, double tau);
double heat_kernel_x(double x, double t, double xi, double tau);

/// Window certificate for the fixed-point map: with m = 1 + 2 sup|u_I'|,
/// sigma must satisfy
///   i.   alpha^{-1}(t) <= 2 on [0, sigma]
///   ii.  m (|b0| + 2 m |b|) sigma^{1/2} / sqrt(pi) <= 1/2
///   iii. Lambda > 0,  Lambda = |v_R| - |b0| sigma          (b <= 0)
///                     Lambda = |v_R| - (|b0| + m) sigma    (b > 0)
///   iv.  (2m/sqrt(pi)) \int_{Lambda/sqrt(8 sigma)}^inf z^{-1} e^{-z^2} dz <= 1/2
struct SigmaWindow {
    double m = 0.0;
    double sigma = 0.0;
    double alpha_inv_max = 0.0;
    double cond_ii_lhs = 0.0;
    double lambda = 0.0;
    double cond_iv_lhs = 0.0;
    bool holds_i = false, holds_ii = false, holds_iii = false, holds_iv = false;

    bool all_hold() const { return holds_i && holds_ii && holds_iii && holds_iv; }
};

SigmaWindow evaluate_sigma_conditions(double sup_ui_prime, const ModelParams& params,
                                      double sigma);

/// Largest sigma satisfying i-iv (bisection over the monotone feasible set).
/// Throws if no sigma above sigma_floor qualifies.
SigmaWindow compute_sigma_window(double sup_ui_prime, const ModelParams& params,
                                 double sigma_floor = 1e-12);

/// Initial data for the integral formulation: samples of u_I and u_I' on a
/// grid ending at s_I = grid.x_max, plus the one-sided edge derivative.
struct VolterraData {
    Grid1D grid;
    VectorXd values;
    VectorXd derivs;
    double edge_deriv = 0.0;      // u_I'(s_I^-)
    double sup_abs_deriv = 0.0;

    static VolterraData from_profile(const ProfileSpec& profile, const Grid1D& grid);
};

struct MSolution {
    SigmaWindow window;
    VectorXd taus;  // uniform nodes on [0, sigma]
    VectorXd m;     // converged M samples
    int picard_iterations = 0;
    double final_residual = 0.0;
    std::vector<double> contraction_ratios;
    FreeBoundary boundary;  // advanced with the converged M
};

/// One application of the fixed-point map T: data term plus the two
/// boundary-curve terms of the firing-rate integral equation, with the free
/// boundary recomputed from the supplied M iterate. Product integration
/// handles the (t-tau)^{-1/2} endpoint singularity. Throws if ||T(M)|| > m.
VectorXd apply_T(const VectorXd& m_samples, const VolterraData& data,
                 const ModelParams& params, const SigmaWindow& window);

/// The three terms of T(M) separately (j1 data term, j2 self-boundary term,
/// j3 reset term, already carrying their signs; T(M) = j1 + j2 + j3).
struct TParts {
    VectorXd j1, j2, j3;
};
TParts apply_T_parts(const VectorXd& m_samples, const VolterraData& data,
                     const ModelParams& params, const SigmaWindow& window);

MSolution solve_M_picard(const VolterraData& data, const ModelParams& params,
                         const SigmaWindow& window, double tol = 1e-8,
                         int max_iter = 25, int n_nodes = 65);

/// Duhamel recovery u(x,t) = I1 - I2 + I3 evaluated on out_grid at time
/// t <= sigma (out_grid.x_max is normally s(t)).
DensityState duhamel_recover_u(const MSolution& msol, const VolterraData& data,
                               const ModelParams& params, double t,
                               const Grid1D& out_grid);

/// Space derivative of the Duhamel representation at an interior point
/// (x off the curves s, s1; the one-sided limits on the curves carry an
/// extra +-M/2 per the boundary-derivative lemma).
double duhamel_u_x(const MSolution& msol, const VolterraData& data,
                   const ModelParams& params, double x, double t);

/// lim_{x -> curve(t)^-} d/dx \int_0^t rho(tau) G(x,t,curve(tau),tau) dtau
///   = rho(t)/2 + \int_0^t rho(tau) G_x(curve(t),t,curve(tau),tau) dtau.
double boundary_derivative(const std::function<double(double)>& rho,
                           const std::function<double(double)>& curve, double t,
                           int n_panels = 256);

/// One certified window of the chained local construction.
struct WindowRecord {
    double t_phys_start = 0.0;
    SigmaWindow window;
    int picard_iterations = 0;
    double final_residual = 0.0;
    std::vector<double> contraction_ratios;
};

struct ChainResult {
    std::vector<WindowRecord> windows;
    FiringRateSeries n_series;  // physical-frame N(t) assembled from windows
    VolterraData final_data;    // physical-frame state at the end
    double t_phys_end = 0.0;
    bool rate_capped = false;
    double cap_time = 0.0;
    bool horizon_reached = false;  // false also when the window budget ran out
};

/// Chains sigma-windows to cover [0, horizon] in physical time. Each window
/// restarts the Stefan transformation from the current physical-frame state
/// (the problem is autonomous in physical time), so conditions i-iv apply
/// verbatim with a fresh clock; m is recomputed from sup|u_x| at the join.
ChainResult chain_windows(VolterraData data, const ModelParams& params,
                          double horizon_phys, int max_windows, double rate_cap,
                          double tol = 1e-8, int n_nodes = 65);

}  // namespace nnlif
