#pragma once

#include <utility>
#include <vector>

#include "nnlif/fp_solver.hpp"
#include "nnlif/model.hpp"

namespace nnlif {

/// Probabilists' Hermite polynomial H_n(v), evaluated by the recurrence
/// H_{n+1}(v) = v H_n(v) - n H_{n-1}(v); H_n' = n H_{n-1}.
double hermite(int n, double v);
double hermite_derivative(int n, double v);

/// k-th derivative: H_n^{(k)} = n!/(n-k)! H_{n-k}.
double hermite_kth_derivative(int n, int k, double v);

/// All n roots, ascending: eigenvalues of the symmetric tridiagonal Jacobi
/// matrix with off-diagonals sqrt(k), polished by Newton in long double.
VectorXd hermite_roots(int n);

/// Steady state of the uncoupled (mu = 0) problem:
///   p(v) = e^{-v^2/2}                                   on (-inf, v_R],
///   p(v) = alpha0 e^{-v^2/2} \int_v^0 e^{w^2/2} dw      on (v_R, 0],
/// with alpha0 = (\int_{v_R}^0 e^{w^2/2} dw)^{-1} forcing continuity.
DensityState steady_state(double v_R, const Grid1D& grid, bool normalize = false);
double steady_state_alpha0(double v_R);

/// theta_n(v) = H_n(v) \int_{v0}^v e^{s^2/2} / H_n(s)^2 ds.
/// The integrand has double poles at the simple roots of H_n; the principal
/// contribution is removed in closed form (the 1/(s-r) Laurent coefficient
/// vanishes identically at Hermite roots), which continues theta
/// analytically across the roots with finite limits
///   Delta_{r,n} = -e^{r^2/2} / H_n'(r).
class ThetaIntegral {
  public:
    ThetaIntegral(int n, double v0, double root_radius = 1e-3);

    double theta(double v) const;
    double limit_at_root(double root) const;
    const VectorXd& roots() const { return roots_; }
    int degree() const { return n_; }
    double base_point() const { return v0_; }

  private:
    struct RootData {
        double r;          // root location
        double cell_lo, cell_hi;
        double c2;         // g(r) = e^{r^2/2} / H'(r)^2
        double g2, g3, g4;  // g''(r)/2, g'''(r)/6, g''''(r)/24
    };

    double g_smooth(const RootData& rd, double s) const;    // f(s) (s-r)^2
    double h_reg(const RootData& rd, double s) const;       // f - c2/(s-r)^2
    double psi(const RootData& rd, double s) const;         // H_n(s)/(s-r)
    double fixed_h(const RootData& rd, double a, double b) const;
    double integrand(double s) const;
    int cell_of(double v) const;  // index of root cell containing v, or -1

    struct Parts {
        double reg = 0.0;
        int pole_root = -1;
    };
    // directed finite-part integral from a to v accumulated onto parts;
    // the exit pole is kept symbolic when v sits inside a root cell
    void accumulate_fp(double a, double v, Parts& parts) const;
    Parts assemble(double v) const;

    int n_;
    double v0_;
    double delta_;
    VectorXd roots_;
    std::vector<RootData> root_data_;
    // cumulative finite-part values at fixed anchor abscissae: every
    // evaluation reduces to one short fixed-order quadrature, so theta is a
    // smooth function of v at roundoff level (no adaptive branching noise)
    std::vector<double> anchors_;
    std::vector<double> cum_;
};

double theta(int n, double v, double v0);

struct EigenCandidate {
    int n = 0;            // lambda = -2n
    double lambda = 0.0;
    double v_R = 0.0;
    bool admissible = false;
    bool f1 = false, f2 = false, f3 = false, f4 = false;
    double comp_cond_defect = 0.0;  // |H_{2n}(v_R) - H_{2n}(0)| / scale
    double jump_defect = 0.0;       // |1/H(v_R) - 1/H(0)| analytic F4 defect
    Grid1D grid;
    VectorXd eigenfunction;  // beta1 = 1 normalization
};

/// Admissibility of lambda = -2n at the given reset: the compatibility
/// condition H_{2n}(0) = H_{2n}(v_R), with v_R a root of H_{2n} excluded.
/// Builds the candidate eigenfunction with the matching constant
/// alpha = \int_0^{v_R} e^{s^2/2}/H_{2n}^2(s) ds (finite part).
EigenCandidate check_admissible(int n, double v_R, double dv = 1e-3);

struct ResidualReport {
    double ode_interior = 0.0;  // sup of the FD residual away from v_R and 0
    double f2_residual = 0.0;   // |p(0)|
    double f3_residual = 0.0;   // matching gap at v_R
    double f4_residual = 0.0;   // jump defect from one-sided stencils
};

/// Finite-difference residuals of p'' + (v p)' = lambda p for samples on a
/// grid containing v_R as a node (normalized by sup|p|).
ResidualReport ode_residual_report(const VectorXd& p, const Grid1D& grid,
                                   double lambda, double v_R);

ResidualReport eigenfunction_residual(const EigenCandidate& cand);

/// Negative roots of H_{2n}(v) - H_{2n}(0) in (v_lo, v_hi) for n <= n_max,
/// roots of H_{2n} itself excluded. Bracketing scan at 1e-3 resolution,
/// bisection plus long-double Newton polish.
std::vector<std::pair<int, double>> find_admissible_set(int n_max, double v_lo,
                                                        double v_hi);

struct RelaxationReport {
    std::vector<double> times;
    std::vector<double> l1_dist;
    bool monotone_after_burnin = false;
    double final_dist = 0.0;
    double fitted_rate = 0.0;      // log-linear decay-rate fit (reported only)
    double rate_half_width = 0.0;  // 95% confidence half width
};

/// L1 distance to the steady state along a b = b0 = 0 run.
RelaxationReport relaxation_to_steady_state(const DensityState& initial,
                                            double v_R, const FPSchemeConfig& cfg,
                                            double horizon, double burn_in,
                                            double sample_dt);

/// Violation probe for non-eigenvalues: builds the branch satisfying F2-F4
/// and integrates leftward; returns the e^{v^2/4}-weighted tail amplitude
/// (large when decay, i.e. F1, fails). Small only near genuine eigenvalues.
double spectral_probe(double lambda, double v_R, double v_left = -8.0);

}  // namespace nnlif
