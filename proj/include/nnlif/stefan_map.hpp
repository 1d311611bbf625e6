#pragma once

#include <vector>

#include "nnlif/fp_solver.hpp"
#include "nnlif/model.hpp"

namespace nnlif {

/// Time dilation linking the physical clock t and the Stefan (heat) clock
/// tau: alpha(tau) = (2 tau + 1)^{-1/2} = e^{-t}, tau = (e^{2t} - 1)/2.
struct AlphaClock {
    double tau = 0.0;
    double alpha = 1.0;
    double t_phys = 0.0;

    static AlphaClock from_tau(double tau);
    static AlphaClock from_t(double t);
};

double alpha_of_tau(double tau);
double inv_alpha_of_tau(double tau);  // sqrt(2 tau + 1)
double tau_of_t(double t);
double t_of_tau(double tau);

/// Free-boundary trajectories
///   s(tau)  = s_I - b0 (sqrt(1+2 tau) - 1) - b \int_0^tau M alpha^{-1},
///   s1(tau) = s(tau) + v_R alpha^{-1}(tau),
/// maintained together with the trapezoidal accumulator for the integral.
class FreeBoundary {
  public:
    FreeBoundary() = default;
    FreeBoundary(const ModelParams& params, double m0, double s_I = 0.0);

    void advance(double m_new, double dtau);

    double tau_back() const { return taus_.back(); }
    double s_back() const { return s_.back(); }
    double integral_accumulator() const { return integral_; }

    /// Linear interpolation in the recorded history; throws outside it.
    double s_at(double tau) const;
    double s1_at(double tau) const;

    const std::vector<double>& taus() const { return taus_; }
    const std::vector<double>& s_samples() const { return s_; }
    const std::vector<double>& s1_samples() const { return s1_; }
    const ModelParams& params() const { return params_; }

  private:
    ModelParams params_;
    double s_I_ = 0.0;
    double integral_ = 0.0;
    double last_integrand_ = 0.0;
    std::vector<double> taus_, s_, s1_;
};

/// Functional form of FreeBoundary::advance.
FreeBoundary advance_boundary(const FreeBoundary& fb, double m_new, double dtau);

/// Map a physical-frame density p(., t) to the Stefan frame:
/// u(x, tau) = alpha(tau) p(alpha (x - s(tau) + s_I), t). The state is
/// resampled (cubic, clamped) on a uniform grid ending at s(tau).
DensityState to_stefan(const DensityState& p, const FreeBoundary& fb, double tau);

/// Inverse map onto the given physical grid.
DensityState from_stefan(const DensityState& u, const FreeBoundary& fb,
                         const Grid1D& physical_grid);

struct StefanRunResult {
    DensityState final_state;         // Stefan frame, grid ends at s(tau)
    FiringRateSeries m_series;        // (tau, M) stencil rate
    FiringRateSeries m_deposit_series;
    FreeBoundary boundary;
    std::vector<DensityState> snapshots;
    double max_mass_dev = 0.0;
    RunStatus status = RunStatus::Completed;
    double halt_tau = 0.0;
};

/// Direct solver for the free-boundary problem, run in boundary-attached
/// coordinates zeta = x - s(tau) (uniform advection s'(tau), Dirac source at
/// the moving reset curve v_R alpha^{-1}). Snapshot times are in tau.
StefanRunResult stefan_run(const DensityState& initial_physical,
                           const ModelParams& params, const FPSchemeConfig& cfg,
                           double tau_horizon, double rate_cap,
                           const RunOptions& opts = {});

struct DiscrepancyReport {
    double sup_norm = 0.0;
    double l1 = 0.0;
    double rate_rel_err = 0.0;
};

/// Maps the Stefan snapshots back to the physical frame at matched times and
/// reports sup-norm / L1 density discrepancies plus the relative sup-norm
/// mismatch of the firing-rate identity M(tau) = alpha^2(tau) N(t).
DiscrepancyReport equivalence_check(const FPRunResult& fp,
                                    const StefanRunResult& stefan);

}  // namespace nnlif
