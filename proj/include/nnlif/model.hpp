#pragma once

#include <Eigen/Core>
#include <string>

namespace nnlif {

using Eigen::VectorXd;

/// Physical parameters of the noisy leaky integrate-and-fire population.
/// B is the net connectivity strength, nu_ext the external firing rate,
/// a0 the diffusion amplitude, and v_L < v_R_phys < v_th the leak, reset
/// and threshold voltages.
struct PhysicalParams {
    double B = 0.0;
    double nu_ext = 0.0;
    double a0 = 1.0;
    double v_th = 0.0;
    double v_L = -2.0;
    double v_R_phys = -1.0;

    void validate() const;
};

/// Dimensionless parameters after shifting the threshold to 0 and scaling
/// voltages by a0:
///   b0  = (B*nu_ext - v_th)/a0,   b = B/a0^3,   v_R = (v_R_phys - v_th)/a0.
/// The sign of b classifies the network: b < 0 inhibitory, b > 0 excitatory.
struct ModelParams {
    double b0 = 0.0;
    double b = 0.0;
    double v_R = -1.0;

    void validate() const;
};

ModelParams rescale(const PhysicalParams& phys);

/// Inverse of rescale for a chosen (a0, v_th). When b = 0 the connectivity
/// vanishes and v_th is forced to -b0*a0 instead of the hint.
PhysicalParams unrescale(const ModelParams& mp, double a0, double v_th_hint);

/// Uniform grid of n_cells + 1 nodes on [x_min, x_max].
struct Grid1D {
    double x_min = -8.0;
    double x_max = 0.0;
    int n_cells = 800;

    double dx() const { return (x_max - x_min) / n_cells; }
    int n_nodes() const { return n_cells + 1; }
    double node(int i) const { return x_min + i * dx(); }
    VectorXd nodes() const;

    void validate() const;
};

enum class Frame { Physical, Stefan };

/// Grid sample of a density, tagged with its coordinate frame and time.
/// Values are nonnegative and the rightmost node is pinned to 0 (Dirichlet
/// at the threshold / free boundary).
struct DensityState {
    Frame frame = Frame::Physical;
    double time = 0.0;
    Grid1D grid;
    VectorXd values;
    double mass = 0.0;

    /// Recompute the cached trapezoidal mass from the current samples.
    void refresh_mass();
};

/// Trapezoidal quadrature of the samples over the grid.
double mass(const DensityState& state);

/// Clamps tiny negative samples (within floating slack) to zero and pins the
/// right endpoint; throws if samples are negative beyond tol.
DensityState make_density(Frame frame, double time, const Grid1D& grid,
                          VectorXd values, double tol = 1e-12);

struct FiringRateSeries {
    Frame frame = Frame::Physical;
    std::vector<double> times;
    std::vector<double> rates;

    void append(double t, double rate);
    size_t size() const { return times.size(); }
};

/// Closed-form initial profiles. All vanish at v = 0 up to the stated
/// tolerance and are C^1 on (-inf, 0].
///   Gaussian:      exp(-(v-c)^2 / (2 w^2))
///   HermiteBump:   ((v-c)/w)^2 exp(-(v-c)^2 / (2 w^2))
///   NearThreshold: v^2 exp(-(v-c)^2 / (2 w^2))   (exactly zero at v = 0)
///   VExp:          -v e^v                        (unit mass on (-inf, 0])
enum class ProfileKind { Gaussian, HermiteBump, NearThreshold, VExp };

struct ProfileSpec {
    ProfileKind kind = ProfileKind::Gaussian;
    double center = -2.0;
    double width = 0.25;

    double value(double v) const;
    double derivative(double v) const;
};

ProfileKind profile_kind_from_name(const std::string& name);

/// Initial density built from a closed-form profile: samples normalized to
/// unit mass, with sup|p_I'| of the normalized profile recorded for the
/// sigma-window computation downstream.
struct InitialDensity {
    DensityState state;
    double sup_abs_deriv = 0.0;      // sup |p_I'| after normalization
    double edge_deriv = 0.0;         // p_I'(0^-) after normalization
};

InitialDensity make_initial_density(const ProfileSpec& profile, const Grid1D& grid);

}  // namespace nnlif
