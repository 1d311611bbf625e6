#pragma once

#include <Eigen/Core>
#include <functional>

namespace nnlif {

using Eigen::VectorXd;

/// Trapezoidal rule on a uniform grid with spacing dx.
double trapezoid(const VectorXd& values, double dx);

/// Cumulative trapezoid: out[i] = integral over [x_0, x_i].
VectorXd cumulative_trapezoid(const VectorXd& values, double dx);

/// Adaptive Simpson quadrature with absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth = 30);

/// Exponential integral E1(x) = \int_x^inf e^{-s}/s ds for x > 0.
/// Power series for small arguments, continued fraction otherwise.
double exp_integral_e1(double x);

/// Upper tail \int_{z0}^inf z^{-1} e^{-z^2} dz = E1(z0^2) / 2.
double gaussian_log_tail(double z0);

/// Weights for product integration of \int_a^b f(tau) (t-tau)^{-1/2} dtau
/// against piecewise-linear f on the nodes a + k h (t >= b). Exact when f
/// is piecewise linear, which keeps second order at the endpoint
/// singularity t = b.
VectorXd singular_sqrt_weights(double t, double a, double h, int n_nodes);

/// Piecewise-linear interpolation on a uniform grid, zero outside.
double linear_interp(double x_min, double dx, const VectorXd& values, double x);

/// Catmull-Rom cubic interpolation on a uniform grid; one-sided cubic in
/// the boundary cells, zero outside the grid.
double cubic_interp(double x_min, double dx, const VectorXd& values, double x);

/// As cubic_interp but clamps the result to be nonnegative.
double cubic_interp_clamped(double x_min, double dx, const VectorXd& values, double x);

}  // namespace nnlif
