#include "nnlif/quadrature.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nnlif {

double trapezoid(const VectorXd& values, double dx) {
    const int n = static_cast<int>(values.size());
    if (n < 2) return 0.0;
    double s = 0.5 * (values[0] + values[n - 1]);
    for (int i = 1; i < n - 1; ++i) s += values[i];
    return s * dx;
}

VectorXd cumulative_trapezoid(const VectorXd& values, double dx) {
    const int n = static_cast<int>(values.size());
    VectorXd out(n);
    out[0] = 0.0;
    for (int i = 1; i < n; ++i)
        out[i] = out[i - 1] + 0.5 * dx * (values[i - 1] + values[i]);
    return out;
}

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                            double fa, double b, double fb, double fm,
                            double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(a, fa, m, fm, flm);
    const double right = simpson(m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = simpson(a, fa, b, fb, fm);
    return adaptive_simpson_rec(f, a, fa, b, fb, fm, whole, tol, max_depth);
}

double exp_integral_e1(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("exp_integral_e1: need x > 0");
    constexpr double euler_gamma = 0.57721566490153286060651209;
    if (x <= 1.0) {
        // E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k k!)
        double sum = 0.0, term = 1.0;
        for (int k = 1; k <= 40; ++k) {
            term *= -x / k;
            double add = -term / k;
            sum += add;
            if (std::abs(add) < 1e-18 * (std::abs(sum) + 1.0)) break;
        }
        return -euler_gamma - std::log(x) + sum;
    }
    // Continued fraction E1(x) = e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
    // evaluated with the modified Lentz algorithm.
    const double tiny = 1e-300;
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 200; ++i) {
        const double a = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x);
}

double gaussian_log_tail(double z0) {
    if (!(z0 > 0.0)) throw std::invalid_argument("gaussian_log_tail: need z0 > 0");
    const double x = z0 * z0;
    if (x > 700.0) return 0.0;  // below double underflow of e^{-x}
    return 0.5 * exp_integral_e1(x);
}

VectorXd singular_sqrt_weights(double t, double a, double h, int n_nodes) {
    if (n_nodes < 2) return VectorXd::Zero(std::max(n_nodes, 0));
    const double b = a + (n_nodes - 1) * h;
    if (t < b - 1e-14 * (std::abs(b) + 1.0))
        throw std::invalid_argument("singular_sqrt_weights: need t >= right endpoint");
    VectorXd w = VectorXd::Zero(n_nodes);
    for (int k = 0; k + 1 < n_nodes; ++k) {
        const double uk = std::max(t - (a + k * h), 0.0);
        const double uk1 = std::max(t - (a + (k + 1) * h), 0.0);
        const double sk = std::sqrt(uk), sk1 = std::sqrt(uk1);
        const double denom = sk + sk1;
        if (denom == 0.0) continue;
        const double i0 = 2.0 * h / denom;
        const double i32 = h * (uk + sk * sk1 + uk1) / denom;  // u^{3/2} difference
        const double w_right = (uk * i0 - (2.0 / 3.0) * i32) / h;
        const double w_left = (-uk1 * i0 + (2.0 / 3.0) * i32) / h;
        w[k] += w_left;
        w[k + 1] += w_right;
    }
    return w;
}

double linear_interp(double x_min, double dx, const VectorXd& values, double x) {
    const int n = static_cast<int>(values.size());
    const double x_max = x_min + (n - 1) * dx;
    if (x < x_min || x > x_max) return 0.0;
    int i = static_cast<int>(std::floor((x - x_min) / dx));
    if (i >= n - 1) i = n - 2;
    const double t = (x - (x_min + i * dx)) / dx;
    return values[i] + t * (values[i + 1] - values[i]);
}

double cubic_interp(double x_min, double dx, const VectorXd& values, double x) {
    const int n = static_cast<int>(values.size());
    const double x_max = x_min + (n - 1) * dx;
    if (x < x_min || x > x_max) return 0.0;
    int i = static_cast<int>(std::floor((x - x_min) / dx));
    if (i >= n - 1) i = n - 2;
    const double t = (x - (x_min + i * dx)) / dx;

    auto val = [&](int j) -> double {
        if (j >= 0 && j < n) return values[j];
        // quadratic extrapolation into the boundary ghost node
        if (j < 0) return 3.0 * values[0] - 3.0 * values[1] + values[2];
        return 3.0 * values[n - 1] - 3.0 * values[n - 2] + values[n - 3];
    };
    const double p0 = val(i - 1), p1 = val(i), p2 = val(i + 1), p3 = val(i + 2);
    return p1 + 0.5 * t * (p2 - p0 +
           t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
           t * (3.0 * (p1 - p2) + p3 - p0)));
}

double cubic_interp_clamped(double x_min, double dx, const VectorXd& values, double x) {
    return std::max(cubic_interp(x_min, dx, values, x), 0.0);
}

}  // namespace nnlif
