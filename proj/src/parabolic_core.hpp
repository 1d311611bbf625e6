#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>

// Shared conservative kernel for the two solvers (physical Fokker-Planck
// frame and the boundary-attached Stefan frame).
//
// Interior update for p_t = d_x(p_x + a(x) p) + N delta_{x=x_dep}:
//   p_i' = p_i + (dt/dx) (G_{i+1/2} - G_{i-1/2}) + dt N w_i.
// In the default (implicit) mode the interface flux is the
// Scharfetter-Gummel exponential fitting of the full flux p_x + a p,
//   G_{i+1/2} = [ B(-a h) p_{i+1} - B(a h) p_i ] / h,  B(z) = z/(e^z - 1),
// treated with backward Euler: unconditionally positive (M-matrix), exact on
// cell-local steady profiles, second order in h. The explicit mode keeps
// donor-cell upwinding for the drift and the classical dt <= C h^2 bound.
//
// The source rate N is the discrete outflux through the right boundary of
// the same step, so the trapezoidal mass is exact up to the left-boundary
// leak. In the implicit mode this couples N to the solution; a rank-1
// correction (one extra tridiagonal solve) resolves it.

namespace nnlif::detail {

using Eigen::VectorXd;

inline double bernoulli_b(double z) {
    const double az = std::abs(z);
    if (az < 1e-5) return 1.0 - 0.5 * z + z * z / 12.0;
    if (z > 35.0) return z * std::exp(-z);
    if (z < -35.0) return -z;
    return z / std::expm1(z);
}

class ParabolicCore {
  public:
    ParabolicCore(int n_cells, double dx, bool implicit_flux, bool linear_split,
                  bool deposit_enabled)
        : K_(n_cells), dx_(dx), implicit_(implicit_flux),
          linear_split_(linear_split), deposit_enabled_(deposit_enabled),
          sub_(n_cells - 1), diag_(n_cells - 1), sup_(n_cells - 1),
          cp_(n_cells - 1), inv_m_(n_cells - 1), tmp_(n_cells - 1),
          rhs_(n_cells - 1), q1_(n_cells - 1), fluxes_(n_cells),
          b_minus_(n_cells), b_plus_(n_cells) {}

    struct Info {
        double rate_deposited = 0.0;
        double deposited_mass = 0.0;
        double leak_left = 0.0;
        bool stable = true;
    };

    // p has K+1 nodes with p[0] = p[K] = 0; a_half holds the K interface
    // coefficients a_{i+1/2}. x_dep must lie in the grid interior.
    Info advance(VectorXd& p, const VectorXd& a_half, double dt, double x_min,
                 double x_dep) {
        const int K = K_;
        const double h = dx_;
        Info info;

        // deposit weights (density units, unit trapezoidal mass)
        int j0 = 0, j1 = 0;
        double w0 = 0.0, w1 = 0.0;
        if (deposit_enabled_) {
            const double pos = (x_dep - x_min) / h;
            if (!(pos >= 1.0 && pos <= K - 1.0))
                throw std::invalid_argument("deposit location outside grid interior");
            int j = static_cast<int>(std::floor(pos));
            double theta = pos - j;
            if (j >= K - 1) { j = K - 2; theta = 1.0; }
            if (linear_split_) {
                j0 = j; w0 = (1.0 - theta) / h;
                j1 = j + 1; w1 = theta / h;
            } else {
                j0 = (theta <= 0.5) ? j : j + 1;
                w0 = 1.0 / h;
                j1 = j0; w1 = 0.0;
            }
        }

        double n_dep = 0.0;
        double p1_for_leak = 0.0, leak_coeff = 0.0;
        if (implicit_) {
            // B(+-a h) per interface, then the tridiagonal backward-Euler matrix
            for (int i = 0; i < K; ++i) {
                const double z = a_half[i] * h;
                b_plus_[i] = bernoulli_b(z);    // multiplies the left node
                b_minus_[i] = bernoulli_b(-z);  // multiplies the right node
            }
            const double r = dt / (h * h);
            for (int i = 1; i < K; ++i) {
                diag_[i - 1] = 1.0 + r * (b_plus_[i] + b_minus_[i - 1]);
                sup_[i - 1] = -r * b_minus_[i];   // couples to p_{i+1}
                sub_[i - 1] = -r * b_plus_[i - 1];  // couples to p_{i-1}
            }
            factor();
            for (int i = 1; i < K; ++i) rhs_[i - 1] = p[i];
            solve(rhs_);  // q0
            const double c_n = b_plus_[K - 1] / h;  // N = c_n p_{K-1}
            if (deposit_enabled_) {
                q1_.setZero();
                q1_[j0 - 1] = w0;
                if (w1 != 0.0) q1_[j1 - 1] = w1;
                solve(q1_);
                const double denom = 1.0 - dt * c_n * q1_[K - 2];
                if (!(denom > 0.25))
                    throw std::runtime_error("source coupling lost diagonal dominance");
                n_dep = c_n * rhs_[K - 2] / denom;
                for (int i = 1; i < K; ++i) p[i] = rhs_[i - 1] + dt * n_dep * q1_[i - 1];
                info.deposited_mass = dt * n_dep;
            } else {
                n_dep = c_n * rhs_[K - 2];
                for (int i = 1; i < K; ++i) p[i] = rhs_[i - 1];
            }
            p1_for_leak = p[1];
            leak_coeff = b_minus_[0] / h;
        } else {
            // donor-cell upwind drift + explicit diffusion
            for (int i = 0; i < K; ++i) {
                const double a = a_half[i];
                fluxes_[i] = a * (a > 0.0 ? p[i + 1] : p[i]);
            }
            n_dep = p[K - 1] / h - fluxes_[K - 1];
            p1_for_leak = p[1];
            leak_coeff = 1.0 / h;
            const double r = dt / (h * h);
            for (int i = 1; i < K; ++i)
                tmp_[i - 1] = p[i] + r * (p[i + 1] - 2.0 * p[i] + p[i - 1]) +
                              dt / h * (fluxes_[i] - fluxes_[i - 1]);
            if (deposit_enabled_) {
                tmp_[j0 - 1] += dt * n_dep * w0;
                if (w1 != 0.0) tmp_[j1 - 1] += dt * n_dep * w1;
                info.deposited_mass = dt * n_dep;
            }
            // leak uses the pre-update state in the fully explicit variant,
            // and adds the upwind drift flux at the first interface
            info.leak_left = dt * (p1_for_leak * leak_coeff + fluxes_[0]);
            for (int i = 1; i < K; ++i) p[i] = tmp_[i - 1];
            info.rate_deposited = n_dep;
            check_stability(p, info);
            return info;
        }
        info.rate_deposited = n_dep;
        info.leak_left = dt * p1_for_leak * leak_coeff;
        check_stability(p, info);
        return info;
    }

  private:
    void check_stability(const VectorXd& p, Info& info) const {
        for (int i = 1; i < K_; ++i) {
            if (!std::isfinite(p[i]) || p[i] < -1e-8) {
                info.stable = false;
                break;
            }
        }
    }

    void factor() {
        inv_m_[0] = 1.0 / diag_[0];
        cp_[0] = sup_[0] * inv_m_[0];
        for (int i = 1; i < K_ - 1; ++i) {
            inv_m_[i] = 1.0 / (diag_[i] - sub_[i] * cp_[i - 1]);
            cp_[i] = sup_[i] * inv_m_[i];
        }
    }

    void solve(VectorXd& y) const {
        y[0] *= inv_m_[0];
        for (int i = 1; i < K_ - 1; ++i)
            y[i] = (y[i] - sub_[i] * y[i - 1]) * inv_m_[i];
        for (int i = K_ - 3; i >= 0; --i) y[i] -= cp_[i] * y[i + 1];
    }

    int K_;
    double dx_;
    bool implicit_;
    bool linear_split_;
    bool deposit_enabled_;
    VectorXd sub_, diag_, sup_, cp_, inv_m_, tmp_, rhs_, q1_, fluxes_;
    VectorXd b_minus_, b_plus_;
};

}  // namespace nnlif::detail
