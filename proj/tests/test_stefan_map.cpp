#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nnlif/quadrature.hpp"
#include "nnlif/spectrum.hpp"
#include "nnlif/stefan_map.hpp"

using namespace nnlif;

TEST_CASE("clock bijection round-trips to 1e-14 up to tau = 1e6") {
    for (double tau : {0.0, 1e-8, 1e-3, 0.5, 1.5, 10.0, 1e3, 1e6}) {
        const double back = tau_of_t(t_of_tau(tau));
        CHECK(std::abs(back - tau) <= 1e-14 * std::max(tau, 1.0));
        AlphaClock c = AlphaClock::from_tau(tau);
        CHECK(c.alpha == doctest::Approx(std::exp(-c.t_phys)).epsilon(1e-14));
        CHECK(c.alpha * inv_alpha_of_tau(tau) == doctest::Approx(1.0).epsilon(1e-15));
    }
    for (double t : {0.0, 1e-6, 0.3, 2.0, 6.9}) {
        CHECK(std::abs(t_of_tau(tau_of_t(t)) - t) <= 1e-14 * std::max(t, 1.0));
    }
}

TEST_CASE("advance_boundary: b = 0 leaves only the closed-form drift term") {
    // s(tau) = s_I - b0 (sqrt(1+2 tau) - 1), independent of M
    ModelParams params{-1.0, 0.0, -1.0};
    FreeBoundary fb(params, 0.7);
    const int n = 1500;
    const double dtau = 1.5 / n;
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> um(0.0, 2.0);
    for (int i = 0; i < n; ++i) fb.advance(um(rng), dtau);
    CHECK(fb.tau_back() == doctest::Approx(1.5).epsilon(1e-12));
    // s(1.5) = s_I + (sqrt(4) - 1) = s_I + 1
    CHECK(fb.s_back() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("advance_boundary: trapezoidal accumulator matches the antiderivative") {
    // M = 1, b = -1, b0 = 0: accumulator = int_0^1 sqrt(2s+1) ds = (3^1.5-1)/3
    ModelParams params{0.0, -1.0, -1.0};
    FreeBoundary fb(params, 1.0);
    const int n = 2000;
    for (int i = 0; i < n; ++i) fb.advance(1.0, 1.0 / n);
    const double exact = (std::pow(3.0, 1.5) - 1.0) / 3.0;
    CHECK(fb.integral_accumulator() == doctest::Approx(exact).epsilon(1e-7));
    CHECK(fb.s_back() == doctest::Approx(exact).epsilon(1e-7));

    // functional form appends without mutating the source
    FreeBoundary ext = advance_boundary(fb, 1.0, 0.1);
    CHECK(ext.taus().size() == fb.taus().size() + 1);
    CHECK(fb.tau_back() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("s1 - s = v_R alpha^{-1} exactly at every sample") {
    ModelParams params{-0.5, -2.0, -0.8};
    FreeBoundary fb(params, 0.3);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> um(0.0, 1.5);
    for (int i = 0; i < 500; ++i) fb.advance(um(rng), 2e-3);
    for (size_t i = 0; i < fb.taus().size(); ++i) {
        const double expected = params.v_R * inv_alpha_of_tau(fb.taus()[i]);
        CHECK(fb.s1_samples()[i] - fb.s_samples()[i] ==
              doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("monotonicity: b0 < 0 and b < 0 gives a strictly increasing boundary") {
    ModelParams params{-1.0, -1.0, -1.0};
    FreeBoundary fb(params, 0.2);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> um(0.0, 1.0);
    for (int i = 0; i < 400; ++i) fb.advance(um(rng), 1e-3);
    for (size_t i = 0; i + 1 < fb.s_samples().size(); ++i)
        CHECK(fb.s_samples()[i + 1] > fb.s_samples()[i]);
}

TEST_CASE("to_stefan at tau = 0 is the identity and preserves mass") {
    Grid1D grid{-8.0, 0.0, 400};
    ProfileSpec prof{ProfileKind::Gaussian, -2.0, 0.25};
    InitialDensity init = make_initial_density(prof, grid);
    ModelParams params{-1.0, -1.0, -1.0};
    FreeBoundary fb(params, firing_rate(init.state));
    DensityState u = to_stefan(init.state, fb, 0.0);
    CHECK(u.frame == Frame::Stefan);
    REQUIRE(u.values.size() == init.state.values.size());
    CHECK((u.values - init.state.values).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(u.mass == doctest::Approx(init.state.mass).epsilon(1e-12));
}

TEST_CASE("to_stefan rejects mismatched clocks") {
    Grid1D grid{-8.0, 0.0, 400};
    ProfileSpec prof{ProfileKind::Gaussian, -2.0, 0.25};
    InitialDensity init = make_initial_density(prof, grid);
    ModelParams params{-1.0, -1.0, -1.0};
    FreeBoundary fb(params, 0.0);
    CHECK_THROWS(to_stefan(init.state, fb, 0.5));  // state is at t = 0
}

TEST_CASE("frame round trip: physical -> stefan -> physical") {
    Grid1D grid{-8.0, 0.0, 800};
    ProfileSpec prof{ProfileKind::Gaussian, -2.0, 0.25};
    InitialDensity init = make_initial_density(prof, grid);
    ModelParams params{-1.0, -1.0, -1.0};

    SUBCASE("tau = 0: identity to 1e-14") {
        FreeBoundary fb(params, firing_rate(init.state));
        DensityState u = to_stefan(init.state, fb, 0.0);
        DensityState back = from_stefan(u, fb, grid);
        CHECK((back.values - init.state.values).cwiseAbs().maxCoeff() < 1e-13);
    }

    SUBCASE("tau = 1: interpolation-level error and conserved mass") {
        // build a boundary history out to tau = 1 with a plausible rate
        FreeBoundary fb(params, 0.3);
        const int n = 1000;
        for (int i = 0; i < n; ++i) fb.advance(0.3, 1.0 / n);
        DensityState p1 = init.state;
        p1.time = t_of_tau(1.0);
        DensityState u = to_stefan(p1, fb, 1.0);
        CHECK(u.mass == doctest::Approx(p1.mass).epsilon(1e-6));
        DensityState back = from_stefan(u, fb, grid);
        const double dx = grid.dx();
        CHECK((back.values - p1.values).cwiseAbs().maxCoeff() < 20.0 * dx * dx * dx);
        CHECK(back.mass == doctest::Approx(p1.mass).epsilon(1e-6));
    }

    SUBCASE("steady state survives the round trip") {
        DensityState pinf = steady_state(-1.0, grid, true);
        pinf.time = t_of_tau(0.5);
        FreeBoundary fb(params, 0.2);
        const int n = 500;
        for (int i = 0; i < n; ++i) fb.advance(0.2, 0.5 / n);
        DensityState u = to_stefan(pinf, fb, 0.5);
        DensityState back = from_stefan(u, fb, grid);
        const double dx = grid.dx();
        // the reset kink limits the cubic interpolant locally; away from it
        // the round trip stays at interpolation accuracy
        VectorXd err = (back.values - pinf.values).cwiseAbs();
        double err_smooth = 0.0;
        for (int i = 0; i < err.size(); ++i)
            if (std::abs(grid.node(i) + 1.0) > 4.0 * dx)
                err_smooth = std::max(err_smooth, err[i]);
        CHECK(err_smooth < 50.0 * dx * dx * dx);
        CHECK(err.maxCoeff() < 2e-3);
        CHECK(trapezoid(err, dx) < 1e-4);
    }
}

TEST_CASE("from_stefan rejects tau outside the recorded history") {
    Grid1D grid{-8.0, 0.0, 400};
    ProfileSpec prof{ProfileKind::Gaussian, -2.0, 0.25};
    InitialDensity init = make_initial_density(prof, grid);
    ModelParams params{-1.0, -1.0, -1.0};
    FreeBoundary fb(params, 0.3);
    for (int i = 0; i < 100; ++i) fb.advance(0.3, 1e-3);
    DensityState u = to_stefan(init.state, fb, 0.0);
    u.time = 0.5;  // beyond the recorded 0.1
    CHECK_THROWS(from_stefan(u, fb, grid));
}

TEST_CASE("stefan run: boundary samples obey the Lipschitz bound") {
    Grid1D grid{-6.0, 0.0, 300};
    ProfileSpec prof{ProfileKind::Gaussian, -2.0, 0.25};
    InitialDensity init = make_initial_density(prof, grid);
    ModelParams params{-1.0, -1.0, -1.0};
    FPSchemeConfig cfg;
    cfg.dt = 1e-3;
    StefanRunResult r = stefan_run(init.state, params, cfg, 1.2, 1e3);
    REQUIRE(r.status == RunStatus::Completed);

    double sup_m = 0.0;
    for (double m : r.m_series.rates) sup_m = std::max(sup_m, m);
    const double lip = std::abs(params.b0) + 2.0 * std::abs(params.b) * sup_m;
    const auto& taus = r.boundary.taus();
    const auto& s = r.boundary.s_samples();
    std::mt19937 rng(3);
    std::uniform_int_distribution<size_t> pick(0, taus.size() - 1);
    for (int k = 0; k < 400; ++k) {
        const size_t i = pick(rng), j = pick(rng);
        // the alpha^{-1} <= 2 window ends at tau = 1.5; all samples qualify
        CHECK(std::abs(s[i] - s[j]) <=
              lip * std::abs(taus[i] - taus[j]) + 1e-12);
    }
}

TEST_CASE("equivalence: both solvers agree for the uncoupled problem") {
    Grid1D grid{-6.0, 0.0, 300};
    ProfileSpec prof{ProfileKind::Gaussian, -2.0, 0.25};
    InitialDensity init = make_initial_density(prof, grid);
    ModelParams params{0.0, 0.0, -1.0};
    FPSchemeConfig cfg;
    cfg.dt = 1e-4;

    const double horizon = 0.2;
    RunOptions fp_opts;
    std::vector<double> phys_times = {0.05, 0.1, 0.15, 0.2};
    fp_opts.snapshot_times = phys_times;
    fp_opts.record_every = 1;
    FPRunResult fp = fp_run(init.state, params, cfg, horizon, 1e3, fp_opts);
    REQUIRE(fp.snapshots.size() == phys_times.size());

    RunOptions st_opts;
    for (double t : phys_times) st_opts.snapshot_times.push_back(tau_of_t(t));
    st_opts.record_every = 1;
    StefanRunResult st =
        stefan_run(init.state, params, cfg, tau_of_t(horizon), 1e3, st_opts);
    REQUIRE(st.snapshots.size() == phys_times.size());

    DiscrepancyReport rep = equivalence_check(fp, st);
    CHECK(rep.sup_norm < 2e-2);
    CHECK(rep.l1 < 2e-2);
    CHECK(rep.rate_rel_err < 0.05);
}

TEST_CASE("equivalence: zero-duration comparison reports zero discrepancy") {
    Grid1D grid{-6.0, 0.0, 300};
    ProfileSpec prof{ProfileKind::Gaussian, -2.0, 0.25};
    InitialDensity init = make_initial_density(prof, grid);
    ModelParams params{0.0, 0.0, -1.0};
    FPSchemeConfig cfg;
    cfg.dt = 1e-4;
    RunOptions opts;
    opts.snapshot_times = {0.0};
    FPRunResult fp = fp_run(init.state, params, cfg, 1e-4, 1e3, opts);
    StefanRunResult st = stefan_run(init.state, params, cfg, 1e-4, 1e3, opts);
    REQUIRE(!fp.snapshots.empty());
    REQUIRE(!st.snapshots.empty());
    DiscrepancyReport rep = equivalence_check(fp, st);
    CHECK(rep.sup_norm < 1e-12);
    CHECK(rep.l1 < 1e-12);
}
