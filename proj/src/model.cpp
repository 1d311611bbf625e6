#include "nnlif/model.hpp"

#include <cmath>
#include <stdexcept>

#include "nnlif/quadrature.hpp"

namespace nnlif {

void PhysicalParams::validate() const {
    if (!(a0 > 0.0)) throw std::invalid_argument("PhysicalParams: a0 must be > 0");
    if (!(v_L < v_R_phys && v_R_phys < v_th))
        throw std::invalid_argument("PhysicalParams: need v_L < v_R_phys < v_th");
}

void ModelParams::validate() const {
    if (!(v_R < 0.0)) throw std::invalid_argument("ModelParams: v_R must be < 0");
}

ModelParams rescale(const PhysicalParams& phys) {
    phys.validate();
    ModelParams mp;
    mp.b0 = (phys.B * phys.nu_ext - phys.v_th) / phys.a0;
    mp.b = phys.B / (phys.a0 * phys.a0 * phys.a0);
    mp.v_R = (phys.v_R_phys - phys.v_th) / phys.a0;
    return mp;
}

PhysicalParams unrescale(const ModelParams& mp, double a0, double v_th_hint) {
    if (!(a0 > 0.0)) throw std::invalid_argument("unrescale: a0 must be > 0");
    PhysicalParams phys;
    phys.a0 = a0;
    phys.B = mp.b * a0 * a0 * a0;
    if (phys.B != 0.0) {
        phys.v_th = v_th_hint;
        phys.nu_ext = (mp.b0 * a0 + phys.v_th) / phys.B;
    } else {
        // b0 = -v_th/a0 once the connectivity term drops out.
        phys.v_th = -mp.b0 * a0;
        phys.nu_ext = 0.0;
    }
    phys.v_R_phys = mp.v_R * a0 + phys.v_th;
    phys.v_L = phys.v_R_phys - 1.0;
    return phys;
}

VectorXd Grid1D::nodes() const {
    return VectorXd::LinSpaced(n_nodes(), x_min, x_max);
}

void Grid1D::validate() const {
    if (!(x_min < x_max)) throw std::invalid_argument("Grid1D: x_min must be < x_max");
    if (n_cells < 4) throw std::invalid_argument("Grid1D: need at least 4 cells");
}

void DensityState::refresh_mass() { mass = nnlif::mass(*this); }

double mass(const DensityState& state) {
    return trapezoid(state.values, state.grid.dx());
}

DensityState make_density(Frame frame, double time, const Grid1D& grid,
                          VectorXd values, double tol) {
    grid.validate();
    if (values.size() != grid.n_nodes())
        throw std::invalid_argument("make_density: sample count does not match grid");
    double min_val = values.minCoeff();
    if (min_val < -tol)
        throw std::invalid_argument("make_density: negative samples beyond tolerance");
    double right = values[values.size() - 1];
    if (std::abs(right) > tol)
        throw std::invalid_argument("make_density: nonzero value at the right endpoint");
    for (int i = 0; i < values.size(); ++i)
        if (values[i] < 0.0) values[i] = 0.0;
    values[values.size() - 1] = 0.0;

    DensityState st;
    st.frame = frame;
    st.time = time;
    st.grid = grid;
    st.values = std::move(values);
    st.refresh_mass();
    return st;
}

void FiringRateSeries::append(double t, double rate) {
    if (!times.empty() && t <= times.back())
        throw std::invalid_argument("FiringRateSeries: times must be strictly increasing");
    times.push_back(t);
    rates.push_back(rate);
}

double ProfileSpec::value(double v) const {
    const double z = (v - center) / width;
    switch (kind) {
        case ProfileKind::Gaussian: return std::exp(-0.5 * z * z);
        case ProfileKind::HermiteBump: return z * z * std::exp(-0.5 * z * z);
        case ProfileKind::NearThreshold: return v * v * std::exp(-0.5 * z * z);
        case ProfileKind::VExp: return -v * std::exp(v);
    }
    return 0.0;
}

double ProfileSpec::derivative(double v) const {
    const double z = (v - center) / width;
    const double g = std::exp(-0.5 * z * z);
    switch (kind) {
        case ProfileKind::Gaussian: return -z / width * g;
        case ProfileKind::HermiteBump: return (2.0 * z - z * z * z) / width * g;
        case ProfileKind::NearThreshold: return (2.0 * v - v * v * z / width) * g;
        case ProfileKind::VExp: return -(1.0 + v) * std::exp(v);
    }
    return 0.0;
}

ProfileKind profile_kind_from_name(const std::string& name) {
    if (name == "gaussian") return ProfileKind::Gaussian;
    if (name == "hermite_bump") return ProfileKind::HermiteBump;
    if (name == "near_threshold") return ProfileKind::NearThreshold;
    if (name == "vexp") return ProfileKind::VExp;
    throw std::invalid_argument("unknown init profile: " + name);
}

InitialDensity make_initial_density(const ProfileSpec& profile, const Grid1D& grid) {
    grid.validate();
    const int n = grid.n_nodes();
    VectorXd vals(n);
    for (int i = 0; i < n; ++i) vals[i] = profile.value(grid.node(i));

    const double tol = 1e-12;
    if (vals.minCoeff() < -tol)
        throw std::invalid_argument("make_initial_density: profile is negative on the grid");
    if (std::abs(vals[n - 1]) > tol)
        throw std::invalid_argument("make_initial_density: profile violates p_I(0) = 0");

    double m = trapezoid(vals, grid.dx());
    if (!(m > tol))
        throw std::invalid_argument("make_initial_density: profile has zero mass");
    vals /= m;

    InitialDensity init;
    init.state = make_density(Frame::Physical, 0.0, grid, std::move(vals), tol);
    // sup |p'| sampled on a 10x refined grid; profiles are smooth so this
    // resolves the extrema to well below scheme accuracy.
    double sup = 0.0;
    const int fine = 10 * grid.n_cells;
    const double h = (grid.x_max - grid.x_min) / fine;
    for (int i = 0; i <= fine; ++i) {
        double d = std::abs(profile.derivative(grid.x_min + i * h));
        if (d > sup) sup = d;
    }
    init.sup_abs_deriv = sup / m;
    init.edge_deriv = profile.derivative(grid.x_max) / m;
    return init;
}

}  // namespace nnlif
