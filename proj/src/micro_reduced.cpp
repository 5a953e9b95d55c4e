#include "sapsim/micro_reduced.hpp"

#include <cmath>
#include <stdexcept>

namespace sapsim {

bool annulus_degenerate(const MicroCellState& state, const CellGeometry& geom) {
    return geom.gamma - state.s_iw < 1e-3 * geom.gamma;
}

void micro_heat_rhs(const MicroCellState& state, double T1_trace, double ds_dt,
                    const CellGeometry& geom, const ThermoProps& props,
                    const OmegaRegularization& reg, std::vector<double>& dT2dt) {
    const int m = state.m_micro();
    if (m < 2) throw std::invalid_argument("micro: need at least 2 intervals");
    if (annulus_degenerate(state, geom))
        throw std::runtime_error("micro: annulus degenerate, cell must be equilibrated");

    dT2dt.assign(m - 1, 0.0);
    const double span = geom.gamma - state.s_iw;
    const double dxi = 1.0 / m;
    const double dy = span * dxi;

    // Nodal diffusion coefficients from H2 = omega^{-1}(T2).
    std::vector<double> D(m + 1);
    for (int j = 0; j <= m; ++j) {
        const double T = (j == 0) ? props.T_c : (j == m ? T1_trace : state.T2[j]);
        D[j] = diffusion_coeff(enthalpy_from_temp(T, props, reg), props);
    }

    auto temp = [&](int j) {
        if (j == 0) return props.T_c;
        if (j == m) return T1_trace;
        return state.T2[j];
    };

    for (int j = 1; j < m; ++j) {
        const double y = state.s_iw + j * dxi * span;
        const double yp = y + 0.5 * dy, ym = y - 0.5 * dy;
        const double Dp = 0.5 * (D[j] + D[j + 1]);
        const double Dm = 0.5 * (D[j] + D[j - 1]);
        const double diff = (yp * Dp * (temp(j + 1) - temp(j)) -
                             ym * Dm * (temp(j) - temp(j - 1))) /
                            (y * dy * dy);
        const double xi = j * dxi;
        const double adv = (1.0 - xi) * ds_dt / span * (temp(j + 1) - temp(j - 1)) / (2.0 * dxi);
        dT2dt[j - 1] = diff / props.c_w + adv;
    }
}

double front_gradient(const MicroCellState& state, const CellGeometry& geom) {
    const int m = state.m_micro();
    const double span = geom.gamma - state.s_iw;
    const double dxi = 1.0 / m;
    const double g_xi = (-3.0 * state.T2[0] + 4.0 * state.T2[1] - state.T2[2]) / (2.0 * dxi);
    return g_xi / span;
}

double stefan_rate(const MicroCellState& state, const CellGeometry& geom,
                   const ThermoProps& props, const OmegaRegularization& reg) {
    const double D = diffusion_coeff(enthalpy_from_temp(state.T2[0], props, reg), props);
    return -D / props.latent_heat() * front_gradient(state, geom);
}

double boundary_flux(const MicroCellState& state, const CellGeometry& geom,
                     const ThermoProps& props, const OmegaRegularization& reg) {
    const int m = state.m_micro();
    const double span = geom.gamma - state.s_iw;
    const double dxi = 1.0 / m;
    const double g_xi = (3.0 * state.T2[m] - 4.0 * state.T2[m - 1] + state.T2[m - 2]) / (2.0 * dxi);
    const double D = diffusion_coeff(enthalpy_from_temp(state.T2[m], props, reg), props);
    return 2.0 * M_PI * geom.gamma * D * g_xi / span;
}

double melt_event_value(const MicroCellState& state) { return state.s_iw; }

} // namespace sapsim
