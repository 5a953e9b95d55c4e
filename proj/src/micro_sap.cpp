#include "sapsim/micro_sap.hpp"

#include <stdexcept>
#include <string>

namespace sapsim {

namespace {

constexpr double kRadiusFloor = 1e-12;   // [m]

void check_radius(double v, const char* what) {
    if (!(v > kRadiusFloor))
        throw std::runtime_error(std::string("sap cell: singular closure, ") + what +
                                 " = " + std::to_string(v));
}

} // namespace

void SapProps::finalize(const ThermoProps& thermo, const CellGeometry& geom) {
    if (std::isnan(rho_gv0)) rho_gv0 = p_gv0 * M_g / (R_gas * thermo.T_c);
    if (std::isnan(s_gi0)) s_gi0 = geom.R_f / std::sqrt(2.0);
    validate();
}

void SapProps::validate() const {
    const double fields[] = {sigma, M_g, R_gas, C_s, Lp, A_wall, p_gf0, p_gv0, rho_gv0, s_gi0, r0};
    for (double f : fields)
        if (!(f > 0.0) || !std::isfinite(f))
            throw std::invalid_argument("sap: all parameters must be finite and positive");
}

PressureSet algebraic_update(const SapCellState& state, double T1, const SapProps& props) {
    const double s_fiber = (state.regime == CellRegime::Melted) ? state.s_gw : state.s_gi;
    check_radius(s_fiber, "fiber gas radius");
    check_radius(state.r, "vessel bubble radius");

    PressureSet pr;
    pr.p_gf = props.p_gf0 * (props.s_gi0 / s_fiber) * (props.s_gi0 / s_fiber);
    pr.p_wf = pr.p_gf - 2.0 * props.sigma / s_fiber;
    pr.rho_gv = props.rho_gv0 * (props.r0 / state.r) * (props.r0 / state.r);
    pr.p_gv = pr.rho_gv * props.R_gas * T1 / props.M_g;
    pr.p_wv = pr.p_gv - 2.0 * props.sigma / state.r;
    return pr;
}

std::array<double, 4> sap_rates(const SapCellState& state, double T1,
                                const PressureSet& pr, double grad_T2_at_front,
                                const SapProps& props, const CellGeometry& geom,
                                const ThermoProps& thermo,
                                const OmegaRegularization& reg) {
    check_radius(state.s_iw, "s_iw");
    check_radius(state.s_gi, "s_gi");
    check_radius(state.r, "r");

    const double dU = -(props.Lp * props.A_wall / geom.N_f) *
                      (pr.p_wv - pr.p_wf - props.R_gas * props.C_s * T1);

    const double D_front = diffusion_coeff(enthalpy_from_temp(thermo.T_c, thermo, reg), thermo);
    const double ds_iw = -D_front / thermo.latent_heat() * grad_T2_at_front +
                         dU / (2.0 * M_PI * state.s_iw * geom.L_f);

    const double ds_gi = -(thermo.rho_w - thermo.rho_i) * state.s_iw * ds_iw /
                             (state.s_gi * thermo.rho_i) +
                         thermo.rho_w * dU / (2.0 * M_PI * state.s_gi * thermo.rho_i * geom.L_f);

    const double dr = -geom.N_f * dU / (2.0 * M_PI * state.r * geom.L_v);

    return {ds_iw, ds_gi, dr, dU};
}

std::array<double, 3> melted_rates(const SapCellState& state, double T1,
                                   const PressureSet& pr, const SapProps& props,
                                   const CellGeometry& geom) {
    check_radius(state.s_gw, "s_gw");
    check_radius(state.r, "r");

    const double dU = -(props.Lp * props.A_wall / geom.N_f) *
                      (pr.p_wv - pr.p_wf - props.R_gas * props.C_s * T1);
    const double ds_gw = dU / (2.0 * M_PI * state.s_gw * geom.L_f);
    const double dr = -geom.N_f * dU / (2.0 * M_PI * state.r * geom.L_v);
    return {ds_gw, dr, dU};
}

double ice_thickness_event(const SapCellState& state) { return state.s_iw - state.s_gi; }

} // namespace sapsim
