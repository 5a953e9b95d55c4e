#pragma once

// Full sap-exudation microscale model: differential-algebraic system for the
// interface radii s_iw, s_gi, the vessel bubble radius r and the transferred
// water volume U, closed by Young-Laplace / ideal-gas / osmosis relations.
// The micro heat problem on the water annulus is shared with micro_reduced.

#include <array>
#include <cmath>

#include "sapsim/geometry.hpp"
#include "sapsim/micro_reduced.hpp"
#include "sapsim/thermo.hpp"

namespace sapsim {

struct SapProps {
    double sigma = 0.076;       // gas/liquid surface tension [kg/s^2]
    double M_g = 0.029;         // molar mass of air [kg/mol]
    double R_gas = 8.314;       // universal gas constant [J/mol K]
    double C_s = 58.4;          // vessel sugar concentration [mol/m^3]
    double Lp = 5.54e-13;       // wall hydraulic conductivity [m^2 s/kg]
    double A_wall = 2.20e-8;    // fiber/vessel wall area [m^2]
    double p_gf0 = 2.0e5;       // initial fiber gas pressure [N/m^2]
    double p_gv0 = 1.0e5;       // initial vessel gas pressure [N/m^2]
    double rho_gv0 = NAN;       // initial vessel gas density; derived if NaN
    double s_gi0 = NAN;         // initial gas/ice radius; R_f/sqrt(2) if NaN
    double r0 = 6.0e-6;         // initial vessel bubble radius [m]

    // Fill derived defaults: rho_gv0 from the ideal gas law at T_c and
    // s_gi0 = R_f/sqrt(2) (the table value 2.5e-6 is display rounding).
    void finalize(const ThermoProps& thermo, const CellGeometry& geom);
    void validate() const;
};

struct SapCellState {
    double s_iw = 0;    // ice/water interface radius [m] (IcePresent)
    double s_gi = 0;    // gas/ice interface radius [m] (IcePresent)
    double s_gw = 0;    // gas/water interface radius [m] (Melted)
    double r = 0;       // vessel bubble radius [m]
    double U = 0;       // cumulative fiber->vessel water volume [m^3]
    std::vector<double> T2;   // micro temperatures on [s_iw, gamma]
    CellRegime regime = CellRegime::IcePresent;
    bool dae_active = false;  // interface/transport dynamics released at thaw onset
};

// Pressures are derived quantities, recomputed from the state each evaluation
// and never integrated.
struct PressureSet {
    double p_wf = 0, p_wv = 0, p_gv = 0, p_gf = 0;
    double rho_gv = 0;
};

PressureSet algebraic_update(const SapCellState& state, double T1, const SapProps& props);

// Time derivatives (ds_iw/dt, ds_gi/dt, dr/dt, dU/dt) while ice is present.
// grad_T2_at_front is dT2/dy at y = s_iw (positive while melting).
std::array<double, 4> sap_rates(const SapCellState& state, double T1,
                                const PressureSet& pr, double grad_T2_at_front,
                                const SapProps& props, const CellGeometry& geom,
                                const ThermoProps& thermo,
                                const OmegaRegularization& reg);

// Post-melt rates (ds_gw/dt, dr/dt, dU/dt).
std::array<double, 3> melted_rates(const SapCellState& state, double T1,
                                   const PressureSet& pr, const SapProps& props,
                                   const CellGeometry& geom);

// Ice layer thickness b = s_iw - s_gi; crossing zero triggers the switch to
// the melted regime with s_gw := s_iw.
double ice_thickness_event(const SapCellState& state);

} // namespace sapsim
