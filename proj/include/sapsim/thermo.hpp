#pragma once

// Material constants and the constitutive maps of the temperature-enthalpy
// formulation: T = omega(H), H = omega_inv(T), omega_prime(H), and the
// piecewise-affine thermal diffusion coefficient D(H).
//
// All functions here are pure and thread-safe.

#include <stdexcept>

namespace sapsim {

// Physical constants (SI units).  Enthalpies H_i, H_w are the phase-boundary
// values at the freezing temperature T_c; their difference is the latent heat
// of fusion.
struct ThermoProps {
    double rho_w = 1000.0;   // density of water [kg/m^3]
    double rho_i = 917.0;    // density of ice [kg/m^3]
    double k_w = 0.556;      // thermal conductivity of water [W/m K]
    double k_i = 2.22;       // thermal conductivity of ice [W/m K]
    double c_w = 4180.0;     // specific heat of water [J/kg K]
    double c_i = 2100.0;     // specific heat of ice [J/kg K]
    double H_i = 5.74e5;     // enthalpy of ice at T_c [J/kg]
    double H_w = 9.07e5;     // enthalpy of water at T_c [J/kg]
    double T_c = 273.15;     // freezing temperature [K]
    double T_a = 283.15;     // ambient temperature [K]
    double alpha = 10.0;     // boundary heat-transfer coefficient [W/m^2 K]

    double latent_heat() const { return H_w - H_i; }
    void validate() const;
};

// Cubic Hermite segment on [h0, h1] with endpoint values/slopes (v0,m0),(v1,m1).
struct HermiteBlend {
    double h0 = 0, h1 = 0, v0 = 0, v1 = 0, m0 = 0, m1 = 0;
    double eval(double h) const;
    double deriv(double h) const;
    bool monotone_increasing() const;
};

// Regularization of the piecewise-linear temperature-enthalpy map.
//
// The map is assembled from five segments:
//   H < H_i_minus            : T = H / c_i
//   [H_i_minus, H_i_plus)    : cubic Hermite blend
//   [H_i_plus, H_w_minus)    : near-flat plateau with slope 1/c_inf
//   [H_w_minus, H_w_plus)    : cubic Hermite blend
//   H >= H_w_plus            : T = T_c + (H - H_w_plus) / c_w
//
// The plateau is anchored so that its right end sits plateau_drop below T_c,
// where plateau_drop = (H_w_plus - H_w_minus) / (2 c_w).  This margin is what
// makes a C^1 *strictly increasing* assembly possible: a cubic joining the
// plateau (slope ~1/c_inf) to the water branch (slope 1/c_w at value T_c)
// is monotone only if the value rise across the blend is at least one third
// of blend_width/c_w.  A plateau centered exactly at T_c admits no monotone
// C^1 connection to a water branch that passes through (H_w_plus, T_c).
struct OmegaRegularization {
    double H_i_minus = 0, H_i_plus = 0;   // ice-side blend interval [J/kg]
    double H_w_minus = 0, H_w_plus = 0;   // water-side blend interval [J/kg]
    double c_inf = 1.0e7;                 // plateau stiffness [J/kg K]

    // Derived pieces, filled by rebuild().
    double plateau_drop = 0;   // T_c - T(H_w_minus) [K]
    double plateau_T0 = 0;     // plateau value at H_w_minus [K]
    HermiteBlend ice_blend;
    HermiteBlend water_blend;

    // Default breakpoints: H_i -/+ 2e4 on the ice side and H_w -/+ 1e4 on the
    // water side.  The wider ice interval is needed because Table values give
    // H_i / c_i > T_c, so the ice branch overshoots the plateau level and a
    // narrow blend cannot descend monotonically.
    static OmegaRegularization make_default(const ThermoProps& props);

    // Recompute derived quantities; throws std::invalid_argument if the
    // assembled map is not strictly increasing or breakpoints are misordered.
    void rebuild(const ThermoProps& props);
    void validate(const ThermoProps& props) const;
};

// T = omega(H).  Total on R; rejects non-finite H.
double temp_from_enthalpy(double H, const ThermoProps& props,
                          const OmegaRegularization& reg);

// H = omega^{-1}(T).  Exact functional inverse of temp_from_enthalpy.
double enthalpy_from_temp(double T, const ThermoProps& props,
                          const OmegaRegularization& reg);

// d omega / dH.  Strictly positive.
double d_omega(double H, const ThermoProps& props,
               const OmegaRegularization& reg);

// Piecewise-affine thermal diffusion coefficient D(H) [W m^2 / kg K]:
// k_i/rho_i below H_i, k_w/rho_w above H_w, affine in between.
double diffusion_coeff(double H, const ThermoProps& props);

} // namespace sapsim
