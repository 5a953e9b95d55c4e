#pragma once

// One-phase Stefan micro-solver on the water annulus s_iw <= y <= gamma of a
// single reference cell.  The annulus is discretized on a moving mesh with
// nodes y_j = s_iw + j (gamma - s_iw) / M; the discrete operator works in the
// fixed computational coordinate xi = (y - s_iw)/(gamma - s_iw) and carries
// the mesh-motion advection term explicitly.

#include <vector>

#include "sapsim/geometry.hpp"
#include "sapsim/thermo.hpp"

namespace sapsim {

enum class CellRegime { IcePresent, Melted };

struct MicroCellState {
    double s_iw = 0;             // ice/water interface radius [m]
    std::vector<double> T2;      // M+1 nodal temperatures on the moving mesh [K]
    CellRegime regime = CellRegime::IcePresent;

    int m_micro() const { return static_cast<int>(T2.size()) - 1; }
};

// Annulus thinner than 1e-3 gamma; the cell is treated as thermally
// equilibrated for the step instead of evaluating the near-singular operator.
bool annulus_degenerate(const MicroCellState& state, const CellGeometry& geom);

// Time derivatives of the interior T2 nodes (j = 1..M-1).  T2[0] is pinned at
// T_c and T2[M] at the macro trace T1.  ds_dt is the (frozen) interface speed
// used in the advection term.
void micro_heat_rhs(const MicroCellState& state, double T1_trace, double ds_dt,
                    const CellGeometry& geom, const ThermoProps& props,
                    const OmegaRegularization& reg, std::vector<double>& dT2dt);

// One-sided (3-point, second-order) temperature gradient at the phase front,
// in physical coordinates [K/m].
double front_gradient(const MicroCellState& state, const CellGeometry& geom);

// Interface velocity from the Stefan condition; negative while melting.
double stefan_rate(const MicroCellState& state, const CellGeometry& geom,
                   const ThermoProps& props, const OmegaRegularization& reg);

// Heat flux from Y^1 into the cell, 2 pi gamma D dT2/dy at y = gamma
// [W m^2/kg]; positive when the cell absorbs heat.
double boundary_flux(const MicroCellState& state, const CellGeometry& geom,
                     const ThermoProps& props, const OmegaRegularization& reg);

// Event function for complete melt: returns s_iw.
double melt_event_value(const MicroCellState& state);

} // namespace sapsim
