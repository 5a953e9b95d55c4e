#pragma once

// Radially symmetric macroscale enthalpy equation on the stem cross-section,
// finite-volume form on annular shells:
//
//   |Y1| V_i dH_i/dt = F_{i+1/2} - F_{i-1/2} - q_i V_i
//
// with face fluxes F = 2 pi x kappa dT/dx, kappa = pi0 D(H) on nodes whose
// cell still holds ice and |Y1| D_pm after complete local melt (the identity
// multiplier), a symmetry face at x = 0, and a Robin closure at x = R_tree.
// Keeping the capacity factor |Y1| uniform across the regime switch avoids a
// stored-energy jump at melt events.

#include <vector>

#include "sapsim/geometry.hpp"
#include "sapsim/micro_reduced.hpp"
#include "sapsim/thermo.hpp"

namespace sapsim {

enum class FaceAveraging { Harmonic, Arithmetic };

struct MacroGrid {
    int M = 40;
    double R_tree = 0.25;

    double dx() const { return R_tree / M; }
    double x(int i) const { return i * dx(); }
    // Shell volume owned by node i (per unit axial length).
    double shell_volume(int i) const;
};

struct RobinClosure {
    double T_boundary = 0;   // eliminated ghost/boundary temperature [K]
    double flux = 0;         // alpha (T_boundary - T_a), outward positive
};

// Eliminate the boundary temperature from  -D (T_b - T_last)/dx = alpha (T_b - T_a).
RobinClosure robin_boundary(double T_last, double D_boundary, double dx,
                            const ThermoProps& props);

struct MacroRhsResult {
    double boundary_inflow = 0;   // F_R, heat entering through the bark face
    double sink_total = 0;        // sum over shells of q_i V_i
};

// dH1/dt for all nodes.  micro_flux holds q_i (>= 0 while a cell melts, 0 for
// melted cells); regimes selects the transport coefficient per node.
MacroRhsResult macro_rhs(const MacroGrid& grid, const std::vector<double>& H1,
                         const std::vector<CellRegime>& regimes,
                         const std::vector<double>& micro_flux, double pi0,
                         double Y1_area, double post_melt_D,
                         const ThermoProps& props, const OmegaRegularization& reg,
                         FaceAveraging avg, std::vector<double>& dH1dt);

// Source-free variant with Pi replaced by the identity multiplier and a
// constant diffusion coefficient; used once every cell at a node has melted.
MacroRhsResult post_melt_rhs(const MacroGrid& grid, const std::vector<double>& H1,
                             double Y1_area, double post_melt_D,
                             const ThermoProps& props, const OmegaRegularization& reg,
                             std::vector<double>& dH1dt);

} // namespace sapsim
