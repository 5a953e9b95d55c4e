#pragma once

// Periodic cell problem on the perforated reference cell Y^1 (unit square
// minus a centered disk): P1 finite elements with periodic constraints,
// corrector fields mu_k, and the effective multiplier matrix Pi.

#include <array>
#include <vector>

#include "sapsim/geometry.hpp"

namespace sapsim {

// Triangulation of the unit square minus the disk of radius hole_radius
// centered at (1/2, 1/2).  Coordinates are dimensionless (scaled by delta).
struct CellMesh {
    std::vector<std::array<double, 2>> nodes;
    std::vector<std::array<int, 3>> tris;       // CCW orientation
    std::vector<int> rep;                        // node -> periodic representative node
    std::vector<int> hole_nodes;                 // nodes lying on the hole boundary
    double hole_radius = 0;                      // gamma/delta
    double target_h = 0;

    int n_nodes() const { return static_cast<int>(nodes.size()); }
    int n_tris() const { return static_cast<int>(tris.size()); }
    double tri_area(int t) const;
};

struct EffectiveTensor {
    double pi[2][2] = {{0, 0}, {0, 0}};   // physical units [m^2] (scaled by delta^2)
    double y1_area = 0;                   // |Y^1| = delta^2 - pi gamma^2 [m^2]
    double delta = 0;
    double gamma = 0;
    double mesh_h = 0;

    double pi11() const { return pi[0][0]; }
};

// Conforming triangulation with max edge length <= target_h and complete
// periodic edge pairing.  Throws on infeasible geometry (gamma/delta >= 1/2)
// or meshing failure.
CellMesh build_reference_mesh(const CellGeometry& geom, double target_h);

// Solve the periodic cell problem for the corrector mu_k (k = 0 or 1 for the
// two coordinate axes).  Returns the nodal field, gauge-fixed to zero mean.
std::vector<double> solve_corrector(const CellMesh& mesh, int k);

// Assemble Pi from the two correctors (energy form, exact for P1) and scale
// to physical units by delta^2.
EffectiveTensor effective_tensor(const CellMesh& mesh, const CellGeometry& geom,
                                 const std::vector<double>& mu1,
                                 const std::vector<double>& mu2);

// Convenience: mesh + two solves + assembly.
EffectiveTensor compute_effective_tensor(const CellGeometry& geom, double target_h);

// Direct quadrature of Pi_kl = int (delta_kl + d mu_k / d y_l); used by tests
// to cross-check the energy form.
double tensor_entry_direct(const CellMesh& mesh, const std::vector<double>& mu_k, int k, int l);

} // namespace sapsim
