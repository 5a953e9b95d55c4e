#pragma once

// Epsilon-resolved 2D solver for the transformed single-field problem in the
// linear constant-coefficient regime, plus the homogenized limit reference it
// converges to.  Used to exhibit the two-scale convergence trend numerically.
//
// Domain: unit square tiled by an integer lattice of 1/eps cells, each with a
// centered disk of radius hole_ratio * eps where the mobility drops to eps^2.
// Dirichlet boundary, vertex-centered grid, harmonic-mean face coefficients,
// backward Euler in time with conjugate-gradient solves.

#include <vector>

#include "sapsim/geometry.hpp"

namespace sapsim {

struct FineScaleProblem {
    int inv_eps = 4;            // 1/eps; cells per side
    int nodes_per_cell = 8;     // grid vertices per cell side (>= 8)
    double hole_ratio = 7.88e-6 / 4.33e-5;   // gamma/delta
    double coeff = 1.0;         // constant D * omega' of the linear regime
    double theta_init = 0.0;
    double theta_bc = 1.0;      // boundary value (omega^{-1}(T_a) equivalent)
    double t_end = 0.05;
    std::vector<double> snapshot_times = {0.0125, 0.025, 0.05};
    int n_steps = 400;

    void validate() const;
};

struct FineField {
    int n = 0;                   // vertices per side
    std::vector<double> theta;   // row-major, size n*n
};

struct FineTrajectory {
    FineScaleProblem prob;
    std::vector<double> times;
    std::vector<FineField> fields;
};

FineTrajectory solve_fine(const FineScaleProblem& prob);

// Homogenized limit in the same linear regime: 2D macro field coupled to a
// radial micro field on the disk at every macro vertex.
struct LimitSnapshot {
    double t = 0;
    std::vector<double> theta1;   // (macro_n+1)^2 vertices
    std::vector<double> theta2;   // per vertex, micro_nodes+1 radial values
};

struct LimitSolution {
    int macro_n = 0;       // macro cells per side
    int micro_nodes = 0;   // radial intervals on the disk
    double hole_ratio = 0, coeff = 0, theta_bc = 0;
    std::vector<LimitSnapshot> snaps;
};

LimitSolution solve_homogenized_linear(const FineScaleProblem& prob, double pi_hat,
                                       int macro_n = 96, int micro_nodes = 24);

struct ErrorRow {
    double eps = 0;
    double time = 0;
    double l2 = 0;
};

// L2 distance between the fine field and the two-scale reconstruction
// (theta1 outside the holes, cell-local theta2 inside) at each snapshot.
std::vector<ErrorRow> compare_to_limit(const FineTrajectory& fine, const LimitSolution& limit);

// Full ladder study; pi_hat is the unit-cell effective multiplier.
std::vector<ErrorRow> convergence_study(const std::vector<int>& inv_eps_ladder,
                                        const FineScaleProblem& base, double pi_hat);

} // namespace sapsim
