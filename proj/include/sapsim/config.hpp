#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "sapsim/geometry.hpp"
#include "sapsim/macro.hpp"
#include "sapsim/micro_sap.hpp"
#include "sapsim/thermo.hpp"

namespace sapsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ModelKind { Reduced, Sap };

// Scenario configuration.  NaN-valued fields are derived defaults filled in
// by finalize().
struct SimConfig {
    ModelKind model = ModelKind::Reduced;

    int M_macro = 40;
    int M_micro = 4;
    double t_end = 7.2e4;
    std::vector<double> output_times;   // default: 5 evenly spaced incl. 0 and t_end

    double abs_tol = 7e-8;
    double rel_tol = 2e-14;    // error controller floors the effective value at 1e-12
    double max_dt = NAN;       // default: t_end / 16
    double initial_dt = 1e-2;

    double T_init = NAN;       // default: T_c
    double initial_H1 = NAN;   // default: omega^{-1}(T_init)
    double onset_eps = 1e-3;   // thaw-onset gate: T1 > T_c + onset_eps [K]
    double melt_floor = 1e-10; // reduced-model melt event radius [m]
    double post_melt_D = NAN;  // default: k_w/rho_w (reduced), 10 k_w/rho_w (sap)
    double probe_x = 0.15;     // radius of the per-step probe record [m]

    double mesh_h = 0.02;      // corrector mesh resolution
    std::string tensor_file;   // if set, the effective tensor is loaded from here

    int threads = 0;           // 0 = auto
    FaceAveraging face_avg = FaceAveraging::Harmonic;

    ThermoProps thermo;
    CellGeometry geom;
    SapProps sap;
    OmegaRegularization reg;
    bool reg_customized = false;

    void finalize();
    double initial_temperature() const { return std::isnan(T_init) ? thermo.T_c : T_init; }
};

} // namespace sapsim
