#pragma once

// Multiscale time loop: frozen-coefficient splitting between the micro heat
// problem, the macro enthalpy equation, and the per-cell interface/transport
// dynamics, advanced with a shared adaptive TR-BDF2 step and per-cell event
// handling (complete melt, thaw onset).

#include <string>
#include <vector>

#include "sapsim/config.hpp"
#include "sapsim/corrector.hpp"

namespace sapsim {

struct NodeSummary {
    double s_iw = NAN;
    double s_gi_or_gw = NAN;
    double r = NAN;
    double U = NAN;
    double p_wf = NAN;
    double p_wv = NAN;
    CellRegime regime = CellRegime::IcePresent;
};

struct Snapshot {
    double t = 0;
    std::vector<double> x, T1, H1;
    std::vector<NodeSummary> micro;
};

struct EventRecord {
    int node = -1;
    double time = 0;
    std::string kind;   // "melt" or "onset"
};

struct ProbeSample {
    double t = 0;
    double s_iw = NAN, s_gi_or_gw = NAN, r = NAN, U = NAN, p_wf = NAN, p_wv = NAN;
};

struct SimResult {
    std::vector<Snapshot> snapshots;
    std::vector<EventRecord> events;
    std::vector<ProbeSample> probe;
    int probe_node = -1;

    // Discrete energy budget of the macro equation: change in stored energy
    // vs integrated boundary inflow minus integrated micro sink.
    double E_initial = 0, E_final = 0;
    double boundary_in = 0, micro_sink = 0;
    double energy_residual() const {
        return (E_final - E_initial) - (boundary_in - micro_sink);
    }

    double effective_rel_tol = 0;
    long steps_accepted = 0, steps_rejected = 0;

    // Time of the latest melt event, or NaN if cells remain unmelted.
    double last_melt_time() const;
    bool all_melted = false;
};

SimResult run_simulation(const SimConfig& config);
SimResult run_simulation(const SimConfig& config, const EffectiveTensor& tensor);

} // namespace sapsim
