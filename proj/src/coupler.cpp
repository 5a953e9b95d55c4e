#include "sapsim/coupler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "sapsim/csv.hpp"
#include "sapsim/integrator.hpp"
#include "sapsim/log.hpp"

namespace sapsim {

double SimResult::last_melt_time() const {
    double t = NAN;
    for (const auto& e : events)
        if (e.kind == "melt" && (std::isnan(t) || e.time > t)) t = e.time;
    return t;
}

namespace {

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int k = std::min(threads, n);
    pool.reserve(k);
    for (int i = 0; i < k; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

// --- ODE system adapters -------------------------------------------------

// Interior micro temperatures; macro trace and interface speed frozen.
struct MicroHeatSystem final : OdeSystem {
    const SimConfig* cfg = nullptr;
    mutable MicroCellState scratch;
    mutable std::vector<double> dT;
    double T1_trace = 0, ds_dt = 0;

    int size() const override { return scratch.m_micro() - 1; }
    void eval(double, const double* y, double* f) const override {
        const int m = scratch.m_micro();
        for (int j = 1; j < m; ++j) scratch.T2[j] = y[j - 1];
        micro_heat_rhs(scratch, T1_trace, ds_dt, cfg->geom, cfg->thermo, cfg->reg, dT);
        for (int j = 0; j < m - 1; ++j) f[j] = dT[j];
    }
    double typical(int) const override { return 300.0; }
};

// Reduced-model interface: Stefan condition with the micro field frozen in
// the computational coordinate.
struct StefanSystem final : OdeSystem {
    const SimConfig* cfg = nullptr;
    mutable MicroCellState scratch;   // holds the frozen T2 field

    int size() const override { return 1; }
    void eval(double, const double* y, double* f) const override {
        scratch.s_iw = y[0];
        f[0] = stefan_rate(scratch, cfg->geom, cfg->thermo, cfg->reg);
    }
    double typical(int) const override { return 1e-6; }
};

// Sap-model interface/transport DAE; temperatures frozen.
struct SapDaeSystem final : OdeSystem {
    const SimConfig* cfg = nullptr;
    mutable SapCellState scratch;      // radii/volume updated per evaluation
    mutable MicroCellState heat_view;  // frozen T2 for the front gradient
    double T1 = 0;

    int size() const override { return 4; }
    void eval(double, const double* y, double* f) const override {
        scratch.s_iw = y[0];
        scratch.s_gi = y[1];
        scratch.r = y[2];
        scratch.U = y[3];
        heat_view.s_iw = y[0];
        const double grad = front_gradient(heat_view, cfg->geom);
        const PressureSet pr = algebraic_update(scratch, T1, cfg->sap);
        const auto rates =
            sap_rates(scratch, T1, pr, grad, cfg->sap, cfg->geom, cfg->thermo, cfg->reg);
        for (int i = 0; i < 4; ++i) f[i] = rates[i];
    }
    double typical(int i) const override { return i == 3 ? 1e-15 : 1e-6; }
};

// Macro enthalpies plus two quadrature components: cumulative boundary inflow
// and cumulative micro sink.  Integrating the budget terms with the same
// stage weights as H1 makes the discrete energy identity exact.
struct MacroSystem final : OdeSystem {
    const SimConfig* cfg = nullptr;
    const MacroGrid* grid = nullptr;
    const std::vector<CellRegime>* regimes = nullptr;
    const std::vector<double>* flux = nullptr;
    double pi0 = 0, Y1A = 0, pmD = 0;
    mutable std::vector<double> H, dH;

    int size() const override { return grid->M + 2; }
    void eval(double, const double* y, double* f) const override {
        const int M = grid->M;
        H.assign(y, y + M);
        const MacroRhsResult res = macro_rhs(*grid, H, *regimes, *flux, pi0, Y1A, pmD,
                                             cfg->thermo, cfg->reg, cfg->face_avg, dH);
        for (int i = 0; i < M; ++i) f[i] = dH[i];
        f[M] = res.boundary_inflow;
        f[M + 1] = res.sink_total;
    }
    double typical(int i) const override { return i < grid->M ? 1e6 : 1e-3; }
};

// --- Simulation driver ----------------------------------------------------

struct SavedState {
    double t = 0, B = 0, Q = 0;
    std::vector<double> H1;
    std::vector<MicroCellState> micro;
    std::vector<SapCellState> sap;
    std::vector<double> last_ds;
    std::vector<CellRegime> regimes;
    std::vector<char> dae_active;
};

class Simulation {
  public:
    Simulation(SimConfig cfg, const EffectiveTensor& tensor)
        : cfg_(std::move(cfg)), tensor_(tensor) {
        grid_.M = cfg_.M_macro;
        grid_.R_tree = cfg_.geom.R_tree;
        pi0_ = tensor_.pi11();
        y1a_ = tensor_.y1_area;
        n_threads_ = cfg_.threads == 0
                         ? (cfg_.M_macro >= 256
                                ? static_cast<int>(std::thread::hardware_concurrency())
                                : 1)
                         : cfg_.threads;
        init_state();
        init_workspaces();
    }

    SimResult run();

  private:
    SimConfig cfg_;
    EffectiveTensor tensor_;
    MacroGrid grid_;
    double pi0_ = 0, y1a_ = 0;
    int n_threads_ = 1;

    // State
    double t_ = 0, B_ = 0, Q_ = 0;
    std::vector<double> H1_, T1_, flux_;
    std::vector<CellRegime> regimes_;
    std::vector<char> dae_active_;
    std::vector<MicroCellState> micro_;
    std::vector<SapCellState> sap_;
    std::vector<double> last_ds_;

    // Workspaces
    std::vector<MicroHeatSystem> heat_sys_;
    std::vector<std::unique_ptr<TrBdf2>> heat_int_;
    std::vector<StefanSystem> stefan_sys_;
    std::vector<SapDaeSystem> dae_sys_;
    std::vector<std::unique_ptr<TrBdf2>> iface_int_;
    MacroSystem macro_sys_;
    std::unique_ptr<TrBdf2> macro_int_;
    StepControl ctl_;

    SimResult result_;

    bool is_sap() const { return cfg_.model == ModelKind::Sap; }
    double s_iw(int i) const { return is_sap() ? sap_[i].s_iw : micro_[i].s_iw; }

    void init_state();
    void init_workspaces();
    SavedState save() const;
    void restore(const SavedState& s);

    double stored_energy() const {
        double e = 0;
        for (int i = 0; i < grid_.M; ++i) e += y1a_ * H1_[i] * grid_.shell_volume(i);
        return e;
    }

    // One frozen-coefficient split step of size dt.  Returns the max weighted
    // error over all substeps, or a failure flag.
    struct Attempt {
        bool ok = false;
        double err = 0;
    };
    Attempt attempt(double dt);

    double event_value(int i) const;
    void apply_switches(std::vector<EventRecord>& out);
    void record_probe();
    void record_snapshot();
    NodeSummary summarize(int i) const;
};

void Simulation::init_state() {
    const int M = grid_.M;
    const double T0 = cfg_.initial_temperature();
    H1_.assign(M, cfg_.initial_H1);
    T1_.assign(M, 0.0);
    flux_.assign(M, 0.0);
    regimes_.assign(M, CellRegime::IcePresent);
    dae_active_.assign(M, 0);
    last_ds_.assign(M, 0.0);
    micro_.resize(M);
    const double s0_reduced = cfg_.geom.R_f / std::sqrt(2.0);
    for (int i = 0; i < M; ++i) {
        micro_[i].s_iw = is_sap() ? cfg_.geom.R_f : s0_reduced;
        micro_[i].T2.assign(cfg_.M_micro + 1, T0);
        micro_[i].regime = CellRegime::IcePresent;
    }
    if (is_sap()) {
        sap_.resize(M);
        for (int i = 0; i < M; ++i) {
            sap_[i].s_iw = cfg_.geom.R_f;
            sap_[i].s_gi = cfg_.sap.s_gi0;
            sap_[i].r = cfg_.sap.r0;
            sap_[i].U = 0.0;
            sap_[i].s_gw = 0.0;
            sap_[i].regime = CellRegime::IcePresent;
        }
    }
    ctl_.abs_tol = cfg_.abs_tol;
    ctl_.rel_tol = std::max(cfg_.rel_tol, 1e-12);
    if (ctl_.rel_tol != cfg_.rel_tol) {
        std::ostringstream os;
        os << "rel_tol " << cfg_.rel_tol << " floored at " << ctl_.rel_tol;
        logging::info(os.str());
    }
    result_.effective_rel_tol = ctl_.rel_tol;
}

void Simulation::init_workspaces() {
    const int M = grid_.M;
    heat_sys_.resize(M);
    stefan_sys_.resize(is_sap() ? 0 : M);
    dae_sys_.resize(is_sap() ? M : 0);
    for (int i = 0; i < M; ++i) {
        heat_sys_[i].cfg = &cfg_;
        heat_sys_[i].scratch.T2.assign(cfg_.M_micro + 1, 0.0);
        heat_int_.push_back(std::make_unique<TrBdf2>(cfg_.M_micro - 1));
        if (is_sap()) {
            dae_sys_[i].cfg = &cfg_;
            dae_sys_[i].heat_view.T2.assign(cfg_.M_micro + 1, 0.0);
            iface_int_.push_back(std::make_unique<TrBdf2>(4));
        } else {
            stefan_sys_[i].cfg = &cfg_;
            stefan_sys_[i].scratch.T2.assign(cfg_.M_micro + 1, 0.0);
            iface_int_.push_back(std::make_unique<TrBdf2>(1));
        }
    }
    macro_sys_.cfg = &cfg_;
    macro_sys_.grid = &grid_;
    macro_sys_.regimes = &regimes_;
    macro_sys_.flux = &flux_;
    macro_sys_.pi0 = pi0_;
    macro_sys_.Y1A = y1a_;
    macro_sys_.pmD = cfg_.post_melt_D;
    macro_int_ = std::make_unique<TrBdf2>(grid_.M + 2);
}

SavedState Simulation::save() const {
    return {t_, B_, Q_, H1_, micro_, sap_, last_ds_, regimes_, dae_active_};
}

void Simulation::restore(const SavedState& s) {
    t_ = s.t;
    B_ = s.B;
    Q_ = s.Q;
    H1_ = s.H1;
    micro_ = s.micro;
    sap_ = s.sap;
    last_ds_ = s.last_ds;
    regimes_ = s.regimes;
    dae_active_ = s.dae_active;
}

Simulation::Attempt Simulation::attempt(double dt) {
    const int M = grid_.M;
    std::atomic<bool> failed{false};
    double err_heat = 0, err_iface = 0;
    std::mutex err_mutex;

    // 3a: synchronize temperatures with enthalpies and refresh micro traces.
    for (int i = 0; i < M; ++i) {
        T1_[i] = temp_from_enthalpy(H1_[i], cfg_.thermo, cfg_.reg);
        if (regimes_[i] == CellRegime::IcePresent) {
            micro_[i].s_iw = s_iw(i);
            micro_[i].T2.front() = cfg_.thermo.T_c;
            micro_[i].T2.back() = T1_[i];
        }
    }

    // 3b: micro heat, macro values frozen.
    parallel_for(M, n_threads_, [&](int i) {
        if (failed.load() || regimes_[i] != CellRegime::IcePresent) return;
        if (annulus_degenerate(micro_[i], cfg_.geom)) {
            for (int j = 1; j <= cfg_.M_micro; ++j) micro_[i].T2[j] = T1_[i];
            return;
        }
        auto& sys = heat_sys_[i];
        sys.scratch.s_iw = micro_[i].s_iw;
        sys.scratch.T2 = micro_[i].T2;
        sys.T1_trace = T1_[i];
        sys.ds_dt = last_ds_[i];
        std::vector<double> y(micro_[i].T2.begin() + 1, micro_[i].T2.end() - 1);
        StepOutcome o;
        try {
            o = heat_int_[i]->step(sys, t_, dt, y, ctl_);
        } catch (const std::exception&) {
            o.ok = false;
        }
        if (!o.ok) {
            failed.store(true);
            return;
        }
        for (int j = 1; j < cfg_.M_micro; ++j) micro_[i].T2[j] = y[j - 1];
        std::lock_guard<std::mutex> lock(err_mutex);
        err_heat = std::max(err_heat, o.err_norm);
    });
    if (failed.load()) return {};

    // Frozen micro fluxes for the macro step.
    for (int i = 0; i < M; ++i)
        flux_[i] = (regimes_[i] == CellRegime::IcePresent)
                       ? boundary_flux(micro_[i], cfg_.geom, cfg_.thermo, cfg_.reg)
                       : 0.0;

    // 3c: macro enthalpy (+ budget quadratures), micro values frozen.
    double err_macro = 0;
    {
        std::vector<double> y(M + 2);
        for (int i = 0; i < M; ++i) y[i] = H1_[i];
        y[M] = B_;
        y[M + 1] = Q_;
        StepOutcome o;
        try {
            o = macro_int_->step(macro_sys_, t_, dt, y, ctl_);
        } catch (const std::exception&) {
            o.ok = false;
        }
        if (!o.ok) return {};
        for (int i = 0; i < M; ++i) H1_[i] = y[i];
        B_ = y[M];
        Q_ = y[M + 1];
        err_macro = o.err_norm;
    }

    // 3d: interface / transport variables, temperatures frozen.
    parallel_for(M, n_threads_, [&](int i) {
        if (failed.load() || regimes_[i] != CellRegime::IcePresent) return;
        StepOutcome o;
        o.ok = true;
        if (is_sap()) {
            if (!dae_active_[i]) return;
            auto& sys = dae_sys_[i];
            sys.T1 = T1_[i];
            sys.scratch = sap_[i];
            sys.heat_view.s_iw = sap_[i].s_iw;
            sys.heat_view.T2 = micro_[i].T2;
            std::vector<double> y = {sap_[i].s_iw, sap_[i].s_gi, sap_[i].r, sap_[i].U};
            try {
                o = iface_int_[i]->step(sys, t_, dt, y, ctl_);
            } catch (const std::exception&) {
                o.ok = false;
            }
            if (o.ok) {
                const double prev = sap_[i].s_iw;
                sap_[i].s_iw = y[0];
                sap_[i].s_gi = y[1];
                sap_[i].r = y[2];
                sap_[i].U = y[3];
                last_ds_[i] = (y[0] - prev) / dt;
            }
        } else {
            auto& sys = stefan_sys_[i];
            sys.scratch.T2 = micro_[i].T2;
            std::vector<double> y = {micro_[i].s_iw};
            try {
                o = iface_int_[i]->step(sys, t_, dt, y, ctl_);
            } catch (const std::exception&) {
                o.ok = false;
            }
            if (o.ok) {
                last_ds_[i] = (y[0] - micro_[i].s_iw) / dt;
                micro_[i].s_iw = y[0];
            }
        }
        if (!o.ok) {
            failed.store(true);
            return;
        }
        std::lock_guard<std::mutex> lock(err_mutex);
        err_iface = std::max(err_iface, o.err_norm);
    });
    if (failed.load()) return {};

    Attempt a;
    a.ok = true;
    a.err = std::max({err_heat, err_macro, err_iface});
    return a;
}

double Simulation::event_value(int i) const {
    if (regimes_[i] == CellRegime::Melted) return 1.0;
    if (!is_sap()) return micro_[i].s_iw - cfg_.melt_floor;
    if (!dae_active_[i]) return (cfg_.thermo.T_c + cfg_.onset_eps) - T1_[i];
    return ice_thickness_event(sap_[i]);
}

void Simulation::apply_switches(std::vector<EventRecord>& out) {
    for (int i = 0; i < grid_.M; ++i) {
        if (regimes_[i] == CellRegime::Melted) continue;
        if (event_value(i) > 0) continue;
        if (is_sap() && !dae_active_[i]) {
            dae_active_[i] = 1;
            out.push_back({i, t_, "onset"});
        } else if (is_sap()) {
            sap_[i].s_gw = sap_[i].s_iw;
            sap_[i].regime = CellRegime::Melted;
            regimes_[i] = CellRegime::Melted;
            out.push_back({i, t_, "melt"});
        } else {
            micro_[i].s_iw = 0.0;
            micro_[i].regime = CellRegime::Melted;
            regimes_[i] = CellRegime::Melted;
            out.push_back({i, t_, "melt"});
        }
    }
}

NodeSummary Simulation::summarize(int i) const {
    NodeSummary s;
    s.regime = regimes_[i];
    if (!is_sap()) {
        s.s_iw = micro_[i].s_iw;
        return s;
    }
    const SapCellState& c = sap_[i];
    const bool melted = c.regime == CellRegime::Melted;
    s.s_iw = melted ? c.s_gw : c.s_iw;
    s.s_gi_or_gw = melted ? c.s_gw : c.s_gi;
    s.r = c.r;
    s.U = c.U;
    const double T1 = temp_from_enthalpy(H1_[i], cfg_.thermo, cfg_.reg);
    const PressureSet pr = algebraic_update(c, T1, cfg_.sap);
    s.p_wf = pr.p_wf;
    s.p_wv = pr.p_wv;
    return s;
}

void Simulation::record_probe() {
    const int i = result_.probe_node;
    if (i < 0) return;
    const NodeSummary s = summarize(i);
    result_.probe.push_back({t_, s.s_iw, s.s_gi_or_gw, s.r, s.U, s.p_wf, s.p_wv});
}

void Simulation::record_snapshot() {
    Snapshot snap;
    snap.t = t_;
    snap.x.resize(grid_.M);
    snap.T1.resize(grid_.M);
    snap.H1 = H1_;
    snap.micro.resize(grid_.M);
    for (int i = 0; i < grid_.M; ++i) {
        snap.x[i] = grid_.x(i);
        snap.T1[i] = temp_from_enthalpy(H1_[i], cfg_.thermo, cfg_.reg);
        snap.micro[i] = summarize(i);
    }
    result_.snapshots.push_back(std::move(snap));
}

SimResult Simulation::run() {
    const int M = grid_.M;
    const double t_end = cfg_.t_end;

    {
        const double dx = grid_.dx();
        int ip = static_cast<int>(std::llround(cfg_.probe_x / dx));
        result_.probe_node = std::clamp(ip, 0, M - 1);
    }

    result_.E_initial = stored_energy();

    std::vector<double> boundaries = cfg_.output_times;
    boundaries.push_back(t_end);
    std::sort(boundaries.begin(), boundaries.end());
    boundaries.erase(std::unique(boundaries.begin(), boundaries.end()), boundaries.end());

    if (!cfg_.output_times.empty() && cfg_.output_times.front() <= 0.0) record_snapshot();
    record_probe();

    const double dt_min = 1e-12 * t_end;
    double dt_prop = std::min(cfg_.initial_dt, cfg_.max_dt);
    size_t next_boundary = 0;
    while (next_boundary < boundaries.size() && boundaries[next_boundary] <= 0.0) ++next_boundary;

    std::vector<double> ev_old(M);

    while (t_ < t_end * (1.0 - 1e-14)) {
        const double t_stop = boundaries[next_boundary];
        double dt = std::min({dt_prop, cfg_.max_dt, t_stop - t_});
        if (dt < dt_min) {
            std::ostringstream os;
            os << "step size underflow at t = " << t_ << " s (dt = " << dt << ")";
            throw NumericalError(os.str());
        }

        // Current temperatures for the gate-event baseline.
        for (int i = 0; i < M; ++i) T1_[i] = temp_from_enthalpy(H1_[i], cfg_.thermo, cfg_.reg);
        for (int i = 0; i < M; ++i) ev_old[i] = event_value(i);

        const SavedState saved = save();
        Attempt a = attempt(dt);
        if (!a.ok || a.err > 1.0) {
            restore(saved);
            ++result_.steps_rejected;
            dt_prop = dt * (a.ok ? TrBdf2::h_scale(a.err) : 0.25);
            if (dt_prop < dt_min) {
                std::ostringstream os;
                os << "integrator failure at t = " << t_ << " s; state: H1[0] = " << H1_[0]
                   << ", H1[M-1] = " << H1_[M - 1];
                throw NumericalError(os.str());
            }
            continue;
        }

        // Event detection on the accepted trial step.
        bool crossed = false;
        for (int i = 0; i < M; ++i)
            if (ev_old[i] > 0 && event_value(i) <= 0) crossed = true;

        if (crossed) {
            // Bisect the step size to the earliest crossing.
            double lo = 0.0, hi = dt;
            for (int it = 0; it < 60 && (hi - lo) > 1e-6 * dt; ++it) {
                const double mid = 0.5 * (lo + hi);
                restore(saved);
                const Attempt am = attempt(mid);
                if (!am.ok) {
                    hi = mid;
                    continue;
                }
                bool mid_crossed = false;
                for (int i = 0; i < M; ++i)
                    if (ev_old[i] > 0 && event_value(i) <= 0) mid_crossed = true;
                if (mid_crossed)
                    hi = mid;
                else
                    lo = mid;
            }
            restore(saved);
            const Attempt af = attempt(hi);
            if (!af.ok || af.err > 1.0) {
                restore(saved);
                ++result_.steps_rejected;
                dt_prop = hi * 0.25;
                continue;
            }
            t_ += hi;
            ++result_.steps_accepted;
            apply_switches(result_.events);
            record_probe();
            dt_prop = std::max(dt * TrBdf2::h_scale(af.err) * 0.25, dt_min * 1e3);
        } else {
            t_ += dt;
            ++result_.steps_accepted;
            record_probe();
            dt_prop = dt * TrBdf2::h_scale(a.err);
        }

        if (std::abs(t_ - t_stop) <= 1e-9 * std::max(1.0, t_end)) {
            const bool is_output =
                std::any_of(cfg_.output_times.begin(), cfg_.output_times.end(),
                            [&](double ot) { return std::abs(ot - t_stop) <= 1e-9 * std::max(1.0, t_end); });
            if (is_output || t_stop == t_end) record_snapshot();
            ++next_boundary;
            if (next_boundary >= boundaries.size()) break;
        }
    }

    result_.E_final = stored_energy();
    result_.boundary_in = B_;
    result_.micro_sink = Q_;
    result_.all_melted = std::all_of(regimes_.begin(), regimes_.end(),
                                     [](CellRegime r) { return r == CellRegime::Melted; });
    return result_;
}

} // namespace

SimResult run_simulation(const SimConfig& config, const EffectiveTensor& tensor) {
    SimConfig cfg = config;
    cfg.finalize();
    if (std::abs(tensor.delta - cfg.geom.delta) > 1e-12 * cfg.geom.delta ||
        std::abs(tensor.gamma - cfg.geom.gamma) > 1e-12 * std::max(cfg.geom.gamma, 1e-30))
        throw ConfigError("effective tensor was computed for a different cell geometry");
    Simulation sim(cfg, tensor);
    return sim.run();
}

SimResult run_simulation(const SimConfig& config) {
    SimConfig cfg = config;
    cfg.finalize();
    EffectiveTensor tensor;
    if (!cfg.tensor_file.empty()) {
        tensor = read_tensor_file(cfg.tensor_file);
    } else {
        logging::info("computing effective tensor (mesh_h = " + std::to_string(cfg.mesh_h) + ")");
        tensor = compute_effective_tensor(cfg.geom, cfg.mesh_h);
    }
    return run_simulation(cfg, tensor);
}

} // namespace sapsim
