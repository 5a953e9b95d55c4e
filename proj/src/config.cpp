#include "sapsim/config_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "sapsim/csv.hpp"
#include "sapsim/log.hpp"

namespace sapsim {

void SimConfig::finalize() {
    thermo.validate();
    geom.validate();

    // Regularization defaults derive from the (possibly overridden) thermo
    // constants; any nonzero breakpoint already present is kept as an override.
    {
        OmegaRegularization def;
        def.H_i_minus = reg.H_i_minus != 0 ? reg.H_i_minus : thermo.H_i - 2.0e4;
        def.H_i_plus = reg.H_i_plus != 0 ? reg.H_i_plus : thermo.H_i + 2.0e4;
        def.H_w_minus = reg.H_w_minus != 0 ? reg.H_w_minus : thermo.H_w - 1.0e4;
        def.H_w_plus = reg.H_w_plus != 0 ? reg.H_w_plus : thermo.H_w + 1.0e4;
        def.c_inf = reg.c_inf;
        reg = def;
    }
    reg.rebuild(thermo);

    sap.finalize(thermo, geom);

    if (!(t_end > 0)) throw ConfigError("numerics: t_end must be positive");
    if (!(abs_tol > 0 && rel_tol > 0)) throw ConfigError("numerics: tolerances must be positive");
    if (M_micro < 2) throw ConfigError("numerics: m_micro must be >= 2");
    if (M_macro < 4) throw ConfigError("numerics: m_macro must be >= 4");
    if (!(initial_dt > 0)) throw ConfigError("numerics: initial_dt must be positive");
    if (!(mesh_h > 0 && mesh_h < 1)) throw ConfigError("numerics: mesh_h must be in (0,1)");
    if (threads < 0) throw ConfigError("numerics: threads must be >= 0");

    if (std::isnan(T_init)) T_init = thermo.T_c;
    if (std::isnan(max_dt)) max_dt = t_end / 16.0;
    if (!(max_dt > 0)) throw ConfigError("numerics: max_dt must be positive");
    if (std::isnan(initial_H1)) initial_H1 = enthalpy_from_temp(T_init, thermo, reg);
    if (std::isnan(post_melt_D)) {
        const double D_w = thermo.k_w / thermo.rho_w;
        post_melt_D = (model == ModelKind::Sap) ? 10.0 * D_w : D_w;
    }
    if (!(post_melt_D > 0)) throw ConfigError("numerics: post_melt_D must be positive");
    if (!(onset_eps > 0)) throw ConfigError("numerics: onset_eps must be positive");
    if (!(melt_floor > 0)) throw ConfigError("numerics: melt_floor must be positive");
    if (probe_x < 0 || probe_x > geom.R_tree)
        throw ConfigError("numerics: probe_x must lie within [0, R_tree]");

    if (output_times.empty())
        output_times = {0.0, 0.25 * t_end, 0.5 * t_end, 0.75 * t_end, t_end};
    for (double ot : output_times)
        if (ot < 0 || ot > t_end) throw ConfigError("output: output_times must lie in [0, t_end]");
}

namespace {

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
    std::ostringstream os;
    os << origin << ":" << line << ": " << msg;
    throw ConfigError(os.str());
}

double parse_double(const std::string& origin, int line, const std::string& key,
                    const std::string& v) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        while (pos < v.size() && std::isspace(static_cast<unsigned char>(v[pos]))) ++pos;
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        fail(origin, line, "malformed number for key '" + key + "': " + v);
    }
}

int parse_int(const std::string& origin, int line, const std::string& key, const std::string& v) {
    const double x = parse_double(origin, line, key, v);
    if (x != std::floor(x)) fail(origin, line, "key '" + key + "' must be an integer");
    return static_cast<int>(x);
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

SimConfig parse_config_text(const std::string& text, const std::string& origin) {
    SimConfig cfg;
    std::istringstream in(text);
    std::string raw, section;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(origin, lineno, "malformed section header: " + line);
            section = trim(line.substr(1, line.size() - 2));
            if (section != "geometry" && section != "thermo" && section != "sap" &&
                section != "regularization" && section != "numerics" && section != "output")
                fail(origin, lineno, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(origin, lineno, "expected 'key = value': " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (section.empty()) fail(origin, lineno, "key outside any section: " + key);

        auto num = [&] { return parse_double(origin, lineno, key, val); };
        bool known = true;
        if (section == "geometry") {
            if (key == "delta") cfg.geom.delta = num();
            else if (key == "gamma") cfg.geom.gamma = num();
            else if (key == "R_f") cfg.geom.R_f = num();
            else if (key == "W") cfg.geom.W = num();
            else if (key == "L_f") cfg.geom.L_f = num();
            else if (key == "L_v") cfg.geom.L_v = num();
            else if (key == "N_f") cfg.geom.N_f = num();
            else if (key == "R_tree") cfg.geom.R_tree = num();
            else known = false;
        } else if (section == "thermo") {
            if (key == "rho_w") cfg.thermo.rho_w = num();
            else if (key == "rho_i") cfg.thermo.rho_i = num();
            else if (key == "k_w") cfg.thermo.k_w = num();
            else if (key == "k_i") cfg.thermo.k_i = num();
            else if (key == "c_w") cfg.thermo.c_w = num();
            else if (key == "c_i") cfg.thermo.c_i = num();
            else if (key == "H_i") cfg.thermo.H_i = num();
            else if (key == "H_w") cfg.thermo.H_w = num();
            else if (key == "T_c") cfg.thermo.T_c = num();
            else if (key == "T_a") cfg.thermo.T_a = num();
            else if (key == "alpha") cfg.thermo.alpha = num();
            else known = false;
        } else if (section == "sap") {
            if (key == "sigma") cfg.sap.sigma = num();
            else if (key == "M_g") cfg.sap.M_g = num();
            else if (key == "R_gas") cfg.sap.R_gas = num();
            else if (key == "C_s") cfg.sap.C_s = num();
            else if (key == "Lp") cfg.sap.Lp = num();
            else if (key == "A_wall") cfg.sap.A_wall = num();
            else if (key == "p_gf0") cfg.sap.p_gf0 = num();
            else if (key == "p_gv0") cfg.sap.p_gv0 = num();
            else if (key == "rho_gv0") cfg.sap.rho_gv0 = num();
            else if (key == "s_gi0") cfg.sap.s_gi0 = num();
            else if (key == "r0") cfg.sap.r0 = num();
            else known = false;
        } else if (section == "regularization") {
            cfg.reg_customized = true;
            if (key == "H_i_minus") cfg.reg.H_i_minus = num();
            else if (key == "H_i_plus") cfg.reg.H_i_plus = num();
            else if (key == "H_w_minus") cfg.reg.H_w_minus = num();
            else if (key == "H_w_plus") cfg.reg.H_w_plus = num();
            else if (key == "c_inf") cfg.reg.c_inf = num();
            else known = false;
        } else if (section == "numerics") {
            if (key == "m_macro") cfg.M_macro = parse_int(origin, lineno, key, val);
            else if (key == "m_micro") cfg.M_micro = parse_int(origin, lineno, key, val);
            else if (key == "t_end") cfg.t_end = num();
            else if (key == "abs_tol") cfg.abs_tol = num();
            else if (key == "rel_tol") cfg.rel_tol = num();
            else if (key == "max_dt") cfg.max_dt = num();
            else if (key == "initial_dt") cfg.initial_dt = num();
            else if (key == "T_init") cfg.T_init = num();
            else if (key == "initial_H1") cfg.initial_H1 = num();
            else if (key == "onset_eps") cfg.onset_eps = num();
            else if (key == "melt_floor") cfg.melt_floor = num();
            else if (key == "post_melt_D") cfg.post_melt_D = num();
            else if (key == "probe_x") cfg.probe_x = num();
            else if (key == "mesh_h") cfg.mesh_h = num();
            else if (key == "tensor_file") cfg.tensor_file = val;
            else if (key == "threads") cfg.threads = parse_int(origin, lineno, key, val);
            else if (key == "face_averaging") {
                if (val == "harmonic") cfg.face_avg = FaceAveraging::Harmonic;
                else if (val == "arithmetic") cfg.face_avg = FaceAveraging::Arithmetic;
                else fail(origin, lineno, "face_averaging must be 'harmonic' or 'arithmetic'");
            } else known = false;
        } else if (section == "output") {
            if (key == "output_times") {
                cfg.output_times.clear();
                std::istringstream items(val);
                std::string item;
                while (std::getline(items, item, ',')) {
                    item = trim(item);
                    if (!item.empty())
                        cfg.output_times.push_back(parse_double(origin, lineno, key, item));
                }
            } else known = false;
        }
        if (!known) fail(origin, lineno, "unknown key '" + key + "' in section [" + section + "]");
        logging::debug("config override: [" + section + "] " + key + " = " + val);
    }

    try {
        cfg.finalize();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return cfg;
}

SimConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str(), path);
}

std::string serialize_config(const SimConfig& cfg) {
    std::ostringstream os;
    auto g = [](double v) { return format_g17(v); };
    os << "[geometry]\n";
    os << "delta = " << g(cfg.geom.delta) << "\n";
    os << "gamma = " << g(cfg.geom.gamma) << "\n";
    os << "R_f = " << g(cfg.geom.R_f) << "\n";
    os << "W = " << g(cfg.geom.W) << "\n";
    os << "L_f = " << g(cfg.geom.L_f) << "\n";
    os << "L_v = " << g(cfg.geom.L_v) << "\n";
    os << "N_f = " << g(cfg.geom.N_f) << "\n";
    os << "R_tree = " << g(cfg.geom.R_tree) << "\n";
    os << "[thermo]\n";
    os << "rho_w = " << g(cfg.thermo.rho_w) << "\n";
    os << "rho_i = " << g(cfg.thermo.rho_i) << "\n";
    os << "k_w = " << g(cfg.thermo.k_w) << "\n";
    os << "k_i = " << g(cfg.thermo.k_i) << "\n";
    os << "c_w = " << g(cfg.thermo.c_w) << "\n";
    os << "c_i = " << g(cfg.thermo.c_i) << "\n";
    os << "H_i = " << g(cfg.thermo.H_i) << "\n";
    os << "H_w = " << g(cfg.thermo.H_w) << "\n";
    os << "T_c = " << g(cfg.thermo.T_c) << "\n";
    os << "T_a = " << g(cfg.thermo.T_a) << "\n";
    os << "alpha = " << g(cfg.thermo.alpha) << "\n";
    os << "[sap]\n";
    os << "sigma = " << g(cfg.sap.sigma) << "\n";
    os << "M_g = " << g(cfg.sap.M_g) << "\n";
    os << "R_gas = " << g(cfg.sap.R_gas) << "\n";
    os << "C_s = " << g(cfg.sap.C_s) << "\n";
    os << "Lp = " << g(cfg.sap.Lp) << "\n";
    os << "A_wall = " << g(cfg.sap.A_wall) << "\n";
    os << "p_gf0 = " << g(cfg.sap.p_gf0) << "\n";
    os << "p_gv0 = " << g(cfg.sap.p_gv0) << "\n";
    os << "rho_gv0 = " << g(cfg.sap.rho_gv0) << "\n";
    os << "s_gi0 = " << g(cfg.sap.s_gi0) << "\n";
    os << "r0 = " << g(cfg.sap.r0) << "\n";
    os << "[regularization]\n";
    os << "H_i_minus = " << g(cfg.reg.H_i_minus) << "\n";
    os << "H_i_plus = " << g(cfg.reg.H_i_plus) << "\n";
    os << "H_w_minus = " << g(cfg.reg.H_w_minus) << "\n";
    os << "H_w_plus = " << g(cfg.reg.H_w_plus) << "\n";
    os << "c_inf = " << g(cfg.reg.c_inf) << "\n";
    os << "[numerics]\n";
    os << "m_macro = " << cfg.M_macro << "\n";
    os << "m_micro = " << cfg.M_micro << "\n";
    os << "t_end = " << g(cfg.t_end) << "\n";
    os << "abs_tol = " << g(cfg.abs_tol) << "\n";
    os << "rel_tol = " << g(cfg.rel_tol) << "\n";
    os << "max_dt = " << g(cfg.max_dt) << "\n";
    os << "initial_dt = " << g(cfg.initial_dt) << "\n";
    os << "T_init = " << g(cfg.T_init) << "\n";
    os << "initial_H1 = " << g(cfg.initial_H1) << "\n";
    os << "onset_eps = " << g(cfg.onset_eps) << "\n";
    os << "melt_floor = " << g(cfg.melt_floor) << "\n";
    os << "post_melt_D = " << g(cfg.post_melt_D) << "\n";
    os << "probe_x = " << g(cfg.probe_x) << "\n";
    os << "mesh_h = " << g(cfg.mesh_h) << "\n";
    if (!cfg.tensor_file.empty()) os << "tensor_file = " << cfg.tensor_file << "\n";
    os << "threads = " << cfg.threads << "\n";
    os << "face_averaging = "
       << (cfg.face_avg == FaceAveraging::Harmonic ? "harmonic" : "arithmetic") << "\n";
    os << "[output]\n";
    os << "output_times = ";
    for (size_t i = 0; i < cfg.output_times.size(); ++i)
        os << (i ? "," : "") << g(cfg.output_times[i]);
    os << "\n";
    return os.str();
}

} // namespace sapsim
