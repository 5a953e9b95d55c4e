#include "sapsim/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "sapsim/config.hpp"

namespace sapsim {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::string cell(double v) { return std::isnan(v) ? std::string() : format_g17(v); }

const char* regime_text(CellRegime r) {
    return r == CellRegime::Melted ? "melted" : "ice_present";
}

} // namespace

void emit_snapshots(const SimResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << "t,x,T1,H1,s_iw,s_gi_or_gw,r,U,p_wf,p_wv,regime\n";
    for (const auto& snap : result.snapshots) {
        for (size_t i = 0; i < snap.x.size(); ++i) {
            const NodeSummary& m = snap.micro[i];
            out << format_g17(snap.t) << ',' << format_g17(snap.x[i]) << ','
                << format_g17(snap.T1[i]) << ',' << format_g17(snap.H1[i]) << ','
                << cell(m.s_iw) << ',' << cell(m.s_gi_or_gw) << ',' << cell(m.r) << ','
                << cell(m.U) << ',' << cell(m.p_wf) << ',' << cell(m.p_wv) << ','
                << regime_text(m.regime) << '\n';
        }
    }
    if (!out) throw std::runtime_error("write failure: " + path);
}

void write_tensor_file(const EffectiveTensor& tensor, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open tensor file: " + path);
    out << "pi11 = " << format_g17(tensor.pi[0][0]) << '\n'
        << "pi12 = " << format_g17(tensor.pi[0][1]) << '\n'
        << "pi21 = " << format_g17(tensor.pi[1][0]) << '\n'
        << "pi22 = " << format_g17(tensor.pi[1][1]) << '\n'
        << "y1_area = " << format_g17(tensor.y1_area) << '\n'
        << "delta = " << format_g17(tensor.delta) << '\n'
        << "gamma = " << format_g17(tensor.gamma) << '\n'
        << "mesh_h = " << format_g17(tensor.mesh_h) << '\n';
    if (!out) throw std::runtime_error("write failure: " + path);
}

EffectiveTensor read_tensor_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open tensor file: " + path);
    std::map<std::string, double> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        key.erase(0, key.find_first_not_of(" \t"));
        key.erase(key.find_last_not_of(" \t") + 1);
        kv[key] = std::stod(line.substr(eq + 1));
    }
    const char* required[] = {"pi11", "pi12", "pi21", "pi22", "y1_area", "delta", "gamma", "mesh_h"};
    for (const char* k : required)
        if (!kv.count(k)) throw ConfigError(std::string("tensor file missing key: ") + k);
    EffectiveTensor t;
    t.pi[0][0] = kv["pi11"];
    t.pi[0][1] = kv["pi12"];
    t.pi[1][0] = kv["pi21"];
    t.pi[1][1] = kv["pi22"];
    t.y1_area = kv["y1_area"];
    t.delta = kv["delta"];
    t.gamma = kv["gamma"];
    t.mesh_h = kv["mesh_h"];
    return t;
}

} // namespace sapsim
