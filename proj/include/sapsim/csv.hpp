#pragma once

#include <string>

#include "sapsim/corrector.hpp"
#include "sapsim/coupler.hpp"

namespace sapsim {

// Serialize a double with 17 significant digits (round-trip exact).
std::string format_g17(double v);

// One row per (snapshot time, macro node), time-major then node index.
// Header: t,x,T1,H1,s_iw,s_gi_or_gw,r,U,p_wf,p_wv,regime
// NaN-valued summary fields are written as empty cells.
void emit_snapshots(const SimResult& result, const std::string& path);

void write_tensor_file(const EffectiveTensor& tensor, const std::string& path);
EffectiveTensor read_tensor_file(const std::string& path);

} // namespace sapsim
