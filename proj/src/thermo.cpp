#include "sapsim/thermo.hpp"

#include <cmath>
#include <string>

namespace sapsim {

namespace {

void require_finite(double x, const char* what) {
    if (!std::isfinite(x))
        throw std::invalid_argument(std::string("non-finite ") + what);
}

} // namespace

void ThermoProps::validate() const {
    const double fields[] = {rho_w, rho_i, k_w, k_i, c_w, c_i, H_i, H_w, T_c, T_a, alpha};
    for (double f : fields)
        if (!(f > 0.0) || !std::isfinite(f))
            throw std::invalid_argument("thermo: all properties must be finite and positive");
    if (!(H_i < H_w))
        throw std::invalid_argument("thermo: H_i must be < H_w");
}

double HermiteBlend::eval(double h) const {
    const double dh = h1 - h0;
    const double t = (h - h0) / dh;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * v0 + (t3 - 2 * t2 + t) * dh * m0 +
           (-2 * t3 + 3 * t2) * v1 + (t3 - t2) * dh * m1;
}

double HermiteBlend::deriv(double h) const {
    const double dh = h1 - h0;
    const double t = (h - h0) / dh;
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * v0 + (3 * t2 - 4 * t + 1) * dh * m0 +
            (-6 * t2 + 6 * t) * v1 + (3 * t2 - 2 * t) * dh * m1) / dh;
}

bool HermiteBlend::monotone_increasing() const {
    if (!(v1 > v0) || m0 < 0 || m1 < 0) return false;
    // Fritsch-Carlson: derivative of the cubic is a quadratic in t; check its
    // minimum over [0,1] directly.
    const double s = (v1 - v0) / (h1 - h0);
    const double a = m0 / s, b = m1 / s;
    if (a <= 3.0 && b <= 3.0) return true;
    const double phi = a - (2 * a + b - 3) * (2 * a + b - 3) / (3 * (a + b - 2));
    return a + b - 2 <= 0 || phi >= 0;
}

OmegaRegularization OmegaRegularization::make_default(const ThermoProps& props) {
    OmegaRegularization reg;
    reg.H_i_minus = props.H_i - 2.0e4;
    reg.H_i_plus = props.H_i + 2.0e4;
    reg.H_w_minus = props.H_w - 1.0e4;
    reg.H_w_plus = props.H_w + 1.0e4;
    reg.c_inf = 1.0e7;
    reg.rebuild(props);
    return reg;
}

void OmegaRegularization::rebuild(const ThermoProps& props) {
    if (!(H_i_minus < props.H_i && props.H_i < H_i_plus && H_i_plus <= H_w_minus &&
          H_w_minus < props.H_w && props.H_w < H_w_plus))
        throw std::invalid_argument("omega: breakpoints must satisfy "
                                    "H_i- < H_i < H_i+ <= H_w- < H_w < H_w+");
    if (!(c_inf > 0))
        throw std::invalid_argument("omega: c_inf must be positive");

    plateau_drop = (H_w_plus - H_w_minus) / (2.0 * props.c_w);
    plateau_T0 = props.T_c - plateau_drop;

    const double plateau_left = plateau_T0 - (H_w_minus - H_i_plus) / c_inf;

    ice_blend = {H_i_minus, H_i_plus,
                 H_i_minus / props.c_i, plateau_left,
                 1.0 / props.c_i, 1.0 / c_inf};
    water_blend = {H_w_minus, H_w_plus,
                   plateau_T0, props.T_c,
                   1.0 / c_inf, 1.0 / props.c_w};

    validate(props);
}

void OmegaRegularization::validate(const ThermoProps& props) const {
    if (!ice_blend.monotone_increasing())
        throw std::invalid_argument("omega: ice-side blend is not monotone; "
                                    "widen [H_i_minus, H_i_plus]");
    if (!water_blend.monotone_increasing())
        throw std::invalid_argument("omega: water-side blend is not monotone; "
                                    "widen [H_w_minus, H_w_plus]");
    if (!(ice_blend.v0 < ice_blend.v1 && water_blend.v0 < water_blend.v1))
        throw std::invalid_argument("omega: assembled map is not increasing");
    (void)props;
}

double temp_from_enthalpy(double H, const ThermoProps& props,
                          const OmegaRegularization& reg) {
    require_finite(H, "enthalpy");
    if (H < reg.H_i_minus) return H / props.c_i;
    if (H < reg.H_i_plus) return reg.ice_blend.eval(H);
    if (H < reg.H_w_minus) return reg.plateau_T0 - (reg.H_w_minus - H) / reg.c_inf;
    if (H < reg.H_w_plus) return reg.water_blend.eval(H);
    return props.T_c + (H - reg.H_w_plus) / props.c_w;
}

double d_omega(double H, const ThermoProps& props, const OmegaRegularization& reg) {
    require_finite(H, "enthalpy");
    if (H < reg.H_i_minus) return 1.0 / props.c_i;
    if (H < reg.H_i_plus) return reg.ice_blend.deriv(H);
    if (H < reg.H_w_minus) return 1.0 / reg.c_inf;
    if (H < reg.H_w_plus) return reg.water_blend.deriv(H);
    return 1.0 / props.c_w;
}

namespace {

// Invert a monotone Hermite blend by safeguarded Newton.
double invert_blend(const HermiteBlend& b, double T) {
    double lo = b.h0, hi = b.h1;
    double h = lo + (hi - lo) * (T - b.v0) / (b.v1 - b.v0);
    for (int it = 0; it < 100; ++it) {
        const double f = b.eval(h) - T;
        if (f > 0) hi = h; else lo = h;
        const double df = b.deriv(h);
        double step = df > 0 ? f / df : 0.0;
        double h_new = h - step;
        if (!(h_new > lo && h_new < hi)) h_new = 0.5 * (lo + hi);
        if (std::abs(h_new - h) <= 1e-15 * (std::abs(h) + 1.0)) return h_new;
        h = h_new;
    }
    return h;
}

} // namespace

double enthalpy_from_temp(double T, const ThermoProps& props,
                          const OmegaRegularization& reg) {
    require_finite(T, "temperature");
    if (T < reg.ice_blend.v0) return T * props.c_i;
    if (T < reg.ice_blend.v1) return invert_blend(reg.ice_blend, T);
    if (T < reg.plateau_T0) return reg.H_w_minus - (reg.plateau_T0 - T) * reg.c_inf;
    if (T < props.T_c) return invert_blend(reg.water_blend, T);
    return reg.H_w_plus + (T - props.T_c) * props.c_w;
}

double diffusion_coeff(double H, const ThermoProps& props) {
    require_finite(H, "enthalpy");
    const double D_i = props.k_i / props.rho_i;
    const double D_w = props.k_w / props.rho_w;
    if (H < props.H_i) return D_i;
    if (H < props.H_w) return D_i + (H - props.H_i) / (props.H_w - props.H_i) * (D_w - D_i);
    return D_w;
}

} // namespace sapsim
