#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sapsim/thermo.hpp"

using namespace sapsim;

namespace {

ThermoProps props() { return ThermoProps{}; }

OmegaRegularization reg(const ThermoProps& p) { return OmegaRegularization::make_default(p); }

// xorshift generator for reproducible sampling
struct Rng {
    uint64_t s = 0x9e3779b97f4a7c15ull;
    double uniform(double lo, double hi) {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        return lo + (hi - lo) * (double(s >> 11) / 9007199254740992.0);
    }
};

} // namespace

TEST_CASE("omega: affine branch values") {
    const auto p = props();
    const auto r = reg(p);
    // ice branch: H / c_i with c_i = 2100
    CHECK(temp_from_enthalpy(2.1e5, p, r) == doctest::Approx(100.0).epsilon(1e-14));
    // water branch anchored at H_w_plus
    const double H = r.H_w_plus + 10.0 * p.c_w;
    CHECK(temp_from_enthalpy(H, p, r) == doctest::Approx(p.T_c + 10.0).epsilon(1e-14));
}

TEST_CASE("omega: upper affine branch with custom breakpoints") {
    auto p = props();
    p.H_w = 9.06e5;   // keep H_w strictly inside the blend interval
    OmegaRegularization r;
    r.H_i_minus = p.H_i - 2e4;
    r.H_i_plus = p.H_i + 2e4;
    r.H_w_minus = 8.97e5;
    r.H_w_plus = 9.07e5;
    r.c_inf = 1e7;
    r.rebuild(p);
    // T = T_c + (H - H_w_plus)/c_w = 273.15 + 42000/4180
    CHECK(temp_from_enthalpy(9.49e5, p, r) ==
          doctest::Approx(273.15 + 42000.0 / 4180.0).epsilon(1e-12));
    CHECK(temp_from_enthalpy(9.49e5, p, r) == doctest::Approx(283.198).epsilon(1e-4));
}

TEST_CASE("omega: plateau midpoint sits just below the freezing point") {
    const auto p = props();
    const auto r = reg(p);
    const double mid = 0.5 * (r.H_i_plus + r.H_w_minus);
    // The plateau is anchored (H_w_plus - H_w_minus)/(2 c_w) below T_c; a
    // plateau centered exactly at T_c admits no monotone C^1 connection to
    // the water branch through (H_w_plus, T_c).
    const double expected = p.T_c - r.plateau_drop - (r.H_w_minus - mid) / r.c_inf;
    CHECK(temp_from_enthalpy(mid, p, r) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(std::abs(temp_from_enthalpy(mid, p, r) - p.T_c) < 3.0);
}

TEST_CASE("omega: strictly increasing and C1 at breakpoints") {
    const auto p = props();
    const auto r = reg(p);
    Rng rng;
    double prev_H = -1e5, prev_T = temp_from_enthalpy(-1e5, p, r);
    for (int i = 1; i <= 4000; ++i) {
        const double H = -1e5 + i * (2.2e6 + 1e5) / 4000.0;
        const double T = temp_from_enthalpy(H, p, r);
        CHECK(T > prev_T);
        CHECK(d_omega(0.5 * (prev_H + H), p, r) > 0.0);
        prev_H = H;
        prev_T = T;
    }
    const double bps[] = {r.H_i_minus, r.H_i_plus, r.H_w_minus, r.H_w_plus};
    for (double b : bps) {
        const double dl = d_omega(std::nextafter(b, -1e30), p, r);
        const double dr_ = d_omega(b, p, r);
        CHECK(std::abs(dl - dr_) <= 1e-10 * std::abs(dr_));
        // value continuity as well
        const double Tl = temp_from_enthalpy(std::nextafter(b, -1e30), p, r);
        const double Tr = temp_from_enthalpy(b, p, r);
        CHECK(std::abs(Tl - Tr) <= 1e-10 * std::abs(Tr));
    }
}

TEST_CASE("omega inverse: branch values and roundtrip") {
    const auto p = props();
    const auto r = reg(p);
    CHECK(enthalpy_from_temp(p.T_c + 10.0, p, r) ==
          doctest::Approx(r.H_w_plus + 10.0 * p.c_w).epsilon(1e-14));
    CHECK(enthalpy_from_temp(100.0, p, r) == doctest::Approx(2.1e5).epsilon(1e-14));

    Rng rng;
    for (int i = 0; i < 1000; ++i) {
        const double H = rng.uniform(0.0, 2.0 * p.H_w);
        const double back = enthalpy_from_temp(temp_from_enthalpy(H, p, r), p, r);
        CHECK(back == doctest::Approx(H).epsilon(1e-10));
    }
}

TEST_CASE("d_omega: branch slopes and finite-difference oracle") {
    const auto p = props();
    const auto r = reg(p);
    CHECK(d_omega(1.0e5, p, r) == doctest::Approx(1.0 / 2100.0).epsilon(1e-14));
    const double mid = 0.5 * (r.H_i_plus + r.H_w_minus);
    CHECK(d_omega(mid, p, r) == doctest::Approx(1.0 / r.c_inf).epsilon(1e-14));

    // Central differences away from breakpoints.  The plateau slope is so
    // small that delta = 1e-2 J/kg sits below double-precision cancellation
    // noise there, so that sample uses a wider (still tiny) stencil.
    const double samples[] = {1.0e5, 4.0e5, r.H_i_minus + 5e3, r.H_w_minus + 5e3, 1.2e6};
    for (double H : samples) {
        const double delta = 1e-2;
        const double fd = (temp_from_enthalpy(H + delta, p, r) -
                           temp_from_enthalpy(H - delta, p, r)) / (2.0 * delta);
        CHECK(std::abs(d_omega(H, p, r) - fd) <= 1e-6 * std::abs(d_omega(H, p, r)));
    }
    {
        const double delta = 1e2;
        const double fd = (temp_from_enthalpy(mid + delta, p, r) -
                           temp_from_enthalpy(mid - delta, p, r)) / (2.0 * delta);
        CHECK(std::abs(d_omega(mid, p, r) - fd) <= 1e-6 * std::abs(d_omega(mid, p, r)));
    }
}

TEST_CASE("diffusion coefficient: branches, continuity and bounds") {
    const auto p = props();
    CHECK(diffusion_coeff(5.0e5, p) == doctest::Approx(2.22 / 917.0).epsilon(1e-14));
    CHECK(diffusion_coeff(1.0e6, p) == doctest::Approx(0.556 / 1000.0).epsilon(1e-14));
    const double mid = 0.5 * (p.H_i + p.H_w);
    CHECK(diffusion_coeff(mid, p) ==
          doctest::Approx(0.5 * (2.22 / 917.0 + 0.556 / 1000.0)).epsilon(1e-14));
    CHECK(diffusion_coeff(mid, p) == doctest::Approx(1.4885e-3).epsilon(1e-3));

    for (double d : {1.0, 0.1, 0.01}) {
        CHECK(std::abs(diffusion_coeff(p.H_i + d, p) - diffusion_coeff(p.H_i, p)) < 1e-8);
        CHECK(std::abs(diffusion_coeff(p.H_w - d, p) - diffusion_coeff(p.H_w, p)) < 1e-8);
    }
}

TEST_CASE("product D * omega' is bounded above and below") {
    const auto p = props();
    const auto r = reg(p);
    const double lambda = std::min(p.k_w / p.rho_w, p.k_i / p.rho_i) / r.c_inf * 0.5;
    const double Lambda = std::max(p.k_w / p.rho_w, p.k_i / p.rho_i) *
                          (1.0 / std::min(p.c_i, p.c_w)) * 10.0;
    for (int i = 0; i <= 20000; ++i) {
        const double H = -2e5 + i * (2.5e6 / 20000.0);
        const double a = diffusion_coeff(H, p) * d_omega(H, p, r);
        CHECK(a >= lambda);
        CHECK(a <= Lambda);
    }
}

TEST_CASE("non-finite inputs are rejected") {
    const auto p = props();
    const auto r = reg(p);
    CHECK_THROWS_AS(temp_from_enthalpy(NAN, p, r), std::invalid_argument);
    CHECK_THROWS_AS(enthalpy_from_temp(INFINITY, p, r), std::invalid_argument);
    CHECK_THROWS_AS(diffusion_coeff(NAN, p), std::invalid_argument);
}

TEST_CASE("invalid regularizations are rejected") {
    const auto p = props();
    OmegaRegularization r;
    r.H_i_minus = p.H_i + 1e4;   // misordered
    r.H_i_plus = p.H_i - 1e4;
    r.H_w_minus = p.H_w - 1e4;
    r.H_w_plus = p.H_w + 1e4;
    CHECK_THROWS_AS(r.rebuild(p), std::invalid_argument);

    OmegaRegularization r2;
    r2.H_i_minus = p.H_i - 1e2;   // ice blend too narrow to stay monotone
    r2.H_i_plus = p.H_i + 1e2;
    r2.H_w_minus = p.H_w - 1e4;
    r2.H_w_plus = p.H_w + 1e4;
    CHECK_THROWS_AS(r2.rebuild(p), std::invalid_argument);
}
