#include "sapsim/macro.hpp"

#include <cmath>
#include <stdexcept>

namespace sapsim {

double MacroGrid::shell_volume(int i) const {
    const double h = dx();
    const double lo = (i == 0) ? 0.0 : (i - 0.5) * h;
    const double hi = (i == M - 1) ? R_tree : (i + 0.5) * h;
    return M_PI * (hi * hi - lo * lo);
}

RobinClosure robin_boundary(double T_last, double D_boundary, double dx,
                            const ThermoProps& props) {
    RobinClosure rc;
    const double c = D_boundary / dx;
    rc.T_boundary = (c * T_last + props.alpha * props.T_a) / (c + props.alpha);
    rc.flux = props.alpha * (rc.T_boundary - props.T_a);
    return rc;
}

MacroRhsResult macro_rhs(const MacroGrid& grid, const std::vector<double>& H1,
                         const std::vector<CellRegime>& regimes,
                         const std::vector<double>& micro_flux, double pi0,
                         double Y1_area, double post_melt_D,
                         const ThermoProps& props, const OmegaRegularization& reg,
                         FaceAveraging avg, std::vector<double>& dH1dt) {
    const int M = grid.M;
    if (static_cast<int>(H1.size()) != M || static_cast<int>(regimes.size()) != M ||
        static_cast<int>(micro_flux.size()) != M)
        throw std::invalid_argument("macro: array sizes must match grid");
    dH1dt.assign(M, 0.0);
    const double h = grid.dx();

    std::vector<double> T(M), kappa(M);
    for (int i = 0; i < M; ++i) {
        T[i] = temp_from_enthalpy(H1[i], props, reg);
        kappa[i] = (regimes[i] == CellRegime::Melted)
                       ? Y1_area * post_melt_D
                       : pi0 * diffusion_coeff(H1[i], props);
    }

    auto face_kappa = [&](int i) {
        const double a = kappa[i], b = kappa[i + 1];
        if (avg == FaceAveraging::Arithmetic) return 0.5 * (a + b);
        return (a + b > 0) ? 2.0 * a * b / (a + b) : 0.0;
    };

    // Interior face fluxes; F[i] lives at x_{i+1/2}.
    std::vector<double> F(M, 0.0);
    for (int i = 0; i + 1 < M; ++i) {
        const double xf = (i + 0.5) * h;
        F[i] = 2.0 * M_PI * xf * face_kappa(i) * (T[i + 1] - T[i]) / h;
    }
    const double D_bnd = (regimes[M - 1] == CellRegime::Melted)
                             ? post_melt_D
                             : diffusion_coeff(H1[M - 1], props);
    const RobinClosure rc = robin_boundary(T[M - 1], D_bnd, h, props);
    F[M - 1] = 2.0 * M_PI * grid.R_tree * kappa[M - 1] * (rc.T_boundary - T[M - 1]) / h;

    MacroRhsResult out;
    out.boundary_inflow = F[M - 1];
    for (int i = 0; i < M; ++i) {
        const double V = grid.shell_volume(i);
        const double Fin = (i == 0) ? 0.0 : F[i - 1];
        dH1dt[i] = (F[i] - Fin - micro_flux[i] * V) / (Y1_area * V);
        out.sink_total += micro_flux[i] * V;
    }
    return out;
}

MacroRhsResult post_melt_rhs(const MacroGrid& grid, const std::vector<double>& H1,
                             double Y1_area, double post_melt_D,
                             const ThermoProps& props, const OmegaRegularization& reg,
                             std::vector<double>& dH1dt) {
    const std::vector<CellRegime> regimes(grid.M, CellRegime::Melted);
    const std::vector<double> zero_flux(grid.M, 0.0);
    return macro_rhs(grid, H1, regimes, zero_flux, 0.0, Y1_area, post_melt_D, props, reg,
                     FaceAveraging::Harmonic, dH1dt);
}

} // namespace sapsim
