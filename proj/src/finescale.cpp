#include "sapsim/finescale.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sapsim {

void FineScaleProblem::validate() const {
    if (inv_eps < 1) throw std::invalid_argument("finescale: 1/eps must be a positive integer");
    if (nodes_per_cell < 8)
        throw std::invalid_argument("finescale: cells must be resolved by >= 8 nodes per side");
    if (!(hole_ratio >= 0 && hole_ratio < 0.5))
        throw std::invalid_argument("finescale: hole_ratio must be in [0, 1/2)");
    if (!(coeff > 0)) throw std::invalid_argument("finescale: coefficient must be positive");
    if (!(t_end > 0) || n_steps < 1) throw std::invalid_argument("finescale: bad time setup");
    for (double ts : snapshot_times)
        if (ts < 0 || ts > t_end)
            throw std::invalid_argument("finescale: snapshot times must lie in [0, t_end]");
}

namespace {

// Node mobility: eps^2 inside the scaled hole of the node's cell, 1 outside.
double node_kappa(double x, double y, int inv_eps, double rho) {
    if (rho <= 0) return 1.0;
    const double eps = 1.0 / inv_eps;
    int cx = std::min(static_cast<int>(x * inv_eps), inv_eps - 1);
    int cy = std::min(static_cast<int>(y * inv_eps), inv_eps - 1);
    const double dx = x - (cx + 0.5) * eps;
    const double dy = y - (cy + 0.5) * eps;
    return (std::hypot(dx, dy) < rho * eps) ? eps * eps : 1.0;
}

// CG for (I + dt A) u = b on the interior vertices of an n x n grid with
// Dirichlet boundary (boundary values folded into b by the caller's operator).
struct ImplicitHeat {
    int n = 0;
    double h = 0, dt = 0, coeff = 0;
    const std::vector<double>* kappa = nullptr;   // per vertex

    double face(double a, double b) const { return (a + b > 0) ? 2 * a * b / (a + b) : 0.0; }

    // y = (I + dt A) x over interior; x,y indexed over all vertices, boundary
    // entries of x hold the Dirichlet values and are passed through.
    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        const double s = dt * coeff / (h * h);
        for (int j = 1; j < n - 1; ++j)
            for (int i = 1; i < n - 1; ++i) {
                const int v = j * n + i;
                const double kv = (*kappa)[v];
                const double ke = face(kv, (*kappa)[v + 1]);
                const double kw = face(kv, (*kappa)[v - 1]);
                const double kn = face(kv, (*kappa)[v + n]);
                const double ks = face(kv, (*kappa)[v - n]);
                y[v] = x[v] + s * ((ke + kw + kn + ks) * x[v] - ke * x[v + 1] - kw * x[v - 1] -
                                   kn * x[v + n] - ks * x[v - n]);
            }
    }
};

void cg_interior(const ImplicitHeat& op, const std::vector<double>& rhs,
                 std::vector<double>& u, double tol) {
    const int n = op.n;
    std::vector<double> r(n * n, 0.0), p(n * n, 0.0), ap(n * n, 0.0);
    op.apply(u, ap);
    double rr = 0, bb = 0;
    for (int j = 1; j < n - 1; ++j)
        for (int i = 1; i < n - 1; ++i) {
            const int v = j * n + i;
            r[v] = rhs[v] - ap[v];
            p[v] = r[v];
            rr += r[v] * r[v];
            bb += rhs[v] * rhs[v];
        }
    if (bb == 0) bb = 1;
    const double stop = tol * tol * bb;
    for (int it = 0; it < 20 * n * n && rr > stop; ++it) {
        op.apply(p, ap);
        double pap = 0;
        for (int j = 1; j < n - 1; ++j)
            for (int i = 1; i < n - 1; ++i) {
                const int v = j * n + i;
                pap += p[v] * ap[v];
            }
        const double alpha = rr / pap;
        double rr_new = 0;
        for (int j = 1; j < n - 1; ++j)
            for (int i = 1; i < n - 1; ++i) {
                const int v = j * n + i;
                u[v] += alpha * p[v];
                r[v] -= alpha * ap[v];
                rr_new += r[v] * r[v];
            }
        const double beta = rr_new / rr;
        rr = rr_new;
        for (int j = 1; j < n - 1; ++j)
            for (int i = 1; i < n - 1; ++i) {
                const int v = j * n + i;
                p[v] = r[v] + beta * p[v];
            }
    }
    if (rr > stop) throw std::runtime_error("finescale: CG did not converge");
}

} // namespace

FineTrajectory solve_fine(const FineScaleProblem& prob) {
    prob.validate();
    const int n = prob.inv_eps * prob.nodes_per_cell + 1;
    const double h = 1.0 / (n - 1);

    std::vector<double> kappa(n * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            kappa[j * n + i] = node_kappa(i * h, j * h, prob.inv_eps, prob.hole_ratio);

    std::vector<double> theta(n * n, prob.theta_init);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (i == 0 || i == n - 1 || j == 0 || j == n - 1) theta[j * n + i] = prob.theta_bc;

    FineTrajectory out;
    out.prob = prob;

    std::vector<double> want = prob.snapshot_times;
    std::sort(want.begin(), want.end());
    size_t wi = 0;
    auto maybe_snapshot = [&](double t) {
        while (wi < want.size() && t >= want[wi] - 1e-12 * prob.t_end) {
            out.times.push_back(want[wi]);
            out.fields.push_back({n, theta});
            ++wi;
        }
    };
    maybe_snapshot(0.0);

    ImplicitHeat op{n, h, prob.t_end / prob.n_steps, prob.coeff, &kappa};
    std::vector<double> rhs = theta;
    for (int step = 1; step <= prob.n_steps; ++step) {
        rhs = theta;
        // Fold Dirichlet boundary into the operator by keeping boundary
        // entries fixed; apply() only touches interior rows.
        cg_interior(op, rhs, theta, 1e-12);
        maybe_snapshot(step * op.dt);
    }
    return out;
}

LimitSolution solve_homogenized_linear(const FineScaleProblem& prob, double pi_hat,
                                       int macro_n, int micro_nodes) {
    prob.validate();
    const double rho = prob.hole_ratio;
    const double y1 = 1.0 - M_PI * rho * rho;
    const int n = macro_n + 1;
    const double h = 1.0 / macro_n;
    const double dr = rho / micro_nodes;
    const int mr = micro_nodes;
    const double dt = prob.t_end / prob.n_steps;
    const double D = prob.coeff;

    std::vector<double> th1(n * n, prob.theta_init);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (i == 0 || i == n - 1 || j == 0 || j == n - 1) th1[j * n + i] = prob.theta_bc;
    std::vector<double> th2(static_cast<size_t>(n) * n * (mr + 1), prob.theta_init);

    LimitSolution out;
    out.macro_n = macro_n;
    out.micro_nodes = micro_nodes;
    out.hole_ratio = rho;
    out.coeff = D;
    out.theta_bc = prob.theta_bc;

    std::vector<double> want = prob.snapshot_times;
    std::sort(want.begin(), want.end());
    size_t wi = 0;
    auto maybe_snapshot = [&](double t) {
        while (wi < want.size() && t >= want[wi] - 1e-12 * prob.t_end) {
            out.snaps.push_back({want[wi], th1, th2});
            ++wi;
        }
    };
    maybe_snapshot(0.0);

    // Tridiagonal backward-Euler factors for the radial micro problem
    // (identical for every macro vertex).
    std::vector<double> shell(mr + 1), q(n * n, 0.0);
    for (int k = 0; k <= mr; ++k) {
        const double lo = (k == 0) ? 0.0 : (k - 0.5) * dr;
        const double hi = (k == mr) ? rho : (k + 0.5) * dr;
        shell[k] = M_PI * (hi * hi - lo * lo);
    }

    std::vector<double> a(mr), b(mr), c(mr), rhs(mr), sol(mr);
    auto micro_step = [&](double* prof, double trace) {
        prof[mr] = trace;
        // Unknowns k = 0..mr-1; k = mr pinned to the macro trace.
        for (int k = 0; k < mr; ++k) {
            const double flo = (k == 0) ? 0.0 : 2 * M_PI * ((k - 0.5) * dr) * D / dr;
            const double fhi = 2 * M_PI * ((k + 0.5) * dr) * D / dr;
            a[k] = -dt * flo / shell[k];
            c[k] = -dt * fhi / shell[k];
            b[k] = 1.0 + dt * (flo + fhi) / shell[k];
            rhs[k] = prof[k];
        }
        rhs[mr - 1] -= c[mr - 1] * trace;
        c[mr - 1] = 0;
        // Thomas algorithm.
        for (int k = 1; k < mr; ++k) {
            const double w = a[k] / b[k - 1];
            b[k] -= w * c[k - 1];
            rhs[k] -= w * rhs[k - 1];
        }
        sol[mr - 1] = rhs[mr - 1] / b[mr - 1];
        for (int k = mr - 2; k >= 0; --k) sol[k] = (rhs[k] - c[k] * sol[k + 1]) / b[k];
        for (int k = 0; k < mr; ++k) prof[k] = sol[k];
    };

    ImplicitHeat op;   // reused for the macro CG with uniform kappa
    std::vector<double> kap1(n * n, 1.0);
    op.n = n;
    op.h = h;
    op.coeff = pi_hat * D / y1;
    op.dt = dt;
    op.kappa = &kap1;

    std::vector<double> mac_rhs(n * n);
    for (int step = 1; step <= prob.n_steps; ++step) {
        // Micro fields advance with the macro trace frozen; then the flux.
        for (int v = 0; v < n * n; ++v) {
            double* prof = &th2[static_cast<size_t>(v) * (mr + 1)];
            micro_step(prof, th1[v]);
            const double g = (3 * prof[mr] - 4 * prof[mr - 1] + prof[mr - 2]) / (2 * dr);
            q[v] = 2 * M_PI * rho * D * g;
        }
        // Macro backward Euler with the micro sink frozen.
        mac_rhs = th1;
        for (int j = 1; j < n - 1; ++j)
            for (int i = 1; i < n - 1; ++i) mac_rhs[j * n + i] -= dt * q[j * n + i] / y1;
        cg_interior(op, mac_rhs, th1, 1e-12);
        maybe_snapshot(step * dt);
    }
    return out;
}

namespace {

double bilinear(const std::vector<double>& f, int n, double x, double y) {
    const double h = 1.0 / (n - 1);
    int i = std::min(static_cast<int>(x / h), n - 2);
    int j = std::min(static_cast<int>(y / h), n - 2);
    const double tx = x / h - i, ty = y / h - j;
    return (1 - tx) * (1 - ty) * f[j * n + i] + tx * (1 - ty) * f[j * n + i + 1] +
           (1 - tx) * ty * f[(j + 1) * n + i] + tx * ty * f[(j + 1) * n + i + 1];
}

// Reconstruct the two-scale limit at a physical point: theta1 outside the
// holes, the cell-local radial micro profile inside.
double reconstruct(const LimitSnapshot& s, const LimitSolution& lim, int inv_eps,
                   double x, double y) {
    const double eps = 1.0 / inv_eps;
    const int cx = std::min(static_cast<int>(x * inv_eps), inv_eps - 1);
    const int cy = std::min(static_cast<int>(y * inv_eps), inv_eps - 1);
    const double rloc = std::hypot(x - (cx + 0.5) * eps, y - (cy + 0.5) * eps) / eps;
    const int n = lim.macro_n + 1;
    if (rloc >= lim.hole_ratio) return bilinear(s.theta1, n, x, y);

    // Interpolate the micro profile radially at the 4 surrounding macro
    // vertices of the cell center, then bilinearly in space.
    const int mr = lim.micro_nodes;
    const double dr = lim.hole_ratio / mr;
    const double rr = std::min(rloc / dr, static_cast<double>(mr) - 1e-12);
    const int k = static_cast<int>(rr);
    const double tr = rr - k;
    const double h = 1.0 / lim.macro_n;
    const double xc = (cx + 0.5) * eps, yc = (cy + 0.5) * eps;
    int i = std::min(static_cast<int>(xc / h), n - 2);
    int j = std::min(static_cast<int>(yc / h), n - 2);
    const double tx = xc / h - i, ty = yc / h - j;
    auto radial = [&](int vi, int vj) {
        const double* prof = &s.theta2[(static_cast<size_t>(vj) * n + vi) * (mr + 1)];
        return (1 - tr) * prof[k] + tr * prof[k + 1];
    };
    return (1 - tx) * (1 - ty) * radial(i, j) + tx * (1 - ty) * radial(i + 1, j) +
           (1 - tx) * ty * radial(i, j + 1) + tx * ty * radial(i + 1, j + 1);
}

} // namespace

std::vector<ErrorRow> compare_to_limit(const FineTrajectory& fine, const LimitSolution& limit) {
    if (fine.times.size() != limit.snaps.size())
        throw std::invalid_argument("compare: snapshot grids do not match");
    std::vector<ErrorRow> rows;
    const int n = fine.fields.empty() ? 0 : fine.fields.front().n;
    const double h = 1.0 / (n - 1);
    for (size_t s = 0; s < fine.times.size(); ++s) {
        if (std::abs(fine.times[s] - limit.snaps[s].t) > 1e-9)
            throw std::invalid_argument("compare: snapshot times do not match");
        double acc = 0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const double wx = (i == 0 || i == n - 1) ? 0.5 : 1.0;
                const double wy = (j == 0 || j == n - 1) ? 0.5 : 1.0;
                const double d = fine.fields[s].theta[j * n + i] -
                                 reconstruct(limit.snaps[s], limit, fine.prob.inv_eps,
                                             i * h, j * h);
                acc += wx * wy * d * d * h * h;
            }
        rows.push_back({1.0 / fine.prob.inv_eps, fine.times[s], std::sqrt(acc)});
    }
    return rows;
}

std::vector<ErrorRow> convergence_study(const std::vector<int>& inv_eps_ladder,
                                        const FineScaleProblem& base, double pi_hat) {
    std::vector<ErrorRow> all;
    for (int ie : inv_eps_ladder) {
        FineScaleProblem p = base;
        p.inv_eps = ie;
        const FineTrajectory fine = solve_fine(p);
        const LimitSolution limit = solve_homogenized_linear(p, pi_hat);
        for (const auto& row : compare_to_limit(fine, limit)) all.push_back(row);
    }
    return all;
}

} // namespace sapsim
