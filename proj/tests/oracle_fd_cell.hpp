#pragma once

// Independent finite-difference oracle for the periodic cell problem: a
// cell-centered masked grid on the unit square, face conductances open only
// between cells outside the hole, CG solve, and the effective coefficient
// assembled from the exact hole area plus the face-based gradient quadrature.
// Kept deliberately separate from the FEM implementation path it checks.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace fd_oracle {

struct CellProblemFd {
    int N = 0;
    double rho = 0;
    std::vector<char> open;   // cell outside the hole

    int idx(int i, int j) const { return ((j + N) % N) * N + ((i + N) % N); }
};

inline CellProblemFd make_grid(int N, double rho) {
    CellProblemFd g;
    g.N = N;
    g.rho = rho;
    g.open.resize(static_cast<size_t>(N) * N);
    const double h = 1.0 / N;
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            const double x = (i + 0.5) * h - 0.5, y = (j + 0.5) * h - 0.5;
            g.open[j * N + i] = std::hypot(x, y) >= rho ? 1 : 0;
        }
    return g;
}

// Solve div( chi (e_k + grad mu) ) = 0 with periodic boundary conditions.
inline std::vector<double> solve_mu(const CellProblemFd& g, int k) {
    const int N = g.N, n2 = N * N;
    const double h = 1.0 / N;
    auto cond = [&](int a, int b) { return (g.open[a] && g.open[b]) ? 1.0 : 0.0; };

    std::vector<double> b(n2, 0.0);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            const int a = g.idx(i, j);
            const int e = g.idx(i + 1, j), w = g.idx(i - 1, j);
            const int nn = g.idx(i, j + 1), s = g.idx(i, j - 1);
            if (k == 0) b[a] = -h * (cond(a, e) - cond(a, w));
            else b[a] = -h * (cond(a, nn) - cond(a, s));
        }

    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
        for (int j = 0; j < N; ++j)
            for (int i = 0; i < N; ++i) {
                const int a = g.idx(i, j);
                const int nb[4] = {g.idx(i + 1, j), g.idx(i - 1, j), g.idx(i, j + 1),
                                   g.idx(i, j - 1)};
                double acc = 0;
                for (int m = 0; m < 4; ++m) {
                    const double c = cond(a, nb[m]);
                    acc += c * (x[a] - x[nb[m]]);
                }
                y[a] = acc;
            }
    };

    std::vector<double> x(n2, 0.0), r = b, p = b, ap(n2);
    double rr = 0, bb = 0;
    for (int i = 0; i < n2; ++i) {
        rr += r[i] * r[i];
        bb += b[i] * b[i];
    }
    const double stop = 1e-24 * bb;
    for (int it = 0; it < 40 * N * N && rr > stop; ++it) {
        apply(p, ap);
        double pap = 0;
        for (int i = 0; i < n2; ++i) pap += p[i] * ap[i];
        const double alpha = rr / pap;
        double rr_new = 0;
        for (int i = 0; i < n2; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            rr_new += r[i] * r[i];
        }
        const double beta = rr_new / rr;
        rr = rr_new;
        for (int i = 0; i < n2; ++i) p[i] = r[i] + beta * p[i];
    }
    if (rr > stop) throw std::runtime_error("fd oracle: CG stalled");
    return x;
}

// Pi_kk on the unit cell: exact hole area plus the face-based quadrature of
// d mu_k / d y_k over the open region.
inline double pi_kk(const CellProblemFd& g, const std::vector<double>& mu, int k) {
    const int N = g.N;
    const double h = 1.0 / N;
    double grad_term = 0;
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            const int a = g.idx(i, j);
            const int b = (k == 0) ? g.idx(i + 1, j) : g.idx(i, j + 1);
            if (g.open[a] && g.open[b]) grad_term += (mu[b] - mu[a]) * h;
        }
    const double y1 = 1.0 - M_PI * g.rho * g.rho;
    return y1 + grad_term;
}

// Richardson-extrapolated oracle value from resolutions N and 2N.
inline double pi11_extrapolated(double rho, int N) {
    const auto g1 = make_grid(N, rho);
    const auto g2 = make_grid(2 * N, rho);
    const double p1 = pi_kk(g1, solve_mu(g1, 0), 0);
    const double p2 = pi_kk(g2, solve_mu(g2, 0), 0);
    return 2.0 * p2 - p1;
}

} // namespace fd_oracle
