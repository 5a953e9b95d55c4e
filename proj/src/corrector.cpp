#include "sapsim/corrector.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace sapsim {

namespace {

double cross2(const std::array<double, 2>& a, const std::array<double, 2>& b,
              const std::array<double, 2>& c) {
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}

struct GradP1 {
    double g[3][2];   // gradient of each barycentric basis function
    double area;
};

GradP1 p1_gradients(const CellMesh& m, int t) {
    const auto& tri = m.tris[t];
    const auto& p0 = m.nodes[tri[0]];
    const auto& p1 = m.nodes[tri[1]];
    const auto& p2 = m.nodes[tri[2]];
    GradP1 out;
    out.area = 0.5 * cross2(p0, p1, p2);
    const std::array<double, 2>* p[3] = {&p0, &p1, &p2};
    for (int i = 0; i < 3; ++i) {
        const auto& pj = *p[(i + 1) % 3];
        const auto& pk = *p[(i + 2) % 3];
        out.g[i][0] = (pj[1] - pk[1]) / (2.0 * out.area);
        out.g[i][1] = (pk[0] - pj[0]) / (2.0 * out.area);
    }
    return out;
}

struct Csr {
    std::vector<int> row_ptr, col;
    std::vector<double> val;
    int n = 0;

    void mul(const std::vector<double>& x, std::vector<double>& y) const {
        for (int i = 0; i < n; ++i) {
            double s = 0;
            for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
            y[i] = s;
        }
    }
};

Csr compress(int n, const std::vector<std::map<int, double>>& rows) {
    Csr a;
    a.n = n;
    a.row_ptr.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) a.row_ptr[i + 1] = a.row_ptr[i] + static_cast<int>(rows[i].size());
    a.col.reserve(a.row_ptr[n]);
    a.val.reserve(a.row_ptr[n]);
    for (int i = 0; i < n; ++i)
        for (const auto& [j, v] : rows[i]) {
            a.col.push_back(j);
            a.val.push_back(v);
        }
    return a;
}

void deflate_mean(std::vector<double>& x) {
    double m = 0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    for (double& v : x) v -= m;
}

// CG on the singular but consistent periodic stiffness system; the kernel of
// constants is handled by keeping iterates mean-free.
std::vector<double> cg_solve(const Csr& a, std::vector<double> b, double tol) {
    const int n = a.n;
    deflate_mean(b);
    std::vector<double> x(n, 0.0), r = b, p = b, ap(n);
    double rr = 0, bb = 0;
    for (int i = 0; i < n; ++i) {
        rr += r[i] * r[i];
        bb += b[i] * b[i];
    }
    if (bb == 0) return x;
    const double stop = tol * tol * bb;
    for (int it = 0; it < 40 * n + 100; ++it) {
        if (rr <= stop) break;
        a.mul(p, ap);
        double pap = 0;
        for (int i = 0; i < n; ++i) pap += p[i] * ap[i];
        const double alpha = rr / pap;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        double rr_new = 0;
        for (int i = 0; i < n; ++i) rr_new += r[i] * r[i];
        const double beta = rr_new / rr;
        rr = rr_new;
        for (int i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
        if (it % 64 == 63) deflate_mean(x);
    }
    if (rr > stop)
        throw std::runtime_error("corrector: CG failed to converge (singular periodic system?)");
    deflate_mean(x);
    return x;
}

} // namespace

double CellMesh::tri_area(int t) const {
    return 0.5 * cross2(nodes[tris[t][0]], nodes[tris[t][1]], nodes[tris[t][2]]);
}

CellMesh build_reference_mesh(const CellGeometry& geom, double target_h) {
    geom.validate();
    if (!(target_h > 0 && target_h < 1))
        throw std::invalid_argument("mesh: target_h must be in (0,1)");
    const double rho = geom.hole_ratio();
    if (rho >= 0.5) throw std::invalid_argument("mesh: geometry infeasible, gamma/delta >= 1/2");

    // Grid sizing keeps every edge below target_h even after snapping.
    int n = static_cast<int>(std::ceil(2.0 / target_h));
    if (n % 2 != 0) ++n;   // even n keeps the mesh symmetric about the centerlines
    if (n < 4) n = 4;
    const double h = 1.0 / n;
    const double snap_band = 0.35 * h;
    if (rho > 0 && rho + snap_band >= 0.5)
        throw std::invalid_argument("mesh: hole too close to cell boundary for this resolution");

    CellMesh mesh;
    mesh.hole_radius = rho;
    mesh.target_h = target_h;

    // Grid nodes (i,j) and cell-center nodes; the center subdivision keeps the
    // triangulation invariant under the square's reflections.
    std::vector<int> grid_id((n + 1) * (n + 1));
    std::vector<int> center_id(n * n);
    auto add_node = [&](double x, double y) {
        mesh.nodes.push_back({x, y});
        return static_cast<int>(mesh.nodes.size()) - 1;
    };
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            grid_id[j * (n + 1) + i] = add_node(static_cast<double>(i) / n, static_cast<double>(j) / n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            center_id[j * n + i] = add_node((i + 0.5) / n, (j + 0.5) / n);

    std::vector<bool> on_edge(mesh.nodes.size(), false);
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            if (i == 0 || i == n || j == 0 || j == n) on_edge[grid_id[j * (n + 1) + i]] = true;

    // Snap nodes near the circle onto it.
    std::vector<bool> on_hole(mesh.nodes.size(), false);
    if (rho > 0) {
        for (size_t v = 0; v < mesh.nodes.size(); ++v) {
            const double dx = mesh.nodes[v][0] - 0.5, dy = mesh.nodes[v][1] - 0.5;
            const double r = std::hypot(dx, dy);
            if (std::abs(r - rho) < snap_band) {
                if (on_edge[v]) throw std::runtime_error("mesh: snap region touches cell boundary");
                const double s = rho / r;
                mesh.nodes[v] = {0.5 + dx * s, 0.5 + dy * s};
                on_hole[v] = true;
            }
        }
    }

    auto inside = [&](int v) {
        if (rho == 0 || on_hole[v]) return false;
        const double dx = mesh.nodes[v][0] - 0.5, dy = mesh.nodes[v][1] - 0.5;
        return std::hypot(dx, dy) < rho;
    };

    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const int c = center_id[j * n + i];
            const int v00 = grid_id[j * (n + 1) + i];
            const int v10 = grid_id[j * (n + 1) + i + 1];
            const int v11 = grid_id[(j + 1) * (n + 1) + i + 1];
            const int v01 = grid_id[(j + 1) * (n + 1) + i];
            const std::array<std::array<int, 3>, 4> quads = {{
                {v00, v10, c}, {v10, v11, c}, {v11, v01, c}, {v01, v00, c}}};
            for (const auto& tri : quads) {
                if (inside(tri[0]) || inside(tri[1]) || inside(tri[2])) continue;
                if (rho > 0) {
                    double cx = 0, cy = 0;
                    for (int v : tri) {
                        cx += mesh.nodes[v][0];
                        cy += mesh.nodes[v][1];
                    }
                    cx = cx / 3 - 0.5;
                    cy = cy / 3 - 0.5;
                    if (std::hypot(cx, cy) < rho) continue;
                }
                mesh.tris.push_back(tri);
            }
        }

    // Drop unreferenced nodes and renumber.
    std::vector<int> remap(mesh.nodes.size(), -1);
    std::vector<std::array<double, 2>> kept;
    std::vector<bool> kept_on_hole;
    for (auto& tri : mesh.tris)
        for (int& v : tri) {
            if (remap[v] < 0) {
                remap[v] = static_cast<int>(kept.size());
                kept.push_back(mesh.nodes[v]);
                kept_on_hole.push_back(on_hole[v]);
            }
            v = remap[v];
        }
    mesh.nodes = std::move(kept);
    for (int v = 0; v < mesh.n_nodes(); ++v)
        if (kept_on_hole[v]) mesh.hole_nodes.push_back(v);

    // Orientation and degeneracy check.
    for (int t = 0; t < mesh.n_tris(); ++t) {
        double a = mesh.tri_area(t);
        if (a < 0) {
            std::swap(mesh.tris[t][1], mesh.tris[t][2]);
            a = -a;
        }
        if (!(a > 1e-14)) throw std::runtime_error("mesh: degenerate triangle produced");
    }

    // Periodic pairing: right->left, top->bottom, all corners -> one node.
    mesh.rep.resize(mesh.n_nodes());
    for (int v = 0; v < mesh.n_nodes(); ++v) mesh.rep[v] = v;
    std::unordered_map<long long, int> left, bottom;
    auto key = [n](double coord) { return static_cast<long long>(std::llround(coord * 2 * n)); };
    int corner00 = -1;
    for (int v = 0; v < mesh.n_nodes(); ++v) {
        const double x = mesh.nodes[v][0], y = mesh.nodes[v][1];
        const bool x0 = x == 0.0, x1 = x == 1.0, y0 = y == 0.0, y1 = y == 1.0;
        if (x0 && y0) corner00 = v;
        if (x0 && !y0 && !y1) left[key(y)] = v;
        if (y0 && !x0 && !x1) bottom[key(x)] = v;
    }
    if (corner00 < 0) throw std::runtime_error("mesh: missing corner node");
    for (int v = 0; v < mesh.n_nodes(); ++v) {
        const double x = mesh.nodes[v][0], y = mesh.nodes[v][1];
        const bool x0 = x == 0.0, x1 = x == 1.0, y0 = y == 0.0, y1 = y == 1.0;
        if ((x0 || x1) && (y0 || y1)) {
            mesh.rep[v] = corner00;
        } else if (x1) {
            auto it = left.find(key(y));
            if (it == left.end()) throw std::runtime_error("mesh: unmatched periodic node on x=1");
            mesh.rep[v] = it->second;
        } else if (y1) {
            auto it = bottom.find(key(x));
            if (it == bottom.end()) throw std::runtime_error("mesh: unmatched periodic node on y=1");
            mesh.rep[v] = it->second;
        }
    }
    return mesh;
}

std::vector<double> solve_corrector(const CellMesh& mesh, int k) {
    if (k != 0 && k != 1) throw std::invalid_argument("corrector: axis index must be 0 or 1");
    const int n = mesh.n_nodes();

    // Reduced (periodic) dof numbering.
    std::vector<int> red(n, -1);
    int n_red = 0;
    for (int v = 0; v < n; ++v)
        if (mesh.rep[v] == v) red[v] = n_red++;
    for (int v = 0; v < n; ++v)
        if (red[v] < 0) red[v] = red[mesh.rep[v]];

    std::vector<std::map<int, double>> rows(n_red);
    std::vector<double> b(n_red, 0.0);
    for (int t = 0; t < mesh.n_tris(); ++t) {
        const GradP1 g = p1_gradients(mesh, t);
        for (int i = 0; i < 3; ++i) {
            const int ri = red[mesh.tris[t][i]];
            b[ri] -= g.area * g.g[i][k];
            for (int j = 0; j < 3; ++j) {
                const int rj = red[mesh.tris[t][j]];
                rows[ri][rj] += g.area * (g.g[i][0] * g.g[j][0] + g.g[i][1] * g.g[j][1]);
            }
        }
    }
    const Csr a = compress(n_red, rows);
    const std::vector<double> mu_red = cg_solve(a, b, 1e-13);

    // Verify the assembled system residual.
    {
        std::vector<double> ax(n_red);
        a.mul(mu_red, ax);
        double rnorm = 0, bnorm = 0;
        for (int i = 0; i < n_red; ++i) {
            rnorm += (ax[i] - b[i]) * (ax[i] - b[i]);
            bnorm += b[i] * b[i];
        }
        if (rnorm > 1e-20 * bnorm + 1e-28 * n_red)
            throw std::runtime_error("corrector: linear-system residual above tolerance");
    }

    std::vector<double> mu(n);
    for (int v = 0; v < n; ++v) mu[v] = mu_red[red[v]];

    // Zero-mean gauge over Y^1 (area-weighted).
    double mean = 0, area = 0;
    for (int t = 0; t < mesh.n_tris(); ++t) {
        const double at = mesh.tri_area(t);
        area += at;
        for (int i = 0; i < 3; ++i) mean += at / 3.0 * mu[mesh.tris[t][i]];
    }
    mean /= area;
    for (double& v : mu) v -= mean;
    return mu;
}

EffectiveTensor effective_tensor(const CellMesh& mesh, const CellGeometry& geom,
                                 const std::vector<double>& mu1,
                                 const std::vector<double>& mu2) {
    const std::vector<double>* mu[2] = {&mu1, &mu2};
    double pi_hat[2][2] = {{0, 0}, {0, 0}};
    for (int t = 0; t < mesh.n_tris(); ++t) {
        const GradP1 g = p1_gradients(mesh, t);
        double grad[2][2];   // grad[k] = e_k + grad mu_k on this triangle
        for (int k = 0; k < 2; ++k) {
            grad[k][0] = (k == 0) ? 1.0 : 0.0;
            grad[k][1] = (k == 1) ? 1.0 : 0.0;
            for (int i = 0; i < 3; ++i) {
                const double m = (*mu[k])[mesh.tris[t][i]];
                grad[k][0] += m * g.g[i][0];
                grad[k][1] += m * g.g[i][1];
            }
        }
        for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 2; ++l)
                pi_hat[k][l] += g.area * (grad[k][0] * grad[l][0] + grad[k][1] * grad[l][1]);
    }
    EffectiveTensor out;
    const double d2 = geom.delta * geom.delta;
    for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) out.pi[k][l] = pi_hat[k][l] * d2;
    out.y1_area = d2 - M_PI * geom.gamma * geom.gamma;
    out.delta = geom.delta;
    out.gamma = geom.gamma;
    out.mesh_h = mesh.target_h;
    return out;
}

EffectiveTensor compute_effective_tensor(const CellGeometry& geom, double target_h) {
    const CellMesh mesh = build_reference_mesh(geom, target_h);
    const std::vector<double> mu1 = solve_corrector(mesh, 0);
    const std::vector<double> mu2 = solve_corrector(mesh, 1);
    return effective_tensor(mesh, geom, mu1, mu2);
}

double tensor_entry_direct(const CellMesh& mesh, const std::vector<double>& mu_k, int k, int l) {
    double sum = 0;
    for (int t = 0; t < mesh.n_tris(); ++t) {
        const GradP1 g = p1_gradients(mesh, t);
        double dmu = 0;
        for (int i = 0; i < 3; ++i) dmu += mu_k[mesh.tris[t][i]] * g.g[i][l];
        sum += g.area * ((k == l ? 1.0 : 0.0) + dmu);
    }
    return sum;
}

} // namespace sapsim
