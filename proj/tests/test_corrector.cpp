#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "oracle_fd_cell.hpp"
#include "sapsim/corrector.hpp"

using namespace sapsim;

namespace {

CellGeometry table_geom() { return CellGeometry{}; }

CellGeometry no_hole_geom() {
    CellGeometry g;
    g.gamma = 0.0;
    return g;
}

int find_node(const CellMesh& m, double x, double y) {
    for (int v = 0; v < m.n_nodes(); ++v)
        if (std::abs(m.nodes[v][0] - x) < 1e-9 && std::abs(m.nodes[v][1] - y) < 1e-9) return v;
    return -1;
}

} // namespace

TEST_CASE("mesh: nodes outside hole, bounded edges, positive areas") {
    const auto geom = table_geom();
    const double rho = geom.hole_ratio();
    CHECK(rho == doctest::Approx(0.18199).epsilon(1e-4));
    const CellMesh m = build_reference_mesh(geom, 0.05);
    for (const auto& p : m.nodes) {
        const double r = std::hypot(p[0] - 0.5, p[1] - 0.5);
        CHECK(r >= rho - 1e-12);
    }
    for (int t = 0; t < m.n_tris(); ++t) {
        CHECK(m.tri_area(t) > 0.0);
        for (int e = 0; e < 3; ++e) {
            const auto& a = m.nodes[m.tris[t][e]];
            const auto& b = m.nodes[m.tris[t][(e + 1) % 3]];
            CHECK(std::hypot(a[0] - b[0], a[1] - b[1]) <= 0.05);
        }
    }
    CHECK(!m.hole_nodes.empty());
}

TEST_CASE("mesh: periodic pairing complete, corners identified") {
    const CellMesh m = build_reference_mesh(table_geom(), 0.05);
    int corner_rep = -1;
    for (int v = 0; v < m.n_nodes(); ++v) {
        const double x = m.nodes[v][0], y = m.nodes[v][1];
        const bool bx = (x == 0.0 || x == 1.0), by = (y == 0.0 || y == 1.0);
        if (bx && by) {
            if (corner_rep < 0) corner_rep = m.rep[v];
            CHECK(m.rep[v] == corner_rep);
        } else if (x == 1.0 || y == 1.0) {
            CHECK(m.rep[v] != v);
            const auto& partner = m.nodes[m.rep[v]];
            if (x == 1.0) {
                CHECK(partner[0] == 0.0);
                CHECK(partner[1] == doctest::Approx(y).epsilon(1e-12));
            } else {
                CHECK(partner[1] == 0.0);
                CHECK(partner[0] == doctest::Approx(x).epsilon(1e-12));
            }
        } else {
            CHECK(m.rep[v] == v);
        }
    }
}

TEST_CASE("mesh: Euler characteristic distinguishes the hole") {
    auto chi = [](const CellMesh& m) {
        std::set<std::pair<int, int>> edges;
        for (const auto& t : m.tris)
            for (int e = 0; e < 3; ++e) {
                int a = t[e], b = t[(e + 1) % 3];
                if (a > b) std::swap(a, b);
                edges.insert({a, b});
            }
        return m.n_nodes() - static_cast<long>(edges.size()) + m.n_tris();
    };
    CHECK(chi(build_reference_mesh(table_geom(), 0.05)) == 0);   // annulus-like
    CHECK(chi(build_reference_mesh(no_hole_geom(), 0.05)) == 1); // disk-like
}

TEST_CASE("mesh: infeasible geometry rejected") {
    CellGeometry g;
    g.gamma = 0.5 * g.delta;   // gamma/delta = 1/2
    CHECK_THROWS(build_reference_mesh(g, 0.05));
    CellGeometry g2;
    g2.gamma = 0.49 * g2.delta;
    CHECK_THROWS_AS(build_reference_mesh(g2, 0.4), std::exception);
}

TEST_CASE("corrector: no hole gives the zero field and Pi = delta^2 I") {
    const auto geom = no_hole_geom();
    const CellMesh m = build_reference_mesh(geom, 0.1);
    const auto mu1 = solve_corrector(m, 0);
    const auto mu2 = solve_corrector(m, 1);
    for (double v : mu1) CHECK(std::abs(v) < 1e-10);
    const EffectiveTensor t = effective_tensor(m, geom, mu1, mu2);
    const double d2 = geom.delta * geom.delta;
    CHECK(t.pi[0][0] == doctest::Approx(d2).epsilon(1e-12));
    CHECK(t.pi[1][1] == doctest::Approx(d2).epsilon(1e-12));
    CHECK(std::abs(t.pi[0][1]) < 1e-12 * d2);
    CHECK(t.y1_area == doctest::Approx(d2).epsilon(1e-14));
}

TEST_CASE("corrector: mirror symmetries of mu_1") {
    const CellMesh m = build_reference_mesh(table_geom(), 0.05);
    const auto mu1 = solve_corrector(m, 0);
    int checked = 0;
    for (int v = 0; v < m.n_nodes(); ++v) {
        const double x = m.nodes[v][0], y = m.nodes[v][1];
        if (x == 0.0 || x == 1.0 || y == 0.0 || y == 1.0) continue;
        const int mx = find_node(m, 1.0 - x, y);
        if (mx >= 0) {
            CHECK(mu1[mx] == doctest::Approx(-mu1[v]).epsilon(1e-6).scale(1e-3));
            ++checked;
        }
        const int my = find_node(m, x, 1.0 - y);
        if (my >= 0) CHECK(mu1[my] == doctest::Approx(mu1[v]).epsilon(1e-6).scale(1e-3));
        if (checked > 400) break;
    }
    CHECK(checked > 100);
}

TEST_CASE("effective tensor: invariants at the table geometry") {
    const auto geom = table_geom();
    const EffectiveTensor t = compute_effective_tensor(geom, 0.02);
    const double d2 = geom.delta * geom.delta;

    CHECK(t.pi[0][0] > 0.0);
    CHECK(t.pi[1][1] > 0.0);
    CHECK(t.pi[0][0] < t.y1_area);                      // strict variational bound
    CHECK(t.y1_area == doctest::Approx(d2 - M_PI * geom.gamma * geom.gamma).epsilon(1e-14));
    CHECK(std::abs(t.pi[0][1] - t.pi[1][0]) <= 1e-8 * t.pi[0][0]);   // symmetry
    CHECK(std::abs(t.pi[0][1]) <= 1e-6 * t.pi[0][0]);                // isotropy
    CHECK(std::abs(t.pi[0][0] - t.pi[1][1]) <= 1e-6 * t.pi[0][0]);

    // positive definiteness of the 2x2
    CHECK(t.pi[0][0] * t.pi[1][1] - t.pi[0][1] * t.pi[1][0] > 0.0);
}

TEST_CASE("effective tensor: energy form equals direct quadrature") {
    const auto geom = table_geom();
    const CellMesh m = build_reference_mesh(geom, 0.05);
    const auto mu1 = solve_corrector(m, 0);
    const auto mu2 = solve_corrector(m, 1);
    const EffectiveTensor t = effective_tensor(m, geom, mu1, mu2);
    const double d2 = geom.delta * geom.delta;
    CHECK(t.pi[0][0] / d2 ==
          doctest::Approx(tensor_entry_direct(m, mu1, 0, 0)).epsilon(1e-12));
    CHECK(t.pi[1][1] / d2 ==
          doctest::Approx(tensor_entry_direct(m, mu2, 1, 1)).epsilon(1e-12));
}

TEST_CASE("effective tensor: gauge independence") {
    const auto geom = table_geom();
    const CellMesh m = build_reference_mesh(geom, 0.1);
    auto mu1 = solve_corrector(m, 0);
    auto mu2 = solve_corrector(m, 1);
    const EffectiveTensor t0 = effective_tensor(m, geom, mu1, mu2);
    for (auto& v : mu1) v += 17.3;
    for (auto& v : mu2) v -= 4.2;
    const EffectiveTensor t1 = effective_tensor(m, geom, mu1, mu2);
    CHECK(t1.pi[0][0] == doctest::Approx(t0.pi[0][0]).epsilon(1e-12));
    CHECK(t1.pi[0][1] == doctest::Approx(t0.pi[0][1]).epsilon(1e-9).scale(t0.pi[0][0]));
}

TEST_CASE("effective tensor: mesh self-convergence") {
    const auto geom = table_geom();
    const double p1 = compute_effective_tensor(geom, 0.1).pi[0][0];
    const double p2 = compute_effective_tensor(geom, 0.05).pi[0][0];
    const double p3 = compute_effective_tensor(geom, 0.025).pi[0][0];
    const double p4 = compute_effective_tensor(geom, 0.0125).pi[0][0];
    const double d1 = std::abs(p1 - p2), d2 = std::abs(p2 - p3), d3 = std::abs(p3 - p4);
    CHECK(d2 < d1);
    CHECK(d3 < d2);
    CHECK(std::abs(p3 - p4) <= 1e-3 * std::abs(p4));
}

TEST_CASE("effective tensor: independent finite-difference oracle") {
    const auto geom = table_geom();
    const double rho = geom.hole_ratio();
    const EffectiveTensor t = compute_effective_tensor(geom, 0.01);
    const double pi_fem = t.pi[0][0] / (geom.delta * geom.delta);
    const double pi_fd = fd_oracle::pi11_extrapolated(rho, 256);
    CHECK(std::abs(pi_fem - pi_fd) <= 1e-3 * pi_fd);
}
