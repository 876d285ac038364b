#pragma once

#include "gates.hpp"

namespace wgsim {

enum class Geometry { chain, square };
enum class Boundary { open, periodic };

/// Hopping term amp * b_j^dag b_i + h.c. on the link i -> j. `dir` is 'h' or 'v',
/// (x, y) the coordinates of site i.
struct Edge {
    int i = 0, j = 0;
    cplx amp;
    char dir = 'h';
    int x = 0, y = 0;
};

struct LatticeModel {
    Geometry geometry = Geometry::chain;
    Boundary boundary = Boundary::open;
    int nx = 0, ny = 1;
    double J = 1.0;
    double U = 0.0;
    double phi_plaq = 0.0;
    std::vector<Edge> edges;

    int n_sites() const { return nx * ny; }
    int site(int x, int y) const { return ((y % ny + ny) % ny) * nx + ((x % nx + nx) % nx); }
    double onsite(int n) const { return 0.5 * U * n * (n - 1); }
};

inline LatticeModel build_bose_hubbard(int nx, double J, double U, Boundary b) {
    if (nx < 2) throw std::invalid_argument("build_bose_hubbard: N_x must be >= 2");
    LatticeModel m;
    m.geometry = Geometry::chain;
    m.boundary = b;
    m.nx = nx;
    m.J = J;
    m.U = U;
    int last = b == Boundary::periodic && nx > 2 ? nx : nx - 1;
    for (int x = 0; x < last; ++x) m.edges.push_back({x, (x + 1) % nx, cplx(-J, 0.0), 'h', x, 0});
    return m;
}

/// Landau gauge: vertical links at column x carry 2*pi*phi*x; under periodic boundaries
/// the horizontal wrap link of row y carries -2*pi*phi*N_x*y.
inline LatticeModel build_fqh(int nx, int ny, double J, double U, double phi_plaq, Boundary b) {
    if (nx < 2 || ny < 2) throw std::invalid_argument("build_fqh: N_x, N_y must be >= 2");
    if (b == Boundary::periodic) {
        double tot = phi_plaq * nx * ny;
        if (std::abs(tot - std::round(tot)) > 1e-9)
            throw std::invalid_argument("build_fqh: total flux must be an integer on a torus");
    }
    LatticeModel m;
    m.geometry = Geometry::square;
    m.boundary = b;
    m.nx = nx;
    m.ny = ny;
    m.J = J;
    m.U = U;
    m.phi_plaq = phi_plaq;
    const bool per = b == Boundary::periodic;
    for (int y = 0; y < ny; ++y)
        for (int x = 0; x < (per ? nx : nx - 1); ++x) {
            double ph = x == nx - 1 ? -2.0 * pi * phi_plaq * nx * y : 0.0;
            m.edges.push_back({m.site(x, y), m.site(x + 1, y), -J * std::polar(1.0, ph), 'h', x, y});
        }
    for (int y = 0; y < (per ? ny : ny - 1); ++y)
        for (int x = 0; x < nx; ++x)
            m.edges.push_back({m.site(x, y), m.site(x, y + 1), -J * std::polar(1.0, 2.0 * pi * phi_plaq * x), 'v', x, y});
    return m;
}

/// Phase picked up hopping i -> j, relative to the bare -J amplitude.
inline double link_phase(const LatticeModel& m, int i, int j) {
    for (const auto& e : m.edges) {
        if (e.i == i && e.j == j) return std::arg(-e.amp);
        if (e.i == j && e.j == i) return -std::arg(-e.amp);
    }
    throw std::invalid_argument("link_phase: no such link");
}

/// Accumulated phase / 2pi around every plaquette (x, y) -> (x+1, y) -> (x+1, y+1) -> (x, y+1).
inline std::vector<double> plaquette_fluxes(const LatticeModel& m) {
    if (m.geometry != Geometry::square) throw std::invalid_argument("plaquette_fluxes: square lattice only");
    std::vector<double> out;
    const bool per = m.boundary == Boundary::periodic;
    for (int y = 0; y < (per ? m.ny : m.ny - 1); ++y)
        for (int x = 0; x < (per ? m.nx : m.nx - 1); ++x) {
            int a = m.site(x, y), b = m.site(x + 1, y), c = m.site(x + 1, y + 1), d = m.site(x, y + 1);
            double s = link_phase(m, a, b) + link_phase(m, b, c) + link_phase(m, c, d) + link_phase(m, d, a);
            out.push_back(s / (2.0 * pi));
        }
    return out;
}

/// Copy of the model with every link phase shifted by chi_j - chi_i (same fluxes).
inline LatticeModel gauge_transform(const LatticeModel& m, const std::vector<double>& chi) {
    if (static_cast<int>(chi.size()) != m.n_sites()) throw std::invalid_argument("gauge_transform: size mismatch");
    LatticeModel out = m;
    for (auto& e : out.edges) e.amp *= std::polar(1.0, chi[static_cast<std::size_t>(e.j)] - chi[static_cast<std::size_t>(e.i)]);
    return out;
}

struct TrotterPlan {
    double delta_t = 0.0;
    std::vector<std::vector<Edge>> groups;
    std::vector<double> onsite_phase_table;
    bool fallback = false;  // odd periodic length forced an extra group
};

/// Chain: even, odd edges. Square: horizontal-even, horizontal-odd, vertical-even,
/// vertical-odd. An odd periodic length moves the wrap link into its own group.
inline TrotterPlan edge_coloring(const LatticeModel& m) {
    TrotterPlan p;
    std::vector<Edge> g[2][2], extra[2];
    for (const auto& e : m.edges) {
        int d = e.dir == 'h' ? 0 : 1;
        int c = d == 0 ? e.x : e.y;
        int n = d == 0 ? m.nx : m.ny;
        bool wrap = c == n - 1 && m.boundary == Boundary::periodic;
        if (wrap && n % 2 == 1) {
            extra[d].push_back(e);
            p.fallback = true;
        } else {
            g[d][c % 2].push_back(e);
        }
    }
    for (int d = 0; d < (m.geometry == Geometry::square ? 2 : 1); ++d) {
        p.groups.push_back(g[d][0]);
        p.groups.push_back(g[d][1]);
        if (!extra[d].empty()) p.groups.push_back(extra[d]);
    }
    return p;
}

inline bool group_is_disjoint(const std::vector<Edge>& g) {
    std::set<int> seen;
    for (const auto& e : g) {
        if (!seen.insert(e.i).second || !seen.insert(e.j).second) return false;
    }
    return true;
}

/// First-order step: beamsplitters group by group, then on-site phases
/// phi(n) = -dt * (U/2) n (n-1) tabulated up to `max_photons`.
inline GateSequence trotter_step_sequence(const LatticeModel& m, double dt, int max_photons = 3) {
    TrotterPlan plan = edge_coloring(m);
    GateSequence seq;
    int layer = 0;
    for (const auto& g : plan.groups) {
        for (const auto& e : g) {
            GateDescriptor d;
            d.kind = GateKind::beamsplitter;
            d.modes = {e.i, e.j};
            d.theta = std::abs(e.amp) * dt;
            d.phi = std::arg(e.amp);
            d.layer = layer;
            seq.push_back(d);
        }
        ++layer;
    }
    if (m.U != 0.0) {
        std::vector<double> table(static_cast<std::size_t>(std::max(max_photons, 2)) + 1);
        for (std::size_t n = 0; n < table.size(); ++n) table[n] = -dt * m.onsite(static_cast<int>(n));
        for (int s = 0; s < m.n_sites(); ++s) {
            GateDescriptor d;
            d.kind = GateKind::number_phase;
            d.modes = {s};
            d.phase_table = table;
            d.layer = layer;
            seq.push_back(d);
        }
    }
    return seq;
}

inline SpMat hopping_hamiltonian(const BasisPtr& basis, const std::vector<Edge>& edges) {
    const int d = static_cast<int>(basis->size());
    SpMat h(d, d);
    for (const auto& e : edges) {
        SpMat t = e.amp * hopping_operator(basis, e.i, e.j).matrix;
        h += t + SpMat(t.adjoint());
    }
    return h;
}

inline SectorOperator exact_hamiltonian(const LatticeModel& m, const BasisPtr& basis) {
    if (basis->n_modes() < m.n_sites()) throw std::invalid_argument("exact_hamiltonian: basis too small");
    SpMat h = hopping_hamiltonian(basis, m.edges);
    Vec diag = Vec::Zero(static_cast<Eigen::Index>(basis->size()));
    for (std::size_t s = 0; s < basis->size(); ++s)
        for (int i = 0; i < m.n_sites(); ++i) diag[static_cast<Eigen::Index>(s)] += m.onsite(basis->occupation(s, i));
    h += detail::diagonal_from(diag);
    return {basis, std::move(h)};
}

}  // namespace wgsim
