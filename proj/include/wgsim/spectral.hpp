#pragma once

#include "lattice.hpp"

#include <Eigen/Eigenvalues>

namespace wgsim {

/// Dense step unitary of `trotter_step_sequence` restricted to the k-photon sector.
inline Mat step_unitary(const LatticeModel& m, double dt, int k) {
    auto basis = enumerate_basis(m.n_sites(), {k});
    auto seq = trotter_step_sequence(m, dt, std::max(k, 2));
    Mat u = Mat::Identity(static_cast<Eigen::Index>(basis->size()), static_cast<Eigen::Index>(basis->size()));
    for (auto& l : compile_layers(basis, seq)) u = l * u;
    return u;
}

struct SpectralResult {
    int sector = -1;
    double delta_t = 0.0;
    Vec phases;               // eigenvalues u_j, sorted by energy
    Eigen::VectorXd energies; // -arg(u_j) / dt, ascending
    Mat vectors;              // orthonormal eigenvectors as columns
    bool aliased = false;     // some eigenphase sits on the branch cut
};

/// Effective energies of a unitary step. The energy of u = exp(-i E dt) is E, taken on
/// the principal branch (-pi/dt, pi/dt]. The complex Schur form of a unitary matrix
/// is diagonal, so its unitary factor supplies an orthonormal eigenbasis even for
/// degenerate phases.
inline SpectralResult effective_energies(const Mat& u, double dt, int sector = -1) {
    if (u.rows() != u.cols()) throw std::invalid_argument("effective_energies: matrix not square");
    if (!(dt > 0.0)) throw std::invalid_argument("effective_energies: dt must be positive");
    const auto n = u.rows();
    double uerr = (u.adjoint() * u - Mat::Identity(n, n)).cwiseAbs().maxCoeff();
    if (uerr > 1e-8) throw std::invalid_argument("effective_energies: matrix is not unitary");

    Eigen::ComplexSchur<Mat> schur(u);
    const Mat& t = schur.matrixT();
    const Mat& z = schur.matrixU();

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    Eigen::VectorXd e(n);
    for (Eigen::Index a = 0; a < n; ++a) {
        e[a] = -std::arg(t(a, a)) / dt;
        order[static_cast<std::size_t>(a)] = a;
    }
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return e[a] < e[b]; });

    SpectralResult r;
    r.sector = sector;
    r.delta_t = dt;
    r.phases.resize(n);
    r.energies.resize(n);
    r.vectors.resize(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        auto src = order[static_cast<std::size_t>(a)];
        r.phases[a] = t(src, src);
        r.energies[a] = e[src];
        r.vectors.col(a) = z.col(src);
        if (pi - std::abs(std::arg(t(src, src))) < 1e-6 * dt) r.aliased = true;
    }
    return r;
}

/// Number of distinct values after single-linkage clustering of sorted energies.
inline int count_distinct(const Eigen::VectorXd& sorted, double tol = 1e-6) {
    if (sorted.size() == 0) return 0;
    int c = 1;
    for (Eigen::Index a = 1; a < sorted.size(); ++a)
        if (sorted[a] - sorted[a - 1] > tol) ++c;
    return c;
}

struct GroundSpace {
    Mat states;                 // two orthonormal columns
    Eigen::VectorXd energies;   // lowest three energies
    double gap = 0.0;           // e3 - e2
    double degeneracy_split = 0.0;  // e2 - e1
    double mean_energy() const { return 0.5 * (energies[0] + energies[1]); }
};

inline GroundSpace ground_space(const SpectralResult& r) {
    if (r.energies.size() < 3) throw std::invalid_argument("ground_space: need at least three levels");
    GroundSpace g;
    g.states = r.vectors.leftCols(2);
    g.energies = r.energies.head(3);
    g.gap = r.energies[2] - r.energies[1];
    g.degeneracy_split = r.energies[1] - r.energies[0];
    return g;
}

/// theta[a,b](z|tau) = sum_n exp(i pi tau (n+a)^2 + 2 pi i (n+a)(z+b)).
inline cplx jacobi_theta(double a, double b, cplx z, cplx tau) {
    if (!(tau.imag() > 0.0)) throw std::invalid_argument("jacobi_theta: Im(tau) must be positive");
    const cplx I(0.0, 1.0);
    auto term = [&](long n) {
        double na = static_cast<double>(n) + a;
        return std::exp(I * pi * tau * na * na + 2.0 * pi * I * na * (z + b));
    };
    // the summand is log-concave in n; start at its peak and walk outwards
    double n0 = -a - (z.imag()) / tau.imag();
    long c = std::lround(n0);
    cplx sum = term(c);
    double peak = std::abs(sum);
    for (int dir : {-1, 1}) {
        for (long n = c + dir;; n += dir) {
            cplx t = term(n);
            sum += t;
            peak = std::max(peak, std::abs(t));
            if (std::abs(t) < 1e-17 * peak && std::abs(static_cast<double>(n) - n0) > 2.0) break;
            if (std::abs(n - c) > 100000) throw std::runtime_error("jacobi_theta: series did not converge");
        }
    }
    return sum;
}

/// Center-of-mass characteristics of the two-photon torus state: a = (l-1)/2 + cm_a,
/// b = cm_b, l in {1, 2}.
struct AnalyticConfig {
    double cm_a = 0.5;
    double cm_b = 1.0;
};

/// Two-photon half-filled torus state in the gauge of `build_fqh`, on the sector-2 basis.
/// Coordinates are 0-based site positions; z = x + i y.
inline StateVector analytic_ground_state(const LatticeModel& m, int l, const BasisPtr& basis,
                                         const AnalyticConfig& cfg = {}) {
    if (m.geometry != Geometry::square || m.boundary != Boundary::periodic || m.nx != m.ny)
        throw std::invalid_argument("analytic_ground_state: needs a square torus");
    if (std::abs(m.phi_plaq * m.nx * m.ny - 4.0) > 1e-9)
        throw std::invalid_argument("analytic_ground_state: needs four flux quanta (two photons at half filling)");
    if (l != 1 && l != 2) throw std::invalid_argument("analytic_ground_state: l must be 1 or 2");
    if (basis->sectors() != std::vector<int>{2} || basis->n_modes() != m.n_sites())
        throw std::invalid_argument("analytic_ground_state: basis must be the two-photon sector");

    const cplx I(0.0, 1.0);
    const double nx = m.nx, phi = m.phi_plaq;
    const cplx tau = I * (double(m.ny) / m.nx);
    const double a = 0.5 * (l - 1) + cfg.cm_a;
    auto psi = [&](int s1, int s2) {
        double x1 = s1 % m.nx, y1 = s1 / m.nx, x2 = s2 % m.nx, y2 = s2 / m.nx;
        cplx z1(x1, y1), z2(x2, y2);
        cplx rel = jacobi_theta(0.5, 0.5, (z1 - z2) / nx, tau);
        return jacobi_theta(a, cfg.cm_b, 2.0 * (z1 + z2) / nx, 2.0 * tau) * rel * rel *
               std::exp(-pi * phi * (y1 * y1 + y2 * y2)) * std::exp(2.0 * pi * I * phi * (x1 * y1 + x2 * y2));
    };

    Vec v(static_cast<Eigen::Index>(basis->size()));
    for (std::size_t s = 0; s < basis->size(); ++s) {
        std::vector<int> sites;
        for (int i = 0; i < basis->n_modes(); ++i)
            for (int c = 0; c < basis->occupation(s, i); ++c) sites.push_back(i);
        bool same = sites[0] == sites[1];
        v[static_cast<Eigen::Index>(s)] = psi(sites[0], sites[1]) * (same ? 1.0 : std::sqrt(2.0));
    }
    double nrm = v.norm();
    if (nrm == 0.0) throw std::runtime_error("analytic_ground_state: vanishing wavefunction");
    return {basis, v / nrm};
}

/// Orthonormal basis of the analytic ground space (l = 1, 2 after Gram-Schmidt).
inline Mat analytic_ground_space(const LatticeModel& m, const BasisPtr& basis, const AnalyticConfig& cfg = {}) {
    Mat a(static_cast<Eigen::Index>(basis->size()), 2);
    a.col(0) = analytic_ground_state(m, 1, basis, cfg).amplitudes;
    a.col(1) = analytic_ground_state(m, 2, basis, cfg).amplitudes;
    Eigen::HouseholderQR<Mat> qr(a);
    return qr.householderQ() * Mat::Identity(a.rows(), 2);
}

struct OverlapResult {
    cplx alpha, beta;
    double value = 0.0;
};

/// max |<ana| (alpha act2 + beta act1)>|^2 subject to |alpha|^2 + |beta|^2 = 1.
inline OverlapResult overlap_optimize(const Vec& ana, const Vec& act1, const Vec& act2) {
    if (std::abs(act1.norm() - 1.0) > 1e-8 || std::abs(act2.norm() - 1.0) > 1e-8 ||
        std::abs(act1.dot(act2)) > 1e-8)
        throw std::invalid_argument("overlap_optimize: act pair is not orthonormal");
    cplx c1 = act1.dot(ana), c2 = act2.dot(ana);  // <act|ana>
    double v = std::norm(c1) + std::norm(c2);
    OverlapResult r;
    r.value = v;
    if (v == 0.0) {
        r.alpha = 1.0;
        r.beta = 0.0;
    } else {
        double s = std::sqrt(v);
        r.alpha = c2 / s;
        r.beta = c1 / s;
    }
    return r;
}

inline double overlap_value(const Vec& ana, const Vec& act1, const Vec& act2, cplx alpha, cplx beta) {
    return std::norm(ana.dot(alpha * act2 + beta * act1));
}

}  // namespace wgsim
