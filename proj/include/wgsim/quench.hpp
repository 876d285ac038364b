#pragma once

#include "lattice.hpp"

namespace wgsim {

using RealMat = Eigen::MatrixXd;

/// Two-photon correlator C_ij = <b_i^dag b_j^dag b_j b_i> = sum_s p_s n_i (n_j - delta_ij).
inline RealMat pair_correlator(const StateVector& psi) {
    const int n = psi.basis->n_modes();
    RealMat c = RealMat::Zero(n, n);
    for (std::size_t s = 0; s < psi.basis->size(); ++s) {
        double p = std::norm(psi.amplitudes[static_cast<Eigen::Index>(s)]);
        if (p == 0.0) continue;
        for (int i = 0; i < n; ++i) {
            int ni = psi.basis->occupation(s, i);
            if (!ni) continue;
            for (int j = 0; j < n; ++j) c(i, j) += p * ni * (psi.basis->occupation(s, j) - (i == j ? 1 : 0));
        }
    }
    return c;
}

struct QuenchResult {
    std::vector<double> times;
    std::vector<RealMat> correlators;  // one per time, including t = 0
    StateVector final_state;
};

/// Trotterized evolution of one photon on each site in `sites` (0-based, repeats allowed).
inline QuenchResult run_quench(const LatticeModel& m, double dt, int n_steps, const std::vector<int>& sites) {
    if (!(dt > 0.0) || n_steps < 0) throw std::invalid_argument("run_quench: bad time grid");
    if (sites.empty()) throw std::invalid_argument("run_quench: no photons");
    const int k = static_cast<int>(sites.size());
    auto basis = enumerate_basis(m.n_sites(), {k});
    std::vector<int> occ(static_cast<std::size_t>(m.n_sites()), 0);
    for (int s : sites) {
        if (s < 0 || s >= m.n_sites()) throw std::invalid_argument("run_quench: site out of range");
        ++occ[static_cast<std::size_t>(s)];
    }
    StateVector psi = product_fock_state(basis, occ);
    auto layers = compile_layers(basis, trotter_step_sequence(m, dt, std::max(k, 2)));
    QuenchResult r;
    r.times.push_back(0.0);
    r.correlators.push_back(pair_correlator(psi));
    for (int step = 1; step <= n_steps; ++step) {
        for (const auto& l : layers) psi.amplitudes = l * psi.amplitudes;
        r.times.push_back(step * dt);
        r.correlators.push_back(pair_correlator(psi));
    }
    r.final_state = std::move(psi);
    return r;
}

/// Two photons on the central pair of a ring: 0-based sites N_x/2 - 1 and N_x/2.
inline std::vector<int> central_pair(int nx) { return {nx / 2 - 1, nx / 2}; }

struct SideMasses {
    double same = 0.0, opposite = 0.0;
};

/// Splits the ring at `center` and at its antipode; pairs on one half count as same side.
inline SideMasses side_masses(const RealMat& c, double center) {
    const int n = static_cast<int>(c.rows());
    std::vector<double> d(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double v = std::fmod(i - center, double(n));
        if (v <= -0.5 * n) v += n;
        if (v > 0.5 * n) v -= n;
        d[static_cast<std::size_t>(i)] = v;
    }
    SideMasses s;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double p = d[static_cast<std::size_t>(i)] * d[static_cast<std::size_t>(j)];
            if (p > 0) s.same += c(i, j);
            else if (p < 0) s.opposite += c(i, j);
        }
    return s;
}

}  // namespace wgsim
