#pragma once

#include "fock.hpp"

#include <map>

namespace wgsim {

enum class GateKind { beamsplitter, number_phase, linear_phase, drive_diss };

/// Abstract gate. Beamsplitter: modes {i, j}, theta, phi. Number phase: modes {i},
/// phase_table. Linear phase: modes {i}, Phi. Drive/dissipation: modes {i}, realized
/// by the open-dynamics channel. `layer` groups mutually commuting gates of one step.
struct GateDescriptor {
    GateKind kind = GateKind::beamsplitter;
    std::vector<int> modes;
    double theta = 0.0;
    double phi = 0.0;
    std::vector<double> phase_table;
    double Phi = 0.0;
    int layer = 0;
};

using GateSequence = std::vector<GateDescriptor>;

namespace detail {

inline void check_mode(const FockBasis& b, int m, const char* who) {
    if (m < 0 || m >= b.n_modes()) throw std::out_of_range(std::string(who) + ": mode out of range");
}

inline SpMat diagonal_from(const Vec& d) {
    SpMat m(d.size(), d.size());
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(d.size()));
    for (Eigen::Index k = 0; k < d.size(); ++k) t.emplace_back(static_cast<int>(k), static_cast<int>(k), d[k]);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

}  // namespace detail

/// exp(-i theta (e^{i phi} b_j^dag b_i + e^{-i phi} b_i^dag b_j)). The generator is block
/// diagonal over configurations of the other modes and n_i + n_j; each block is
/// exponentiated through its Hermitian eigendecomposition.
inline SectorOperator beamsplitter_gate(const BasisPtr& basis, int i, int j, double theta, double phi) {
    detail::check_mode(*basis, i, "beamsplitter_gate");
    detail::check_mode(*basis, j, "beamsplitter_gate");
    if (i == j) throw std::invalid_argument("beamsplitter_gate: modes must differ");
    const auto d = basis->size();
    const auto M = static_cast<std::size_t>(basis->n_modes());

    std::unordered_map<std::string, std::vector<std::size_t>> blocks;
    std::string key(M + 1, '\0');
    for (std::size_t s = 0; s < d; ++s) {
        auto st = basis->state(s);
        std::copy(st.begin(), st.end(), key.begin());
        key[static_cast<std::size_t>(i)] = 0;
        key[static_cast<std::size_t>(j)] = 0;
        key[M] = static_cast<char>(st[static_cast<std::size_t>(i)] + st[static_cast<std::size_t>(j)]);
        blocks[key].push_back(s);
    }

    const cplx e = std::polar(1.0, phi);
    std::map<std::vector<int>, Mat> cache;
    std::vector<Triplet> trip;
    trip.reserve(d * 3);
    for (auto& [k, idx] : blocks) {
        const auto n = idx.size();
        std::vector<int> ni(n);
        for (std::size_t a = 0; a < n; ++a) ni[a] = basis->occupation(idx[a], i);
        const int m = static_cast<unsigned char>(k[M]);
        std::vector<int> sig = ni;
        sig.push_back(m);
        auto it = cache.find(sig);
        if (it == cache.end()) {
            Mat g = Mat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = 0; b < n; ++b)
                    if (ni[b] == ni[a] + 1) {
                        // b_j^dag b_i maps n_i -> n_i - 1
                        double amp = theta * std::sqrt(double(ni[b]) * double(m - ni[b] + 1));
                        g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = e * amp;
                        g(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = std::conj(e) * amp;
                    }
            Eigen::SelfAdjointEigenSolver<Mat> es(g);
            Vec ph = (es.eigenvalues().cast<cplx>() * cplx(0, -1)).array().exp();
            it = cache.emplace(sig, es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint()).first;
        }
        const Mat& u = it->second;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                cplx v = u(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
                if (v != cplx(0.0)) trip.emplace_back(static_cast<int>(idx[a]), static_cast<int>(idx[b]), v);
            }
    }
    SpMat mat(static_cast<int>(d), static_cast<int>(d));
    mat.setFromTriplets(trip.begin(), trip.end());
    return {basis, std::move(mat)};
}

/// phi(n) for any n >= 0, continuing linearly with the last increment past the table.
inline double phase_table_value(const std::vector<double>& table, int n) {
    const int last = static_cast<int>(table.size()) - 1;
    if (n <= last) return table[static_cast<std::size_t>(n)];
    double slope = last >= 1 ? table[static_cast<std::size_t>(last)] - table[static_cast<std::size_t>(last - 1)] : 0.0;
    return table[static_cast<std::size_t>(last)] + (n - last) * slope;
}

inline SectorOperator number_phase_gate(const BasisPtr& basis, int i, const std::vector<double>& table) {
    detail::check_mode(*basis, i, "number_phase_gate");
    if (table.empty() || table[0] != 0.0) throw std::invalid_argument("number_phase_gate: table must start with 0");
    Vec d(static_cast<Eigen::Index>(basis->size()));
    for (std::size_t s = 0; s < basis->size(); ++s)
        d[static_cast<Eigen::Index>(s)] = std::polar(1.0, phase_table_value(table, basis->occupation(s, i)));
    return {basis, detail::diagonal_from(d)};
}

inline SectorOperator linear_phase_gate(const BasisPtr& basis, int i, double Phi) {
    detail::check_mode(*basis, i, "linear_phase_gate");
    Vec d(static_cast<Eigen::Index>(basis->size()));
    for (std::size_t s = 0; s < basis->size(); ++s)
        d[static_cast<Eigen::Index>(s)] = std::polar(1.0, Phi * basis->occupation(s, i));
    return {basis, detail::diagonal_from(d)};
}

inline SectorOperator gate_operator(const BasisPtr& basis, const GateDescriptor& g) {
    switch (g.kind) {
        case GateKind::beamsplitter:
            if (g.modes.size() != 2) throw std::invalid_argument("beamsplitter descriptor needs two modes");
            return beamsplitter_gate(basis, g.modes[0], g.modes[1], g.theta, g.phi);
        case GateKind::number_phase:
            if (g.modes.size() != 1) throw std::invalid_argument("number_phase descriptor needs one mode");
            return number_phase_gate(basis, g.modes[0], g.phase_table);
        case GateKind::linear_phase:
            if (g.modes.size() != 1) throw std::invalid_argument("linear_phase descriptor needs one mode");
            return linear_phase_gate(basis, g.modes[0], g.Phi);
        case GateKind::drive_diss: break;
    }
    throw std::invalid_argument("gate_operator: drive_diss is a channel, not a unitary");
}

/// Products of the unitary gates in each layer, in layer order.
inline std::vector<SpMat> compile_layers(const BasisPtr& basis, const GateSequence& seq) {
    std::vector<SpMat> out;
    int cur = 0;
    bool open = false;
    for (const auto& g : seq) {
        if (g.kind == GateKind::drive_diss) continue;
        SpMat u = gate_operator(basis, g).matrix;
        if (!open || g.layer != cur) {
            out.push_back(std::move(u));
            cur = g.layer;
            open = true;
        } else {
            out.back() = (u * out.back()).pruned();
        }
    }
    return out;
}

/// Ordered product of every unitary gate in the sequence (first gate acts first).
inline SectorOperator sequence_operator(const BasisPtr& basis, const GateSequence& seq) {
    SpMat u(static_cast<int>(basis->size()), static_cast<int>(basis->size()));
    u.setIdentity();
    for (auto& l : compile_layers(basis, seq)) u = (l * u).pruned();
    return {basis, std::move(u)};
}

inline void check_same_basis(const BasisPtr& a, const BasisPtr& b) {
    if (a != b && !(a && b && *a == *b)) throw std::invalid_argument("basis mismatch");
}

inline StateVector apply_gate(const StateVector& psi, const SectorOperator& u) {
    check_same_basis(psi.basis, u.basis);
    return {psi.basis, u.matrix * psi.amplitudes};
}

inline DensityMatrix apply_gate(const DensityMatrix& rho, const SectorOperator& u) {
    check_same_basis(rho.basis, u.basis);
    Mat left = u.matrix * rho.matrix;
    Mat out = (u.matrix * left.adjoint()).adjoint();
    return {rho.basis, std::move(out)};
}

}  // namespace wgsim
