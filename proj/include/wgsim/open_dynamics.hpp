#pragma once

#include "spectral.hpp"

#include <functional>
#include <limits>

namespace wgsim {

/// Convergence failure; carries the best iterate's residual.
class convergence_error : public std::runtime_error {
public:
    convergence_error(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/// Drive F b + F* b^dag with loss gamma D[b], realized per step by a beamsplitter of rate K
/// against an ancilla in the coherent state |alpha>, followed by e^{i Phi n}.
struct DriveDissParams {
    cplx F;
    double omega_drive = 0.0;
    double gamma = 0.0;
    double delta_t = 0.0;
    cplx alpha;
    double K = 0.0;
    double Phi = 0.0;

    static DriveDissParams from_lindblad(cplx F, double omega, double gamma, double dt) {
        if (!(dt > 0.0) || gamma < 0.0) throw std::invalid_argument("DriveDissParams: need dt > 0, gamma >= 0");
        DriveDissParams p;
        p.F = F;
        p.omega_drive = omega;
        p.gamma = gamma;
        p.delta_t = dt;
        p.K = std::sqrt(gamma / dt);
        p.alpha = p.K > 0.0 ? std::conj(F / p.K) : cplx(0.0);
        if (p.K == 0.0 && F != cplx(0.0)) throw std::invalid_argument("DriveDissParams: drive without loss");
        p.Phi = omega * dt;
        return p;
    }

    static DriveDissParams from_channel(double K_dt, cplx alpha, double omega, double dt) {
        if (!(dt > 0.0)) throw std::invalid_argument("DriveDissParams: need dt > 0");
        DriveDissParams p;
        p.delta_t = dt;
        p.K = K_dt / dt;
        p.alpha = alpha;
        p.F = std::conj(alpha) * p.K;
        p.gamma = p.K * p.K * dt;
        p.omega_drive = omega;
        p.Phi = omega * dt;
        return p;
    }
};

/// Coherent state truncated to `cut` levels and renormalized.
inline Vec coherent_state(cplx alpha, int cut) {
    if (cut < 1) throw std::invalid_argument("coherent_state: cut must be positive");
    Vec v(cut);
    double lf = 0.0;
    for (int n = 0; n < cut; ++n) {
        if (n > 0) lf += std::log(static_cast<double>(n));
        v[n] = n == 0 ? cplx(1.0) : std::pow(alpha, n) / std::exp(0.5 * lf);
    }
    v *= std::exp(-0.5 * std::norm(alpha));
    double deficit = 1.0 - v.squaredNorm();
    if (deficit > 1e-10) throw std::invalid_argument("coherent_state: truncation deficit too large, raise ancilla_cut");
    return v / v.norm();
}

namespace detail {

/// States grouped by the occupation of all modes except `mode`; entry n of each group is
/// the index of the state with n photons in `mode` (or npos).
inline std::vector<std::vector<std::size_t>> rest_groups(const FockBasis& b, int mode) {
    constexpr auto npos = std::numeric_limits<std::size_t>::max();
    std::unordered_map<std::string, std::size_t> where;
    std::vector<std::vector<std::size_t>> out;
    std::string key(static_cast<std::size_t>(b.n_modes()), '\0');
    for (std::size_t s = 0; s < b.size(); ++s) {
        auto st = b.state(s);
        std::copy(st.begin(), st.end(), key.begin());
        key[static_cast<std::size_t>(mode)] = 0;
        auto [it, fresh] = where.emplace(key, out.size());
        if (fresh) out.emplace_back();
        auto& g = out[it->second];
        auto n = static_cast<std::size_t>(st[static_cast<std::size_t>(mode)]);
        if (g.size() <= n) g.resize(n + 1, npos);
        g[n] = s;
    }
    return out;
}

}  // namespace detail

/// Kraus operators of the drive/dissipation step on `site`, with the linear phase folded in.
inline std::vector<SpMat> drive_diss_kraus(const BasisPtr& basis, int site, const DriveDissParams& p, int ancilla_cut = 3) {
    detail::check_mode(*basis, site, "drive_diss_kraus");
    if (ancilla_cut < 2) throw std::invalid_argument("drive_diss_kraus: ancilla_cut must be >= 2");
    constexpr auto npos = std::numeric_limits<std::size_t>::max();
    const Vec psi = coherent_state(p.alpha, ancilla_cut);
    const double kdt = p.K * p.delta_t;

    std::map<int, Mat> cache;  // composite unitary per system-mode truncation
    auto composite = [&](int nmax) -> const Mat& {
        auto it = cache.find(nmax);
        if (it != cache.end()) return it->second;
        const int d = (nmax + 1) * ancilla_cut;
        Mat h = Mat::Zero(d, d);
        auto at = [&](int ni, int nc) { return ni * ancilla_cut + nc; };
        for (int ni = 0; ni < nmax; ++ni)
            for (int nc = 1; nc < ancilla_cut; ++nc) {
                double v = std::sqrt(double(ni + 1) * nc);  // b^dag c
                h(at(ni + 1, nc - 1), at(ni, nc)) = v;
                h(at(ni, nc), at(ni + 1, nc - 1)) = v;
            }
        Eigen::SelfAdjointEigenSolver<Mat> es(h);
        Vec ph = (es.eigenvalues().cast<cplx>() * cplx(0.0, -kdt)).array().exp();
        return cache.emplace(nmax, es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint()).first->second;
    };

    std::vector<std::vector<Triplet>> trip(static_cast<std::size_t>(ancilla_cut));
    for (const auto& g : detail::rest_groups(*basis, site)) {
        int nmax = static_cast<int>(g.size()) - 1;
        for (auto s : g)
            if (s == npos) throw std::invalid_argument("drive_diss_kraus: basis has gaps in the site occupation");
        const Mat& u = composite(nmax);
        for (int nin = 0; nin <= nmax; ++nin)
            for (int nout = 0; nout <= nmax; ++nout) {
                cplx ph = std::polar(1.0, p.Phi * nout);
                for (int m = 0; m < ancilla_cut; ++m) {
                    cplx v = 0.0;
                    for (int n = 0; n < ancilla_cut; ++n) v += psi[n] * u(nout * ancilla_cut + m, nin * ancilla_cut + n);
                    if (std::abs(v) > 1e-300)
                        trip[static_cast<std::size_t>(m)].emplace_back(static_cast<int>(g[static_cast<std::size_t>(nout)]),
                                                                      static_cast<int>(g[static_cast<std::size_t>(nin)]), ph * v);
                }
            }
    }
    std::vector<SpMat> out;
    const int d = static_cast<int>(basis->size());
    for (auto& t : trip) {
        SpMat k(d, d);
        k.setFromTriplets(t.begin(), t.end());
        out.push_back(std::move(k));
    }
    return out;
}

inline Mat apply_kraus(const std::vector<SpMat>& kraus, const std::vector<SpMat>& kraus_adj, const Mat& rho) {
    Mat out = Mat::Zero(rho.rows(), rho.cols());
    Mat left(rho.rows(), rho.cols());
    for (std::size_t m = 0; m < kraus.size(); ++m) {
        left.noalias() = kraus[m] * rho;
        out.noalias() += left * kraus_adj[m];
    }
    return out;
}

inline std::vector<SpMat> adjoints(const std::vector<SpMat>& ops) {
    std::vector<SpMat> out;
    for (const auto& k : ops) out.emplace_back(k.adjoint());
    return out;
}

inline Mat apply_kraus(const std::vector<SpMat>& kraus, const Mat& rho) { return apply_kraus(kraus, adjoints(kraus), rho); }

inline DensityMatrix drive_diss_channel(const DensityMatrix& rho, int site, const DriveDissParams& p, int ancilla_cut = 3) {
    return {rho.basis, apply_kraus(drive_diss_kraus(rho.basis, site, p, ancilla_cut), rho.matrix)};
}

/// One circulation: the Trotter step as rho -> U rho U^dag, then the drive/dissipation
/// step on every site. Operators are compiled once on the 0..n_max basis.
class FullChannel {
public:
    FullChannel(const LatticeModel& m, double dt, const DriveDissParams& p, int n_max = 3, int ancilla_cut = 3)
        : model_(m), dt_(dt), params_(p), n_max_(n_max) {
        basis_ = sectors_up_to(m.n_sites(), n_max);
        layers_ = compile_layers(basis_, trotter_step_sequence(m, dt, n_max));
        layers_adj_ = adjoints(layers_);
        for (int s = 0; s < m.n_sites(); ++s) {
            kraus_.push_back(drive_diss_kraus(basis_, s, p, ancilla_cut));
            kraus_adj_.push_back(adjoints(kraus_.back()));
        }
    }

    const BasisPtr& basis() const { return basis_; }
    const LatticeModel& model() const { return model_; }
    const DriveDissParams& params() const { return params_; }
    double delta_t() const { return dt_; }
    int n_max() const { return n_max_; }
    const std::vector<SpMat>& layers() const { return layers_; }

    Mat apply(const Mat& rho) const {
        Mat r = rho, left(rho.rows(), rho.cols());
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            left.noalias() = layers_[l] * r;
            r.noalias() = left * layers_adj_[l];
        }
        for (std::size_t s = 0; s < kraus_.size(); ++s) r = apply_kraus(kraus_[s], kraus_adj_[s], r);
        return r;
    }
    DensityMatrix operator()(const DensityMatrix& rho) const {
        check_same_basis(rho.basis, basis_);
        return {basis_, apply(rho.matrix)};
    }

private:
    LatticeModel model_;
    double dt_;
    DriveDissParams params_;
    int n_max_;
    BasisPtr basis_;
    std::vector<SpMat> layers_, layers_adj_;
    std::vector<std::vector<SpMat>> kraus_, kraus_adj_;
};

/// Trace norm of the Hermitian part.
inline double trace_norm(const Mat& a) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

struct SteadyStateReport {
    DensityMatrix rho_fix;
    double n_photon = 0.0;
    double P1 = 0.0, P2 = 0.0;
    std::optional<double> postselected_overlap;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

using Channel = std::function<DensityMatrix(const DensityMatrix&)>;

/// Power iteration rho <- channel(rho) until successive iterates differ by < tol in trace norm.
inline SteadyStateReport fixed_point(const Channel& channel, const DensityMatrix& initial, double tol = 1e-9, int max_iter = 100000) {
    SteadyStateReport r;
    r.rho_fix = initial;
    r.residual = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= max_iter; ++it) {
        DensityMatrix next = channel(r.rho_fix);
        r.residual = trace_norm(next.matrix - r.rho_fix.matrix);
        r.rho_fix = std::move(next);
        r.iterations = it;
        if (r.residual < tol) {
            r.converged = true;
            break;
        }
    }
    return r;
}

struct Observables {
    double n_photon = 0.0;
    std::vector<double> sector_population;
    double P1 = 0.0, P2 = 0.0;
    std::optional<double> postselected_overlap;
    double ratio() const { return P1 > 0.0 ? P2 / P1 : 0.0; }
};

/// `ground` holds orthonormal two-photon states as columns in the ordering of the
/// two-photon sector of `rho.basis`.
inline Observables steady_state_observables(const DensityMatrix& rho, const Mat& ground) {
    const auto& b = *rho.basis;
    Observables o;
    o.sector_population.assign(static_cast<std::size_t>(b.max_photons()) + 1, 0.0);
    for (std::size_t s = 0; s < b.size(); ++s) {
        double p = rho.matrix(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)).real();
        o.n_photon += p * b.total(s);
        o.sector_population[static_cast<std::size_t>(b.total(s))] += p;
    }
    if (o.sector_population.size() > 1) o.P1 = o.sector_population[1];
    if (o.sector_population.size() > 2) o.P2 = o.sector_population[2];
    if (ground.size() > 0 && b.has_sector(2) && o.P2 >= 1e-14) {
        auto [lo, hi] = b.sector_range(2);
        auto n = static_cast<Eigen::Index>(hi - lo);
        if (ground.rows() != n) throw std::invalid_argument("steady_state_observables: ground space dimension mismatch");
        Mat r2 = rho.matrix.block(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(lo), n, n);
        o.postselected_overlap = (ground.adjoint() * r2 * ground).trace().real() / o.P2;
    }
    return o;
}

/// Fixed point of a FullChannel by a preconditioned iteration
/// rho <- rho + P(channel(rho) - rho). P inverts the linearized map in the eigenbasis of
/// the step unitary: a coherence between eigenvectors a (sector k) and b (sector l)
/// relaxes as cos(K dt)^(k+l) e^{i Phi (k-l)} u_a conj(u_b) per step.
class SteadyStateSolver {
public:
    explicit SteadyStateSolver(const FullChannel& ch) : ch_(ch) {
        const auto& b = *ch.basis();
        for (int k = 0; k <= ch.n_max(); ++k) {
            auto [lo, hi] = b.sector_range(k);
            auto n = static_cast<Eigen::Index>(hi - lo);
            lo_.push_back(static_cast<Eigen::Index>(lo));
            dim_.push_back(n);
            Mat u = Mat::Identity(n, n);
            for (const auto& l : ch.layers()) {
                SpMat blk = l.block(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(lo), n, n);
                u = blk * u;
            }
            Eigen::ComplexSchur<Mat> schur(u);
            lam_.push_back(schur.matrixT().diagonal());
            vec_.push_back(schur.matrixU());
        }
    }

    /// Reuses the step eigenbasis of `donor`; the channels may differ only in the drive.
    SteadyStateSolver(const FullChannel& ch, const SteadyStateSolver& donor)
        : ch_(ch), lo_(donor.lo_), dim_(donor.dim_), lam_(donor.lam_), vec_(donor.vec_) {
        const auto& a = ch.layers();
        const auto& b = donor.ch_.layers();
        bool same = a.size() == b.size() && ch.basis()->size() == donor.ch_.basis()->size();
        for (std::size_t l = 0; same && l < a.size(); ++l) same = SpMat(a[l] - b[l]).norm() == 0.0;
        if (!same) throw std::invalid_argument("SteadyStateSolver: donor has a different Trotter step");
    }

    const Mat& eigenvectors(int k) const { return vec_[static_cast<std::size_t>(k)]; }
    const Vec& eigenphases(int k) const { return lam_[static_cast<std::size_t>(k)]; }

    SteadyStateReport solve(const DensityMatrix* warm = nullptr, double tol = 1e-10, int max_iter = 500) const {
        const auto& basis = ch_.basis();
        const auto d = static_cast<Eigen::Index>(basis->size());
        Mat rho;
        if (warm) {
            check_same_basis(warm->basis, basis);
            rho = warm->matrix;
        } else {
            rho = Mat::Zero(d, d);
            rho(0, 0) = 1.0;
        }
        SteadyStateReport r;
        r.residual = std::numeric_limits<double>::infinity();
        for (int it = 0; it < max_iter; ++it) {
            Mat res = ch_.apply(rho) - rho;
            r.residual = trace_norm(res);
            r.iterations = it + 1;
            if (r.residual < tol) {
                r.converged = true;
                break;
            }
            rho += precondition(res);
            rho = 0.5 * (rho + rho.adjoint()).eval();
            rho /= rho.trace();
        }
        r.rho_fix = {basis, std::move(rho)};
        return r;
    }

private:
    Mat precondition(const Mat& res) const {
        const double c = std::cos(ch_.params().K * ch_.delta_t());
        const double Phi = ch_.params().Phi;
        Mat out = Mat::Zero(res.rows(), res.cols());
        const int nk = static_cast<int>(dim_.size());
        for (int k = 0; k < nk; ++k)
            for (int l = 0; l < nk; ++l) {
                auto ku = static_cast<std::size_t>(k), lu = static_cast<std::size_t>(l);
                Mat blk = res.block(lo_[ku], lo_[lu], dim_[ku], dim_[lu]);
                if (k == 0 && l == 0) {
                    out.block(lo_[ku], lo_[lu], dim_[ku], dim_[lu]) = blk;
                    continue;
                }
                Mat e = vec_[ku].adjoint() * blk * vec_[lu];
                cplx f = std::pow(c, k + l) * std::polar(1.0, Phi * (k - l));
                for (Eigen::Index a = 0; a < e.rows(); ++a)
                    for (Eigen::Index bb = 0; bb < e.cols(); ++bb)
                        e(a, bb) /= 1.0 - f * lam_[ku][a] * std::conj(lam_[lu][bb]);
                out.block(lo_[ku], lo_[lu], dim_[ku], dim_[lu]) = vec_[ku] * e * vec_[lu].adjoint();
            }
        return out;
    }

    const FullChannel& ch_;
    std::vector<Eigen::Index> lo_, dim_;
    std::vector<Vec> lam_;
    std::vector<Mat> vec_;
};

inline SteadyStateReport with_observables(SteadyStateReport r, const Mat& ground) {
    auto o = steady_state_observables(r.rho_fix, ground);
    r.n_photon = o.n_photon;
    r.P1 = o.P1;
    r.P2 = o.P2;
    r.postselected_overlap = o.postselected_overlap;
    return r;
}

// ---------------------------------------------------------------------------
// Incoherent preparation with single-photon ancillas.

struct IncoherentParams {
    double chi = 0.0;
    double p_ref = 0.0;
    double phi1 = 0.0;
    double phi2 = 0.0;
};

/// phi1 = g2 - g1, phi2 = g2 - g3 + phi1 with g_k the ground eigenphase of the k-photon step.
inline std::pair<double, double> incoherent_phases(const LatticeModel& m, double dt) {
    double g[4];
    for (int k = 1; k <= 3; ++k) {
        auto r = effective_energies(step_unitary(m, dt, k), dt, k);
        g[k] = std::arg(r.phases[0]);
    }
    double p1 = g[2] - g[1];
    return {p1, g[2] - g[3] + p1};
}

/// Exact joint simulation of system (total photons <= n_sys) and one ancilla per site
/// (at most two photons each). Modes 0..M-1 are the system, M..2M-1 the ancillas.
class IncoherentEngine {
public:
    IncoherentEngine(const LatticeModel& m, double dt, const IncoherentParams& p, int n_sys = 3)
        : model_(m), p_(p), n_sys_(n_sys) {
        if (p.p_ref < 0.0 || p.p_ref > 1.0) throw std::invalid_argument("IncoherentEngine: p_ref outside [0,1]");
        const int M = m.n_sites();
        std::vector<int> caps(static_cast<std::size_t>(2 * M), FockBasis::no_cap);
        for (int a = M; a < 2 * M; ++a) caps[static_cast<std::size_t>(a)] = 2;
        std::vector<int> sec(static_cast<std::size_t>(n_sys + 2 * M + 1));
        for (std::size_t k = 0; k < sec.size(); ++k) sec[k] = static_cast<int>(k);
        basis_ = std::make_shared<const FockBasis>(2 * M, sec, caps, FockBasis::GroupLimit{0, M, n_sys});

        GateSequence seq;
        for (int s = 0; s < M; ++s) {
            GateDescriptor g;
            g.kind = GateKind::beamsplitter;
            g.modes = {M + s, s};
            g.theta = p.chi * dt;
            g.phi = pi;
            g.layer = 0;
            seq.push_back(g);
        }
        for (auto g : trotter_step_sequence(m, dt, n_sys)) {
            g.layer += 1;
            seq.push_back(g);
        }
        int last = seq.back().layer + 1;
        for (int s = 0; s < M; ++s) {
            GateDescriptor g;
            g.kind = GateKind::number_phase;
            g.modes = {M + s};
            g.phase_table = {0.0, p.phi1, p.phi2};
            g.layer = last;
            seq.push_back(g);
        }
        layers_ = compile_layers(basis_, seq);
        for (int s = 0; s < M; ++s) groups_.push_back(detail::rest_groups(*basis_, M + s));
        sys_basis_ = sectors_up_to(M, n_sys);
    }

    const BasisPtr& basis() const { return basis_; }
    const BasisPtr& system_basis() const { return sys_basis_; }

    /// Joint product state: system state `sys` (on system_basis) with every ancilla in |1>.
    DensityMatrix initial_state(const Vec& sys) const {
        const int M = model_.n_sites();
        Vec v = Vec::Zero(static_cast<Eigen::Index>(basis_->size()));
        std::vector<int> occ(static_cast<std::size_t>(2 * M), 1);
        for (std::size_t s = 0; s < sys_basis_->size(); ++s) {
            if (sys[static_cast<Eigen::Index>(s)] == cplx(0.0)) continue;
            for (int i = 0; i < M; ++i) occ[static_cast<std::size_t>(i)] = sys_basis_->occupation(s, i);
            v[static_cast<Eigen::Index>(basis_->index(occ))] = sys[static_cast<Eigen::Index>(s)];
        }
        return {basis_, v * v.adjoint()};
    }

    Mat unitary_part(const Mat& rho) const {
        Mat r = rho;
        for (const auto& u : layers_) {
            Mat left = u * r;
            r = (u * left.adjoint()).adjoint();
        }
        return r;
    }

    /// rho -> (1 - p) rho + p Tr_a(rho) (x) |1><1|_a for every ancilla a.
    Mat refresh(const Mat& rho) const {
        if (p_.p_ref == 0.0) return rho;
        Mat r = rho;
        for (const auto& groups : groups_) {
            const auto ng = static_cast<Eigen::Index>(groups.size());
            Mat traced = Mat::Zero(ng, ng);
            for (Eigen::Index a = 0; a < ng; ++a)
                for (Eigen::Index b = 0; b < ng; ++b) {
                    const auto& ga = groups[static_cast<std::size_t>(a)];
                    const auto& gb = groups[static_cast<std::size_t>(b)];
                    cplx s = 0.0;
                    for (std::size_t n = 0; n < std::min(ga.size(), gb.size()); ++n)
                        s += r(static_cast<Eigen::Index>(ga[n]), static_cast<Eigen::Index>(gb[n]));
                    traced(a, b) = s;
                }
            r *= (1.0 - p_.p_ref);
            for (Eigen::Index a = 0; a < ng; ++a)
                for (Eigen::Index b = 0; b < ng; ++b)
                    r(static_cast<Eigen::Index>(groups[static_cast<std::size_t>(a)][1]),
                      static_cast<Eigen::Index>(groups[static_cast<std::size_t>(b)][1])) += p_.p_ref * traced(a, b);
        }
        return r;
    }

    DensityMatrix step(const DensityMatrix& rho) const {
        check_same_basis(rho.basis, basis_);
        return {basis_, refresh(unitary_part(rho.matrix))};
    }

    /// Reduced system state on system_basis.
    DensityMatrix system_state(const DensityMatrix& rho) const {
        const int M = model_.n_sites();
        const auto d = static_cast<Eigen::Index>(basis_->size());
        std::vector<Eigen::Index> sys(static_cast<std::size_t>(d));
        std::vector<std::string> anc(static_cast<std::size_t>(d));
        std::vector<int> occ(static_cast<std::size_t>(M));
        for (Eigen::Index s = 0; s < d; ++s) {
            auto st = basis_->state(static_cast<std::size_t>(s));
            for (int i = 0; i < M; ++i) occ[static_cast<std::size_t>(i)] = st[static_cast<std::size_t>(i)];
            sys[static_cast<std::size_t>(s)] = static_cast<Eigen::Index>(sys_basis_->index(occ));
            anc[static_cast<std::size_t>(s)] = std::string(reinterpret_cast<const char*>(st.data()) + M, static_cast<std::size_t>(M));
        }
        Mat out = Mat::Zero(static_cast<Eigen::Index>(sys_basis_->size()), static_cast<Eigen::Index>(sys_basis_->size()));
        for (Eigen::Index a = 0; a < d; ++a)
            for (Eigen::Index b = 0; b < d; ++b)
                if (anc[static_cast<std::size_t>(a)] == anc[static_cast<std::size_t>(b)])
                    out(sys[static_cast<std::size_t>(a)], sys[static_cast<std::size_t>(b)]) += rho.matrix(a, b);
        return {sys_basis_, std::move(out)};
    }

    /// Bytes needed for one dense joint density matrix.
    static double memory_estimate(int n_sites, int n_sys = 3) {
        double dsys = 0.0;
        for (int k = 0; k <= n_sys; ++k) {
            double c = 1.0;
            for (int t = 1; t <= k; ++t) c = c * (n_sites + t - 1) / t;
            dsys += c;
        }
        double d = dsys * std::pow(3.0, n_sites);
        return d * d * 16.0;
    }

private:
    LatticeModel model_;
    IncoherentParams p_;
    int n_sys_;
    BasisPtr basis_, sys_basis_;
    std::vector<SpMat> layers_;
    std::vector<std::vector<std::vector<std::size_t>>> groups_;
};

struct IncoherentObservables {
    double mean_n = 0.0, var_n = 0.0;
    std::vector<double> sector_population;
    std::optional<double> ground_population;
};

/// `ground` as in steady_state_observables, on the system basis.
inline IncoherentObservables system_observables(const DensityMatrix& sys, const Mat* ground) {
    Observables o = steady_state_observables(sys, ground ? *ground : Mat());
    IncoherentObservables r;
    r.sector_population = o.sector_population;
    r.mean_n = o.n_photon;
    double n2 = 0.0;
    for (std::size_t k = 0; k < o.sector_population.size(); ++k) n2 += double(k * k) * o.sector_population[k];
    r.var_n = n2 - r.mean_n * r.mean_n;
    if (ground && o.postselected_overlap) r.ground_population = *o.postselected_overlap * o.P2;
    return r;
}

}  // namespace wgsim
