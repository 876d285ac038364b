#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace wgsim {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using SpMat = Eigen::SparseMatrix<cplx>;
using Triplet = Eigen::Triplet<cplx>;

inline constexpr double pi = 3.14159265358979323846;

/// Occupation-number basis of a multimode bosonic system restricted to a set
/// of total-photon sectors. States are ordered by sector (ascending), then
/// lexicographically by occupation vector.
class FockBasis {
public:
    static constexpr int no_cap = -1;

    /// Bound on the summed occupation of modes [first, first + count).
    struct GroupLimit {
        int first = 0;
        int count = 0;
        int max_total = 0;
    };

    /// Throws std::invalid_argument for n_modes < 1, empty or negative sectors.
    /// `mode_cap[m]` (optional) bounds the occupation of mode m.
    FockBasis(int n_modes, std::vector<int> sectors, std::vector<int> mode_cap = {},
              std::optional<GroupLimit> group = std::nullopt)
        : n_modes_(n_modes), cap_(std::move(mode_cap)), group_(group) {
        if (n_modes < 1) throw std::invalid_argument("FockBasis: n_modes must be >= 1");
        if (sectors.empty()) throw std::invalid_argument("FockBasis: empty sector list");
        std::set<int> uniq(sectors.begin(), sectors.end());
        if (*uniq.begin() < 0) throw std::invalid_argument("FockBasis: negative sector");
        if (!cap_.empty() && static_cast<int>(cap_.size()) != n_modes)
            throw std::invalid_argument("FockBasis: mode_cap length mismatch");
        if (group_ && (group_->first < 0 || group_->count < 1 || group_->first + group_->count > n_modes))
            throw std::invalid_argument("FockBasis: group limit out of range");
        sectors_.assign(uniq.begin(), uniq.end());
        if (sectors_.back() > 255) throw std::invalid_argument("FockBasis: sector too large");

        std::vector<std::uint8_t> cur(static_cast<std::size_t>(n_modes), 0);
        for (int k : sectors_) {
            sector_begin_.push_back(size());
            fill(cur, 0, k, 0);
            sector_end_.push_back(size());
        }
        index_.reserve(size());
        for (std::size_t i = 0; i < size(); ++i) index_.emplace(key(state(i)), i);
    }

    int n_modes() const { return n_modes_; }
    const std::vector<int>& sectors() const { return sectors_; }
    std::size_t size() const { return occ_.size() / static_cast<std::size_t>(n_modes_); }
    int max_photons() const { return sectors_.back(); }

    std::span<const std::uint8_t> state(std::size_t i) const {
        return {occ_.data() + i * static_cast<std::size_t>(n_modes_), static_cast<std::size_t>(n_modes_)};
    }
    int occupation(std::size_t i, int mode) const { return occ_[i * static_cast<std::size_t>(n_modes_) + static_cast<std::size_t>(mode)]; }
    int total(std::size_t i) const { return totals_[i]; }

    bool has_sector(int k) const { return std::binary_search(sectors_.begin(), sectors_.end(), k); }
    /// Half-open index range [first, second) of sector k; empty range if absent.
    std::pair<std::size_t, std::size_t> sector_range(int k) const {
        auto it = std::lower_bound(sectors_.begin(), sectors_.end(), k);
        if (it == sectors_.end() || *it != k) return {0, 0};
        auto s = static_cast<std::size_t>(it - sectors_.begin());
        return {sector_begin_[s], sector_end_[s]};
    }

    std::optional<std::size_t> find(std::span<const std::uint8_t> occ) const {
        if (static_cast<int>(occ.size()) != n_modes_) return std::nullopt;
        auto it = index_.find(key(occ));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }
    std::optional<std::size_t> find(const std::vector<int>& occ) const {
        if (static_cast<int>(occ.size()) != n_modes_) return std::nullopt;
        std::vector<std::uint8_t> b(occ.size());
        for (std::size_t m = 0; m < occ.size(); ++m) {
            if (occ[m] < 0 || occ[m] > 255) return std::nullopt;
            b[m] = static_cast<std::uint8_t>(occ[m]);
        }
        return find(std::span<const std::uint8_t>(b));
    }
    std::size_t index(const std::vector<int>& occ) const {
        auto i = find(occ);
        if (!i) throw std::invalid_argument("FockBasis: occupation not in basis");
        return *i;
    }

    std::vector<int> occupation_vector(std::size_t i) const {
        auto s = state(i);
        return {s.begin(), s.end()};
    }

    bool operator==(const FockBasis& o) const { return n_modes_ == o.n_modes_ && occ_ == o.occ_; }

private:
    static std::string key(std::span<const std::uint8_t> occ) {
        return {reinterpret_cast<const char*>(occ.data()), occ.size()};
    }

    int cap(int m) const { return cap_.empty() ? no_cap : cap_[static_cast<std::size_t>(m)]; }

    bool in_group(int m) const { return group_ && m >= group_->first && m < group_->first + group_->count; }

    void fill(std::vector<std::uint8_t>& cur, int mode, int left, int in_grp) {
        if (mode == n_modes_ - 1) {
            if (cap(mode) != no_cap && left > cap(mode)) return;
            if (in_group(mode) && in_grp + left > group_->max_total) return;
            cur[static_cast<std::size_t>(mode)] = static_cast<std::uint8_t>(left);
            occ_.insert(occ_.end(), cur.begin(), cur.end());
            int t = 0;
            for (auto v : cur) t += v;
            totals_.push_back(t);
            return;
        }
        int hi = cap(mode) == no_cap ? left : std::min(left, cap(mode));
        if (in_group(mode)) hi = std::min(hi, group_->max_total - in_grp);
        for (int n = 0; n <= hi; ++n) {
            cur[static_cast<std::size_t>(mode)] = static_cast<std::uint8_t>(n);
            fill(cur, mode + 1, left - n, in_grp + (in_group(mode) ? n : 0));
        }
        cur[static_cast<std::size_t>(mode)] = 0;
    }

    int n_modes_;
    std::vector<int> cap_;
    std::optional<GroupLimit> group_;
    std::vector<int> sectors_;
    std::vector<std::uint8_t> occ_;
    std::vector<int> totals_;
    std::vector<std::size_t> sector_begin_, sector_end_;
    std::unordered_map<std::string, std::size_t> index_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

inline BasisPtr enumerate_basis(int n_modes, std::vector<int> sectors) {
    return std::make_shared<const FockBasis>(n_modes, std::move(sectors));
}

inline BasisPtr sectors_up_to(int n_modes, int n_max) {
    std::vector<int> s(static_cast<std::size_t>(n_max) + 1);
    for (int k = 0; k <= n_max; ++k) s[static_cast<std::size_t>(k)] = k;
    return enumerate_basis(n_modes, std::move(s));
}

struct StateVector {
    BasisPtr basis;
    Vec amplitudes;

    double norm() const { return amplitudes.norm(); }
};

struct DensityMatrix {
    BasisPtr basis;
    Mat matrix;

    static DensityMatrix pure(const StateVector& psi) {
        return {psi.basis, psi.amplitudes * psi.amplitudes.adjoint()};
    }
    cplx trace() const { return matrix.trace(); }
    double hermiticity_error() const { return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff(); }
    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (matrix + matrix.adjoint()), Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }
};

/// Sparse operator on a FockBasis.
struct SectorOperator {
    BasisPtr basis;
    SpMat matrix;

    double max_abs(const SpMat& m) const {
        double r = 0.0;
        for (int k = 0; k < m.outerSize(); ++k)
            for (SpMat::InnerIterator it(m, k); it; ++it) r = std::max(r, std::abs(it.value()));
        return r;
    }
    bool is_hermitian(double tol = 1e-10) const {
        SpMat d = matrix - SpMat(matrix.adjoint());
        return max_abs(d) < tol;
    }
    bool is_unitary(double tol = 1e-10) const {
        SpMat id(matrix.rows(), matrix.cols());
        id.setIdentity();
        SpMat d = SpMat(matrix.adjoint()) * matrix - id;
        return max_abs(d) < tol;
    }
    /// Every nonzero entry connects states of equal total photon number.
    bool is_number_conserving(double tol = 1e-12) const {
        for (int k = 0; k < matrix.outerSize(); ++k)
            for (SpMat::InnerIterator it(matrix, k); it; ++it)
                if (std::abs(it.value()) > tol &&
                    basis->total(static_cast<std::size_t>(it.row())) != basis->total(static_cast<std::size_t>(it.col())))
                    return false;
        return true;
    }
};

enum class LadderKind { create, annihilate, number };

/// Matrix of b, b^dag or n on `basis`; transitions leaving the basis are dropped.
inline SectorOperator ladder_operator(const BasisPtr& basis, int mode, LadderKind kind) {
    if (mode < 0 || mode >= basis->n_modes()) throw std::out_of_range("ladder_operator: mode out of range");
    const auto d = basis->size();
    std::vector<Triplet> trip;
    trip.reserve(d);
    std::vector<std::uint8_t> tmp(static_cast<std::size_t>(basis->n_modes()));
    for (std::size_t c = 0; c < d; ++c) {
        auto s = basis->state(c);
        int n = s[static_cast<std::size_t>(mode)];
        if (kind == LadderKind::number) {
            if (n != 0) trip.emplace_back(static_cast<int>(c), static_cast<int>(c), cplx(n, 0.0));
            continue;
        }
        std::copy(s.begin(), s.end(), tmp.begin());
        double amp;
        if (kind == LadderKind::annihilate) {
            if (n == 0) continue;
            tmp[static_cast<std::size_t>(mode)] = static_cast<std::uint8_t>(n - 1);
            amp = std::sqrt(static_cast<double>(n));
        } else {
            if (n == 255) continue;
            tmp[static_cast<std::size_t>(mode)] = static_cast<std::uint8_t>(n + 1);
            amp = std::sqrt(static_cast<double>(n + 1));
        }
        if (auto r = basis->find(std::span<const std::uint8_t>(tmp)))
            trip.emplace_back(static_cast<int>(*r), static_cast<int>(c), cplx(amp, 0.0));
    }
    SpMat m(static_cast<int>(d), static_cast<int>(d));
    m.setFromTriplets(trip.begin(), trip.end());
    return {basis, std::move(m)};
}

/// b_to^dag b_from, i.e. the photon-hopping term moving one photon from `from` to `to`.
inline SectorOperator hopping_operator(const BasisPtr& basis, int from, int to) {
    const int M = basis->n_modes();
    if (from < 0 || from >= M || to < 0 || to >= M) throw std::out_of_range("hopping_operator: mode out of range");
    if (from == to) return ladder_operator(basis, from, LadderKind::number);
    const auto d = basis->size();
    std::vector<Triplet> trip;
    std::vector<std::uint8_t> tmp(static_cast<std::size_t>(M));
    for (std::size_t c = 0; c < d; ++c) {
        auto s = basis->state(c);
        int nf = s[static_cast<std::size_t>(from)], nt = s[static_cast<std::size_t>(to)];
        if (nf == 0) continue;
        std::copy(s.begin(), s.end(), tmp.begin());
        tmp[static_cast<std::size_t>(from)] = static_cast<std::uint8_t>(nf - 1);
        tmp[static_cast<std::size_t>(to)] = static_cast<std::uint8_t>(nt + 1);
        if (auto r = basis->find(std::span<const std::uint8_t>(tmp)))
            trip.emplace_back(static_cast<int>(*r), static_cast<int>(c), cplx(std::sqrt(double(nf) * double(nt + 1)), 0.0));
    }
    SpMat m(static_cast<int>(d), static_cast<int>(d));
    m.setFromTriplets(trip.begin(), trip.end());
    return {basis, std::move(m)};
}

/// Total photon number as a diagonal vector.
inline Eigen::VectorXd total_number(const FockBasis& basis) {
    Eigen::VectorXd n(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i) n[static_cast<Eigen::Index>(i)] = basis.total(i);
    return n;
}

inline StateVector product_fock_state(const BasisPtr& basis, const std::vector<int>& occupation) {
    auto i = basis->find(occupation);
    if (!i) throw std::invalid_argument("product_fock_state: occupation not in basis");
    Vec a = Vec::Zero(static_cast<Eigen::Index>(basis->size()));
    a[static_cast<Eigen::Index>(*i)] = 1.0;
    return {basis, std::move(a)};
}

inline StateVector vacuum(const BasisPtr& basis) {
    return product_fock_state(basis, std::vector<int>(static_cast<std::size_t>(basis->n_modes()), 0));
}

}  // namespace wgsim
