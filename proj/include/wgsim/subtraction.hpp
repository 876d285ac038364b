#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace wgsim {

/// Real pulse profile u(t) on [0, 1], zero outside, normalized so that int u^2 = 1.
class PulseShape {
public:
    static PulseShape square() {
        return PulseShape("square", [](double t) { return t >= 0.0 && t <= 1.0 ? 1.0 : 0.0; });
    }

    static PulseShape bump() {
        return PulseShape("bump", [](double t) {
            double s = 0.25 - (t - 0.5) * (t - 0.5);
            return s > 0.0 ? std::exp(-0.25 / s) : 0.0;
        });
    }

    /// Piecewise-linear profile through equally spaced samples on [0, 1].
    static PulseShape samples(std::vector<double> v) {
        if (v.size() < 2) throw std::invalid_argument("PulseShape: need at least two samples");
        auto data = std::make_shared<std::vector<double>>(std::move(v));
        return PulseShape("custom", [data](double t) {
            if (t < 0.0 || t > 1.0) return 0.0;
            double x = t * static_cast<double>(data->size() - 1);
            auto i = std::min(static_cast<std::size_t>(x), data->size() - 2);
            double f = x - static_cast<double>(i);
            return (1.0 - f) * (*data)[i] + f * (*data)[i + 1];
        });
    }

    const std::string& name() const { return name_; }
    double operator()(double t) const { return t < 0.0 || t > 1.0 ? 0.0 : scale_ * raw_(t); }

private:
    PulseShape(std::string name, std::function<double(double)> raw) : name_(std::move(name)), raw_(std::move(raw)) {
        // Simpson on a fine grid; exact for the square pulse, spectrally accurate for the bump
        const int n = 1 << 16;
        double h = 1.0 / n, s = 0.0;
        for (int i = 0; i <= n; ++i) {
            double v = raw_(i * h);
            double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            s += w * v * v;
        }
        s *= h / 3.0;
        if (!(s > 0.0)) throw std::invalid_argument("PulseShape: zero pulse");
        scale_ = 1.0 / std::sqrt(s);
    }

    std::string name_;
    std::function<double(double)> raw_;
    double scale_ = 1.0;
};

/// Pulse-derived quantities on a uniform grid t_i = i h over [0, 1]:
/// u_tilde' = 2g (u - u_tilde), Theta' = 2g (u_tilde - u - Theta),
/// w' = 4g (u u_tilde - u Theta - w), G(t) = int_t^1 u^2.
struct SubtractionDerived {
    double gamma = 0.0;
    int n = 0;  // number of intervals, a multiple of 4
    double h = 0.0;
    std::vector<double> t, u, u_tilde, theta_tilde, w_tilde, G;
};

namespace detail {

inline int subtraction_grid(int grid_points, double gamma) {
    // stiffness guard: 2 gamma h <= 1/40 keeps RK4 and Simpson errors near 1e-9
    double need = std::ceil(80.0 * gamma);
    double n = std::max<double>(grid_points, need);
    if (n > 5e7) throw std::invalid_argument("subtraction: gamma too large for the grid");
    int k = static_cast<int>(n);
    return (k + 3) / 4 * 4;
}

/// Composite Simpson over nodes 0..n (n even) with step h.
inline double simpson(const std::vector<double>& f, double h) {
    const auto n = f.size() - 1;
    double s = f.front() + f.back();
    for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
    return s * h / 3.0;
}

/// Backward integration of y' = a y - b(t) from y(1) = y1, using RK4 with step 2h so
/// that b is only needed at grid nodes. Returns y at every even node (size n/2 + 1).
inline std::vector<double> backward_linear(double a, const std::vector<double>& b, double h, double y1) {
    const std::size_t n = b.size() - 1;
    std::vector<double> y(n / 2 + 1);
    y.back() = y1;
    const double H = -2.0 * h;
    for (std::size_t k = n / 2; k > 0; --k) {
        std::size_t i = 2 * k;
        double yc = y[k];
        auto f = [&](double yy, double bb) { return a * yy - bb; };
        double k1 = f(yc, b[i]);
        double k2 = f(yc + 0.5 * H * k1, b[i - 1]);
        double k3 = f(yc + 0.5 * H * k2, b[i - 1]);
        double k4 = f(yc + H * k3, b[i - 2]);
        y[k - 1] = yc + H / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return y;
}

inline std::vector<double> every_other(const std::vector<double>& v) {
    std::vector<double> o;
    o.reserve(v.size() / 2 + 1);
    for (std::size_t i = 0; i < v.size(); i += 2) o.push_back(v[i]);
    return o;
}

}  // namespace detail

inline SubtractionDerived derive_quantities(const PulseShape& pulse, double gamma, int grid_points = 4096) {
    if (!(gamma > 0.0)) throw std::invalid_argument("derive_quantities: gamma must be positive");
    if (grid_points < 1024) throw std::invalid_argument("derive_quantities: need at least 1024 grid points");
    SubtractionDerived d;
    d.gamma = gamma;
    d.n = detail::subtraction_grid(grid_points, gamma);
    d.h = 1.0 / d.n;
    const auto N = static_cast<std::size_t>(d.n);
    d.t.resize(N + 1);
    d.u.resize(N + 1);
    for (std::size_t i = 0; i <= N; ++i) {
        d.t[i] = static_cast<double>(i) * d.h;
        d.u[i] = pulse(d.t[i]);
    }
    // the square pulse jumps at the ends; take one-sided values inside [0, 1]
    d.u.front() = pulse(0.0);
    d.u.back() = pulse(1.0);

    d.u_tilde.assign(N + 1, 0.0);
    d.theta_tilde.assign(N + 1, 0.0);
    d.w_tilde.assign(N + 1, 0.0);
    std::vector<double> cum(N + 1, 0.0);
    const double g2 = 2.0 * gamma, g4 = 4.0 * gamma, h = d.h;
    auto rhs = [&](double uu, const double* y, double* dy) {
        dy[0] = g2 * (uu - y[0]);
        dy[1] = g2 * (y[0] - uu - y[1]);
        dy[2] = g4 * (uu * y[0] - uu * y[1] - y[2]);
        dy[3] = uu * uu;
    };
    double y[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < N; ++i) {
        double ua = d.u[i], um = pulse(d.t[i] + 0.5 * h), ub = d.u[i + 1];
        double k1[4], k2[4], k3[4], k4[4], tmp[4];
        rhs(ua, y, k1);
        for (int c = 0; c < 4; ++c) tmp[c] = y[c] + 0.5 * h * k1[c];
        rhs(um, tmp, k2);
        for (int c = 0; c < 4; ++c) tmp[c] = y[c] + 0.5 * h * k2[c];
        rhs(um, tmp, k3);
        for (int c = 0; c < 4; ++c) tmp[c] = y[c] + h * k3[c];
        rhs(ub, tmp, k4);
        for (int c = 0; c < 4; ++c) y[c] += h / 6.0 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
        d.u_tilde[i + 1] = y[0];
        d.theta_tilde[i + 1] = y[1];
        d.w_tilde[i + 1] = y[2];
        cum[i + 1] = y[3];
    }
    d.G.resize(N + 1);
    for (std::size_t i = 0; i <= N; ++i) d.G[i] = std::max(0.0, cum[N] - cum[i]) / cum[N];
    return d;
}

/// int_0^inf |u - u_tilde|^2; on [1, inf) u_tilde decays as u_tilde(1) e^{-2 gamma (t-1)}.
inline double p_fail_k1(const SubtractionDerived& d) {
    std::vector<double> f(d.u.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = (d.u[i] - d.u_tilde[i]) * (d.u[i] - d.u_tilde[i]);
    double ut1 = d.u_tilde.back();
    return detail::simpson(f, d.h) + ut1 * ut1 / (4.0 * d.gamma);
}

inline double p_fail_k1(const PulseShape& p, double gamma, int grid_points = 4096) {
    return p_fail_k1(derive_quantities(p, gamma, grid_points));
}

/// Two-photon failure probability int dt int dtau |C(t, t + tau)|^2 with
/// C(t, s) = sqrt2 [(u(t) - ut(t))(u(s) - ut(s, t)) - u(t) ut(t) e^{-2g(s-t)}].
/// Using ut(s, t) = ut(s) - e^{-2g(s-t)} ut(t) and a = u - ut this is
/// C = sqrt2 [a(t) a(s) - ut(t)^2 e^{-2g(s-t)}], which vanishes for t > 1.
inline double p_fail_k2(const SubtractionDerived& d) {
    const std::size_t N = d.u.size() - 1;
    const double g = d.gamma;
    std::vector<double> a(N + 1), a2(N + 1);
    for (std::size_t i = 0; i <= N; ++i) {
        a[i] = d.u[i] - d.u_tilde[i];
        a2[i] = a[i] * a[i];
    }
    const double ut1 = d.u_tilde.back();
    // A(t) = int_t^inf a^2, B(t) = int_t^inf a(s) e^{-2g(s-t)} ds
    auto A = detail::backward_linear(0.0, a2, d.h, ut1 * ut1 / (4.0 * g));
    auto B = detail::backward_linear(2.0 * g, a, d.h, -ut1 / (4.0 * g));
    auto ac = detail::every_other(a), utc = detail::every_other(d.u_tilde);
    std::vector<double> f(A.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        double q = utc[k] * utc[k];
        f[k] = 2.0 * (ac[k] * ac[k] * A[k] - 2.0 * ac[k] * q * B[k] + q * q / (4.0 * g));
    }
    return detail::simpson(f, 2.0 * d.h);
}

inline double p_fail_k2(const PulseShape& p, double gamma, int grid_points = 4096) {
    return p_fail_k2(derive_quantities(p, gamma, grid_points));
}

/// |k int_0^1 u_tilde u G^{k-1} dt|^2.
inline double f_sub_single(const SubtractionDerived& d, int k) {
    if (k < 1) throw std::invalid_argument("f_sub_single: k must be >= 1");
    std::vector<double> f(d.u.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = d.u_tilde[i] * d.u[i] * std::pow(d.G[i], k - 1);
    double v = k * detail::simpson(f, d.h);
    return v * v;
}

inline double f_sub_single(const PulseShape& p, double gamma, int k, int grid_points = 4096) {
    return f_sub_single(derive_quantities(p, gamma, grid_points), k);
}

/// |k(k-1) int_0^1 dt1 int_t1^1 dt2 [ut(t1) ut(t2, t1) + w(t1)/2 e^{-2g(t2-t1)}] u(t1) u(t2) G(t2)^{k-2}|^2.
/// The inner integral separates into P(t1) = int_t1^1 ut h and E(t1) = int_t1^1 e^{-2g(t2-t1)} h,
/// h = u G^{k-2}, both solved as backward ODEs.
inline double f_sub_double(const SubtractionDerived& d, int k) {
    if (k < 2) throw std::invalid_argument("f_sub_double: k must be >= 2");
    const std::size_t N = d.u.size() - 1;
    std::vector<double> hh(N + 1), uh(N + 1);
    for (std::size_t i = 0; i <= N; ++i) {
        hh[i] = d.u[i] * std::pow(d.G[i], k - 2);
        uh[i] = d.u_tilde[i] * hh[i];
    }
    auto P = detail::backward_linear(0.0, uh, d.h, 0.0);
    auto E = detail::backward_linear(2.0 * d.gamma, hh, d.h, 0.0);
    auto uc = detail::every_other(d.u), utc = detail::every_other(d.u_tilde), wc = detail::every_other(d.w_tilde);
    std::vector<double> f(P.size());
    for (std::size_t j = 0; j < f.size(); ++j)
        f[j] = uc[j] * (utc[j] * P[j] + (0.5 * wc[j] - utc[j] * utc[j]) * E[j]);
    double v = double(k) * double(k - 1) * detail::simpson(f, 2.0 * d.h);
    return v * v;
}

inline double f_sub_double(const PulseShape& p, double gamma, int k, int grid_points = 4096) {
    return f_sub_double(derive_quantities(p, gamma, grid_points), k);
}

/// Square-pulse closed forms of 1 - F_sub.
inline double square_infidelity_k1(double g) {
    double e = 1.0 - std::exp(-2.0 * g);
    return e / g * (1.0 - e / (4.0 * g));
}

inline double square_infidelity_k2(double g) {
    double e = 1.0 - std::exp(-2.0 * g);
    return 2.0 / g * (1.0 - e / (2.0 * g)) * (1.0 - 1.0 / (2.0 * g) + e / (4.0 * g * g));
}

inline double gate_infidelity(double p_fail, double dphi) {
    if (p_fail < 0.0 || p_fail > 1.0) throw std::invalid_argument("gate_infidelity: p_fail outside [0,1]");
    return 2.0 * p_fail * (1.0 - p_fail) * (1.0 - std::cos(dphi));
}

inline double gate_fidelity_two_layer(double p1, double p2, double p3, double p4, double phi1, double phi2, double phi3) {
    for (double p : {p1, p2, p3, p4})
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("gate_fidelity_two_layer: probability outside [0,1]");
    if (std::abs(p1 + p2 + p3 + p4 - 1.0) > 1e-9) throw std::invalid_argument("gate_fidelity_two_layer: probabilities must sum to 1");
    using c = std::complex<double>;
    c s = p1 * std::polar(1.0, (phi1 - phi3) + (phi2 - phi3)) + p2 * std::polar(1.0, phi2 - phi3) +
          p3 * std::polar(1.0, phi1 - phi3) + c(p4);
    return std::norm(s);
}

inline double gate_infidelity_two_layer(double p1, double p2, double p3, double p4, double phi1, double phi2, double phi3) {
    return 1.0 - gate_fidelity_two_layer(p1, p2, p3, p4, phi1, phi2, phi3);
}

}  // namespace wgsim
