#pragma once

#include "lattice.hpp"

#include <iomanip>
#include <sstream>

namespace wgsim {

/// Site placement on time-bin waveguides. Positions are arrival times at the circuit
/// input (v_g = 1). A finite `period` makes every waveguide a loop of that length.
struct TimeBinLayout {
    int n_waveguides = 2;
    std::vector<int> waveguide;     // per site, 1-based
    std::vector<double> position;   // per site
    double l_x = 1.0, l_y = 0.0;
    double period = 0.0;            // 0: open line
};

struct Window {
    double lo = 0.0, hi = 0.0;
};

enum class EventKind { delay, beamsplitter, phase };

/// Beamsplitter events couple the bins of wg_a (mode i) and wg_b (mode j) that coincide.
/// Without windows the element is static; otherwise it is on only inside the windows.
struct ScheduleEvent {
    EventKind kind = EventKind::delay;
    int wg_a = 1, wg_b = 2;
    double length = 0.0;
    double theta = 0.0, phi = 0.0;
    std::vector<Window> windows;
    std::vector<double> table;
};

struct Schedule {
    TimeBinLayout layout;
    std::vector<ScheduleEvent> events;
};

namespace detail {

inline ScheduleEvent delay(int wg, double len) {
    ScheduleEvent e;
    e.kind = EventKind::delay;
    e.wg_a = wg;
    e.length = len;
    return e;
}

inline ScheduleEvent bs(int a, int b, double theta, double phi, std::vector<Window> w = {}) {
    ScheduleEvent e;
    e.kind = EventKind::beamsplitter;
    e.wg_a = a;
    e.wg_b = b;
    e.theta = theta;
    e.phi = phi;
    e.windows = std::move(w);
    return e;
}

inline ScheduleEvent phase(int wg, std::vector<double> table) {
    ScheduleEvent e;
    e.kind = EventKind::phase;
    e.wg_a = wg;
    e.table = std::move(table);
    return e;
}

/// Offset of 1-based coordinate x (odd or even) inside its waveguide, in units of the pitch.
inline int slot(int x) { return x % 2 ? (x - 1) / 2 : x / 2 - 1; }

/// Gated beamsplitters for a list of (position, theta, phi) firings: one event per
/// distinct (theta, phi), each with windows of half-width pitch/4 around its firings.
inline void gated(std::vector<ScheduleEvent>& out, int a, int b, const std::vector<std::tuple<double, double, double>>& fire, double pitch) {
    std::vector<std::pair<std::pair<double, double>, std::vector<Window>>> groups;
    for (auto [pos, th, ph] : fire) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](auto& g) {
            return std::abs(g.first.first - th) < 1e-15 && std::abs(g.first.second - ph) < 1e-15;
        });
        if (it == groups.end()) {
            groups.push_back({{th, ph}, {}});
            it = groups.end() - 1;
        }
        it->second.push_back({pos - 0.25 * pitch, pos + 0.25 * pitch});
    }
    for (auto& [k, w] : groups) {
        std::sort(w.begin(), w.end(), [](auto& p, auto& q) { return p.lo < q.lo; });
        out.push_back(bs(a, b, k.first, k.second, std::move(w)));
    }
}

inline const Edge& find_edge(const LatticeModel& m, int i, int j) {
    for (const auto& e : m.edges)
        if (e.i == i && e.j == j) return e;
    throw std::invalid_argument("schedule: lattice lacks a required link");
}

}  // namespace detail

enum class Variant1D { even_simple, general };

/// Periodic 1D circuit. Odd x (1-based) ride WG1, even x WG2; x = 1 starts aligned with
/// x = 2. `phi` is the beamsplitter phase of every link; a nonempty `onsite` table adds
/// the on-site phase elements.
inline Schedule compile_1d(int nx, double l_x, double theta, Variant1D variant, double phi = pi,
                           const std::vector<double>& onsite = {}) {
    if (nx < 4 || nx % 2) {
        if (variant == Variant1D::even_simple) throw std::invalid_argument("compile_1d: even_simple needs an even N_x");
        throw std::invalid_argument("compile_1d: N_x must be even and >= 4");
    }
    if (!(l_x > 0.0)) throw std::invalid_argument("compile_1d: l_x must be positive");
    Schedule s;
    auto& L = s.layout;
    L.n_waveguides = 2;
    L.l_x = l_x;
    for (int x = 1; x <= nx; ++x) {
        L.waveguide.push_back(x % 2 ? 1 : 2);
        L.position.push_back(detail::slot(x) * l_x);
    }
    const int half = nx / 2;
    auto& ev = s.events;
    if (variant == Variant1D::even_simple) {
        L.period = half * l_x;
        ev.push_back(detail::bs(1, 2, theta, phi));
        ev.push_back(detail::delay(2, l_x));
        ev.push_back(detail::bs(2, 1, theta, phi));
        ev.push_back(detail::delay(2, (half - 1) * l_x));
    } else {
        ev.push_back(detail::bs(1, 2, theta, phi));
        ev.push_back(detail::delay(2, l_x));
        std::vector<std::tuple<double, double, double>> f1;
        for (int k = 1; k < half; ++k) f1.emplace_back(k * l_x, theta, phi);
        detail::gated(ev, 2, 1, f1, l_x);
        ev.push_back(detail::delay(1, half * l_x));
        detail::gated(ev, 2, 1, {{half * l_x, theta, phi}}, l_x);
        ev.push_back(detail::delay(2, (half - 1) * l_x));
    }
    if (!onsite.empty()) {
        ev.push_back(detail::phase(1, onsite));
        ev.push_back(detail::phase(2, onsite));
    }
    return s;
}

/// 1D schedule from a periodic chain model (uniform link amplitude required).
inline Schedule compile_1d(const LatticeModel& m, double dt, double l_x, Variant1D variant, int max_photons = 3) {
    if (m.geometry != Geometry::chain || m.boundary != Boundary::periodic)
        throw std::invalid_argument("compile_1d: periodic chain required");
    const auto& e0 = m.edges.front();
    for (const auto& e : m.edges)
        if (std::abs(e.amp - e0.amp) > 1e-14) throw std::invalid_argument("compile_1d: non-uniform links");
    std::vector<double> table;
    if (m.U != 0.0)
        for (int n = 0; n <= std::max(max_photons, 2); ++n) table.push_back(-dt * m.onsite(n));
    return compile_1d(m.nx, l_x, std::abs(e0.amp) * dt, variant, std::arg(e0.amp), table);
}

/// Periodic 2D circuit. WG1: odd x, odd y; WG2: even x, odd y; WG3: odd x, even y;
/// WG4: even x, even y. Rows form coarse bins of pitch l_y. Three fine layers handle the
/// x links, three coarse layers the y links; link phases ride on gated beamsplitters.
inline Schedule compile_2d(const LatticeModel& m, double dt, double l_x, double l_y, int max_photons = 3) {
    if (m.geometry != Geometry::square || m.boundary != Boundary::periodic)
        throw std::invalid_argument("compile_2d: periodic square lattice required");
    const int nx = m.nx, ny = m.ny;
    if (nx % 2 || ny % 2 || nx < 4 || ny < 4) throw std::invalid_argument("compile_2d: N_x, N_y must be even and >= 4");
    if (!(l_y > nx * l_x / 2.0)) throw std::invalid_argument("compile_2d: need l_y > N_x l_x / 2");
    Schedule s;
    auto& L = s.layout;
    L.n_waveguides = 4;
    L.l_x = l_x;
    L.l_y = l_y;
    L.waveguide.resize(static_cast<std::size_t>(m.n_sites()));
    L.position.resize(static_cast<std::size_t>(m.n_sites()));
    auto wg_of = [](int x, int y) { return (y % 2 ? 0 : 2) + (x % 2 ? 1 : 2); };  // 1-based x, y
    for (int y = 1; y <= ny; ++y)
        for (int x = 1; x <= nx; ++x) {
            auto site = static_cast<std::size_t>(m.site(x - 1, y - 1));
            L.waveguide[site] = wg_of(x, y);
            L.position[site] = detail::slot(y) * l_y + detail::slot(x) * l_x;
        }
    std::vector<double> pos = L.position;  // tracked through the delays
    auto& ev = s.events;
    auto shift = [&](int wg, double len) {
        ev.push_back(detail::delay(wg, len));
        for (std::size_t i = 0; i < pos.size(); ++i)
            if (L.waveguide[i] == wg) pos[i] += len;
    };
    auto link = [&](int x0, int y0, int x1, int y1) {
        const auto& e = detail::find_edge(m, m.site(x0, y0), m.site(x1, y1));
        return std::make_tuple(pos[static_cast<std::size_t>(e.i)], std::abs(e.amp) * dt, std::arg(e.amp));
    };
    using Fire = std::vector<std::tuple<double, double, double>>;
    const int hx = nx / 2, hy = ny / 2;
    // window width l_x / 2, narrowed when bins of different rows come closer than that:
    // separations are dc * l_y + ds * l_x with |dc| <= N_y / 2
    double gap = l_x;
    for (int dc = 1; dc <= hy; ++dc) {
        double r = std::fmod(dc * l_y, l_x);
        r = std::min(r, l_x - r);
        if (r > 1e-9 * l_x) gap = std::min(gap, r);
    }
    const double pitch = std::min(l_x, 4.0 * gap / 3.0);

    // x links: (odd, odd+1), then (even, even+1), then the wrap (N_x, 1); 0-based x0 = x - 1
    for (int pair : {0, 1}) {
        int a = pair == 0 ? 1 : 3, b = a + 1;
        int ypar = pair == 0 ? 1 : 0;
        Fire f;
        for (int y = 1; y <= ny; ++y)
            if (y % 2 == ypar)
                for (int x = 1; x < nx; x += 2) f.push_back(link(x - 1, y - 1, x, y - 1));
        detail::gated(ev, a, b, f, pitch);
    }
    shift(2, l_x);
    shift(4, l_x);
    for (int pair : {0, 1}) {
        int a = pair == 0 ? 2 : 4, b = a - 1;
        int ypar = pair == 0 ? 1 : 0;
        Fire f;
        for (int y = 1; y <= ny; ++y)
            if (y % 2 == ypar)
                for (int x = 2; x < nx; x += 2) f.push_back(link(x - 1, y - 1, x, y - 1));
        detail::gated(ev, a, b, f, pitch);
    }
    shift(1, hx * l_x);
    shift(3, hx * l_x);
    for (int pair : {0, 1}) {
        int a = pair == 0 ? 2 : 4, b = a - 1;
        int ypar = pair == 0 ? 1 : 0;
        Fire f;
        for (int y = 1; y <= ny; ++y)
            if (y % 2 == ypar) f.push_back(link(nx - 1, y - 1, 0, y - 1));
        detail::gated(ev, a, b, f, pitch);
    }
    shift(2, (hx - 1) * l_x);
    shift(4, (hx - 1) * l_x);

    // y links on coarse bins: WG1-WG3 (odd x) and WG2-WG4 (even x)
    for (int pair : {0, 1}) {
        int a = pair == 0 ? 1 : 2, b = a + 2;
        int xpar = pair == 0 ? 1 : 0;
        Fire f;
        for (int x = 1; x <= nx; ++x)
            if (x % 2 == xpar)
                for (int y = 1; y < ny; y += 2) f.push_back(link(x - 1, y - 1, x - 1, y));
        detail::gated(ev, a, b, f, pitch);
    }
    shift(3, l_y);
    shift(4, l_y);
    for (int pair : {0, 1}) {
        int a = pair == 0 ? 3 : 4, b = a - 2;
        int xpar = pair == 0 ? 1 : 0;
        Fire f;
        for (int x = 1; x <= nx; ++x)
            if (x % 2 == xpar)
                for (int y = 2; y < ny; y += 2) f.push_back(link(x - 1, y - 1, x - 1, y));
        detail::gated(ev, a, b, f, pitch);
    }
    shift(1, hy * l_y);
    shift(2, hy * l_y);
    for (int pair : {0, 1}) {
        int a = pair == 0 ? 3 : 4, b = a - 2;
        int xpar = pair == 0 ? 1 : 0;
        Fire f;
        for (int x = 1; x <= nx; ++x)
            if (x % 2 == xpar) f.push_back(link(x - 1, ny - 1, x - 1, 0));
        detail::gated(ev, a, b, f, pitch);
    }
    shift(3, (hy - 1) * l_y);
    shift(4, (hy - 1) * l_y);

    if (m.U != 0.0) {
        std::vector<double> table;
        for (int n = 0; n <= std::max(max_photons, 2); ++n) table.push_back(-dt * m.onsite(n));
        for (int wg = 1; wg <= 4; ++wg) ev.push_back(detail::phase(wg, table));
    }
    return s;
}

/// Modes coupled by one beamsplitter firing, in firing order.
struct Firing {
    int i = 0, j = 0;
    double time = 0.0;
};

struct ScheduleSimulation {
    SectorOperator unitary;
    std::vector<Firing> log;
};

class schedule_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Replays the schedule on `basis` (modes = sites). Delays move bins; a beamsplitter
/// fires on each coincident pair (inside an on-window for gated elements); phase
/// elements act on every bin of their waveguide.
inline ScheduleSimulation simulate_schedule(const Schedule& s, const BasisPtr& basis) {
    const auto& L = s.layout;
    const int n = static_cast<int>(L.position.size());
    if (basis->n_modes() != n) throw std::invalid_argument("simulate_schedule: basis does not match layout");
    std::vector<double> pos = L.position;
    const double eps = 1e-9 * std::max(1.0, L.l_x);
    auto wrap = [&](double p) {
        if (L.period <= 0.0) return p;
        double q = std::fmod(p, L.period);
        if (q < 0) q += L.period;
        if (L.period - q < eps) q = 0.0;
        return q;
    };
    for (auto& p : pos) p = wrap(p);
    auto bins = [&](int wg) {
        std::vector<int> b;
        for (int i = 0; i < n; ++i)
            if (L.waveguide[static_cast<std::size_t>(i)] == wg) b.push_back(i);
        std::sort(b.begin(), b.end(), [&](int a, int c) { return pos[static_cast<std::size_t>(a)] < pos[static_cast<std::size_t>(c)]; });
        for (std::size_t k = 1; k < b.size(); ++k)
            if (std::abs(pos[static_cast<std::size_t>(b[k])] - pos[static_cast<std::size_t>(b[k - 1])]) < eps) {
                std::ostringstream os;
                os << "simulate_schedule: bins of sites " << b[k - 1] << " and " << b[k] << " collide in WG" << wg
                   << " at position " << pos[static_cast<std::size_t>(b[k])];
                throw schedule_error(os.str());
            }
        return b;
    };

    ScheduleSimulation out;
    SpMat u(static_cast<int>(basis->size()), static_cast<int>(basis->size()));
    u.setIdentity();
    for (const auto& e : s.events) {
        switch (e.kind) {
            case EventKind::delay:
                if (e.length < 0.0) throw std::invalid_argument("simulate_schedule: negative delay");
                for (int i = 0; i < n; ++i)
                    if (L.waveguide[static_cast<std::size_t>(i)] == e.wg_a) pos[static_cast<std::size_t>(i)] = wrap(pos[static_cast<std::size_t>(i)] + e.length);
                break;
            case EventKind::phase:
                for (int i : bins(e.wg_a)) u = (number_phase_gate(basis, i, e.table).matrix * u).pruned();
                break;
            case EventKind::beamsplitter: {
                auto A = bins(e.wg_a), B = bins(e.wg_b);
                auto on = [&](double p) {
                    if (e.windows.empty()) return true;
                    for (const auto& w : e.windows)
                        if (p >= w.lo && p <= w.hi) return true;
                    return false;
                };
                std::vector<char> usedB(B.size(), 0);
                for (int a : A) {
                    double p = pos[static_cast<std::size_t>(a)];
                    if (!on(p)) continue;
                    int partner = -1;
                    for (std::size_t k = 0; k < B.size(); ++k)
                        if (std::abs(pos[static_cast<std::size_t>(B[k])] - p) < eps) {
                            partner = B[k];
                            usedB[k] = 1;
                        }
                    if (partner < 0) {
                        std::ostringstream os;
                        os << "simulate_schedule: site " << a << " meets an empty slot of WG" << e.wg_b << " at position " << p;
                        throw schedule_error(os.str());
                    }
                    u = (beamsplitter_gate(basis, a, partner, e.theta, e.phi).matrix * u).pruned();
                    out.log.push_back({a, partner, p});
                }
                for (std::size_t k = 0; k < B.size(); ++k)
                    if (!usedB[k] && on(pos[static_cast<std::size_t>(B[k])])) {
                        std::ostringstream os;
                        os << "simulate_schedule: site " << B[k] << " meets an empty slot of WG" << e.wg_a;
                        throw schedule_error(os.str());
                    }
                break;
            }
        }
    }
    out.unitary = {basis, std::move(u)};
    return out;
}

struct Certificate {
    bool equal = false;
    double distance = 0.0;
    cplx global_phase{1.0, 0.0};
};

/// min over unit c of max |A - c B|, seeded by the phase of tr(B^dag A) and refined by a
/// golden-section search.
inline Certificate certify_equivalence(const Mat& a, const Mat& b, double tol = 1e-10) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("certify_equivalence: dimension mismatch");
    auto dist = [&](double t) { return (a - std::polar(1.0, t) * b).cwiseAbs().maxCoeff(); };
    cplx tr = (b.adjoint() * a).trace();
    double t0 = std::abs(tr) > 0.0 ? std::arg(tr) : 0.0;
    double lo = t0 - 0.5, hi = t0 + 0.5;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = dist(x1), f2 = dist(x2);
    for (int it = 0; it < 80; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = dist(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = dist(x2);
        }
    }
    double best = t0, fb = dist(t0);
    double xm = 0.5 * (lo + hi), fm = dist(xm);
    if (fm < fb) {
        best = xm;
        fb = fm;
    }
    return {fb < tol, fb, std::polar(1.0, best)};
}

// ---------------------------------------------------------------------------
// Text format: one event per line.
//   DELAY wg len
//   BS wg_a wg_b theta phi [lo:hi ...]
//   PHASE wg v0 v1 ...

inline std::string to_text(const std::vector<ScheduleEvent>& ev) {
    std::ostringstream os;
    os << std::setprecision(17);
    for (const auto& e : ev) {
        switch (e.kind) {
            case EventKind::delay: os << "DELAY " << e.wg_a << ' ' << e.length; break;
            case EventKind::beamsplitter:
                os << "BS " << e.wg_a << ' ' << e.wg_b << ' ' << e.theta << ' ' << e.phi;
                for (const auto& w : e.windows) os << ' ' << w.lo << ':' << w.hi;
                break;
            case EventKind::phase:
                os << "PHASE " << e.wg_a;
                for (double v : e.table) os << ' ' << v;
                break;
        }
        os << '\n';
    }
    return os.str();
}

inline std::vector<ScheduleEvent> parse_schedule(const std::string& text) {
    std::vector<ScheduleEvent> ev;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string kw;
        if (!(ls >> kw) || kw[0] == '#') continue;
        ScheduleEvent e;
        bool ok = true;
        if (kw == "DELAY") {
            e.kind = EventKind::delay;
            ok = static_cast<bool>(ls >> e.wg_a >> e.length);
        } else if (kw == "BS") {
            e.kind = EventKind::beamsplitter;
            ok = static_cast<bool>(ls >> e.wg_a >> e.wg_b >> e.theta >> e.phi);
            std::string w;
            while (ok && ls >> w) {
                auto c = w.find(':');
                if (c == std::string::npos) {
                    ok = false;
                    break;
                }
                e.windows.push_back({std::stod(w.substr(0, c)), std::stod(w.substr(c + 1))});
            }
        } else if (kw == "PHASE") {
            e.kind = EventKind::phase;
            ok = static_cast<bool>(ls >> e.wg_a);
            double v;
            while (ok && ls >> v) e.table.push_back(v);
            if (e.table.empty()) ok = false;
        } else {
            ok = false;
        }
        if (!ok) throw std::invalid_argument("parse_schedule: bad line " + std::to_string(lineno));
        ev.push_back(std::move(e));
    }
    return ev;
}

}  // namespace wgsim
