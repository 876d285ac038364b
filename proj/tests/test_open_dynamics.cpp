#include <catch_amalgamated.hpp>

#include <wgsim/open_dynamics.hpp>

#include "oracles.hpp"

using namespace wgsim;

namespace {

Mat kraus_sum(const std::vector<SpMat>& ks) {
    Mat s = Mat::Zero(ks.front().rows(), ks.front().cols());
    for (const auto& k : ks) s += oracle::dense(SpMat(k.adjoint() * k));
    return s;
}

// single truncated mode, H = F b + F* b^dag - Omega n, loss gamma
Mat single_mode_lindbladian(const DriveDissParams& p, int d) {
    Mat b = oracle::annihilation(d);
    Mat h = p.F * b + std::conj(p.F) * b.adjoint() - p.omega_drive * b.adjoint() * b;
    return oracle::lindbladian(h, b, p.gamma);
}

}  // namespace

TEST_CASE("parameter relations", "[open]") {
    auto p = DriveDissParams::from_lindblad(cplx(0.02, 0.01), -2.8, 0.04, 0.25);
    CHECK(std::abs(std::conj(p.alpha) * p.K - p.F) < 1e-12);
    CHECK(std::abs(p.gamma * p.delta_t - std::pow(p.K * p.delta_t, 2)) < 1e-12);
    CHECK(std::abs(p.Phi - p.omega_drive * p.delta_t) < 1e-12);
    auto q = DriveDissParams::from_channel(0.1, 0.01, -2.8, 0.25);
    CHECK(std::abs(std::conj(q.alpha) * q.K - q.F) < 1e-12);
    CHECK(std::abs(q.gamma * q.delta_t - 0.01) < 1e-12);
}

TEST_CASE("truncated coherent state", "[open]") {
    Vec v = coherent_state(0.01, 3);
    CHECK(v.norm() == Catch::Approx(1.0));
    CHECK(std::abs(v[1] / v[0] - 0.01) < 1e-15);
    CHECK_THROWS_AS(coherent_state(0.5, 3), std::invalid_argument);
}

TEST_CASE("Kraus operators are complete", "[open][property]") {
    auto b = sectors_up_to(3, 3);
    auto p = DriveDissParams::from_channel(0.1, 0.01, -2.7, 0.25);
    for (int s = 0; s < 3; ++s) {
        auto ks = drive_diss_kraus(b, s, p);
        Mat sum = kraus_sum(ks);
        CHECK((sum - Mat::Identity(sum.rows(), sum.cols())).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK_THROWS_AS(drive_diss_kraus(b, 0, p, 1), std::invalid_argument);
}

TEST_CASE("trivial drive channels", "[open]") {
    auto b = sectors_up_to(1, 3);
    std::mt19937 rng(1);
    DensityMatrix rho{b, oracle::random_density(rng, 4)};
    auto id = DriveDissParams::from_channel(0.0, 0.0, 0.0, 0.25);
    CHECK((drive_diss_channel(rho, 0, id).matrix - rho.matrix).cwiseAbs().maxCoeff() < 1e-15);
    auto loss = DriveDissParams::from_channel(0.3, 0.0, 0.0, 0.25);
    DensityMatrix vac = DensityMatrix::pure(vacuum(b));
    CHECK((drive_diss_channel(vac, 0, loss).matrix - vac.matrix).cwiseAbs().maxCoeff() < 1e-15);
    auto r = fixed_point([&](const DensityMatrix& x) { return drive_diss_channel(x, 0, loss); }, rho, 1e-12);
    CHECK(r.converged);
    CHECK(std::abs(r.rho_fix.matrix(0, 0) - 1.0) < 1e-10);
}

TEST_CASE("drive channel generator matches the Lindbladian", "[open][property]") {
    auto b = sectors_up_to(1, 3);
    std::mt19937 rng(4);
    Mat rho = oracle::random_density(rng, 4);
    const cplx F(0.003, 0.001);
    const double omega = 0.7, gamma = 0.2;
    std::vector<double> gen_err, step_err;
    for (double dt : {0.02, 0.01, 0.005}) {
        auto p = DriveDissParams::from_lindblad(F, omega, gamma, dt);
        Mat L = single_mode_lindbladian(p, 4);
        Mat out = drive_diss_channel({b, rho}, 0, p).matrix;
        Mat fd = (out - rho) / dt;
        gen_err.push_back(oracle::trace_norm(fd - oracle::apply_super(L, rho)) / oracle::trace_norm(oracle::apply_super(L, rho)));
        step_err.push_back(oracle::trace_norm(out - oracle::apply_super(oracle::expm(dt * L), rho)));
    }
    // relative generator error O(dt); local step error at least second order
    CHECK(gen_err[0] / gen_err[1] == Catch::Approx(2.0).epsilon(0.15));
    CHECK(gen_err[1] / gen_err[2] == Catch::Approx(2.0).epsilon(0.15));
    CHECK(step_err[0] / step_err[1] > 3.5);
    CHECK(step_err[1] / step_err[2] > 3.5);
}

TEST_CASE("full channel is trace preserving, linear and positive", "[open][property]") {
    auto m = build_bose_hubbard(3, 1.0, 5.0, Boundary::open);
    auto p = DriveDissParams::from_channel(0.1, 0.01, -1.0, 0.25);
    FullChannel ch(m, 0.25, p, 3);
    const auto d = static_cast<Eigen::Index>(ch.basis()->size());
    std::mt19937 rng(8);
    Mat r1 = oracle::random_density(rng, d), r2 = oracle::random_density(rng, d);
    Mat o1 = ch.apply(r1), o2 = ch.apply(r2);
    CHECK(std::abs(o1.trace() - 1.0) < 1e-9);
    CHECK((o1 - o1.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(DensityMatrix{ch.basis(), o1}.min_eigenvalue() > -1e-8);
    Mat lin = ch.apply(0.3 * r1 + 0.7 * r2) - (0.3 * o1 + 0.7 * o2);
    CHECK(lin.cwiseAbs().maxCoeff() < 1e-10);
    Mat h = oracle::random_hermitian(rng, d);
    Mat oh = ch.apply(h);
    CHECK((oh - oh.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(oh.trace() - h.trace()) < 1e-9);
}

TEST_CASE("undriven full channel is the unitary step", "[open]") {
    auto m = build_bose_hubbard(3, 1.0, 5.0, Boundary::open);
    auto p = DriveDissParams::from_channel(0.0, 0.0, 0.0, 0.25);
    FullChannel ch(m, 0.25, p, 2);
    Mat u = oracle::dense(sequence_operator(ch.basis(), trotter_step_sequence(m, 0.25, 2)).matrix);
    std::mt19937 rng(3);
    Mat r = oracle::random_density(rng, u.rows());
    CHECK((ch.apply(r) - u * r * u.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("identity channel fixed point", "[open]") {
    auto b = sectors_up_to(2, 1);
    std::mt19937 rng(6);
    DensityMatrix rho{b, oracle::random_density(rng, 3)};
    auto r = fixed_point([](const DensityMatrix& x) { return x; }, rho);
    CHECK(r.iterations == 1);
    CHECK(r.converged);
    CHECK((r.rho_fix.matrix - rho.matrix).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("preconditioned solver agrees with power iteration", "[open]") {
    auto m = build_bose_hubbard(3, 1.0, 4.0, Boundary::open);
    auto p = DriveDissParams::from_channel(0.3, 0.05, -1.2, 0.25);
    FullChannel ch(m, 0.25, p, 3, 4);
    SteadyStateSolver solver(ch);
    auto fast = solver.solve(nullptr, 1e-11);
    REQUIRE(fast.converged);
    auto slow = fixed_point(ch, DensityMatrix::pure(vacuum(ch.basis())), 1e-12, 200000);
    REQUIRE(slow.converged);
    CHECK(trace_norm(fast.rho_fix.matrix - slow.rho_fix.matrix) < 1e-8);
    CHECK(trace_norm(ch.apply(fast.rho_fix.matrix) - fast.rho_fix.matrix) < 2e-11);
    auto warm = solver.solve(&fast.rho_fix, 1e-11);
    CHECK(warm.iterations <= 2);
}

TEST_CASE("steady-state observables", "[open]") {
    auto b = sectors_up_to(3, 3);
    auto o = steady_state_observables(DensityMatrix::pure(vacuum(b)), Mat());
    CHECK(o.n_photon == 0.0);
    CHECK(o.P1 == 0.0);
    CHECK(o.P2 == 0.0);
    CHECK_FALSE(o.postselected_overlap.has_value());

    auto [lo, hi] = b->sector_range(2);
    Vec v = Vec::Zero(static_cast<Eigen::Index>(b->size()));
    v[static_cast<Eigen::Index>(lo)] = std::sqrt(0.5);
    v[0] = std::sqrt(0.5);
    Mat g = Mat::Zero(static_cast<Eigen::Index>(hi - lo), 2);
    g(0, 0) = 1.0;
    g(1, 1) = 1.0;
    auto o2 = steady_state_observables(DensityMatrix{b, v * v.adjoint()}, g);
    CHECK(o2.P2 == Catch::Approx(0.5));
    CHECK(o2.n_photon == Catch::Approx(1.0));
    REQUIRE(o2.postselected_overlap.has_value());
    CHECK(*o2.postselected_overlap == Catch::Approx(1.0));
}

TEST_CASE("incoherent engine limits", "[open]") {
    auto m = build_bose_hubbard(2, 1.0, 3.0, Boundary::open);
    const double dt = 0.25;
    auto [p1, p2] = incoherent_phases(m, dt);

    IncoherentEngine full(m, dt, {0.3, 1.0, p1, p2}, 2);
    Vec sys = Vec::Zero(static_cast<Eigen::Index>(full.system_basis()->size()));
    sys[1] = 1.0;
    auto rho = full.step(full.initial_state(sys));
    CHECK(std::abs(rho.trace() - 1.0) < 1e-12);
    for (Eigen::Index a = 0; a < rho.matrix.rows(); ++a) {
        if (std::abs(rho.matrix(a, a)) < 1e-15) continue;
        auto occ = full.basis()->occupation_vector(static_cast<std::size_t>(a));
        CHECK(occ[2] == 1);
        CHECK(occ[3] == 1);
    }

    IncoherentEngine idle(m, dt, {0.0, 0.0, p1, p2}, 2);
    std::mt19937 rng(2);
    Vec s = oracle::random_state(rng, static_cast<Eigen::Index>(idle.system_basis()->size()));
    auto out = idle.system_state(idle.step(idle.initial_state(s)));
    Mat u = oracle::dense(sequence_operator(idle.system_basis(), trotter_step_sequence(m, dt, 2)).matrix);
    CHECK((out.matrix - u * s * s.adjoint() * u.adjoint()).cwiseAbs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(IncoherentEngine(m, dt, {0.1, 1.5, 0.0, 0.0}, 2), std::invalid_argument);
    CHECK(IncoherentEngine::memory_estimate(16) > 1e20);
}

TEST_CASE("incoherent protocol forgets its initial state", "[open][property]") {
    auto m = build_bose_hubbard(2, 1.0, 3.0, Boundary::open);
    const double dt = 0.25;
    auto [p1, p2] = incoherent_phases(m, dt);
    IncoherentEngine eng(m, dt, {0.6, 0.1, p1, p2}, 2);
    const auto ds = static_cast<Eigen::Index>(eng.system_basis()->size());
    Vec vac = Vec::Zero(ds), two = Vec::Zero(ds);
    vac[0] = 1.0;
    two[ds - 1] = 1.0;
    auto ra = eng.initial_state(vac), rb = eng.initial_state(two);
    for (int k = 0; k < 1500; ++k) {
        ra = eng.step(ra);
        rb = eng.step(rb);
    }
    auto oa = system_observables(eng.system_state(ra), nullptr), ob = system_observables(eng.system_state(rb), nullptr);
    for (std::size_t k = 0; k < oa.sector_population.size(); ++k)
        CHECK(std::abs(oa.sector_population[k] - ob.sector_population[k]) < 0.02);
    CHECK(std::abs(oa.mean_n - ob.mean_n) < 0.02);
    CHECK(oa.var_n >= 0.0);
}
