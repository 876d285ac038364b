#include <catch_amalgamated.hpp>

#include <wgsim/quench.hpp>

#include "oracles.hpp"

using namespace wgsim;

namespace {

// single-particle Trotter step assembled from matrix exponentials of each group
Mat single_particle_step(const LatticeModel& m, double dt) {
    const int n = m.n_sites();
    Mat u = Mat::Identity(n, n);
    for (const auto& g : edge_coloring(m).groups) {
        Mat h = Mat::Zero(n, n);
        for (const auto& e : g) {
            h(e.j, e.i) += e.amp;
            h(e.i, e.j) += std::conj(e.amp);
        }
        u = oracle::propagator(h, dt) * u;
    }
    return u;
}

}  // namespace

TEST_CASE("pair correlator sum rule and symmetry", "[quench]") {
    auto m = build_bose_hubbard(8, 1.0, 10.0, Boundary::periodic);
    auto r = run_quench(m, 0.2, 20, central_pair(8));
    REQUIRE(r.correlators.size() == 21);
    CHECK(r.times.back() == Catch::Approx(4.0));
    for (const auto& c : r.correlators) {
        CHECK(c.sum() == Catch::Approx(2.0).epsilon(1e-12));
        CHECK((c - c.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(c.minCoeff() > -1e-14);
    }
    CHECK(r.correlators[0](3, 4) == Catch::Approx(1.0));
    CHECK(r.correlators[0](3, 3) == 0.0);
    CHECK(r.final_state.norm() == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("free two-boson quench matches the permanent formula", "[quench][property]") {
    for (int nx : {6, 8, 10}) {
        auto m = build_bose_hubbard(nx, 1.0, 0.0, Boundary::periodic);
        const double dt = 0.15;
        const int steps = 25;
        auto pair = central_pair(nx);
        auto r = run_quench(m, dt, steps, pair);
        Mat u1 = single_particle_step(m, dt);
        Mat u = Mat::Identity(nx, nx);
        for (int s = 1; s <= steps; ++s) {
            u = u1 * u;
            if (s % 5) continue;
            auto ref = oracle::free_boson_correlator(u, pair[0], pair[1]);
            CHECK((r.correlators[static_cast<std::size_t>(s)] - ref).cwiseAbs().maxCoeff() < 1e-8);
        }
    }
}

TEST_CASE("doublon start", "[quench]") {
    auto m = build_bose_hubbard(6, 1.0, 0.0, Boundary::periodic);
    auto r = run_quench(m, 0.1, 10, {2, 2});
    CHECK(r.correlators[0](2, 2) == Catch::Approx(2.0));
    Mat u = Mat::Identity(6, 6), u1 = single_particle_step(m, 0.1);
    for (int s = 0; s < 10; ++s) u = u1 * u;
    // the permanent double counts the doublon normalization
    CHECK((r.correlators.back() - 0.5 * oracle::free_boson_correlator(u, 2, 2)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("side masses", "[quench]") {
    RealMat c = RealMat::Zero(8, 8);
    c(0, 1) = c(1, 0) = 0.5;  // both left of 3.5
    c(2, 5) = c(5, 2) = 0.5;  // straddles
    auto s = side_masses(c, 3.5);
    CHECK(s.same == Catch::Approx(1.0));
    CHECK(s.opposite == Catch::Approx(1.0));
    auto r = run_quench(build_bose_hubbard(8, 1.0, 0.0, Boundary::periodic), 0.2, 0, central_pair(8));
    auto s0 = side_masses(r.correlators[0], 3.5);
    CHECK(s0.same == 0.0);
    CHECK(s0.opposite == Catch::Approx(2.0));
}

TEST_CASE("quench input errors", "[quench]") {
    auto m = build_bose_hubbard(4, 1.0, 0.0, Boundary::periodic);
    CHECK_THROWS_AS(run_quench(m, 0.0, 3, {0}), std::invalid_argument);
    CHECK_THROWS_AS(run_quench(m, 0.1, 3, {}), std::invalid_argument);
    CHECK_THROWS_AS(run_quench(m, 0.1, 3, {4}), std::invalid_argument);
}
