#include <catch_amalgamated.hpp>

#include <wgsim/lattice.hpp>

#include "oracles.hpp"

#include <Eigen/Eigenvalues>

using namespace wgsim;

namespace {

Eigen::VectorXd sorted_eigs(const Mat& h) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

}  // namespace

TEST_CASE("Bose-Hubbard edge sets", "[lattice]") {
    CHECK(build_bose_hubbard(2, 1.0, 0.0, Boundary::open).edges.size() == 1);
    auto m = build_bose_hubbard(8, 1.0, 0.0, Boundary::periodic);
    REQUIRE(m.edges.size() == 8);
    CHECK(m.edges.back().i == 7);
    CHECK(m.edges.back().j == 0);
    for (const auto& e : m.edges) CHECK(e.amp == cplx(-1.0, 0.0));
    CHECK_THROWS_AS(build_bose_hubbard(1, 1.0, 0.0, Boundary::open), std::invalid_argument);
}

TEST_CASE("single-particle ring spectrum is the circulant one", "[lattice]") {
    for (int n : {3, 5, 8}) {
        const double J = 0.7;
        auto m = build_bose_hubbard(n, J, 0.0, Boundary::periodic);
        auto b = enumerate_basis(n, {1});
        Eigen::VectorXd e = sorted_eigs(oracle::dense(exact_hamiltonian(m, b).matrix));
        std::vector<double> ref;
        for (int k = 0; k < n; ++k) ref.push_back(-2.0 * J * std::cos(2.0 * pi * k / n));
        std::sort(ref.begin(), ref.end());
        for (int k = 0; k < n; ++k) CHECK(std::abs(e[k] - ref[static_cast<std::size_t>(k)]) < 1e-12);
    }
}

TEST_CASE("exact Hamiltonian entries", "[lattice]") {
    auto m = build_bose_hubbard(3, 1.0, 10.0, Boundary::open);
    auto b = sectors_up_to(3, 2);
    Mat h = oracle::dense(exact_hamiltonian(m, b).matrix);
    CHECK(std::abs(h(0, 0)) == 0.0);
    auto i = static_cast<Eigen::Index>(b->index({0, 2, 0}));
    CHECK(h(i, i).real() == Catch::Approx(10.0));
    CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("Landau gauge fluxes", "[lattice]") {
    auto m = build_fqh(4, 4, 1.0, 0.0, 0.25, Boundary::periodic);
    CHECK(m.edges.size() == 32);
    auto f = plaquette_fluxes(m);
    REQUIRE(f.size() == 16);
    for (double v : f) {
        double r = v - 0.25;
        CHECK(std::abs(r - std::round(r)) < 1e-12);
    }
    auto z = build_fqh(4, 4, 1.0, 0.0, 0.0, Boundary::periodic);
    for (const auto& e : z.edges) CHECK(std::abs(e.amp - cplx(-1.0, 0.0)) < 1e-15);
    CHECK_THROWS_AS(build_fqh(4, 4, 1.0, 0.0, 0.1, Boundary::periodic), std::invalid_argument);
    CHECK_NOTHROW(build_fqh(4, 4, 1.0, 0.0, 0.1, Boundary::open));
    auto o = build_fqh(5, 3, 1.0, 0.0, 0.2, Boundary::open);
    for (double v : plaquette_fluxes(o)) {
        double r = v - 0.2;
        CHECK(std::abs(r - std::round(r)) < 1e-12);
    }
}

TEST_CASE("spectrum is gauge invariant", "[lattice][property]") {
    auto m = build_fqh(4, 4, 1.0, 3.0, 0.25, Boundary::periodic);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-pi, pi);
    std::vector<double> chi(16);
    for (auto& c : chi) c = u(rng);
    auto g = gauge_transform(m, chi);
    auto f = plaquette_fluxes(g);
    for (double v : f) CHECK(std::abs(v - 0.25 - std::round(v - 0.25)) < 1e-12);
    auto b = enumerate_basis(16, {2});
    Eigen::VectorXd e1 = sorted_eigs(oracle::dense(exact_hamiltonian(m, b).matrix));
    Eigen::VectorXd e2 = sorted_eigs(oracle::dense(exact_hamiltonian(g, b).matrix));
    CHECK((e1 - e2).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("edge coloring", "[lattice]") {
    auto chain = edge_coloring(build_bose_hubbard(8, 1.0, 0.0, Boundary::periodic));
    REQUIRE(chain.groups.size() == 2);
    CHECK(chain.groups[0].size() == 4);
    CHECK(chain.groups[1].size() == 4);
    CHECK_FALSE(chain.fallback);

    auto sq = edge_coloring(build_fqh(4, 4, 1.0, 0.0, 0.25, Boundary::periodic));
    REQUIRE(sq.groups.size() == 4);
    for (const auto& g : sq.groups) {
        CHECK(g.size() == 8);
        CHECK(group_is_disjoint(g));
    }

    auto odd = edge_coloring(build_bose_hubbard(5, 1.0, 0.0, Boundary::periodic));
    CHECK(odd.fallback);
    CHECK(odd.groups.size() == 3);
    std::size_t total = 0;
    for (const auto& g : odd.groups) {
        CHECK(group_is_disjoint(g));
        total += g.size();
    }
    CHECK(total == 5);
}

TEST_CASE("group generators sum to the hopping Hamiltonian", "[lattice][property]") {
    auto m = build_fqh(4, 4, 1.0, 0.0, 0.25, Boundary::periodic);
    auto b = enumerate_basis(16, {2});
    SpMat sum(static_cast<int>(b->size()), static_cast<int>(b->size()));
    for (const auto& g : edge_coloring(m).groups) sum += hopping_hamiltonian(b, g);
    Mat d = oracle::dense(sum) - oracle::dense(exact_hamiltonian(m, b).matrix);
    CHECK(d.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("Trotter step structure", "[lattice]") {
    auto bh = build_bose_hubbard(8, 1.0, 10.0, Boundary::periodic);
    auto seq = trotter_step_sequence(bh, 0.2);
    int bs = 0, ph = 0;
    for (const auto& g : seq) (g.kind == GateKind::beamsplitter ? bs : ph)++;
    CHECK(bs == 8);
    CHECK(ph == 8);
    CHECK(seq.front().theta == Catch::Approx(0.2));
    CHECK(seq.back().phase_table[2] == Catch::Approx(-2.0));

    auto free = trotter_step_sequence(build_bose_hubbard(8, 1.0, 0.0, Boundary::periodic), 0.2);
    for (const auto& g : free) CHECK(g.kind == GateKind::beamsplitter);

    auto b = enumerate_basis(8, {2});
    auto u = sequence_operator(b, seq);
    CHECK(u.is_unitary());
    CHECK(u.is_number_conserving());
}

TEST_CASE("Trotter step converges to the exact propagator", "[lattice][property]") {
    auto m = build_bose_hubbard(6, 1.0, 4.0, Boundary::periodic);
    auto b = enumerate_basis(6, {2});
    Mat h = oracle::dense(exact_hamiltonian(m, b).matrix);
    std::vector<double> err;
    for (double dt : {0.25, 0.125, 0.0625}) {
        Mat u = oracle::dense(sequence_operator(b, trotter_step_sequence(m, dt)).matrix);
        err.push_back((u - oracle::propagator(h, dt)).norm());
    }
    CHECK(err[0] / err[1] == Catch::Approx(4.0).epsilon(0.2));
    CHECK(err[1] / err[2] == Catch::Approx(4.0).epsilon(0.2));
}
