#include <catch_amalgamated.hpp>

#include <wgsim/gates.hpp>

#include "oracles.hpp"

using namespace wgsim;

namespace {

double max_dev(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff(); }

// generator theta (e^{i phi} b_j^dag b_i + h.c.) from truncated ladder matrices on sectors 0..n
Mat bs_generator(const BasisPtr& b, int i, int j, double theta, double phi) {
    Mat ai = oracle::dense(ladder_operator(b, i, LadderKind::annihilate).matrix);
    Mat aj = oracle::dense(ladder_operator(b, j, LadderKind::annihilate).matrix);
    Mat t = std::polar(theta, phi) * aj.adjoint() * ai;
    return t + t.adjoint();
}

}  // namespace

TEST_CASE("beamsplitter at theta = 0 is the identity", "[gates]") {
    auto b = sectors_up_to(3, 3);
    Mat u = oracle::dense(beamsplitter_gate(b, 0, 2, 0.0, 0.7).matrix);
    CHECK(max_dev(u, Mat::Identity(u.rows(), u.cols())) < 1e-15);
}

TEST_CASE("single photon transfer at theta = pi/2", "[gates]") {
    auto b = enumerate_basis(2, {1});
    Mat u = oracle::dense(beamsplitter_gate(b, 0, 1, pi / 2, 0.0).matrix);
    // |10> is index 1, |01> index 0; exp(-i pi/2 sigma_x) = -i sigma_x
    auto i10 = static_cast<Eigen::Index>(b->index({1, 0})), i01 = static_cast<Eigen::Index>(b->index({0, 1}));
    CHECK(std::abs(u(i01, i10) - cplx(0.0, -1.0)) < 1e-14);
    CHECK(std::abs(u(i10, i10)) < 1e-14);
}

TEST_CASE("Hong-Ou-Mandel null at the balanced splitter", "[gates]") {
    auto b = sectors_up_to(2, 2);
    Mat u = oracle::dense(beamsplitter_gate(b, 0, 1, pi / 4, 0.0).matrix);
    auto i11 = static_cast<Eigen::Index>(b->index({1, 1}));
    CHECK(std::abs(u(i11, i11)) < 1e-14);
    // oracle: exponential on sectors 0..2, where the ladder products close
    Mat g = bs_generator(b, 0, 1, pi / 4, 0.0);
    CHECK(max_dev(u, oracle::propagator(g, 1.0)) < 1e-13);
}

TEST_CASE("beamsplitter matches the matrix exponential of its generator", "[gates][property]") {
    auto b = sectors_up_to(4, 3);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> th(-2.0, 2.0), ph(-pi, pi);
    for (int rep = 0; rep < 6; ++rep) {
        int i = rep % 4, j = (rep + 1 + rep / 4) % 4;
        double theta = th(rng), phi = ph(rng);
        auto g = beamsplitter_gate(b, i, j, theta, phi);
        // the truncated ladder product is exact inside the basis: the hop conserves the total
        Mat ref = oracle::propagator(bs_generator(b, i, j, theta, phi), 1.0);
        CHECK(max_dev(oracle::dense(g.matrix), ref) < 1e-12);
        CHECK(g.is_unitary());
        CHECK(g.is_number_conserving());
    }
    CHECK_THROWS_AS(beamsplitter_gate(b, 1, 1, 0.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(beamsplitter_gate(b, 0, 4, 0.1, 0.0), std::out_of_range);
}

TEST_CASE("inverse beamsplitter pair", "[gates]") {
    auto b = sectors_up_to(3, 3);
    Mat u = oracle::dense(beamsplitter_gate(b, 0, 1, 0.37, 1.1).matrix);
    Mat v = oracle::dense(beamsplitter_gate(b, 0, 1, -0.37, 1.1).matrix);
    CHECK(max_dev(v * u, Mat::Identity(u.rows(), u.cols())) < 1e-10);
}

TEST_CASE("number phase gate", "[gates]") {
    auto b = sectors_up_to(2, 4);
    CHECK(max_dev(oracle::dense(number_phase_gate(b, 0, {0.0, 0.0}).matrix), Mat::Identity(static_cast<Eigen::Index>(b->size()), static_cast<Eigen::Index>(b->size()))) < 1e-15);
    CHECK_THROWS_AS(number_phase_gate(b, 0, {0.1, 0.0}), std::invalid_argument);

    // on-site interaction oracle: scalar exponentials exp(-i dt U/2 n(n-1))
    const double U = 10.0, dt = 0.2;
    std::vector<double> table;
    for (int n = 0; n <= 4; ++n) table.push_back(-dt * 0.5 * U * n * (n - 1));
    CHECK(table[2] == Catch::Approx(-2.0));
    Mat g = oracle::dense(number_phase_gate(b, 1, table).matrix);
    for (std::size_t s = 0; s < b->size(); ++s) {
        int n = b->occupation(s, 1);
        auto k = static_cast<Eigen::Index>(s);
        CHECK(std::abs(g(k, k) - std::exp(cplx(0.0, -dt * 0.5 * U * n * (n - 1)))) < 1e-14);
    }
}

TEST_CASE("phase tables extrapolate with the last increment", "[gates]") {
    const double p1 = 0.3, p2 = 0.5, p3 = 0.9;
    std::vector<double> t{0.0, p1, p1 + p2};
    CHECK(phase_table_value(t, 3) == Catch::Approx(p1 + 2 * p2));
    // a third cascade layer sets the slope
    std::vector<double> t3{0.0, p1, p1 + p2, p1 + p2 + p3};
    CHECK(phase_table_value(t3, 5) == Catch::Approx(p1 + p2 + 3 * p3));
    auto b = enumerate_basis(1, {3});
    Mat g = oracle::dense(number_phase_gate(b, 0, t3).matrix);
    CHECK(std::abs(g(0, 0) - std::polar(1.0, p1 + p2 + p3)) < 1e-14);
}

TEST_CASE("linear phase gate equals a linear table", "[gates]") {
    auto b = sectors_up_to(3, 3);
    const double Phi = 0.83;
    Mat l = oracle::dense(linear_phase_gate(b, 2, Phi).matrix);
    Mat n = oracle::dense(number_phase_gate(b, 2, {0.0, Phi, 2 * Phi}).matrix);
    CHECK(max_dev(l, n) < 1e-14);
    CHECK(max_dev(oracle::dense(linear_phase_gate(b, 2, 0.0).matrix), Mat::Identity(l.rows(), l.cols())) < 1e-15);
    auto one = enumerate_basis(1, {1});
    CHECK(std::abs(oracle::dense(linear_phase_gate(one, 0, pi).matrix)(0, 0) + 1.0) < 1e-15);
}

TEST_CASE("apply_gate preserves norm and trace", "[gates][property]") {
    auto b = sectors_up_to(3, 3);
    auto g = beamsplitter_gate(b, 0, 1, 0.4, -0.2);
    std::mt19937 rng(3);
    for (int rep = 0; rep < 5; ++rep) {
        StateVector psi{b, oracle::random_state(rng, static_cast<Eigen::Index>(b->size()))};
        CHECK(std::abs(apply_gate(psi, g).norm() - 1.0) < 1e-10);
        DensityMatrix rho{b, oracle::random_density(rng, static_cast<Eigen::Index>(b->size()))};
        auto out = apply_gate(rho, g);
        Mat U = oracle::dense(g.matrix);
        CHECK(max_dev(out.matrix, U * rho.matrix * U.adjoint()) < 1e-12);
        CHECK(std::abs(out.trace() - 1.0) < 1e-10);
    }
    SectorOperator id{b, SpMat(static_cast<int>(b->size()), static_cast<int>(b->size()))};
    id.matrix.setIdentity();
    StateVector psi{b, oracle::random_state(rng, static_cast<Eigen::Index>(b->size()))};
    CHECK(max_dev(apply_gate(psi, id).amplitudes, psi.amplitudes) == 0.0);
    auto other = sectors_up_to(2, 3);
    CHECK_THROWS_AS(apply_gate(StateVector{other, Vec::Zero(static_cast<Eigen::Index>(other->size()))}, g), std::invalid_argument);
}

TEST_CASE("compiled layers multiply to the sequence operator", "[gates]") {
    auto b = sectors_up_to(4, 2);
    GateSequence seq;
    GateDescriptor d;
    d.kind = GateKind::beamsplitter;
    d.modes = {0, 1};
    d.theta = 0.3;
    d.layer = 0;
    seq.push_back(d);
    d.modes = {2, 3};
    seq.push_back(d);
    d.modes = {1, 2};
    d.phi = 0.4;
    d.layer = 1;
    seq.push_back(d);
    GateDescriptor p;
    p.kind = GateKind::number_phase;
    p.modes = {1};
    p.phase_table = {0.0, 0.0, -1.0};
    p.layer = 2;
    seq.push_back(p);
    auto layers = compile_layers(b, seq);
    REQUIRE(layers.size() == 3);
    Mat ref = Mat::Identity(static_cast<Eigen::Index>(b->size()), static_cast<Eigen::Index>(b->size()));
    for (const auto& g : seq) ref = oracle::dense(gate_operator(b, g).matrix) * ref;
    CHECK(max_dev(oracle::dense(sequence_operator(b, seq).matrix), ref) < 1e-14);
}
