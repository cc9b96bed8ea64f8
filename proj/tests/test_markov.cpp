#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ringtransport/fock.hpp"
#include "ringtransport/markov.hpp"
#include "ringtransport/nonmarkov.hpp"

using namespace ringtransport;

namespace {

// rho' = -i (K rho - rho K^dagger) + gt diag(n1, 0, ..., 0, nL), K = H - i gt / 2 (P1 + PL)
CMatrix effective_hamiltonian_rhs(const CMatrix& rho, const MarkovChain& c) {
    CMatrix K = chain_hamiltonian(c.L, c.Js);
    K(0, 0) -= kI * 0.5 * c.gamma_tilde;
    K(c.L - 1, c.L - 1) -= kI * 0.5 * c.gamma_tilde;
    CMatrix out = -kI * (K * rho - rho * K.adjoint());
    out(0, 0) += c.gamma_tilde * c.n1;
    out(c.L - 1, c.L - 1) += c.gamma_tilde * c.nL;
    return out;
}

} // namespace

TEST_CASE("effective rate and regime") {
    CHECK(effective_rate(0.4, 1.0) == doctest::Approx(0.16));
    CHECK(effective_rate(0.4, 10.0) == doctest::Approx(0.016));
    CHECK_THROWS_AS(effective_rate(0.4, 0.0), ConfigError);
    CHECK(markov_regime(0.4, 2.0));
    CHECK_FALSE(markov_regime(0.4, 1.0));
}

TEST_CASE("closed form current examples") {
    MarkovChain c;
    c.gamma_tilde = 1.0;
    c.n1 = 1.0;
    c.nL = 0.0;
    CHECK(closed_form_current(c) == doctest::Approx(0.25));
    c.gamma_tilde = 0.16;
    c.n1 = 0.52;
    c.nL = 0.48;
    CHECK(closed_form_current(c) == doctest::Approx(0.16 / (1 + 0.0256) * 0.02));
}

TEST_CASE("right-hand side matches the effective Hamiltonian form") {
    std::mt19937 rng(3);
    MarkovChain c{6, 1.3, 0.7, 0.8, 0.1};
    for (int k = 0; k < 20; ++k) {
        const CMatrix r = oracle::random_hermitian(c.L, rng);
        CHECK((markov_rhs(r, c) - effective_hamiltonian_rhs(r, c)).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("stationary current equals the closed form") {
    for (int L : {2, 3, 5}) {
        for (double gt : {0.1, 1.0, 10.0}) {
            const MarkovChain c{L, 1.0, gt, 0.53, 0.47};
            const StationaryResult r = stationary_markov(c);
            CHECK(std::abs(r.current - closed_form_current(c)) <= 1e-6);
            CHECK(r.residual < 1e-12);
            CHECK(r.bond_currents.maxCoeff() - r.bond_currents.minCoeff() < 1e-12);
        }
    }
    SUBCASE("other hopping and larger chains") {
        for (int L = 2; L <= 9; ++L) {
            const MarkovChain c{L, 0.7, 0.3, 0.9, 0.2};
            CHECK(std::abs(stationary_markov(c).current - closed_form_current(c)) < 1e-13);
        }
    }
}

TEST_CASE("equal fillings give a uniform state") {
    const MarkovChain c{5, 1.0, 0.4, 0.3, 0.3};
    const CMatrix rho = stationary_markov(c).rho_s;
    CHECK((rho - 0.3 * CMatrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("time evolution relaxes to the stationary state") {
    const MarkovChain c{4, 1.0, 0.5, 0.7, 0.2};
    CMatrix rho = CMatrix::Zero(4, 4);
    const double dt = 0.01;
    for (int k = 0; k < 20000; ++k) {
        const CMatrix k1 = effective_hamiltonian_rhs(rho, c);
        const CMatrix k2 = effective_hamiltonian_rhs(rho + 0.5 * dt * k1, c);
        const CMatrix k3 = effective_hamiltonian_rhs(rho + 0.5 * dt * k2, c);
        const CMatrix k4 = effective_hamiltonian_rhs(rho + dt * k3, c);
        rho += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    CHECK((rho - stationary_markov(c).rho_s).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("open many-body chain agrees with the single-particle equation") {
    for (double gt : {0.1, 1.0, 10.0}) {
        const MarkovChain c{3, 1.0, gt, 0.6, 0.35};
        const CMatrix fock = fock::open_chain_stationary_spdm(c);
        CHECK((fock - stationary_markov(c).rho_s).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("model parameters feed the chain") {
    ModelParams p = ModelParams::standard();
    p.gamma = 10.0;
    p = with_bias(p, 0.0, 0.0628);
    const MarkovChain c = markov_chain(p);
    CHECK(c.gamma_tilde == doctest::Approx(0.016));
    CHECK(c.n1 == doctest::Approx(std::acos(-0.0314) / kPi));
    CHECK(c.nL == doctest::Approx(std::acos(0.0314) / kPi));
    CHECK(stationary_markov(p).current > 0.0);

    SUBCASE("slope -1 in gamma at large gamma") {
        const double j10 = closed_form_current(p);
        p.gamma = 100.0;
        const double j100 = closed_form_current(p);
        CHECK(std::log10(j100 / j10) == doctest::Approx(-1.0).epsilon(0.05));
    }
    SUBCASE("no resonances: conductance follows the contact density of states") {
        ModelParams a = with_bias(p, 0.0, 1e-3);
        ModelParams b = with_bias(p, 0.25, 1e-3);
        const double ja = stationary_markov(a).current / (a.left.mu - a.right.mu);
        const double jb = stationary_markov(b).current / (b.left.mu - b.right.mu);
        const double ratio = contact_dos(0.25, 1.0) / contact_dos(0.0, 1.0);
        CHECK(jb / ja == doctest::Approx(ratio).epsilon(1e-3));
    }
}

TEST_CASE("invalid chains") {
    CHECK_THROWS_AS(stationary_markov(MarkovChain{1, 1.0, 0.1, 0.5, 0.5}), ConfigError);
    CHECK_THROWS_AS(stationary_markov(MarkovChain{3, 1.0, 0.0, 0.5, 0.5}), ConfigError);
}
