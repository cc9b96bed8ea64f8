#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ringtransport/full_dynamics.hpp"

using namespace ringtransport;

namespace {

ModelParams small_model() {
    ModelParams p;
    p.L = 3;
    p.M = 12;
    p.gamma = 0.5;
    p.left = {0.3, InverseTemperature(4.0)};
    p.right = {-0.2, InverseTemperature(4.0)};
    return p;
}

} // namespace

TEST_CASE("decoupled thermal state is stationary") {
    ModelParams p = small_model();
    p.epsilon = 0.0;
    const OperatorSet ops = build_operators(p);
    const FullSPDM rho(thermal_total_spdm(p), ops.layout);
    CHECK(full_rhs(rho, ops, p).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("gamma = 0 reduces to the commutator") {
    std::mt19937 rng(1);
    ModelParams p = small_model();
    p.gamma = 0.0;
    const OperatorSet ops = build_operators(p);
    const CMatrix r = oracle::random_hermitian(ops.layout.dim(), rng);
    const CMatrix expected = -kI * (ops.H_total * r - r * ops.H_total);
    CHECK((full_rhs(FullSPDM(r, ops.layout), ops, p) - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("projector form reproduces the three coupled block equations") {
    std::mt19937 rng(2);
    ModelParams p = small_model();
    p.M = 40;
    p.L = 5;
    const OperatorSet ops = build_operators(p, /*right_attached=*/false);
    const CMatrix rho_r0 = thermal_contact_spdm(p.left, p);
    const int M = p.M;
    const int L = p.L;
    for (int trial = 0; trial < 10; ++trial) {
        const CMatrix r = oracle::random_hermitian(M + L, rng);
        const FullSPDM rho(r, ops.layout);
        const CMatrix d = full_rhs(rho, ops, p);
        const oracle::ThreeBlocks blocks{r.topLeftCorner(M, M), r.topRightCorner(M, L),
                                         r.bottomRightCorner(L, L)};
        const auto lit = oracle::three_equation_rhs(blocks, ops, rho_r0, p.epsilon, p.gamma);
        CHECK((d.bottomRightCorner(L, L) - lit.rho_s).cwiseAbs().maxCoeff() <= 1e-13);
        CHECK((d.topRightCorner(M, L) - lit.rho_c).cwiseAbs().maxCoeff() <= 1e-13);
        CHECK((d.topLeftCorner(M, M) - lit.rho_r).cwiseAbs().maxCoeff() <= 1e-13);
    }
}

TEST_CASE("sparse right-hand side matches the dense definition") {
    std::mt19937 rng(4);
    const ModelParams p = small_model();
    const FullDynamics dyn(p);
    const CMatrix r = oracle::random_hermitian(dyn.operators().layout.dim(), rng);
    const CMatrix a = dyn.rhs(r);
    const CMatrix b = full_rhs(FullSPDM(r, dyn.operators().layout), dyn.operators(), p);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(numerics::hermiticity_defect(a) == 0.0);
}

TEST_CASE("block views alias the layout") {
    std::mt19937 rng(6);
    const ModelParams p = small_model();
    const BlockLayout lay = BlockLayout::of(p);
    const CMatrix r = oracle::random_hermitian(lay.dim(), rng);
    const FullSPDM rho(r, lay);
    CHECK(rho.chain()(0, 0) == r(p.M, p.M));
    CHECK(rho.coherence1()(2, 1) == r(2, p.M + 1));
    CHECK(rho.coherenceL()(2, 1) == r(p.M + p.L + 2, p.M + 1));
    CHECK(rho.contact_contact()(1, 3) == r(1, p.M + p.L + 3));
    CHECK(rho.contactL()(0, 0) == r(p.M + p.L, p.M + p.L));
    CHECK_THROWS_AS(FullSPDM(CMatrix::Zero(3, 3), lay), ConfigError);
}

TEST_CASE("bond currents") {
    SUBCASE("real symmetric state carries no current") {
        std::mt19937 rng(8);
        const CMatrix r = oracle::random_hermitian(5, rng).real().cast<cplx>();
        CHECK(bond_currents(r, 1.0).cwiseAbs().maxCoeff() == 0.0);
        CHECK(mean_current(r, 1.0) == 0.0);
    }
    SUBCASE("imaginary coherence gives Js * c on its bond") {
        CMatrix r = CMatrix::Zero(4, 4);
        r(2, 1) = kI * 0.3;
        r(1, 2) = -kI * 0.3;
        const RVector b = bond_currents(r, 2.0);
        CHECK(b(0) == 0.0);
        CHECK(b(1) == doctest::Approx(0.6));
        CHECK(b(2) == 0.0);
        CHECK(mean_current(r, 2.0) == doctest::Approx(0.2));
    }
}

TEST_CASE("closed decoupled evolution conserves particle number") {
    ModelParams p = small_model();
    p.gamma = 0.0;
    p.epsilon = 0.0;
    const FullDynamics dyn(p);
    std::mt19937 rng(12);
    CMatrix r = oracle::random_hermitian(dyn.operators().layout.dim(), rng, 0.1);
    const cplx tr0 = r.trace();
    r = dyn.evolve(r, 100.0, 0.02);
    CHECK(std::abs(r.trace() - tr0) < 1e-10);
}

TEST_CASE("time evolution converges to the direct stationary solution") {
    const ModelParams p = small_model();
    EvolutionSettings cfg;
    cfg.tolerance = 1e-9;
    const StationaryResult ev = evolve_to_stationary(p, cfg);
    const StationaryResult dir = solve_stationary_full(p);
    REQUIRE(ev.converged);
    CHECK(ev.residual <= cfg.tolerance);
    CHECK(std::abs(ev.current - dir.current) < 1e-6 * std::abs(dir.current) + 1e-12);
    CHECK((ev.rho_s - dir.rho_s).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(dir.residual < 1e-12);
    CHECK(dir.current > 0.0);  // contact 1 has the higher chemical potential
    CHECK(std::abs(dir.bond_currents.mean() - dir.current) < 1e-12);
    CHECK(dir.bond_currents.maxCoeff() - dir.bond_currents.minCoeff() < 1e-6 * dir.current);
    CHECK(ev.bond_currents.maxCoeff() - ev.bond_currents.minCoeff() < 1e-6);
}

TEST_CASE("symmetric contacts carry no current") {
    ModelParams p = small_model();
    p.right = p.left;
    const StationaryResult dir = solve_stationary_full(p);
    CHECK(std::abs(dir.current) < 1e-10);
    EvolutionSettings cfg;
    cfg.t_max = 200.0;
    const StationaryResult ev = evolve_to_stationary(p, cfg);
    CHECK(std::abs(ev.current) < 1e-10);
}

TEST_CASE("decoupled chain stays empty") {
    ModelParams p = small_model();
    p.epsilon = 0.0;
    EvolutionSettings cfg;
    const StationaryResult ev = evolve_to_stationary(p, cfg);
    CHECK(ev.converged);
    CHECK(ev.current == 0.0);
    CHECK(ev.rho_s.cwiseAbs().maxCoeff() == 0.0);
    CHECK(solve_stationary_full(p).rho_s.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("exchanging the contacts reverses the current") {
    ModelParams p = small_model();
    const double j = solve_stationary_full(p).current;
    std::swap(p.left, p.right);
    CHECK(std::abs(solve_stationary_full(p).current + j) < 1e-10);
}

TEST_CASE("trajectory sink receives samples") {
    ModelParams p = small_model();
    EvolutionSettings cfg;
    cfg.t_max = 20.0;
    int count = 0;
    double last_t = 0.0;
    evolve_to_stationary(p, cfg, [&](const TrajectorySample& s) {
        ++count;
        CHECK(s.t > last_t);
        last_t = s.t;
        CHECK(std::isfinite(s.current));
    });
    CHECK(count > 0);
}

TEST_CASE("direct solve rejects gamma = 0") {
    ModelParams p = small_model();
    p.gamma = 0.0;
    CHECK_THROWS_AS(solve_stationary_full(p), ConfigError);
}
