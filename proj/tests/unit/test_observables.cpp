#include "doctest.h"

#include "fractalqw/errors.hpp"
#include "fractalqw/evolve.hpp"
#include "fractalqw/observables.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace fqw;

namespace {

WalkerState walk(double theta_h, double theta_f, double gamma, double phi, std::int64_t steps,
                 WalkMode mode = WalkMode::Fractal) {
    auto state = initial_state(gamma, phi, 0);
    FractalRow row;
    for (std::int64_t t = 0; t < steps; ++t) {
        state = step(state, &row, {theta_h, theta_f}, mode);
        row = next_row(row);
    }
    return state;
}

DensityMatrix2 random_density(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Matrix2cd a;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) a(i, j) = {n(rng), n(rng)};
    Eigen::Matrix2cd rho = a * a.adjoint();
    rho /= rho.trace();
    return {rho(0, 0), rho(0, 1), rho(1, 0), rho(1, 1)};
}

Eigen::Matrix2cd to_eigen(const DensityMatrix2& m) {
    Eigen::Matrix2cd e;
    e << m(0, 0), m(0, 1), m(1, 0), m(1, 1);
    return e;
}

double eigen_trace_distance(const DensityMatrix2& a, const DensityMatrix2& b) {
    const Eigen::Matrix2cd delta = to_eigen(a) - to_eigen(b);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> solver(delta);
    return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

}  // namespace

TEST_CASE("position distribution") {
    const auto p0 = position_distribution(initial_state(kPi / 2, 0.0, 0));
    CHECK(p0.at(0) == doctest::Approx(1.0));
    CHECK(p0.max_value == doctest::Approx(1.0));

    const auto p1 = position_distribution(walk(kPi / 4, 0.0, kPi / 2, 0.0, 1));
    CHECK(p1.at(1) == doctest::Approx(1.0));
    CHECK(p1.at(-1) == doctest::Approx(0.0));
    CHECK(p1.total() == doctest::Approx(1.0));
}

TEST_CASE("second moment") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 2 * kPi);
    for (int i = 0; i < 20; ++i) {
        const auto s = walk(u(rng), u(rng), u(rng) / 2, u(rng), 1, WalkMode(i % 3));
        CHECK(second_moment(position_distribution(s)) == doctest::Approx(1.0));
        CHECK(second_moment(s) == doctest::Approx(1.0));
    }
    for (double deg : {10.0, 30.0, 77.0}) {
        const double th = deg_to_rad(deg);
        const auto s = walk(th, 0.0, kPi / 2, 0.0, 2);
        CHECK(second_moment(s) == doctest::Approx(4 * std::cos(th) * std::cos(th)));
    }
    CHECK(second_moment(walk(kPi / 4, 0.0, kPi / 2, kPi / 2, 2, WalkMode::UniformHadamard)) == doctest::Approx(2.0));

    // about the origin, not about zero
    auto shifted = initial_state(kPi / 2, kPi / 2, 40);
    CHECK(second_moment(shifted) == 0.0);
}

TEST_CASE("coin density matrices and entropy") {
    SUBCASE("symmetric start is pure") {
        const auto rho = coin_density_matrix(initial_state(kPi / 2, kPi / 2, 0));
        CHECK(rho(0, 0).real() == doctest::Approx(0.5));
        CHECK(rho(1, 1).real() == doctest::Approx(0.5));
        CHECK(rho(0, 1).imag() == doctest::Approx(-0.5));
        CHECK(rho(1, 0).imag() == doctest::Approx(0.5));
        CHECK(std::abs(rho.determinant()) < 1e-15);
        CHECK(entanglement_entropy(rho) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("one Hadamard step from the symmetric start is maximally mixed") {
        const auto rho = coin_density_matrix(walk(kPi / 4, 0.0, kPi / 2, kPi / 2, 1, WalkMode::UniformHadamard));
        CHECK(rho(0, 0).real() == doctest::Approx(0.5));
        CHECK(rho(1, 1).real() == doctest::Approx(0.5));
        CHECK(std::abs(rho(0, 1)) < 1e-15);
        CHECK(entanglement_entropy(rho) == doctest::Approx(1.0));
    }
    SUBCASE("any localized product state has rank one") {
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> u(0.0, 2 * kPi);
        for (int i = 0; i < 50; ++i) {
            const auto rho = coin_density_matrix(initial_state(u(rng) / 2, u(rng), i));
            CHECK(rho.eigenvalues()[0] == doctest::Approx(0.0).epsilon(1e-12));
            CHECK(entanglement_entropy(rho) < 1e-10);
        }
    }
    SUBCASE("maximally mixed") {
        CHECK(entanglement_entropy(DensityMatrix2{0.5, 0.0, 0.0, 0.5}) == doctest::Approx(1.0));
    }
    SUBCASE("global phase leaves the entropy alone") {
        auto state = walk(0.3, 1.1, 0.7, 2.0, 25);
        const double before = entanglement_entropy(coin_density_matrix(state));
        const cplx phase = std::polar(1.0, 0.913);
        for (auto& a : state.up_amplitudes()) a *= phase;
        for (auto& a : state.down_amplitudes()) a *= phase;
        CHECK(entanglement_entropy(coin_density_matrix(state)) == doctest::Approx(before).epsilon(1e-12));
    }
    SUBCASE("zero entropy exactly for rank-one states") {
        std::mt19937_64 rng(21);
        for (int i = 0; i < 200; ++i) {
            const auto rho = random_density(rng);
            const bool rank_one = rho.eigenvalues()[0] < 1e-10;
            CHECK((entanglement_entropy(rho) < 1e-10) == rank_one);
        }
    }
    SUBCASE("invalid matrices are rejected") {
        CHECK_THROWS_AS(DensityMatrix2(1.5, 0.0, 0.0, -0.5).validate(), InvariantViolation);
        CHECK_THROWS_AS(DensityMatrix2(0.5, 0.3, 0.1, 0.5).validate(), InvariantViolation);
        CHECK_THROWS_AS(DensityMatrix2(0.7, 0.0, 0.0, 0.7).validate(), InvariantViolation);
        CHECK_THROWS_AS(entanglement_entropy(DensityMatrix2(1.5, 0.0, 0.0, -0.5)), InvariantViolation);
        CHECK_NOTHROW(DensityMatrix2(0.5, 0.0, 0.0, 0.5).validate());
    }
    SUBCASE("density matrices along a walk stay valid") {
        auto state = initial_state(kPi / 2, kPi / 2, 0);
        FractalRow row;
        for (int t = 0; t < 300; ++t) {
            state = step(state, &row, CoinParams::from_degrees(45, 45), WalkMode::Fractal);
            row = next_row(row);
            const auto rho = coin_density_matrix(state);
            REQUIRE_NOTHROW(rho.validate());
            const double s = entanglement_entropy(rho);
            REQUIRE(s >= 0.0);
            REQUIRE(s <= 1.0);
        }
    }
}

TEST_CASE("closed-form eigenvalues match a numerical solver") {
    std::mt19937_64 rng(33);
    for (int i = 0; i < 1000; ++i) {
        const auto rho = random_density(rng);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> solver(to_eigen(rho));
        const auto ev = rho.eigenvalues();
        CHECK(std::abs(ev[0] - solver.eigenvalues()(0)) < 1e-12);
        CHECK(std::abs(ev[1] - solver.eigenvalues()(1)) < 1e-12);
    }
}

TEST_CASE("trace distance") {
    const DensityMatrix2 up{1.0, 0.0, 0.0, 0.0};
    const DensityMatrix2 down{0.0, 0.0, 0.0, 1.0};
    CHECK(trace_distance(up, up) == 0.0);
    CHECK(trace_distance(up, down) == doctest::Approx(1.0));

    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto a = random_density(rng);
        const auto b = random_density(rng);
        worst = std::max(worst, std::abs(trace_distance(a, b) - eigen_trace_distance(a, b)));
    }
    CHECK(worst < 1e-12);

    SUBCASE("symmetry and triangle inequality") {
        for (int i = 0; i < 1000; ++i) {
            const auto a = random_density(rng);
            const auto b = random_density(rng);
            const auto c = random_density(rng);
            const double ab = trace_distance(a, b);
            REQUIRE(ab == doctest::Approx(trace_distance(b, a)).epsilon(1e-14));
            REQUIRE(ab >= 0.0);
            REQUIRE(ab <= 1.0 + 1e-12);
            REQUIRE(ab <= trace_distance(a, c) + trace_distance(c, b) + 1e-12);
        }
    }
}

TEST_CASE("interference oracle") {
    const double th30 = deg_to_rad(30);
    const auto t1 = analytic_interference_oracle(th30, 1);
    CHECK(t1.at(1) == doctest::Approx(std::sqrt(3.0) / 2));
    CHECK(t1.at(-1) == doctest::Approx(std::sqrt(3.0) / 2));
    CHECK(t1.at(0) == 0.0);

    const auto t4 = analytic_interference_oracle(th30, 4);
    CHECK(t4.at(0) == doctest::Approx(0.1875));
    CHECK(t4.at(2) == doctest::Approx(0.09375));
    CHECK(t4.at(-2) == doctest::Approx(0.09375));

    for (double th : {0.1, 0.7, 1.3}) {
        for (auto x = -5; x <= 5; ++x) CHECK(analytic_interference_oracle(th, 5).at(x) == 0.0);
    }
    for (auto x = -4; x <= 4; ++x) CHECK(analytic_interference_oracle(kPi / 4, 4).at(x) < 1e-15);
    CHECK(analytic_interference_oracle(0.4, 0).at(0) == 1.0);
    CHECK_THROWS_AS(analytic_interference_oracle(0.4, 6), UsageError);
    CHECK_THROWS_AS(analytic_interference_oracle(0.4, -1), UsageError);
}

TEST_CASE("simulated interference matches the closed forms for t <= 5") {
    for (double deg : {5.0, 15.0, 30.0, 45.0, 60.0, 85.0}) {
        CAPTURE(deg);
        EvolveConfig cfg;
        cfg.coins = CoinParams::from_degrees(deg, 0.0);
        cfg.gamma = kPi / 2;
        cfg.phi = 0.0;
        cfg.t_max = 5;
        double worst = 0.0;
        const SnapshotHook hooks[] = {{SampleSchedule::every(1), [&](const StepContext& ctx) {
                                           const auto sim = ctx.previous == nullptr
                                                                ? initial_interference(0)
                                                                : interference_degree(*ctx.previous, ctx.previous_row,
                                                                                      cfg.coins, cfg.mode);
                                           const auto want = analytic_interference_oracle(cfg.coins.theta_h, ctx.t);
                                           for (auto x = -ctx.t - 1; x <= ctx.t + 1; ++x) {
                                               worst = std::max(worst, std::abs(sim.at(x) - want.at(x)));
                                           }
                                       }}};
        evolve(cfg, {}, hooks);
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("interference vanishes where both in-neighbours used the identity coin") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.05, 1.5);
    for (int trial = 0; trial < 5; ++trial) {
        EvolveConfig cfg;
        cfg.coins = {u(rng), 0.0};
        cfg.gamma = u(rng);
        cfg.phi = u(rng);
        cfg.t_max = 200;
        std::int64_t violations = 0;
        std::int64_t checked = 0;
        const SnapshotHook hooks[] = {{SampleSchedule::every(1), [&](const StepContext& ctx) {
                                           if (ctx.previous == nullptr) return;
                                           const auto mu = interference_degree(*ctx.previous, ctx.previous_row,
                                                                               cfg.coins, cfg.mode);
                                           for (auto x = -ctx.t; x <= ctx.t; ++x) {
                                               if (ctx.previous_row->bit(x - 1) || ctx.previous_row->bit(x + 1)) continue;
                                               ++checked;
                                               violations += mu.at(x) != 0.0;
                                           }
                                       }}};
        evolve(cfg, {}, hooks);
        CHECK(checked > 1000);
        CHECK(violations == 0);
    }
}

TEST_CASE("interference support respects the cone and parity") {
    EvolveConfig cfg;
    cfg.t_max = 120;
    std::int64_t leaks = 0;
    const SnapshotHook hooks[] = {{SampleSchedule::every(1), [&](const StepContext& ctx) {
                                       if (ctx.previous == nullptr) return;
                                       const auto mu = interference_degree(*ctx.previous, ctx.previous_row, cfg.coins,
                                                                           cfg.mode);
                                       for (auto x = -ctx.t - 3; x <= ctx.t + 3; ++x) {
                                           const bool allowed = std::abs(x) <= ctx.t && (x + ctx.t) % 2 == 0;
                                           if (!allowed && mu.at(x) != 0.0) ++leaks;
                                       }
                                   }}};
    evolve(cfg, {}, hooks);
    CHECK(leaks == 0);
}

TEST_CASE("interference requires the matching carpet row") {
    const auto s1 = walk(0.5, 0.0, kPi / 2, 0.0, 1);
    const auto r0 = seed_row();
    CHECK_THROWS_AS(interference_degree(s1, &r0, {0.5, 0.0}), UsageError);
    CHECK_THROWS_AS(interference_degree(s1, nullptr, {0.5, 0.0}), UsageError);
    CHECK_NOTHROW(interference_degree(s1, nullptr, {0.5, 0.0}, WalkMode::UniformHadamard));
}

TEST_CASE("visibility") {
    CHECK(visibility(2.0, 0.0) == doctest::Approx(1.0));
    CHECK(visibility(0.3, 0.3) == doctest::Approx(0.0));
    CHECK(!visibility(0.0, 0.0));

    const auto s0 = initial_state(kPi / 2, 0.0, 0);
    const auto r0 = seed_row();
    for (std::int64_t x : {-1, 1}) {
        const auto b = interference_branches(s0, &r0, {kPi / 4, 0.0}, WalkMode::Fractal, x);
        CHECK(visibility(b.p_max(), b.p_min()) == doctest::Approx(1.0));
        CHECK(b.degree() == doctest::Approx(1.0));
    }
    const auto far = interference_branches(s0, &r0, {kPi / 4, 0.0}, WalkMode::Fractal, 3);
    CHECK(!visibility(far.p_max(), far.p_min()));
}
