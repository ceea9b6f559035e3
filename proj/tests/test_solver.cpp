#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pinning/analysis.hpp"
#include "pinning/errors.hpp"
#include "pinning/obstacle_field.hpp"
#include "pinning/solver.hpp"

using namespace pinning;

namespace {

std::vector<double> random_field(std::size_t size, double lo, double hi, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> out(size);
    for (auto& v : out) {
        v = dist(gen);
    }
    return out;
}

// Sharp bound on |regularized - prox|: the deviation peaks at drive = strength,
// where it equals the root of a = phi (1 - a / sqrt(a^2 + eps^2)).
double threshold_deviation(double phi, double eps) {
    auto r = [&](double a) { return a - phi * (1.0 - a / std::sqrt(a * a + eps * eps)); };
    return oracle::bisect(r, 0.0, phi);
}

}  // namespace

TEST_CASE("grid basics") {
    CHECK_THROWS_AS(TorusGrid(3, 16), ConfigError);
    CHECK_THROWS_AS(TorusGrid(1, 4), ConfigError);
    const TorusGrid g(2, 8);
    CHECK(g.size() == 64);
    CHECK(g.spacing() == 0.125);
    CHECK(g.cfl_limit() == 0.125 * 0.125 / 4.0);
    CHECK(g.coordinates(9) == std::array<double, 2>{0.125, 0.125});
}

TEST_CASE("laplacian of a constant vanishes") {
    for (int n : {1, 2}) {
        const TorusGrid g(n, 16);
        const std::vector<double> u(g.size(), 3.7);
        for (double v : laplacian(g, u)) {
            CHECK(v == 0.0);
        }
    }
}

TEST_CASE("laplacian matches the dense stencil matrix") {
    for (int n : {1, 2}) {
        const int m = n == 1 ? 16 : 8;
        const TorusGrid g(n, m);
        const auto u = random_field(g.size(), -1, 1, 3 + n);
        const auto expected = oracle::multiply(oracle::laplacian_matrix(n, m), u);
        const auto got = laplacian(g, u);
        double scale = 0.0;
        for (double v : expected) {
            scale = std::max(scale, std::abs(v));
        }
        for (std::size_t i = 0; i < u.size(); ++i) {
            CHECK(std::abs(got[i] - expected[i]) <= 1e-12 * scale);
        }
    }
}

TEST_CASE("cosine mode is an eigenvector") {
    const int m = 64;
    const TorusGrid g(1, m);
    const double h = g.spacing();
    std::vector<double> u(m);
    for (int i = 0; i < m; ++i) {
        u[static_cast<std::size_t>(i)] = std::cos(2.0 * M_PI * i * h);
    }
    const double eigen = -(2.0 / (h * h)) * (1.0 - std::cos(2.0 * M_PI * h));
    const auto lu = laplacian(g, u);
    const auto dense = oracle::multiply(oracle::laplacian_matrix(1, m), u);
    for (int i = 0; i < m; ++i) {
        const auto k = static_cast<std::size_t>(i);
        CHECK(lu[k] == doctest::Approx(eigen * u[k]).epsilon(1e-9).scale(std::abs(eigen)));
        CHECK(lu[k] == doctest::Approx(dense[k]).epsilon(1e-12).scale(std::abs(eigen)));
    }
}

TEST_CASE("friction velocity: examples and the dense-scan inclusion oracle") {
    CHECK(friction_velocity(2.0, 1.0) == 1.0);
    CHECK(friction_velocity(0.5, 1.0) == 0.0);
    CHECK(friction_velocity(-0.7, 0.0) == -0.7);
    CHECK(std::abs(oracle::scan_inclusion(2.0, 1.0) - 1.0) <= 1e-6);
    CHECK(std::abs(oracle::scan_inclusion(0.5, 1.0)) <= 1e-6);
    CHECK_THROWS_AS(friction_velocity(1.0, -0.1), ContractViolation);

    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> drive(-5.0, 5.0);
    std::uniform_real_distribution<double> strength(0.0, 3.0);
    for (int k = 0; k < 1000; ++k) {
        const double g = drive(gen);
        const double p = strength(gen);
        CHECK(std::abs(friction_velocity(g, p) - oracle::scan_inclusion(g, p)) <= 1e-6);
    }
}

TEST_CASE("regularized velocity") {
    CHECK(regularized_velocity(1.3, 0.0, 1e-2) == 1.3);
    CHECK(regularized_velocity(0.0, 1.0, 1e-2) == 0.0);
    const double a = regularized_velocity(2.0, 1.0, 1e-3);
    CHECK(a > 0.999);
    CHECK(a < 1.001);
    CHECK(std::abs(a - oracle::regularized_root(2.0, 1.0, 1e-3)) <= 1e-10);
    CHECK_THROWS_AS(regularized_velocity(1.0, -1.0, 1e-2), ContractViolation);
    CHECK_THROWS_AS(regularized_velocity(1.0, 1.0, 0.0), ContractViolation);
    CHECK(regularized_sign(0.0, 0.1) == 0.0);
    CHECK(regularized_sign(1e6, 0.1) == doctest::Approx(1.0));

    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> drive(-5.0, 5.0);
    std::uniform_real_distribution<double> strength(0.0, 3.0);
    for (int k = 0; k < 1000; ++k) {
        const double g = drive(gen);
        const double p = strength(gen);
        for (double eps : {1e-1, 1e-2, 1e-3, 1e-5}) {
            const double v = regularized_velocity(g, p, eps);
            CHECK(std::abs(v - oracle::regularized_root(g, p, eps)) <= 1e-10);
            CHECK(std::abs(v) <= std::abs(g));
        }
    }
}

TEST_CASE("backend consistency: deviation bound and monotonicity in epsilon") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> drive(-5.0, 5.0);
    std::uniform_real_distribution<double> strength(0.0, 3.0);
    const std::vector<double> epsilons{1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 1e-4};
    for (int k = 0; k < 1000; ++k) {
        const double g = drive(gen);
        const double p = strength(gen);
        double previous = std::numeric_limits<double>::infinity();
        for (double eps : epsilons) {
            const double gap = std::abs(regularized_velocity(g, p, eps) - friction_velocity(g, p));
            CHECK(gap <= threshold_deviation(p, eps) + 1e-12);
            CHECK(gap <= previous + 1e-12);
            previous = gap;
        }
    }
}

TEST_CASE("deviation at the threshold is of order (phi eps^2 / 2)^(1/3), not eps") {
    const double eps = 1e-3;
    const double gap = std::abs(regularized_velocity(1.0, 1.0, eps) - friction_velocity(1.0, 1.0));
    CHECK(gap > eps);
    CHECK(gap == doctest::Approx(threshold_deviation(1.0, eps)).epsilon(1e-9));
    CHECK(gap <= std::cbrt(0.5 * eps * eps));
}

TEST_CASE("solver config validation") {
    SolverConfig c;
    CHECK_NOTHROW(c.validate());
    c.cfl_factor = 1.0;
    CHECK_NOTHROW(c.validate());
    c.cfl_factor = 1.01;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = SolverConfig{};
    c.backend = Backend::regularized;
    c.epsilon = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = SolverConfig{};
    c.tol_pin = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);

    const TorusGrid g(1, 64);
    SolverConfig d;
    CHECK(d.time_step(g) == 0.9 * g.spacing() * g.spacing() / 2.0);
    CHECK(d.dwell_window(g) == 50.0 * d.time_step(g));
    CHECK(d.margin(g) == 2.0 * g.spacing());

    const LateralStrength zero(std::vector<double>(64, 0.0));
    SolverConfig bad;
    bad.cfl_factor = 2.0;
    CHECK_THROWS_AS(Stepper(g, zero, ForcingSpec::constant(0.0), bad), ConfigError);
}

TEST_CASE("step: friction-free fixed points and translation") {
    for (int n : {1, 2}) {
        const TorusGrid g(n, 16);
        const LateralStrength zero(std::vector<double>(g.size(), 0.0));
        SolverConfig config;
        const State still = step(State::flat(g, 0.25), zero, ForcingSpec::constant(0.0), config);
        for (double v : still.u) {
            CHECK(v == 0.25);
        }
        const double force = 0.75;
        const ForcingSpec forcing = ForcingSpec::constant(force);
        Stepper stepper(g, zero, forcing, config);
        State s = State::flat(g);
        const int steps = 1000;
        for (int k = 0; k < steps; ++k) {
            stepper.step(s);
        }
        for (double v : s.u) {
            CHECK(v == s.u[0]);
            CHECK(v == doctest::Approx(steps * stepper.dt() * force).epsilon(1e-12));
        }
        CHECK(s.t == doctest::Approx(steps * stepper.dt()).epsilon(1e-15));
    }
}

TEST_CASE("residual and excess") {
    const TorusGrid g(1, 32);
    const auto phi = random_field(g.size(), 0.0, 1.0, 4);
    const LateralStrength field(phi);
    SUBCASE("zero state") {
        const auto r = residual(State::flat(g), field, ForcingSpec::constant(0.0));
        for (std::size_t i = 0; i < g.size(); ++i) {
            CHECK(r.r[i] == 0.0);
            CHECK(r.excess[i] == 0.0);
        }
    }
    SUBCASE("force below the strength everywhere") {
        const LateralStrength strong(std::vector<double>(g.size(), 0.6));
        const auto r = residual(State::flat(g), strong, ForcingSpec::constant(0.5));
        for (double e : r.excess) {
            CHECK(e == 0.0);
        }
    }
    SUBCASE("random state") {
        State s{g, random_field(g.size(), -0.01, 0.01, 5), 0.0};
        const auto r = residual(s, field, ForcingSpec::constant(0.3));
        for (std::size_t i = 0; i < g.size(); ++i) {
            CHECK(r.excess[i] == std::abs(friction_velocity(r.r[i], phi[i])));
        }
    }
}

TEST_CASE("run_until outcomes") {
    const TorusGrid g(1, 64);
    SolverConfig config;
    SUBCASE("zero force is stationary at the first dwell check") {
        const auto field = sample_field(ObstacleSpec{});
        const auto run = run_until(State::flat(g), field, ForcingSpec::constant(0.0), config);
        CHECK(run.outcome == Outcome::stationary);
        CHECK(run.final_state.t <= config.dwell_window(g));
        for (const auto& row : run.trajectory) {
            CHECK(row.max_excess <= config.tol_pin);
        }
    }
    SUBCASE("empty field escapes ballistically") {
        ObstacleSpec spec;
        spec.intensity = 1e-12;
        const auto field = sample_field(spec);
        REQUIRE(field.centers().empty());
        const double force = 2.0;
        const auto run = run_until(State::flat(g), field, ForcingSpec::constant(force), config);
        CHECK(run.outcome == Outcome::escaped);
        const double expected = (field.escape_height() - config.margin(g)) / force;
        CHECK(std::abs(run.final_state.t - expected) <= config.time_step(g));
    }
    SUBCASE("empty field escapes downwards under negative force") {
        ObstacleSpec spec;
        spec.intensity = 1e-12;
        const auto field = sample_field(spec);
        const auto run = run_until(State::flat(g), field, ForcingSpec::constant(-3.0), config);
        CHECK(run.outcome == Outcome::escaped);
        CHECK(run.final_state.u[0] < 0.0);
    }
    SUBCASE("clear-path shortcut classifies the empty field at once") {
        ObstacleSpec spec;
        spec.intensity = 1e-12;
        const auto field = sample_field(spec);
        config.clear_path_exit = true;
        const auto run = run_until(State::flat(g), field, ForcingSpec::constant(1e-3), config);
        CHECK(run.outcome == Outcome::escaped);
        CHECK(run.steps == 0);
    }
    SUBCASE("force above the field's strength escapes") {
        const auto field = sample_field(ObstacleSpec{});
        const auto run = run_until(State::flat(g), field, ForcingSpec::constant(1.5), config);
        CHECK(run.outcome == Outcome::escaped);
        CHECK(*std::min_element(run.final_state.u.begin(), run.final_state.u.end()) >=
              field.escape_height() - config.margin(g));
    }
    SUBCASE("timeout") {
        const LateralStrength zero(std::vector<double>(g.size(), 0.0));
        config.t_max = 0.01;
        const auto run = run_until(State::flat(g), zero, ForcingSpec::constant(1.0), config);
        CHECK(run.outcome == Outcome::timeout);
        CHECK(run.final_state.t >= 0.01 - 1e-12);
        CHECK(run.final_state.t < 0.01 + config.time_step(g));
    }
    SUBCASE("non-finite state reports the step") {
        const LateralStrength zero(std::vector<double>(g.size(), 0.0));
        State s = State::flat(g);
        s.u[3] = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(run_until(s, zero, ForcingSpec::constant(1.0), config), NumericalError);
    }
}

TEST_CASE("a stationary profile is a fixed point of step") {
    const TorusGrid g(1, 64);
    const auto field = sample_field(ObstacleSpec{});
    SolverConfig config;
    const ForcingSpec forcing = ForcingSpec::constant(0.4);
    const auto run = run_until(State::flat(g), field, forcing, config);
    REQUIRE(run.outcome == Outcome::stationary);
    // the dwell rule only bounds the excess; nodes still moving at the end do
    // so at speed <= tol_pin
    const State next = step(run.final_state, field, forcing, config);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(std::abs(next.u[i] - run.final_state.u[i]) <= config.tol_pin * config.time_step(g));
    }
    CHECK(check_stationary_supersolution(run.final_state, field, forcing.evaluate(g, 0.0), config.tol_pin).ok);
    CHECK(check_stationary_subsolution(run.final_state, field, forcing.evaluate(g, 0.0), config.tol_pin).ok);
}

TEST_CASE("growth bound holds at every step for both backends") {
    const TorusGrid g(1, 64);
    const auto field = sample_field(ObstacleSpec{});
    for (Backend backend : {Backend::prox, Backend::regularized}) {
        SolverConfig config;
        config.backend = backend;
        const ForcingSpec forcing = ForcingSpec::constant(1.7);
        Stepper stepper(g, field, forcing, config);
        State s = State::flat(g);
        for (int k = 0; k < 3000; ++k) {
            stepper.step(s);
            double sup = 0.0;
            for (double v : s.u) {
                sup = std::max(sup, std::abs(v));
            }
            CHECK(sup <= s.t * (forcing.sup_norm(s.t) + field.sup_strength()) + 1e-9);
        }
    }
}

TEST_CASE("order preservation for height-independent strength at cfl 1") {
    for (int n : {1, 2}) {
        const TorusGrid g(n, n == 1 ? 64 : 16);
        const LateralStrength field(random_field(g.size(), 0.0, 1.0, 10 + n));
        SolverConfig config;
        config.cfl_factor = 1.0;
        std::mt19937_64 gen(n);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int pair = 0; pair < 5; ++pair) {
            State u{g, random_field(g.size(), -0.05, 0.05, 100 + pair), 0.0};
            State v = u;
            for (auto& x : v.u) {
                x += 0.01 * unit(gen);
            }
            ForcingSpec fu = ForcingSpec::constant(0.3);
            fu.lateral = random_field(g.size(), -0.5, 0.5, 200 + pair);
            ForcingSpec fv = fu;
            for (auto& x : fv.lateral) {
                x += 0.1 * unit(gen);
            }
            Stepper su(g, field, fu, config);
            Stepper sv(g, field, fv, config);
            std::vector<State> run_u{u};
            std::vector<State> run_v{v};
            for (int k = 0; k < 500; ++k) {
                su.step(u);
                sv.step(v);
                run_u.push_back(u);
                run_v.push_back(v);
            }
            CHECK(verify_order(run_u, run_v) <= 1e-12);
        }
    }
}
