#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pinning/errors.hpp"
#include "pinning/io.hpp"
#include "pinning/obstacle_field.hpp"

using namespace pinning;

namespace {

ObstacleSpec spec_with(double lambda, double rho, double delta, double y, int n, std::uint64_t seed) {
    ObstacleSpec s;
    s.intensity = lambda;
    s.radius = rho;
    s.mollification_width = delta;
    s.slab_half_height = y;
    s.dimension = n;
    s.seed = seed;
    return s;
}

ObstacleField empty_field(int n = 1) {
    return ObstacleField(spec_with(50, 0.1, 0.04, 1, n, 1), {});
}

}  // namespace

TEST_CASE("obstacle parameter validation names the violated invariant") {
    CHECK_THROWS_WITH_AS(spec_with(50, 0.05, 0.1, 1, 1, 1).validate(),
                         doctest::Contains("radius must exceed mollification_width"), ConfigError);
    CHECK_THROWS_AS(spec_with(0, 0.1, 0.04, 1, 1, 1).validate(), ConfigError);
    CHECK_THROWS_AS(spec_with(-1, 0.1, 0.04, 1, 1, 1).validate(), ConfigError);
    CHECK_THROWS_AS(spec_with(50, 0.1, 0.0, 1, 1, 1).validate(), ConfigError);
    CHECK_THROWS_AS(spec_with(50, 0.1, 0.04, 0.12, 1, 1).validate(), ConfigError);
    CHECK_THROWS_AS(spec_with(50, 0.1, 0.04, 1, 3, 1).validate(), ConfigError);
    CHECK_NOTHROW(ObstacleSpec{}.validate());
}

TEST_CASE("centers outside the slab are rejected, lateral coordinates wrap") {
    const auto s = spec_with(50, 0.1, 0.04, 1, 1, 1);
    CHECK_THROWS_AS(ObstacleField(s, {Center{0.5, 1.5, 0}}), ConfigError);
    const ObstacleField f(s, {Center{1.25, 0.0, 0}});
    CHECK(f.centers()[0][0] == 0.25);
}

TEST_CASE("smoothstep") {
    CHECK(smoothstep(-1.0) == 0.0);
    CHECK(smoothstep(0.0) == 0.0);
    CHECK(smoothstep(0.5) == 0.5);
    CHECK(smoothstep(1.0) == 1.0);
    CHECK(smoothstep(2.0) == 1.0);
}

TEST_CASE("phi on simple configurations") {
    SUBCASE("at a center with rho=0.3, delta=0.1") {
        const ObstacleField f(spec_with(50, 0.3, 0.1, 1, 1, 1), {Center{0.5, 0.0, 0}});
        const double x[] = {0.5};
        CHECK(f.phi(x, 0.0) == 1.0);
    }
    SUBCASE("distance rho gives one half") {
        const ObstacleField f(spec_with(50, 0.25, 0.125, 1, 1, 1), {Center{0.5, 0.0, 0}});
        const double x[] = {0.5};
        CHECK(f.phi(x, 0.25) == doctest::Approx(0.5).epsilon(1e-15));
        const double x2[] = {0.75};
        CHECK(f.phi(x2, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("outside the support") {
        const ObstacleField f(spec_with(50, 0.1, 0.04, 1, 1, 1), {Center{0.5, 0.0, 0}});
        const double x[] = {0.5};
        CHECK(f.phi(x, 0.14) == 0.0);
        CHECK(f.phi(x, 0.5) == 0.0);
        CHECK(f.phi(x, -0.2) == 0.0);
    }
    SUBCASE("empty field") {
        const auto f = empty_field();
        const double x[] = {0.3};
        CHECK(f.phi(x, 0.0) == 0.0);
        CHECK(std::isinf(f.nearest_center_distance(x, 0.0)));
        CHECK(f.nearest_center_distance(x, 0.0) > f.spec().support_radius());
    }
}

TEST_CASE("nearest distance wraps laterally") {
    const ObstacleField f(spec_with(50, 0.1, 0.04, 1, 1, 1), {Center{0.0, 0.0, 0}});
    const double x[] = {0.9};
    CHECK(f.nearest_center_distance(x, 0.0) == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("sampling is deterministic and seed dependent") {
    const auto s = spec_with(50, 0.1, 0.04, 1, 1, 42);
    const auto a = sample_field(s);
    const auto b = sample_field(s);
    REQUIRE(a.centers().size() == b.centers().size());
    for (std::size_t i = 0; i < a.centers().size(); ++i) {
        CHECK(a.centers()[i] == b.centers()[i]);
    }
    auto other = s;
    other.seed = 43;
    const auto c = sample_field(other);
    CHECK((c.centers().size() != a.centers().size() || c.centers()[0] != a.centers()[0]));
}

TEST_CASE("tiny intensity gives an empty field") {
    const auto f = sample_field(spec_with(1e-12, 0.1, 0.04, 1, 1, 3));
    CHECK(f.centers().empty());
    const auto stats = field_stats(f, 16);
    CHECK(stats.sup_phi == 0.0);
    CHECK(stats.mean_phi == 0.0);
}

TEST_CASE("Poisson count mean over 200 seeds") {
    double sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        sum += static_cast<double>(sample_field(spec_with(50, 0.1, 0.04, 1, 1, seed)).centers().size());
    }
    const double mean = sum / 200.0;
    CHECK(std::abs(mean - 100.0) <= 3.0 * 10.0 / std::sqrt(200.0));
}

TEST_CASE("centers lie in the slab") {
    for (int n : {1, 2}) {
        const auto f = sample_field(spec_with(30, 0.1, 0.04, 0.7, n, 9));
        for (const auto& c : f.centers()) {
            for (int a = 0; a < n; ++a) {
                CHECK(c[a] >= 0.0);
                CHECK(c[a] < 1.0);
            }
            CHECK(c[n] >= -0.7);
            CHECK(c[n] <= 0.7);
        }
    }
}

TEST_CASE("range, support and periodicity over random probes") {
    for (int n : {1, 2}) {
        const auto f = sample_field(spec_with(50, 0.1, 0.04, 1, n, 11));
        std::mt19937_64 gen(5);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_real_distribution<double> height(-1.2, 1.2);
        std::uniform_int_distribution<long> dyadic(0, (1L << 30) - 1);
        const double reach = f.spec().support_radius();
        for (int k = 0; k < 10000; ++k) {
            std::array<double, 2> x{unit(gen), unit(gen)};
            const double h = height(gen);
            const double value = f.phi(std::span<const double>(x.data(), n), h);
            CHECK(value >= 0.0);
            CHECK(value <= 1.0);
            if (f.nearest_center_distance(std::span<const double>(x.data(), n), h) > reach) {
                CHECK(value == 0.0);
            }
            // exact lattice shifts need x + 1 to be representable
            std::array<double, 2> xd{std::ldexp(static_cast<double>(dyadic(gen)), -30),
                                     std::ldexp(static_cast<double>(dyadic(gen)), -30)};
            const double base = f.phi(std::span<const double>(xd.data(), n), h);
            for (int a = 0; a < n; ++a) {
                for (double shift : {1.0, -1.0, 2.0}) {
                    auto moved = xd;
                    moved[a] += shift;
                    CHECK(f.phi(std::span<const double>(moved.data(), n), h) == base);
                }
            }
        }
    }
}

TEST_CASE("phi is Lipschitz with constant 1.5 / (2 delta)") {
    const auto f = sample_field(spec_with(50, 0.1, 0.04, 1, 1, 17));
    const double delta = f.spec().mollification_width;
    std::mt19937_64 gen(23);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> height(-1.0, 1.0);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const double x = unit(gen);
        const double h = height(gen);
        const double r = unit(gen) * delta / 10.0 + 1e-9;
        const double th = angle(gen);
        const double p[] = {x};
        const double q[] = {x + r * std::cos(th)};
        const double hq = h + r * std::sin(th);
        const double dist = std::hypot(q[0] - p[0], hq - h);
        worst = std::max(worst, std::abs(f.phi(p, h) - f.phi(q, hq)) / dist);
    }
    CHECK(worst <= 1.5 / (2.0 * delta) + 1e-6);
    CHECK(worst > 0.0);
}

TEST_CASE("cell index matches a linear scan") {
    for (int n : {1, 2}) {
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const auto f = sample_field(spec_with(n == 1 ? 50 : 20, 0.1, 0.04, 1, n, seed));
            std::mt19937_64 gen(seed * 7 + n);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            std::uniform_real_distribution<double> height(-1.3, 1.3);
            for (int k = 0; k < 100; ++k) {
                std::array<double, 2> x{unit(gen), unit(gen)};
                const std::span<const double> xs(x.data(), n);
                const double h = height(gen);
                CHECK(f.nearest_center_distance(xs, h) == oracle::linear_scan_distance(f.centers(), xs, h, n));
                const double radius = 0.5 * unit(gen);
                CHECK(f.centers_within(xs, h, radius) == oracle::linear_scan_within(f.centers(), xs, h, n, radius));
                const double d = oracle::linear_scan_distance(f.centers(), xs, h, n);
                CHECK(f.phi(xs, h) == oracle::ramp(d, f.spec().radius, f.spec().mollification_width));
            }
        }
    }
}

TEST_CASE("grid evaluation and the bound evaluator agree bit for bit") {
    for (int n : {1, 2}) {
        const auto f = sample_field(spec_with(50, 0.1, 0.04, 1, n, 4));
        const TorusGrid grid(n, n == 1 ? 128 : 16);
        std::mt19937_64 gen(99);
        std::uniform_real_distribution<double> height(-1.1, 1.1);
        auto bound = f.bind(grid);
        for (int round = 0; round < 5; ++round) {
            std::vector<double> u(grid.size());
            for (auto& v : u) {
                v = height(gen);
            }
            std::vector<double> a(grid.size());
            std::vector<double> b(grid.size());
            f.evaluate(grid, u, a);
            bound->evaluate(u, b);
            CHECK(a == b);
            for (std::size_t k = 0; k < u.size(); ++k) {
                const auto x = grid.coordinates(k);
                CHECK(a[k] == f.phi(std::span<const double>(x.data(), n), u[k]));
            }
        }
    }
    const auto f1 = sample_field(spec_with(50, 0.1, 0.04, 1, 1, 4));
    CHECK_THROWS_AS(f1.bind(TorusGrid(2, 8)), ContractViolation);
}

TEST_CASE("field_stats") {
    CHECK_THROWS_AS(field_stats(empty_field(), 4), ContractViolation);
    const auto f = sample_field(spec_with(50, 0.1, 0.04, 1, 1, 5));
    REQUIRE(!f.centers().empty());
    const auto stats = field_stats(f, 64);
    CHECK(stats.sup_phi <= 1.0);
    CHECK(stats.sup_phi >= 1.0 - 1e-3);
    CHECK(stats.mean_phi > 0.0);
    CHECK(stats.mean_phi < stats.sup_phi);
}

TEST_CASE("field json round trips bit-exactly") {
    for (int n : {1, 2}) {
        const auto f = sample_field(spec_with(50, 0.1, 0.04, 1, n, 8));
        const std::string text = dump_json(to_json(f));
        const auto g = field_from_json(parse_json(text));
        CHECK(g.spec() == f.spec());
        REQUIRE(g.centers().size() == f.centers().size());
        for (std::size_t i = 0; i < f.centers().size(); ++i) {
            CHECK(g.centers()[i] == f.centers()[i]);
        }
        CHECK(dump_json(to_json(g)) == text);
    }
    CHECK_THROWS_AS(field_from_json(parse_json("{\"spec\": {}}")), ConfigError);
}

TEST_CASE("escape height and clear bands") {
    const ObstacleField f(spec_with(50, 0.1, 0.04, 1, 1, 1), {Center{0.5, 0.3, 0}});
    CHECK(f.escape_height() == doctest::Approx(0.86));
    CHECK(f.band_is_clear(0.45, 0.8));
    CHECK_FALSE(f.band_is_clear(0.43, 0.8));
    CHECK_FALSE(f.band_is_clear(-0.5, 0.17));
    CHECK(f.band_is_clear(-0.5, 0.15));
    CHECK(empty_field().band_is_clear(-1, 1));
}
