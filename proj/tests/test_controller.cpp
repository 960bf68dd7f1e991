#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "mfboost/controller.hpp"

using namespace mfboost;

namespace {

IpiConfig unclamped() {
    IpiConfig c;
    c.u_min = 0.0;
    c.u_max = 1.0;
    return c;
}

// State whose histories become (y1, y2, y3) / (r1, r2, r3) after pushing (y1, r1).
ControllerState primed(double y2, double y3, double r2, double r3, double u_prev,
                       double integral = 0.0) {
    ControllerState s;
    s.y_hist = {y2, y3, 0.0};
    s.yref_hist = {r2, r3, 0.0};
    s.u_prev = u_prev;
    s.integral = integral;
    return s;
}

}  // namespace

TEST_CASE("ipi_init floods histories with the initial condition") {
    const IpiConfig defaults;
    IpiConfig zero_floor = defaults;
    zero_floor.u_min = 0.0;
    const auto s = ipi_init(zero_floor, 0.0, 0.0, 0.0);
    CHECK(s.integral == 0.0);
    CHECK(s.u_prev == 0.0);

    const auto t = ipi_init(defaults, 12.0, 12.5, 0.5);
    CHECK(t.y_hist == std::array<double, 3>{12.0, 12.0, 12.0});
    CHECK(t.yref_hist == std::array<double, 3>{12.5, 12.5, 12.5});
}

TEST_CASE("ipi_init rejects bad inputs") {
    IpiConfig c;
    c.u_min = 0.01;
    CHECK_THROWS_AS(ipi_init(c, 12.0, 12.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ipi_init(c, NAN, 12.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(ipi_init(c, 12.0, INFINITY, 0.5), std::invalid_argument);
    c.alpha = 0.0;
    CHECK_THROWS_AS(ipi_init(c, 12.0, 12.0, 0.5), std::invalid_argument);
}

TEST_CASE("config invariants") {
    IpiConfig c;
    CHECK(check(c).empty());
    c.u_min = 0.5;
    c.u_max = 0.5;
    CHECK_FALSE(check(c).empty());
    c = {};
    c.tc = 0.0;
    REQUIRE(check(c).size() == 1);
    CHECK(check(c).front().key == "tc");
    c = {};
    c.kp = -1.0;
    CHECK(check(c).front().key == "kp");
    c = {};
    c.u_max = 1.5;
    CHECK(check(c).front().key == "u_max");
}

TEST_CASE("first step after a matched init returns the initial duty") {
    const IpiConfig c;
    const auto s = ipi_init(c, 12.0, 12.0, 0.5);
    const auto step = ipi_step(s, c, 12.0, 12.0);
    CHECK(step.duty == 0.5);
    CHECK(step.state.integral == 0.0);
}

TEST_CASE("discrete law, PI terms with a ramping reference") {
    // y = (1, 1, 1), y* = (1.03, 1.02, 1.01): both second differences vanish,
    // e = 0.03, I = 0.03 * 1e-4, u = 0.5 + 2 * 0.03 + 10 * 3e-6 = 0.56003.
    const auto step = ipi_step(primed(1.0, 1.0, 1.02, 1.01, 0.5), unclamped(), 1.0, 1.03);
    CHECK(step.duty == doctest::Approx(0.56003).epsilon(1e-13));
    CHECK(step.state.integral == doctest::Approx(3e-6).epsilon(1e-12));
    CHECK(step.state.y_hist == std::array<double, 3>{1.0, 1.0, 1.0});
    CHECK(step.state.yref_hist == std::array<double, 3>{1.03, 1.02, 1.01});
}

TEST_CASE("discrete law, derivative term alone") {
    // y = (3e-8, 0, 0) has second difference 3e-8, y* is flat at 3e-8, e = 0:
    // u = 0.5 - 3e-8 / (30 * 1e-8) = 0.4.
    const auto step = ipi_step(primed(0.0, 0.0, 3e-8, 3e-8, 0.5), unclamped(), 3e-8, 3e-8);
    CHECK(step.duty == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(step.state.integral == 0.0);
}

TEST_CASE("non-finite measurements are rejected") {
    const IpiConfig c;
    const auto s = ipi_init(c, 12.0, 12.0, 0.5);
    CHECK_THROWS_AS(ipi_step(s, c, NAN, 12.0), std::invalid_argument);
    CHECK_THROWS_AS(ipi_step(s, c, 12.0, -INFINITY), std::invalid_argument);
}

TEST_CASE("moving_average") {
    CHECK(*moving_average(std::vector<double>{24.0}, 4) == 24.0);
    CHECK(*moving_average(std::vector<double>{10, 20, 30, 40}, 2) == 35.0);
    CHECK(*moving_average(std::vector<double>{10, 20, 30, 40}, 1) == 40.0);
    for (std::size_t w = 1; w < 6; ++w) {
        CHECK(*moving_average(std::vector<double>{7.25, 7.25, 7.25}, w) == 7.25);
    }
    CHECK_FALSE(moving_average(std::vector<double>{1.0}, 0).has_value());
    CHECK_THROWS_AS(moving_average(std::vector<double>{}, 3), std::invalid_argument);
}

TEST_CASE("filter_output keeps a bounded buffer") {
    IpiConfig c;
    c.filter_window = 3;
    ControllerState s = ipi_init(c, 0.0, 0.0, 0.5);
    double last = 0.0;
    for (double raw : {3.0, 6.0, 9.0, 12.0}) {
        auto f = filter_output(std::move(s), c, raw);
        s = std::move(f.state);
        last = f.value;
    }
    CHECK(s.raw_hist.size() == 3);
    CHECK(last == doctest::Approx(9.0));

    c.filter_window = 0;
    const auto bypass = filter_output(ipi_init(c, 0.0, 0.0, 0.5), c, 5.5);
    CHECK(bypass.value == 5.5);
    CHECK(bypass.state.raw_hist.empty());
}

TEST_CASE("property: duty always within clamps") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> volts(-50.0, 50.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int n = 0; n < 2000; ++n) {
        IpiConfig c;
        c.alpha = (unit(rng) < 0.5 ? -1.0 : 1.0) * (0.1 + 100.0 * unit(rng));
        c.kp = 10.0 * unit(rng);
        c.ki = 100.0 * unit(rng);
        c.u_min = 0.3 * unit(rng);
        c.u_max = 0.6 + 0.4 * unit(rng);
        ControllerState s = ipi_init(c, volts(rng), volts(rng), c.u_min);
        for (int k = 0; k < 20; ++k) {
            auto step = ipi_step(std::move(s), c, volts(rng), volts(rng));
            REQUIRE(step.duty >= c.u_min);
            REQUIRE(step.duty <= c.u_max);
            REQUIRE(step.state.u_prev == step.duty);
            s = std::move(step.state);
        }
    }
}

TEST_CASE("property: identity when output tracks the reference exactly") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> volts(0.0, 40.0);
    std::uniform_real_distribution<double> unit(0.05, 0.9);
    for (int n = 0; n < 500; ++n) {
        const double a = volts(rng), b = volts(rng), y = volts(rng), u = unit(rng);
        const auto step = ipi_step(primed(a, b, a, b, u), IpiConfig{}, y, y);
        REQUIRE(step.duty == u);
    }
}

TEST_CASE("property: derivative term is linear in the second-difference gap") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> gap(-1e-7, 1e-7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    IpiConfig c = unclamped();
    c.kp = 0.0;
    c.ki = 0.0;
    c.u_min = -1e9;
    c.u_max = 1e9;
    for (int n = 0; n < 500; ++n) {
        c.alpha = 1.0 + 99.0 * unit(rng);
        const double g = gap(rng);
        const double u0 = unit(rng);
        // e = 0 with y = (g, 0, 0) against a reference flat at g.
        const double single = ipi_step(primed(0.0, 0.0, g, g, u0), c, g, g).duty - u0;
        const double twice =
            ipi_step(primed(0.0, 0.0, 2 * g, 2 * g, u0), c, 2 * g, 2 * g).duty - u0;
        REQUIRE(std::abs(twice - 2.0 * single) <= 1e-12 * std::abs(2.0 * single) + 1e-300);
    }
}

TEST_CASE("property: conditional integration freezes the integral in saturation") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const IpiConfig c;
    for (int n = 0; n < 500; ++n) {
        // Output far below the reference, duty already at the upper clamp.
        const double integral = unit(rng);
        const double y = 10.0 * unit(rng);
        const auto step = ipi_step(primed(y, y, y + 20.0, y + 20.0, c.u_max, integral), c, y,
                                   y + 20.0);
        REQUIRE(step.duty == c.u_max);
        REQUIRE(step.integral_held);
        REQUIRE(step.state.integral == integral);
    }

    // Saturated low while the error still asks for more duty: keep integrating.
    const auto low = ipi_step(primed(0.0, 0.0, 2e-3, 2e-3, c.u_min), c, 1e-3, 2e-3);
    CHECK(low.duty == c.u_min);
    CHECK_FALSE(low.integral_held);
    CHECK(low.state.integral > 0.0);
}
