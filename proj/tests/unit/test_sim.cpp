#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <stdexcept>

#include "dragonboat/sim.hpp"

using namespace dragonboat;

namespace {

PaddleState paddle(Side s, double angle, double omega) {
    PaddleState p;
    p.side = s;
    p.angle_deg = angle;
    p.omega_deg_s = omega;
    p.refresh(WaterZone{});
    return p;
}

// Advances both paddles by their own rate and steps the boat.
struct Rig {
    HydroParams h;
    WaterZone zone;
    BoatState boat;
    PaddleState left = paddle(Side::left, 0.0, 0.0);
    PaddleState right = paddle(Side::right, 0.0, 0.0);

    void run(double omega_l, double omega_r, int steps) {
        for (int i = 0; i < steps; ++i) {
            left.omega_deg_s = omega_l;
            right.omega_deg_s = omega_r;
            left.angle_deg += omega_l * h.dt;
            right.angle_deg += omega_r * h.dt;
            left.refresh(zone);
            right.refresh(zone);
            boat = step(boat, left, right, h, zone);
        }
    }
};

}  // namespace

TEST_CASE("water zone membership is half-open") {
    const WaterZone z;
    const double angles[] = {0.0, 69.99, 70.0, 180.0, 289.99, 290.0, 337.0, 359.99};
    const bool expected[] = {true, true, false, false, false, true, true, true};
    for (std::size_t i = 0; i < 8; ++i) {
        CAPTURE(angles[i]);
        CHECK(in_water(angles[i], z) == expected[i]);
    }
    CHECK_THROWS_AS(in_water(360.0, z), std::domain_error);
    CHECK_THROWS_AS(in_water(-0.01, z), std::domain_error);
    CHECK_THROWS_AS(in_water(std::nan(""), z), std::domain_error);
}

TEST_CASE("custom zones are validated") {
    CHECK_THROWS_AS(WaterZone({{10.0, 5.0}}), std::invalid_argument);
    CHECK_THROWS_AS(WaterZone({{0.0, 50.0}, {40.0, 60.0}}), std::invalid_argument);
    CHECK_THROWS_AS(WaterZone({{300.0, 361.0}}), std::invalid_argument);
    const WaterZone z({{100.0, 120.0}});
    CHECK(in_water(100.0, z));
    CHECK_FALSE(in_water(120.0, z));
}

TEST_CASE("angle wrapping") {
    CHECK(wrap_degrees(360.0) == 0.0);
    CHECK(wrap_degrees(-10.0) == doctest::Approx(350.0));
    CHECK(wrap_degrees(725.0) == doctest::Approx(5.0));
    CHECK(wrap_degrees(-1e-18) < 360.0);
    CHECK(wrap_radians(std::numbers::pi) == doctest::Approx(std::numbers::pi));
    CHECK(wrap_radians(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
    CHECK(wrap_radians(3.0 * std::numbers::pi / 2.0) == doctest::Approx(-std::numbers::pi / 2.0));
}

TEST_CASE("paddle thrust") {
    HydroParams h;
    const WaterZone z;
    CHECK(paddle_thrust(paddle(Side::left, 180.0, 300.0), h, z) == 0.0);
    CHECK(paddle_thrust(paddle(Side::left, 0.0, 0.0), h, z) == 0.0);
    h.thrust_coeff = 2.0;
    CHECK(paddle_thrust(paddle(Side::left, 300.0, 100.0), h, z) == 200.0);
    CHECK(paddle_thrust(paddle(Side::left, 300.0, -100.0), h, z) == -200.0);
}

TEST_CASE("hydro parameters must be positive") {
    HydroParams h;
    CHECK_NOTHROW(h.validate());
    h.mass = 0.0;
    CHECK_THROWS_AS(h.validate(), std::invalid_argument);
    h = {};
    h.dt = std::nan("");
    CHECK_THROWS_AS(h.validate(), std::invalid_argument);
}

TEST_CASE("step examples") {
    const HydroParams h;
    SUBCASE("rest is a fixed point") {
        const BoatState b;
        CHECK(step(b, 0.0, 0.0, h) == b);
    }
    SUBCASE("equal forces give straight surge") {
        const BoatState n = step(BoatState{}, 300.0, 300.0, h);
        CHECK(n.yaw_rate == 0.0);
        CHECK(n.heading == 0.0);
        CHECK(n.y == 0.0);
        CHECK(n.surge_velocity > 0.0);
        CHECK(n.x > 0.0);
    }
    SUBCASE("dominant left turns right") {
        const BoatState n = step(BoatState{}, 300.0, 100.0, h);
        CHECK(n.yaw_rate < 0.0);
        CHECK(n.heading < 0.0);
    }
    SUBCASE("semi-implicit update order") {
        BoatState b;
        b.surge_velocity = 2.0;
        const BoatState n = step(b, 100.0, 100.0, h);
        const double v = 2.0 + (200.0 / h.mass - h.surge_drag_coeff / h.mass * 4.0) * h.dt;
        CHECK(n.surge_velocity == doctest::Approx(v).epsilon(1e-15));
        CHECK(n.x == doctest::Approx(v * h.dt).epsilon(1e-15));
        CHECK(n.distance_travelled == doctest::Approx(v * h.dt).epsilon(1e-15));
    }
}

TEST_CASE("mirror") {
    BoatState b;
    b.y = 1.0;
    b.heading = 0.2;
    b.yaw_rate = 0.3;
    const BoatState m = mirror(b);
    CHECK(m.y == -1.0);
    CHECK(m.heading == -0.2);
    CHECK(m.yaw_rate == -0.3);
    CHECK(mirror(m) == b);
    BoatState straight;
    straight.x = 5.0;
    straight.surge_velocity = 3.0;
    CHECK(mirror(straight) == straight);
}

TEST_CASE("property: mirrored inputs give mirrored states") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> force(-400.0, 600.0);
    const HydroParams h;
    BoatState a, b;
    a.y = 0.7;
    a.heading = 0.1;
    b = mirror(a);
    for (int i = 0; i < 20000; ++i) {
        const double fl = force(gen), fr = force(gen);
        a = step(a, fl, fr, h);
        b = step(b, fr, fl, h);
        const BoatState m = mirror(a);
        REQUIRE(std::abs(m.x - b.x) <= 1e-9);
        REQUIRE(std::abs(m.y - b.y) <= 1e-9);
        REQUIRE(std::abs(wrap_radians(m.heading - b.heading)) <= 1e-9);
        REQUIRE(std::abs(m.yaw_rate - b.yaw_rate) <= 1e-9);
        REQUIRE(std::abs(m.surge_velocity - b.surge_velocity) <= 1e-9);
    }
}

TEST_CASE("property: bitwise determinism") {
    auto run = [] {
        std::mt19937_64 gen(99);
        std::uniform_real_distribution<double> force(-300.0, 700.0);
        std::vector<BoatState> states;
        BoatState b;
        for (int i = 0; i < 5000; ++i) {
            b = step(b, force(gen), force(gen), HydroParams{});
            states.push_back(b);
        }
        return states;
    };
    const auto a = run(), b = run();
    REQUIRE(a.size() == b.size());
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(BoatState)) == 0);
}

TEST_CASE("property: drag dissipates surge speed") {
    const HydroParams h;
    for (double v0 : {-6.0, -0.5, 0.01, 3.0, 12.0}) {
        BoatState b;
        b.surge_velocity = v0;
        for (int i = 0; i < 2000 && b.surge_velocity != 0.0; ++i) {
            const BoatState n = step(b, 0.0, 0.0, h);
            REQUIRE(std::abs(n.surge_velocity) < std::abs(b.surge_velocity));
            REQUIRE(n.distance_travelled >= b.distance_travelled);
            b = n;
        }
    }
}

TEST_CASE("property: equal forces keep yaw exactly zero") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> force(-500.0, 500.0);
    BoatState b;
    for (int i = 0; i < 10000; ++i) {
        const double f = force(gen);
        b = step(b, f, f, HydroParams{});
        REQUIRE(b.yaw_rate == 0.0);
        REQUIRE(b.heading == 0.0);
        REQUIRE(b.y == 0.0);
    }
}

TEST_CASE("property: speed stays below the terminal bound") {
    Rig rig;
    const double omega_max = 360.0;
    const double v_inf = std::sqrt(2.0 * rig.h.thrust_coeff * omega_max / rig.h.surge_drag_coeff);
    double peak = 0.0;
    for (int i = 0; i < 60 * 120; ++i) {
        rig.run(omega_max, omega_max, 1);
        peak = std::max(peak, rig.boat.surge_velocity);
        REQUIRE(rig.boat.surge_velocity < v_inf);
    }
    CHECK(peak > 0.5 * v_inf);
}

TEST_CASE("equal paddles hold a straight line over a kilometre") {
    Rig rig;
    while (rig.boat.x < 1000.0) rig.run(300.0, 300.0, 60);
    CHECK(std::abs(rig.boat.y) < 1e-9);
    CHECK(rig.boat.heading == 0.0);
}

TEST_CASE("left-dominant paddling heads right") {
    Rig rig;
    rig.run(300.0, 200.0, 600);
    CHECK(rig.boat.heading < 0.0);
    CHECK(rig.boat.y < 0.0);
    Rig mirrored;
    mirrored.run(200.0, 300.0, 600);
    CHECK(mirrored.boat.heading == doctest::Approx(-rig.boat.heading).epsilon(1e-12));
}

TEST_CASE("opposite forces spin in place") {
    BoatState b;
    for (int i = 0; i < 120; ++i) b = step(b, 300.0, -300.0, HydroParams{});
    CHECK(b.yaw_rate < 0.0);
    CHECK(b.surge_velocity == 0.0);
    CHECK(b.x == 0.0);
    CHECK(b.y == 0.0);
}
