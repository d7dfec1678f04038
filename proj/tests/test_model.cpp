#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hillscope/model.hpp"

using namespace hillscope;
using namespace hillscope::model;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = kPi / 180.0;
}  // namespace

TEST_CASE("ballistic state: brake point of the straight-down throw") {
    ModelPoint p{{0.0}, 1.0};
    ThrowParams tp{0.0, 0.5};
    CHECK(brake_time(p, tp) == doctest::Approx(2.0));
    State st = ballistic_state(p, tp, 2.0);
    CHECK(norm(st.q) < 1e-15);
    CHECK(norm(st.v) < 1e-15);
}

TEST_CASE("ballistic state: launch speed sits on the zero-energy circle") {
    ModelPoint p{{0.0}, 1.0};
    for (double deg : {-70.0, -10.0, 25.0, 60.0}) {
        ThrowParams tp{deg * kDeg, 0.5};
        State st = ballistic_state(p, tp, 0.0);
        CHECK(norm(st.v) == doctest::Approx(std::sqrt(1.0)).epsilon(1e-14));
        CHECK(st.q[0] == 0.0);
        CHECK(st.q[1] == 1.0);
    }
}

TEST_CASE("ballistic state: hand-checked values at 30 degrees, t = 1") {
    ModelPoint p{{0.0}, 1.0};
    ThrowParams tp{30.0 * kDeg, 0.5};
    State st = ballistic_state(p, tp, 1.0);
    CHECK(st.q[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(st.q[1] == doctest::Approx(1.0 - std::cos(30.0 * kDeg) + 0.25).epsilon(1e-14));
    CHECK(st.v[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(st.v[1] == doctest::Approx(-std::cos(30.0 * kDeg) + 0.5).epsilon(1e-14));
}

TEST_CASE("energy vanishes identically along every throw") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> ang(-1.4, 1.4), tt(0.0, 5.0), hh(0.1, 4.0);
    for (int i = 0; i < 20; ++i) {
        ModelPoint p{{0.0}, hh(rng)};
        ThrowParams tp{ang(rng), 0.5};
        State st = ballistic_state(p, tp, tt(rng));
        double H = 0.5 * dot(st.v, st.v) - 0.5 * st.q[1];
        CHECK(std::fabs(H) < 1e-13);
    }
}

TEST_CASE("critical time formulas") {
    ModelPoint p{{0.0}, 1.0};
    CHECK(critical_time(p, {0.0, 0.5}) == doctest::Approx(2.0));
    CHECK(critical_time(p, {45.0 * kDeg, 0.5}) == doctest::Approx(2.0 * std::sqrt(2.0)));
    ModelPoint p4{{0.0}, 4.0};
    CHECK(critical_time(p4, {0.0, 0.5}) == doctest::Approx(4.0));
}

TEST_CASE("critical time requires a downward component") {
    ModelPoint p{{0.0}, 1.0};
    CHECK_THROWS_AS(critical_time(p, {95.0 * kDeg, 0.5}), DomainError);
}

TEST_CASE("envelope points lie on the envelope parabola") {
    ModelPoint p{{0.0}, 1.0};
    Vec e0 = envelope_point(p, {0.0, 0.5});
    CHECK(norm(e0 - Vec{0.0, 0.0}) < 1e-14);
    Vec e45 = envelope_point(p, {45.0 * kDeg, 0.5});
    CHECK(e45[0] == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(e45[1] == doctest::Approx(1.0).epsilon(1e-13));
    Vec e30 = envelope_point(p, {30.0 * kDeg, 0.5});
    CHECK(e30[0] == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-13));
    CHECK(e30[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("envelope membership holds across the downward hemisphere") {
    ModelPoint p{{0.4}, 1.7};
    for (int i = 0; i < 100; ++i) {
        double deg = -89.0 + 178.0 * i / 99.0;
        Vec e = envelope_point(p, {deg * kDeg, 0.5});
        double rhs = (e[0] - p.x0[0]) * (e[0] - p.x0[0]) / (4.0 * p.y0);
        CHECK(std::fabs(e[1] - rhs) < 1e-12 * std::max(1.0, std::fabs(e[1])));
    }
}

TEST_CASE("family Jacobian matches the printed matrix and determinant") {
    ModelPoint p{{0.0}, 1.0};
    auto j1 = gamma_jacobian(p, {0.0, 0.5}, 1.0);
    CHECK(j1.m(0, 0) == doctest::Approx(0.0));
    CHECK(j1.m(0, 1) == doctest::Approx(1.0));
    CHECK(j1.m(1, 0) == doctest::Approx(-0.5));
    CHECK(j1.m(1, 1) == doctest::Approx(0.0));
    CHECK(j1.determinant == doctest::Approx(0.5));

    auto j2 = gamma_jacobian(p, {0.0, 0.5}, 2.0);
    CHECK(j2.m(0, 1) == doctest::Approx(2.0));
    CHECK(std::fabs(j2.m(0, 0)) < 1e-15);
    CHECK(std::fabs(j2.m(1, 0)) < 1e-15);
    CHECK(std::fabs(j2.m(1, 1)) < 1e-15);
    CHECK(std::fabs(j2.determinant) < 1e-15);
}

TEST_CASE("determinant vanishes exactly at the critical time for every angle") {
    ModelPoint p{{0.0}, 1.0};
    for (double deg : {-75.0, -40.0, -5.0, 0.0, 20.0, 55.0, 85.0}) {
        ThrowParams tp{deg * kDeg, 0.5};
        double ts = critical_time(p, tp);
        CHECK(std::fabs(gamma_jacobian(p, tp, ts).determinant) < 1e-12);
    }
}

TEST_CASE("finite differences of the closed-form family match the Jacobian") {
    ModelPoint p{{0.0}, 1.0};
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ang(-1.2, 1.2), tt(0.2, 3.5);
    const double h = 1e-6;
    for (int i = 0; i < 30; ++i) {
        ThrowParams tp{ang(rng), 0.5};
        double t = tt(rng);
        auto jac = gamma_jacobian(p, tp, t);
        State sp = ballistic_state(p, {tp.theta + h, 0.5}, t);
        State sm = ballistic_state(p, {tp.theta - h, 0.5}, t);
        State tp2 = ballistic_state(p, tp, t + h);
        State tm = ballistic_state(p, tp, t - h);
        for (std::size_t r = 0; r < 2; ++r) {
            double fd_t = (tp2.q[r] - tm.q[r]) / (2 * h);
            double fd_th = (sp.q[r] - sm.q[r]) / (2 * h);
            CHECK(std::fabs(fd_t - jac.m(r, 0)) < 1e-6 * std::max(1.0, std::fabs(jac.m(r, 0))));
            CHECK(std::fabs(fd_th - jac.m(r, 1)) < 1e-6 * std::max(1.0, std::fabs(jac.m(r, 1))));
        }
    }
}

TEST_CASE("fold certificate away from the brake direction") {
    ModelPoint p{{0.0}, 1.0};
    auto rep = fold_certificate_model(p, {30.0 * kDeg, 0.5});
    CHECK(rep.fold_certified);
    // kernel parallel to (2 y0, -v1)
    Vec expect = normalized(Vec{2.0, -0.5});
    double align = std::fabs(dot(rep.kernel, expect));
    CHECK(align == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fold certificate at the brake direction") {
    ModelPoint p{{0.0}, 1.0};
    auto rep = fold_certificate_model(p, {0.0, 0.5});
    CHECK(rep.fold_certified);
    CHECK(std::fabs(rep.kernel[0]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::fabs(rep.kernel[1]) < 1e-12);
    CHECK(std::fabs(rep.critical_tangent[1]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.transversality_angle_deg == doctest::Approx(90.0).epsilon(1e-9));
    // derivative of det along the kernel: d/dt of g(2 y0 t - v2 t^2) at t* = 2
    CHECK(rep.det_derivative_along_kernel == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("envelope hypersurface: rotation of the planar parabola") {
    ModelPoint p{{0.0, 0.0}, 1.0};
    auto pts = envelope_hypersurface(p, 3, 21);
    bool found = false;
    for (const auto& q : pts) {
        if (std::fabs(q[0] - 2.0) < 1e-12 && std::fabs(q[1]) < 1e-12) {
            CHECK(q[2] == doctest::Approx(1.0).epsilon(1e-12));
            found = true;
        }
        // every sample lies on the paraboloid of revolution
        double r2 = q[0] * q[0] + q[1] * q[1];
        CHECK(q[2] == doctest::Approx(r2 / 4.0).epsilon(1e-10));
    }
    CHECK(found);
    CHECK(norm(pts.front() - Vec{0.0, 0.0, 0.0}) < 1e-14);  // apex at (x0, 0)
}

TEST_CASE("planar hypersurface equals the envelope-point sweep") {
    ModelPoint p{{0.0}, 1.0};
    auto pts = envelope_hypersurface(p, 2, 41);
    for (const auto& q : pts)
        CHECK(q[1] == doctest::Approx(q[0] * q[0] / 4.0).epsilon(1e-12));
}

TEST_CASE("conjugate height is below the launch exactly inside 45 degrees") {
    ModelPoint p{{0.0}, 1.0};
    double y44 = envelope_point(p, {44.0 * kDeg, 0.5})[1];
    double y45 = envelope_point(p, {45.0 * kDeg, 0.5})[1];
    double y46 = envelope_point(p, {46.0 * kDeg, 0.5})[1];
    CHECK(y44 < p.y0);
    CHECK(y45 == doctest::Approx(p.y0).epsilon(1e-12));
    CHECK(y46 > p.y0);
}

TEST_CASE("minimum height of a throw is v1 squared") {
    ModelPoint p{{0.0}, 1.0};
    for (double deg : {0.0, 20.0, 45.0, 70.0}) {
        ThrowParams tp{deg * kDeg, 0.5};
        double u1 = v1(p, tp);
        CHECK(min_height(p, tp) == doctest::Approx(u1 * u1).epsilon(1e-13));
    }
    CHECK(min_height(p, {0.0, 0.5}) == 0.0);  // only the brake orbit touches y = 0
}

TEST_CASE("vertex form of a throw parabola has coefficient 1/(4 y_m)") {
    ModelPoint p{{0.0}, 1.0};
    for (double deg : {15.0, 30.0, 45.0, 60.0}) {
        ThrowParams tp{deg * kDeg, 0.5};
        auto vx = parabola_vertex(p, tp);
        double ts = critical_time(p, tp);
        double worst = 0.0;
        for (int k = 0; k <= 50; ++k) {
            State st = ballistic_state(p, tp, ts * k / 50.0);
            double rhs = vx.y_m + (st.q[0] - vx.x_m) * (st.q[0] - vx.x_m) / (4.0 * vx.y_m);
            worst = std::max(worst, std::fabs(st.q[1] - rhs));
        }
        CHECK(worst < 1e-10);
    }
}
