#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hillscope/core.hpp"
#include "hillscope/dynamics.hpp"
#include "hillscope/model.hpp"

using namespace hillscope;

namespace {

PolynomialPotential random_potential(std::mt19937_64& rng, std::size_t dim, int max_degree) {
    std::uniform_real_distribution<double> coeff(-2.0, 2.0);
    std::uniform_int_distribution<int> expo(0, max_degree);
    std::vector<MonomialTerm> terms;
    std::size_t n_terms = 3 + rng() % 4;
    for (std::size_t t = 0; t < n_terms; ++t) {
        MonomialTerm term;
        term.coeff = coeff(rng);
        int remaining = max_degree;
        for (std::size_t i = 0; i < dim; ++i) {
            int e = expo(rng) % (remaining + 1);
            term.exponents.push_back(e);
            remaining -= e;
        }
        terms.push_back(term);
    }
    return PolynomialPotential(dim, terms);
}

}  // namespace

TEST_CASE("potential evaluation: linear model potential") {
    MechanicalSystem s = make_model_system();
    auto ev = eval_potential(s.potential, {3.0, 2.0});
    CHECK(ev.value == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(ev.gradient[0] == 0.0);
    CHECK(ev.gradient[1] == doctest::Approx(-0.5).epsilon(1e-15));
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(ev.hessian(i, j) == 0.0);
}

TEST_CASE("potential evaluation: zero polynomial") {
    PolynomialPotential p(3, {});
    auto ev = eval_potential(p, {1.0, -2.0, 0.5});
    CHECK(ev.value == 0.0);
    for (double g : ev.gradient) CHECK(g == 0.0);
    for (double h : ev.hessian.a) CHECK(h == 0.0);
}

TEST_CASE("potential evaluation: quadratic bowl") {
    MechanicalSystem s = make_oscillator_system();
    auto ev = eval_potential(s.potential, {0.9, 0.0});
    CHECK(ev.value == doctest::Approx(0.405).epsilon(1e-14));
    CHECK(ev.gradient[0] == doctest::Approx(0.9).epsilon(1e-14));
    CHECK(ev.gradient[1] == 0.0);
    CHECK(ev.hessian(0, 0) == doctest::Approx(1.0));
    CHECK(ev.hessian(1, 1) == doctest::Approx(1.0));
    CHECK(ev.hessian(0, 1) == 0.0);
}

TEST_CASE("potential evaluation: dimension mismatch is a configuration error") {
    MechanicalSystem s = make_model_system();
    CHECK_THROWS_AS(s.potential.value({1.0, 2.0, 3.0}), ConfigError);
}

TEST_CASE("exact derivatives agree with central finite differences") {
    std::mt19937_64 rng(20240817);
    std::uniform_real_distribution<double> coord(-1.2, 1.2);
    const double h = 1e-5;
    for (int rep = 0; rep < 40; ++rep) {
        std::size_t dim = 1 + rng() % 3;
        PolynomialPotential p = random_potential(rng, dim, 4);
        Vec q(dim);
        for (auto& x : q) x = coord(rng);
        Vec grad = p.gradient(q);
        Mat hess = p.hessian(q);
        double scale = 0.0;
        for (double g : grad) scale = std::max(scale, std::fabs(g));
        for (std::size_t i = 0; i < dim; ++i) {
            Vec qp = q, qm = q;
            qp[i] += h;
            qm[i] -= h;
            double fd = (p.value(qp) - p.value(qm)) / (2 * h);
            CHECK(std::fabs(fd - grad[i]) < 1e-6 * std::max(1.0, scale));
            Vec gp = p.gradient(qp), gm = p.gradient(qm);
            for (std::size_t j = 0; j < dim; ++j) {
                double fdh = (gp[j] - gm[j]) / (2 * h);
                CHECK(std::fabs(fdh - hess(i, j)) < 1e-6 * std::max(1.0, std::fabs(hess(i, j))));
            }
        }
    }
}

TEST_CASE("conformal factor of the model is the height") {
    MechanicalSystem s = make_model_system();
    CHECK(conformal_factor(s, {7.0, 0.25}) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(conformal_factor(s, {-3.0, 1.5}) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("conformal factor of the oscillator") {
    MechanicalSystem s = make_oscillator_system();
    CHECK(conformal_factor(s, {1.0, 0.0}) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(conformal_factor(s, {0.9, 0.0}) == doctest::Approx(0.19).epsilon(1e-12));
}

TEST_CASE("hill classification") {
    MechanicalSystem model = make_model_system();
    auto cls = hill_classify(model, {0.0, 1e-12});
    CHECK(cls.cls == HillClass::Boundary);
    CHECK(cls.regular);
    CHECK(cls.grad_norm == doctest::Approx(1.0).epsilon(1e-12));

    CHECK(hill_classify(model, {5.0, 0.5}).cls == HillClass::Interior);

    MechanicalSystem osc = make_oscillator_system();
    CHECK(hill_classify(osc, {1.1, 0.0}).cls == HillClass::Exterior);
}

TEST_CASE("hill classification is scale consistent in the tolerance") {
    MechanicalSystem osc = make_oscillator_system();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coord(-1.3, 1.3);
    const double tol = 1e-6;
    for (int rep = 0; rep < 200; ++rep) {
        Vec q{coord(rng), coord(rng)};
        double f = conformal_factor(osc, q);
        if (std::fabs(f) <= 2 * tol) continue;
        CHECK(hill_classify(osc, q, tol).cls == hill_classify(osc, q, tol / 2).cls);
    }
}

TEST_CASE("jm length of a brake segment has the closed form (2/3) y^(3/2)") {
    MechanicalSystem s = make_model_system();
    for (double y : {0.5, 1.0, 2.0}) {
        State init{{0.0, y}, {0.0, -std::sqrt(y)}};
        Trajectory traj = integrate(s, init, {0.0, 2.0 * std::sqrt(y)}, {});
        CHECK(jm_length(s, traj) ==
              doctest::Approx(2.0 / 3.0 * std::pow(y, 1.5)).epsilon(1e-10));
    }
}

TEST_CASE("jm length of an empty or single-sample trajectory is zero") {
    MechanicalSystem s = make_model_system();
    Trajectory traj;
    CHECK(jm_length(s, traj) == 0.0);
    traj.times.push_back(0.0);
    traj.states.push_back(State{{0.0, 1.0}, {0.0, 0.0}});
    CHECK(jm_length(s, traj) == 0.0);
}

TEST_CASE("jm length matches the closed-form action integral at 30 degrees") {
    // along zero-energy throws the integrand is |v|^2; closed form from the
    // ballistic flow: integral of (v1^2 + (v2 - g t)^2) dt
    MechanicalSystem s = make_model_system();
    model::ModelPoint p{{0.0}, 1.0};
    model::ThrowParams tp{30.0 * 3.14159265358979323846 / 180.0, 0.5};
    double ts = model::critical_time(p, tp);
    State init = model::ballistic_state(p, tp, 0.0);
    Trajectory traj = integrate(s, init, {0.0, ts}, {});
    double u1 = model::v1(p, tp), u2 = model::v2(p, tp), g = tp.gravity;
    auto action = [&](double t) {
        // antiderivative of v1^2 + (v2 - g t)^2
        return u1 * u1 * t - std::pow(u2 - g * t, 3.0) / (3.0 * g);
    };
    double expect = action(ts) - action(0.0);
    CHECK(jm_length(s, traj) == doctest::Approx(expect).epsilon(1e-8));
}

TEST_CASE("jm length is additive over concatenation") {
    MechanicalSystem s = make_oscillator_system();
    State init{{0.5, 0.0}, {0.0, std::sqrt(conformal_factor(s, {0.5, 0.0}))}};
    Trajectory whole = integrate(s, init, {0.0, 1.0}, {});
    Trajectory first = integrate(s, init, {0.0, 0.5}, {});
    State mid = first.states.back();
    Trajectory second = integrate(s, mid, {0.5, 1.0}, {});
    double total = jm_length(s, first) + jm_length(s, second);
    CHECK(total == doctest::Approx(jm_length(s, whole)).epsilon(1e-9));
}

TEST_CASE("jm length is invariant under time reparameterization of the curve") {
    MechanicalSystem s = make_model_system();
    model::ModelPoint p{{0.0}, 1.0};
    model::ThrowParams tp{0.5, 0.5};
    State init = model::ballistic_state(p, tp, 0.0);
    Trajectory traj = integrate(s, init, {0.0, 1.5}, {});

    // stretch time by tau = t + t^2/(2T) while keeping the image:
    // q'(tau) = v / (dtau/dt), with dtau/dt bounded away from zero
    Trajectory warped;
    const double T = traj.times.back();
    for (std::size_t k = 0; k < traj.size(); ++k) {
        double t = traj.times[k];
        double dtau_dt = 1.0 + t / T;
        warped.times.push_back(t + t * t / (2.0 * T));
        warped.states.push_back(State{traj.states[k].q, (1.0 / dtau_dt) * traj.states[k].v});
    }
    CHECK(jm_length(s, warped) == doctest::Approx(jm_length(s, traj)).epsilon(1e-8));
}

TEST_CASE("jm length rejects samples outside the closed Hill region") {
    MechanicalSystem s = make_model_system();
    Trajectory traj;
    traj.times = {0.0, 1.0};
    traj.states = {State{{0.0, 1.0}, {0.0, 0.0}}, State{{0.0, -0.5}, {0.0, 0.0}}};
    CHECK_THROWS_AS(jm_length(s, traj), DomainError);
}
