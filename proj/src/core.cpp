#include "hillscope/core.hpp"

#include <algorithm>
#include <cmath>

namespace hillscope {

namespace {

double pow_int(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

}  // namespace

PolynomialPotential::PolynomialPotential(std::size_t dim, std::vector<MonomialTerm> t)
    : dimension(dim), terms(std::move(t)) {
    if (dimension < 1) throw ConfigError("potential dimension must be >= 1");
    for (const auto& term : terms) {
        if (term.exponents.size() != dimension)
            throw ConfigError("exponent vector length does not match potential dimension");
        for (int e : term.exponents)
            if (e < 0) throw ConfigError("negative exponent in potential term");
    }
}

void PolynomialPotential::check_point(const Vec& q) const {
    if (q.size() != dimension)
        throw ConfigError("point dimension " + std::to_string(q.size()) +
                          " does not match potential dimension " + std::to_string(dimension));
}

double PolynomialPotential::value(const Vec& q) const {
    check_point(q);
    double v = 0.0;
    for (const auto& t : terms) {
        double m = t.coeff;
        for (std::size_t i = 0; i < dimension; ++i) m *= pow_int(q[i], t.exponents[i]);
        v += m;
    }
    return v;
}

Vec PolynomialPotential::gradient(const Vec& q) const {
    check_point(q);
    Vec g(dimension, 0.0);
    for (const auto& t : terms) {
        for (std::size_t i = 0; i < dimension; ++i) {
            int ei = t.exponents[i];
            if (ei == 0) continue;
            double m = t.coeff * ei * pow_int(q[i], ei - 1);
            for (std::size_t j = 0; j < dimension; ++j)
                if (j != i) m *= pow_int(q[j], t.exponents[j]);
            g[i] += m;
        }
    }
    return g;
}

Mat PolynomialPotential::hessian(const Vec& q) const {
    check_point(q);
    Mat h(dimension, dimension);
    for (const auto& t : terms) {
        for (std::size_t i = 0; i < dimension; ++i) {
            int ei = t.exponents[i];
            if (ei == 0) continue;
            // diagonal
            if (ei >= 2) {
                double m = t.coeff * ei * (ei - 1) * pow_int(q[i], ei - 2);
                for (std::size_t j = 0; j < dimension; ++j)
                    if (j != i) m *= pow_int(q[j], t.exponents[j]);
                h(i, i) += m;
            }
            // off-diagonal, fill upper triangle then mirror
            for (std::size_t j = i + 1; j < dimension; ++j) {
                int ej = t.exponents[j];
                if (ej == 0) continue;
                double m = t.coeff * ei * ej * pow_int(q[i], ei - 1) * pow_int(q[j], ej - 1);
                for (std::size_t k = 0; k < dimension; ++k)
                    if (k != i && k != j) m *= pow_int(q[k], t.exponents[k]);
                h(i, j) += m;
                h(j, i) += m;
            }
        }
    }
    return h;
}

PotentialEval eval_potential(const PolynomialPotential& p, const Vec& q) {
    PotentialEval out;
    out.value = p.value(q);
    out.gradient = p.gradient(q);
    out.hessian = p.hessian(q);
    return out;
}

double total_energy(const MechanicalSystem& s, const State& st) {
    return 0.5 * dot(st.v, st.v) + s.potential.value(st.q);
}

double conformal_factor(const MechanicalSystem& s, const Vec& q) {
    return 2.0 * (s.energy - s.potential.value(q));
}

Vec conformal_gradient(const MechanicalSystem& s, const Vec& q) {
    return -2.0 * s.potential.gradient(q);
}

HillClassification hill_classify(const MechanicalSystem& s, const Vec& q, double tol_boundary) {
    if (tol_boundary <= 0) throw ConfigError("tol_boundary must be > 0");
    HillClassification out;
    out.f_value = conformal_factor(s, q);
    out.tol = tol_boundary;
    Vec g = conformal_gradient(s, q);
    out.grad_norm = norm(g);
    if (std::fabs(out.f_value) <= tol_boundary) {
        out.cls = HillClass::Boundary;
        out.regular = out.grad_norm > tol_boundary;
    } else {
        out.cls = out.f_value > 0 ? HillClass::Interior : HillClass::Exterior;
    }
    return out;
}

MechanicalSystem make_model_system(std::size_t dim, double gravity) {
    // V = -g * y with y the last coordinate; E = 0, so f = 2 g y.
    std::vector<MonomialTerm> terms(1);
    terms[0].coeff = -gravity;
    terms[0].exponents.assign(dim, 0);
    terms[0].exponents[dim - 1] = 1;
    return MechanicalSystem{PolynomialPotential(dim, std::move(terms)), 0.0};
}

MechanicalSystem make_oscillator_system(std::size_t dim, double energy) {
    std::vector<MonomialTerm> terms(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        terms[i].coeff = 0.5;
        terms[i].exponents.assign(dim, 0);
        terms[i].exponents[i] = 2;
    }
    return MechanicalSystem{PolynomialPotential(dim, std::move(terms)), energy};
}

double jm_length(const MechanicalSystem& s, const Trajectory& traj, double domain_tol) {
    const std::size_t m = traj.size();
    if (m < 2) return 0.0;
    Vec g(m);
    for (std::size_t k = 0; k < m; ++k) {
        double f = conformal_factor(s, traj.states[k].q);
        if (f < -domain_tol)
            throw DomainError("trajectory sample outside the closed Hill region (f = " +
                              std::to_string(f) + ")");
        g[k] = std::sqrt(std::max(f, 0.0)) * norm(traj.states[k].v);
    }
    // Composite quadrature: Simpson over pairs of intervals (nonuniform form),
    // trapezoid on a trailing odd interval.
    double total = 0.0;
    std::size_t k = 0;
    while (k + 2 < m) {
        double h0 = traj.times[k + 1] - traj.times[k];
        double h1 = traj.times[k + 2] - traj.times[k + 1];
        double H = h0 + h1;
        total += H / 6.0 *
                 ((2.0 - h1 / h0) * g[k] + (H * H / (h0 * h1)) * g[k + 1] +
                  (2.0 - h0 / h1) * g[k + 2]);
        k += 2;
    }
    if (k + 1 < m) total += 0.5 * (traj.times[k + 1] - traj.times[k]) * (g[k] + g[k + 1]);
    return total;
}

}  // namespace hillscope
