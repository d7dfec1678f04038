#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hillscope/linalg.hpp"

namespace hillscope {

/// Configuration / input errors (bad dimensions, malformed scenarios).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A computation left the region where the geometry is defined.
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure inside an integrator or solver.
struct IntegrationError : std::runtime_error {
    explicit IntegrationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// One monomial: coeff * prod_i q_i^exponents[i].
struct MonomialTerm {
    double coeff = 0.0;
    std::vector<int> exponents;
};

/// Multivariate polynomial potential with exact derivatives.
///
/// Evaluation, gradient and Hessian are formal polynomial operations; no
/// numerical differentiation happens anywhere on this path.
struct PolynomialPotential {
    std::size_t dimension = 0;
    std::vector<MonomialTerm> terms;

    PolynomialPotential() = default;
    PolynomialPotential(std::size_t dim, std::vector<MonomialTerm> t);

    double value(const Vec& q) const;
    Vec gradient(const Vec& q) const;
    Mat hessian(const Vec& q) const;

    void check_point(const Vec& q) const;
};

struct PotentialEval {
    double value = 0.0;
    Vec gradient;
    Mat hessian;
};

PotentialEval eval_potential(const PolynomialPotential& p, const Vec& q);

/// Mechanical system: Euclidean kinetic metric on R^n, polynomial potential,
/// fixed energy level E. The conformal factor f = 2(E - V) defines the
/// Jacobi-Maupertuis metric f * ds^2_euclid and the Hill region f >= 0.
struct MechanicalSystem {
    PolynomialPotential potential;
    double energy = 0.0;

    std::size_t dimension() const { return potential.dimension; }
};

struct State {
    Vec q;
    Vec v;
};

/// Total energy H = |v|^2/2 + V(q).
double total_energy(const MechanicalSystem& s, const State& st);

double conformal_factor(const MechanicalSystem& s, const Vec& q);

/// Gradient of the conformal factor, grad f = -2 grad V.
Vec conformal_gradient(const MechanicalSystem& s, const Vec& q);

enum class HillClass : std::uint8_t { Interior, Boundary, Exterior };

struct HillClassification {
    HillClass cls = HillClass::Interior;
    double f_value = 0.0;
    double tol = 0.0;
    bool regular = false;      ///< applies to Boundary points: grad f != 0
    double grad_norm = 0.0;
};

constexpr double kDefaultBoundaryTol = 1e-9;

HillClassification hill_classify(const MechanicalSystem& s, const Vec& q,
                                 double tol_boundary = kDefaultBoundaryTol);

/// Canonical test systems used throughout the suite.
MechanicalSystem make_model_system(std::size_t dim = 2, double gravity = 0.5);
MechanicalSystem make_oscillator_system(std::size_t dim = 2, double energy = 0.5);

// Trajectory lives here as plain data; the integrators that fill it are in
// dynamics.hpp.
struct Trajectory {
    Vec times;
    std::vector<State> states;
    std::vector<Mat> tangents;   ///< empty unless integrated with variations
    double step = 0.0;
    bool exited_domain = false;  ///< truncated because f < -domain_tol
    double exit_time = 0.0;

    std::size_t size() const { return times.size(); }
    bool has_tangents() const { return !tangents.empty(); }
};

/// JM length of a sampled trajectory: integral of sqrt(max(f,0)) |v| dt by
/// composite quadrature (exact for quadratic integrands on uniform pairs).
/// Samples with f < -tol are a domain violation.
double jm_length(const MechanicalSystem& s, const Trajectory& traj,
                 double domain_tol = kDefaultBoundaryTol);

}  // namespace hillscope
