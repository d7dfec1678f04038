#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "hillscope/core.hpp"

namespace hillscope {

enum class IntegratorKind { VelocityVerlet, AdaptiveRK45 };

struct IntegrateOptions {
    double step = 5e-5;            ///< fixed step for velocity-Verlet
    double energy_tol = 1e-9;      ///< max allowed |H(t) - H(0)|
    double domain_tol = 1e-9;      ///< truncate once f < -domain_tol
    bool with_variations = false;  ///< carry the tangent (variational) flow
    IntegratorKind kind = IntegratorKind::VelocityVerlet;
    double rk_rel_tol = 1e-10;     ///< adaptive mode only
    double rk_abs_tol = 1e-12;
    bool check_energy = true;
};

/// Flow of q'' = -grad V(q). Velocity-Verlet is the primary scheme (symplectic,
/// exact on constant-force potentials); RK45 is a cross-check mode.
/// Trajectories are truncated with a domain flag once f(q) < -domain_tol.
Trajectory integrate(const MechanicalSystem& s, const State& init,
                     std::pair<double, double> t_span, const IntegrateOptions& opts = {});

/// Same flow with the tangent matrices M(t) = d(q,v)/d(q0,v0) attached,
/// M(0) = identity, evolved by the exact derivative of the discrete step.
Trajectory integrate_with_variations(const MechanicalSystem& s, const State& init,
                                     std::pair<double, double> t_span,
                                     IntegrateOptions opts = {});

/// One velocity-Verlet step of size h from (q, v); if M is non-null it is
/// advanced by the differentiated step. Exposed for event refinement.
void vv_step(const MechanicalSystem& s, State& st, double h, Mat* M = nullptr);

/// State (and optionally tangent) at time t obtained by stepping from the
/// nearest stored sample at or before t. Deterministic for fixed inputs.
State state_at(const MechanicalSystem& s, const Trajectory& traj, double t,
               Mat* tangent_out = nullptr);

struct BrakeEvent {
    double t_brake = 0.0;
    Vec q_brake;
    double residual_speed = 0.0;
};

constexpr double kDefaultBrakeTol = 1e-10;

/// Locate instants where the velocity vanishes. Candidate minima of |v|
/// are refined by bisection on d(|v|^2)/dt = 2 v . a (60 iterations max);
/// an event is kept only if the residual speed is <= brake_tol.
std::vector<BrakeEvent> detect_brake(const MechanicalSystem& s, const Trajectory& traj,
                                     double brake_tol = kDefaultBrakeTol,
                                     double candidate_speed = 1e-3);

struct BrakeReflectionReport {
    double max_mismatch = 0.0;      ///< max |q(t0+h) - q(t0-h)| over h <= h_max
    double max_taylor_residual = 0.0;  ///< max |q(t0+h) - (q0 - h^2/2 grad V(q0))|
};

/// Checks that the orbit retraces itself across the brake instant and obeys
/// the quadratic emergence law q(t0+h) = q0 - h^2/2 grad V(q0) + O(h^4).
BrakeReflectionReport brake_reflection_check(const MechanicalSystem& s, const BrakeEvent& event,
                                             double h_max, const IntegrateOptions& opts = {});

enum class Parameterization { NewtonianTime, JMArclength };

/// Relabels sample parameters; the curve image is unchanged. JM arclength
/// uses ds = sqrt(f) |v| dt and requires f > 0 at every sample. The original
/// Newtonian times are retained so the change can be undone.
struct ReparameterizedTrajectory {
    Trajectory traj;               ///< times carry the new parameter
    Vec newtonian_times;           ///< original t per sample
    Parameterization parameter = Parameterization::NewtonianTime;
};

ReparameterizedTrajectory reparameterize(const MechanicalSystem& s, const Trajectory& traj,
                                         Parameterization parameter);

/// Cubic-Hermite resampling of a trajectory onto a uniform grid of the current
/// parameter. Derivatives dq/dparam come from the stored velocities.
Trajectory resample_uniform(const MechanicalSystem& s, const ReparameterizedTrajectory& rt,
                            std::size_t count);

/// Same, restricted to the parameter range [p0, p1] (must lie inside the
/// trajectory's parameter span).
Trajectory resample_range(const MechanicalSystem& s, const ReparameterizedTrajectory& rt,
                          double p0, double p1, std::size_t count);

/// CSV export: header t,q1,...,qn,v1,...,vn,f,H with 17 significant digits.
void write_trajectory_csv(std::ostream& os, const MechanicalSystem& s, const Trajectory& traj);

}  // namespace hillscope
