#pragma once

#include <optional>

#include "hillscope/dynamics.hpp"

namespace hillscope {

/// Family of unit-energy geodesics through a base point, indexed by direction
/// angles on the velocity sphere (radius sqrt(f(base)) fixed by the energy)
/// and Newtonian time. Angles are measured from the "straight down" axis,
/// the direction of -grad f at the nearest Hill boundary point.
struct FamilyMap {
    MechanicalSystem system;
    Vec base;
    Vec down_axis;                 ///< unit vector toward the boundary
    std::vector<Vec> perp_basis;   ///< n-1 unit vectors completing the frame
    double t_max = 0.0;
    IntegrateOptions opts;

    std::size_t dimension() const { return base.size(); }

    /// Unit direction for angles theta (size n-1; n=2 uses theta[0] only).
    Vec direction(const Vec& theta) const;
    /// Initial velocity sqrt(f(base)) * direction(theta).
    Vec velocity(const Vec& theta) const;
    /// Tangents of the velocity sphere, d(velocity)/d(theta_j).
    std::vector<Vec> velocity_tangents(const Vec& theta) const;
};

/// Builds a family map, locating the straight-down axis by root finding along
/// -grad f from the base. Throws DomainError if the base is not interior.
FamilyMap make_family_map(const MechanicalSystem& s, const Vec& base, double t_max,
                          const IntegrateOptions& opts = {});

/// Nearest Hill boundary point from q along -grad f; used for the down axis.
Vec nearest_boundary_point(const MechanicalSystem& s, const Vec& q, double search_limit = 10.0);

struct FamilyEval {
    Vec point;
    Mat dGamma;        ///< columns ordered (d/dt, d/theta_1, ...)
    double f_value = 0.0;
    bool in_domain = true;
};

/// Point and family differential at (theta, t), assembled from the tangent
/// flow applied to the velocity-sphere tangents.
FamilyEval family_map_eval(const FamilyMap& fam, const Vec& theta, double t);

struct ConjugateEvent {
    Vec theta;
    double t_star = 0.0;
    Vec point;
    double det_before = 0.0;
    double det_after = 0.0;
    Vec kernel;        ///< null direction of dGamma in (t, theta) coordinates
};

struct ConjugateOptions {
    double det_tol = 1e-10;
    double bisect_tol = 1e-10;     ///< stop when the t bracket is this small
    std::size_t floor_steps = 10;  ///< origin-degeneracy guard, in steps
};

/// First zero crossing of det dGamma after the polar-coordinate degeneracy at
/// t = 0 (det ~ t^{n-1} there, which is not a conjugate point). Returns
/// nothing when no sign change occurs before t_max or domain exit.
std::optional<ConjugateEvent> detect_conjugate(const FamilyMap& fam, const Vec& theta,
                                               const ConjugateOptions& opts = {});

/// Diagnostics for the origin guard: t_floor actually used and the small-t
/// plateau of det / t^{n-1}.
struct OriginDiagnostics {
    double t_floor = 0.0;
    double plateau = 0.0;
};
OriginDiagnostics origin_diagnostics(const FamilyMap& fam, const Vec& theta);

struct ConjugateLocus {
    std::vector<Vec> theta_grid;
    std::vector<std::optional<ConjugateEvent>> events;  ///< gaps kept, not interpolated

    std::vector<Vec> points() const;
};

/// Per-direction conjugate events over a grid, assembled in grid order.
/// Directions are processed independently (parallel-safe, deterministic).
ConjugateLocus conjugate_locus(const FamilyMap& fam, const std::vector<Vec>& theta_grid,
                               const ConjugateOptions& opts = {}, unsigned threads = 0);

/// Convenience planar grid: count angles uniform in [deg_min, deg_max].
std::vector<Vec> planar_theta_grid(double deg_min, double deg_max, std::size_t count);

struct FoldReport {
    Vec singular_values;           ///< descending
    Vec kernel;                    ///< right singular vector of sigma_min
    Vec critical_tangent;          ///< tangent of {det = 0} in (t, theta)
    double transversality_angle_deg = 0.0;
    double det_derivative_along_kernel = 0.0;
    double rank_ratio = 0.0;       ///< sigma_min / sigma_max
    double next_ratio = 0.0;       ///< second-smallest sigma / sigma_max
    bool degenerate = false;       ///< rank deficiency worse than n-1
    bool fold_certified = false;
};

struct FoldOptions {
    double rank_tol = 1e-6;
    double fold_tol = 1e-8;        ///< scaled by sigma_max and the time scale
    double angle_tol_deg = 5.0;
    double theta_fd = 1e-4;        ///< step for the critical-set tangent
    double kernel_fd = 1e-5;       ///< step along the kernel, times t scale
};

/// Certifies the fold conditions at a conjugate event: rank n-1, kernel
/// transverse to the critical set, det derivative along the kernel nonzero.
FoldReport fold_check(const FamilyMap& fam, const ConjugateEvent& event,
                      const FoldOptions& opts = {});

struct DirectionRecord {
    double theta = 0.0;
    bool has_event = false;
    double conjugate_f = 0.0;      ///< f at the conjugate point
    bool below_base = false;       ///< strictly closer to the boundary than base
};

struct DownwardCone {
    Vec base;
    double aperture_deg = 0.0;
    std::vector<DirectionRecord> records;
};

struct ConeOptions {
    double sweep_deg = 75.0;       ///< scan |theta| up to this angle
    std::size_t coarse = 31;       ///< coarse sweep resolution
    double refine_deg = 0.05;      ///< aperture bisection tolerance
    double max_base_f = 1e9;       ///< near-boundary precondition on f(base)
    ConjugateOptions conj;
};

/// Sweeps planar directions, marks those whose conjugate point is strictly
/// closer to the boundary (smaller f) than the base, and bisects the aperture.
DownwardCone downward_cone(const FamilyMap& fam, const ConeOptions& opts = {});

struct SideTangencyReport {
    bool side_ok = true;           ///< no transversal crossing before t*
    double max_tangency_angle_deg = 0.0;  ///< worst non-exempt angle at t*
    std::size_t exempt_count = 0;  ///< brake-like events (velocity ~ 0)
    std::vector<double> offending_thetas;
};

/// Checks that each family member stays on the base side of the locus until
/// its conjugate time, and meets the locus tangentially there (the brake
/// direction is exempt: its velocity vanishes at the event).
SideTangencyReport side_and_tangency_check(const FamilyMap& fam, const ConjugateLocus& locus,
                                           double angle_tol_deg = 5.0);

struct ReparamInvarianceReport {
    double hausdorff = 0.0;
    std::vector<Vec> newtonian_points;
    std::vector<Vec> arclength_points;
    std::size_t arclength_gaps = 0;  ///< members truncated or without a crossing
};

struct ReparamOptions {
    double theta_fd = 5e-4;        ///< member spacing for the d/dtheta stencil
    ConjugateOptions conj;
};

/// Computes the conjugate locus twice: via the Newtonian-time family
/// differential, and via a brute-force envelope detector on the
/// arclength-reparameterized family (chain rule through s(theta, t), theta
/// derivatives by finite differences across members, no tangent flow).
/// Returns the symmetric Hausdorff distance.
ReparamInvarianceReport reparam_invariance_check(const FamilyMap& fam,
                                                 const std::vector<Vec>& theta_grid,
                                                 const ReparamOptions& opts = {});

double hausdorff_distance(const std::vector<Vec>& a, const std::vector<Vec>& b);

}  // namespace hillscope
