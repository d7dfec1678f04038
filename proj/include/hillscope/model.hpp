#pragma once

#include "hillscope/core.hpp"

namespace hillscope {
namespace model {

/// Launch point for the constant-force (ballistic) closed form.
/// Horizontal position x0 (n-1 components), height y0 > 0 above the boundary.
struct ModelPoint {
    Vec x0;
    double y0 = 0.0;

    std::size_t dimension() const { return x0.size() + 1; }
};

/// Direction on the zero-energy velocity circle, measured from straight down.
/// Speed is fixed by the energy: |v| = sqrt(2 g y0).
struct ThrowParams {
    double theta = 0.0;   ///< radians from the straight-down direction
    double gravity = 0.5;
};

/// speed and velocity components: v1 horizontal, v2 downward leg
double launch_speed(const ModelPoint& p, const ThrowParams& tp);
double v1(const ModelPoint& p, const ThrowParams& tp);
double v2(const ModelPoint& p, const ThrowParams& tp);

/// Closed-form flow: x(t) = x0 + v1 t (along the throw's horizontal axis),
/// y(t) = y0 - v2 t + (g/2) t^2. Planar throws live in the plane spanned by
/// the vertical and the first horizontal axis.
State ballistic_state(const ModelPoint& p, const ThrowParams& tp, double t);

/// Brake time of the straight-down throw: t_b = sqrt(2 y0 / g) * ... with
/// v2 = sqrt(2 g y0): t_b = v2 / g (= 2 sqrt(y0) at g = 1/2).
double brake_time(const ModelPoint& p, const ThrowParams& tp);

/// First critical time along the throw: t* = 2 y0 / v2. Requires a downward
/// component (|theta| < 90 deg); otherwise a DomainError is thrown.
double critical_time(const ModelPoint& p, const ThrowParams& tp);

/// Envelope point of the family: (x0 + 2 y0 tan(theta), y0 tan(theta)^2),
/// which lies exactly on y = |x - x0|^2 / (4 y0).
Vec envelope_point(const ModelPoint& p, const ThrowParams& tp);

/// Planar family differential with columns (d/dt, d/dtheta):
///   [[ v1,      v2 t ],
///    [ -v2+g t, v1 t ]],  det = t g (2 y0 - v2 t).
struct GammaJacobian {
    Mat m;
    double determinant = 0.0;
};
GammaJacobian gamma_jacobian(const ModelPoint& p, const ThrowParams& tp, double t);

/// Fold data at the critical point of one throw, from the closed form.
struct ModelFoldReport {
    double t_star = 0.0;
    Vec point;
    Vec kernel;                      ///< direction in (t, theta) parameters
    Vec critical_tangent;            ///< tangent of {det = 0} in (t, theta)
    double transversality_angle_deg = 0.0;
    double det_derivative_along_kernel = 0.0;
    double rank_ratio = 0.0;         ///< sigma_min / sigma_max at the event
    bool fold_certified = false;
};
ModelFoldReport fold_certificate_model(const ModelPoint& p, const ThrowParams& tp);

/// Samples of the rotated envelope hypersurface y = |x - x0|^2/(4 y0) in
/// dimension n >= 2 (the planar parabola rotated about the vertical axis).
std::vector<Vec> envelope_hypersurface(const ModelPoint& p, std::size_t dim,
                                       std::size_t samples_per_axis);

/// Height of the lowest point of a throw (= v1^2 / (2 g)); zero only for the
/// brake orbit theta = 0.
double min_height(const ModelPoint& p, const ThrowParams& tp);

/// Vertex of the throw's parabola in (x, y) throw-plane coordinates; the
/// curve is y - y_m = (x - x_m)^2 / (4 y_m).
struct ParabolaVertex {
    double x_m = 0.0;
    double y_m = 0.0;
};
ParabolaVertex parabola_vertex(const ModelPoint& p, const ThrowParams& tp);

}  // namespace model
}  // namespace hillscope
