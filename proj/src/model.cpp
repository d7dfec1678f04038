#include "hillscope/model.hpp"

#include <cmath>

namespace hillscope {
namespace model {

namespace {
constexpr double kPi = 3.14159265358979323846;

void require_interior(const ModelPoint& p) {
    if (p.y0 <= 0) throw DomainError("model launch point must have y0 > 0");
}
}  // namespace

double launch_speed(const ModelPoint& p, const ThrowParams& tp) {
    require_interior(p);
    return std::sqrt(2.0 * tp.gravity * p.y0);
}

double v1(const ModelPoint& p, const ThrowParams& tp) {
    return launch_speed(p, tp) * std::sin(tp.theta);
}

double v2(const ModelPoint& p, const ThrowParams& tp) {
    return launch_speed(p, tp) * std::cos(tp.theta);
}

State ballistic_state(const ModelPoint& p, const ThrowParams& tp, double t) {
    require_interior(p);
    const std::size_t n = p.dimension();
    State st;
    st.q.assign(n, 0.0);
    st.v.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) st.q[i] = p.x0[i];
    const double u1 = v1(p, tp), u2 = v2(p, tp), g = tp.gravity;
    st.q[0] = p.x0[0] + u1 * t;
    st.q[n - 1] = p.y0 - u2 * t + 0.5 * g * t * t;
    st.v[0] = u1;
    st.v[n - 1] = -u2 + g * t;
    return st;
}

double brake_time(const ModelPoint& p, const ThrowParams& tp) {
    return v2(p, tp) / tp.gravity;
}

double critical_time(const ModelPoint& p, const ThrowParams& tp) {
    const double u2 = v2(p, tp);
    if (u2 <= 0)
        throw DomainError("no finite critical time: direction has no downward component");
    return 2.0 * p.y0 / u2;
}

Vec envelope_point(const ModelPoint& p, const ThrowParams& tp) {
    const double ts = critical_time(p, tp);
    State st = ballistic_state(p, tp, ts);
    return st.q;
}

GammaJacobian gamma_jacobian(const ModelPoint& p, const ThrowParams& tp, double t) {
    if (p.dimension() != 2) throw ConfigError("gamma_jacobian is the planar (n = 2) form");
    const double u1 = v1(p, tp), u2 = v2(p, tp), g = tp.gravity;
    GammaJacobian out;
    out.m = Mat(2, 2);
    out.m(0, 0) = u1;
    out.m(0, 1) = u2 * t;
    out.m(1, 0) = -u2 + g * t;
    out.m(1, 1) = u1 * t;
    out.determinant = t * g * (2.0 * p.y0 - u2 * t);
    return out;
}

ModelFoldReport fold_certificate_model(const ModelPoint& p, const ThrowParams& tp) {
    ModelFoldReport rep;
    rep.t_star = critical_time(p, tp);
    rep.point = envelope_point(p, tp);

    const double u1 = v1(p, tp), u2 = v2(p, tp), g = tp.gravity, ts = rep.t_star;

    // kernel of dGamma on the critical locus: span of (v2 t, -v1)
    rep.kernel = normalized(Vec{u2 * ts, -u1});

    // critical locus v2(theta) t = 2 y0, parameterized by theta:
    // dt/dtheta = 2 y0 v1 / v2^2, tangent (dt/dtheta, 1)
    rep.critical_tangent = normalized(Vec{2.0 * p.y0 * u1 / (u2 * u2), 1.0});

    double c = std::fabs(dot(rep.kernel, rep.critical_tangent));
    rep.transversality_angle_deg = std::acos(std::min(1.0, c)) * 180.0 / kPi;

    // det(t, theta) = g (2 y0 t - v2(theta) t^2); gradient (d/dt, d/dtheta)
    double ddet_dt = g * (2.0 * p.y0 - 2.0 * u2 * ts);
    double ddet_dth = g * ts * ts * u1;  // dv2/dtheta = -v1
    rep.det_derivative_along_kernel = ddet_dt * rep.kernel[0] + ddet_dth * rep.kernel[1];

    Svd svd = svd_small(gamma_jacobian(p, tp, ts).m);
    rep.rank_ratio = svd.sigma.back() / svd.sigma.front();

    rep.fold_certified = rep.rank_ratio < 1e-6 &&
                         std::fabs(rep.det_derivative_along_kernel) > 1e-8 &&
                         rep.transversality_angle_deg > 5.0;
    return rep;
}

std::vector<Vec> envelope_hypersurface(const ModelPoint& p, std::size_t dim,
                                       std::size_t samples_per_axis) {
    if (dim < 2) throw ConfigError("envelope hypersurface needs dimension >= 2");
    require_interior(p);
    Vec center(dim - 1, 0.0);
    for (std::size_t i = 0; i < std::min(center.size(), p.x0.size()); ++i) center[i] = p.x0[i];

    std::vector<Vec> pts;
    const double half_width = 2.0 * p.y0;  // radius out to |theta| = 45 deg
    if (dim == 2) {
        for (std::size_t i = 0; i < samples_per_axis; ++i) {
            double u = -half_width +
                       2.0 * half_width * static_cast<double>(i) / (samples_per_axis - 1);
            pts.push_back(Vec{center[0] + u, u * u / (4.0 * p.y0)});
        }
        return pts;
    }
    // hypersurface of revolution about the vertical axis through the apex
    for (std::size_t i = 0; i < samples_per_axis; ++i) {
        double rr = half_width * static_cast<double>(i) / (samples_per_axis - 1);
        std::size_t n_ang = (i == 0) ? 1 : samples_per_axis;
        for (std::size_t j = 0; j < n_ang; ++j) {
            double phi = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(n_ang);
            Vec q(dim, 0.0);
            q[0] = center[0] + rr * std::cos(phi);
            q[1] = center[1] + rr * std::sin(phi);
            q[dim - 1] = rr * rr / (4.0 * p.y0);
            pts.push_back(q);
        }
    }
    return pts;
}

double min_height(const ModelPoint& p, const ThrowParams& tp) {
    const double u1 = v1(p, tp);
    return u1 * u1 / (2.0 * tp.gravity);
}

ParabolaVertex parabola_vertex(const ModelPoint& p, const ThrowParams& tp) {
    const double u1 = v1(p, tp), u2 = v2(p, tp), g = tp.gravity;
    double t_m = u2 / g;
    return ParabolaVertex{p.x0[0] + u1 * t_m, min_height(p, tp)};
}

}  // namespace model
}  // namespace hillscope
