#include "hillscope/conjugate.hpp"

#include <algorithm>
#include <cmath>

#include "hillscope/parallel.hpp"

namespace hillscope {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = kPi / 180.0;

/// Orthonormal completion of a unit vector to a full frame.
std::vector<Vec> complete_frame(const Vec& u) {
    const std::size_t n = u.size();
    std::vector<Vec> basis;
    if (n == 2) {
        basis.push_back(Vec{-u[1], u[0]});
        return basis;
    }
    // Gram-Schmidt against the coordinate axes, skipping the most parallel one
    std::size_t skip = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (std::fabs(u[i]) > std::fabs(u[skip])) skip = i;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == skip) continue;
        Vec e(n, 0.0);
        e[i] = 1.0;
        Vec w = e - dot(e, u) * u;
        for (const Vec& b : basis) w = w - dot(w, b) * b;
        basis.push_back(normalized(w));
    }
    return basis;
}

/// Member trajectory with tangent flow, truncated at domain exit or t_max.
Trajectory member_trajectory(const FamilyMap& fam, const Vec& theta) {
    State init{fam.base, fam.velocity(theta)};
    return integrate_with_variations(fam.system, init, {0.0, fam.t_max}, fam.opts);
}

/// Family differential at a stored/partial-step state.
Mat assemble_dgamma(const FamilyMap& fam, const Vec& theta, const State& st, const Mat& M) {
    const std::size_t n = fam.dimension();
    Mat dG(n, n);
    dG.set_col(0, st.v);
    std::vector<Vec> w = fam.velocity_tangents(theta);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        Vec col(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) col[i] += M(i, n + k) * w[j][k];
        dG.set_col(j + 1, col);
    }
    return dG;
}

double det_at_time(const FamilyMap& fam, const Vec& theta, const Trajectory& traj, double t,
                   State* st_out = nullptr, Mat* dg_out = nullptr) {
    Mat M;
    State st = state_at(fam.system, traj, t, &M);
    Mat dG = assemble_dgamma(fam, theta, st, M);
    if (st_out) *st_out = st;
    if (dg_out) *dg_out = dG;
    return det(dG);
}

/// Index below which sign changes are the polar-coordinate degeneracy, not
/// conjugate points: first sample where |det|/t^{n-1} reaches half its
/// small-t plateau, never earlier than floor_steps.
std::size_t floor_index(const FamilyMap& fam, const Trajectory& traj,
                        const std::vector<double>& dets, std::size_t floor_steps,
                        double* plateau_out = nullptr) {
    const std::size_t m = traj.size();
    const double expo = static_cast<double>(fam.dimension() - 1);
    auto ratio = [&](std::size_t k) {
        double t = traj.times[k];
        return t > 0 ? std::fabs(dets[k]) / std::pow(t, expo) : 0.0;
    };
    std::size_t probe = std::min<std::size_t>(floor_steps, m - 1);
    double plateau = ratio(probe);
    if (plateau_out) *plateau_out = plateau;
    std::size_t k = 1;
    while (k < m - 1 && ratio(k) < 0.5 * plateau) ++k;
    return std::max(k, std::min(floor_steps, m - 1));
}

}  // namespace

Vec FamilyMap::direction(const Vec& theta) const {
    const std::size_t n = dimension();
    if (theta.size() != n - 1) throw ConfigError("direction angle count must be n-1");
    if (n == 2) {
        double c = std::cos(theta[0]), s = std::sin(theta[0]);
        Vec d(n);
        for (std::size_t i = 0; i < n; ++i) d[i] = c * down_axis[i] + s * perp_basis[0][i];
        return d;
    }
    // spherical chart about the down axis: polar theta[0], azimuths theta[1..]
    double c = std::cos(theta[0]), s = std::sin(theta[0]);
    Vec t(n, 0.0);
    double cphi = std::cos(theta.size() > 1 ? theta[1] : 0.0);
    double sphi = std::sin(theta.size() > 1 ? theta[1] : 0.0);
    for (std::size_t i = 0; i < n; ++i)
        t[i] = c * down_axis[i] + s * (cphi * perp_basis[0][i] + sphi * perp_basis[1][i]);
    return t;
}

Vec FamilyMap::velocity(const Vec& theta) const {
    double f = conformal_factor(system, base);
    if (f <= 0) throw DomainError("family base must be interior (f > 0)");
    return std::sqrt(f) * direction(theta);
}

std::vector<Vec> FamilyMap::velocity_tangents(const Vec& theta) const {
    const std::size_t n = dimension();
    double speed = std::sqrt(conformal_factor(system, base));
    std::vector<Vec> w;
    if (n == 2) {
        double c = std::cos(theta[0]), s = std::sin(theta[0]);
        Vec d(n);
        for (std::size_t i = 0; i < n; ++i) d[i] = -s * down_axis[i] + c * perp_basis[0][i];
        w.push_back(speed * d);
        return w;
    }
    double c = std::cos(theta[0]), s = std::sin(theta[0]);
    double phi = theta.size() > 1 ? theta[1] : 0.0;
    double cphi = std::cos(phi), sphi = std::sin(phi);
    Vec dpolar(n), dazim(n);
    for (std::size_t i = 0; i < n; ++i) {
        dpolar[i] = -s * down_axis[i] + c * (cphi * perp_basis[0][i] + sphi * perp_basis[1][i]);
        dazim[i] = s * (-sphi * perp_basis[0][i] + cphi * perp_basis[1][i]);
    }
    w.push_back(speed * dpolar);
    w.push_back(speed * dazim);
    return w;
}

Vec nearest_boundary_point(const MechanicalSystem& s, const Vec& q, double search_limit) {
    Vec g = conformal_gradient(s, q);
    double gn = norm(g);
    if (gn == 0) throw DomainError("grad f vanishes; no boundary direction from this point");
    Vec dir = (-1.0 / gn) * g;  // f decreases toward the boundary
    double f0 = conformal_factor(s, q);
    if (f0 <= 0) throw DomainError("nearest_boundary_point expects an interior point");
    // bracket f = 0 along the ray
    double lo = 0.0, hi = 0.0, step = 1e-3;
    while (hi < search_limit) {
        hi += step;
        if (conformal_factor(s, q + hi * dir) <= 0) break;
        step *= 1.6;
    }
    if (conformal_factor(s, q + hi * dir) > 0)
        throw DomainError("no Hill boundary found along -grad f within search limit");
    for (int it = 0; it < 90; ++it) {
        double mid = 0.5 * (lo + hi);
        if (conformal_factor(s, q + mid * dir) > 0)
            lo = mid;
        else
            hi = mid;
    }
    return q + 0.5 * (lo + hi) * dir;
}

FamilyMap make_family_map(const MechanicalSystem& s, const Vec& base, double t_max,
                          const IntegrateOptions& opts) {
    if (conformal_factor(s, base) <= 0)
        throw DomainError("family base must lie in the open Hill region");
    FamilyMap fam;
    fam.system = s;
    fam.base = base;
    fam.t_max = t_max;
    fam.opts = opts;
    fam.opts.with_variations = true;
    Vec qb = nearest_boundary_point(s, base);
    fam.down_axis = normalized(-1.0 * conformal_gradient(s, qb));
    fam.perp_basis = complete_frame(fam.down_axis);
    return fam;
}

FamilyEval family_map_eval(const FamilyMap& fam, const Vec& theta, double t) {
    if (t <= 0 || t > fam.t_max) throw ConfigError("family time must lie in (0, t_max]");
    State init{fam.base, fam.velocity(theta)};
    Trajectory traj = integrate_with_variations(fam.system, init, {0.0, t}, fam.opts);
    FamilyEval out;
    if (traj.exited_domain && traj.times.back() < t) {
        out.in_domain = false;
        out.point = traj.states.back().q;
        out.f_value = conformal_factor(fam.system, out.point);
        return out;
    }
    State st;
    Mat dG;
    det_at_time(fam, theta, traj, t, &st, &dG);
    out.point = st.q;
    out.dGamma = dG;
    out.f_value = conformal_factor(fam.system, st.q);
    return out;
}

std::optional<ConjugateEvent> detect_conjugate(const FamilyMap& fam, const Vec& theta,
                                               const ConjugateOptions& opts) {
    Trajectory traj = member_trajectory(fam, theta);
    const std::size_t m = traj.size();
    if (m < 3) return std::nullopt;

    std::vector<double> dets(m);
    for (std::size_t k = 0; k < m; ++k) {
        Mat dG = assemble_dgamma(fam, theta, traj.states[k], traj.tangents[k]);
        dets[k] = det(dG);
    }

    std::size_t k0 = floor_index(fam, traj, dets, opts.floor_steps);
    for (std::size_t k = k0; k + 1 < m; ++k) {
        if (!(dets[k] > 0) == !(dets[k + 1] > 0)) continue;
        double lo = traj.times[k], hi = traj.times[k + 1];
        double dlo = dets[k];
        while (hi - lo > opts.bisect_tol) {
            double mid = 0.5 * (lo + hi);
            double dm = det_at_time(fam, theta, traj, mid);
            if ((dlo > 0) == (dm > 0)) {
                lo = mid;
                dlo = dm;
            } else {
                hi = mid;
            }
        }
        double ts = 0.5 * (lo + hi);
        ConjugateEvent ev;
        ev.theta = theta;
        ev.t_star = ts;
        ev.det_before = dets[k];
        ev.det_after = dets[k + 1];
        State st;
        Mat dG;
        det_at_time(fam, theta, traj, ts, &st, &dG);
        ev.point = st.q;
        Svd svd = svd_small(dG);
        ev.kernel = svd.v.col(fam.dimension() - 1);
        return ev;
    }
    return std::nullopt;
}

OriginDiagnostics origin_diagnostics(const FamilyMap& fam, const Vec& theta) {
    Trajectory traj = member_trajectory(fam, theta);
    std::vector<double> dets(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k)
        dets[k] = det(assemble_dgamma(fam, theta, traj.states[k], traj.tangents[k]));
    OriginDiagnostics diag;
    std::size_t kf = floor_index(fam, traj, dets, 10, &diag.plateau);
    diag.t_floor = traj.times[kf];
    return diag;
}

std::vector<Vec> ConjugateLocus::points() const {
    std::vector<Vec> pts;
    for (const auto& e : events)
        if (e) pts.push_back(e->point);
    return pts;
}

ConjugateLocus conjugate_locus(const FamilyMap& fam, const std::vector<Vec>& theta_grid,
                               const ConjugateOptions& opts, unsigned threads) {
    if (theta_grid.size() < 8) throw ConfigError("direction grid resolution must be >= 8");
    ConjugateLocus locus;
    locus.theta_grid = theta_grid;
    locus.events.resize(theta_grid.size());
    parallel_for(
        theta_grid.size(),
        [&](std::size_t i) { locus.events[i] = detect_conjugate(fam, theta_grid[i], opts); },
        threads);
    return locus;
}

std::vector<Vec> planar_theta_grid(double deg_min, double deg_max, std::size_t count) {
    std::vector<Vec> grid;
    for (std::size_t i = 0; i < count; ++i) {
        double d = deg_min + (deg_max - deg_min) * static_cast<double>(i) /
                                 static_cast<double>(count - 1);
        grid.push_back(Vec{d * kDeg});
    }
    return grid;
}

FoldReport fold_check(const FamilyMap& fam, const ConjugateEvent& event,
                      const FoldOptions& opts) {
    const std::size_t n = fam.dimension();
    FoldReport rep;

    FamilyEval ev = family_map_eval(fam, event.theta, event.t_star);
    Svd svd = svd_small(ev.dGamma);
    rep.singular_values = svd.sigma;
    rep.kernel = svd.v.col(n - 1);
    double sig_max = svd.sigma[0];
    rep.rank_ratio = svd.sigma[n - 1] / sig_max;
    rep.next_ratio = n >= 2 ? svd.sigma[n - 2] / sig_max : 1.0;
    if (rep.next_ratio < opts.rank_tol) {
        rep.degenerate = true;  // rank deficiency worse than n-1
        return rep;
    }

    // tangent of the critical set {det = 0}: move each angle, re-locate t*
    auto t_star_near = [&](const Vec& th) -> double {
        Trajectory traj = member_trajectory(fam, th);
        double window = std::max(0.05 * event.t_star, 20 * fam.opts.step);
        double lo = std::max(fam.opts.step, event.t_star - window);
        double hi = std::min(traj.times.back(), event.t_star + window);
        double dlo = det_at_time(fam, th, traj, lo);
        double dhi = det_at_time(fam, th, traj, hi);
        if ((dlo > 0) == (dhi > 0))
            throw IntegrationError("critical set tangent: no det sign change in window");
        for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
            double mid = 0.5 * (lo + hi);
            double dm = det_at_time(fam, th, traj, mid);
            if ((dlo > 0) == (dm > 0)) {
                lo = mid;
                dlo = dm;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    };

    // (t, theta) space: build tangent vectors (dt*/dtheta_j, e_j)
    std::vector<Vec> tangents;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        Vec tp = event.theta, tm = event.theta;
        tp[j] += opts.theta_fd;
        tm[j] -= opts.theta_fd;
        double dt = (t_star_near(tp) - t_star_near(tm)) / (2.0 * opts.theta_fd);
        Vec tangent(n, 0.0);
        tangent[0] = dt;
        tangent[1 + j] = 1.0;
        tangents.push_back(normalized(tangent));
    }
    rep.critical_tangent = tangents[0];

    // angle between the kernel and the tangent subspace
    Vec k = rep.kernel;
    Vec proj(n, 0.0);
    for (const Vec& tv : tangents) proj += dot(k, tv) * tv;  // tangents ~orthogonal here
    double ortho = norm(k - proj);
    rep.transversality_angle_deg = std::asin(std::clamp(ortho, 0.0, 1.0)) * 180.0 / kPi;

    // directional derivative of det along the kernel, central differences
    double step = opts.kernel_fd * std::max(event.t_star, 0.1);
    auto det_shift = [&](double sgn) {
        Vec th = event.theta;
        for (std::size_t j = 0; j + 1 < n; ++j) th[j] += sgn * step * rep.kernel[1 + j];
        double t = event.t_star + sgn * step * rep.kernel[0];
        FamilyEval fe = family_map_eval(fam, th, t);
        return det(fe.dGamma);
    };
    rep.det_derivative_along_kernel = (det_shift(1.0) - det_shift(-1.0)) / (2.0 * step);

    double fold_threshold =
        opts.fold_tol * std::pow(sig_max, static_cast<double>(n - 1)) / std::max(event.t_star, 1e-3);
    rep.fold_certified = rep.rank_ratio < opts.rank_tol &&
                         std::fabs(rep.det_derivative_along_kernel) > fold_threshold &&
                         rep.transversality_angle_deg > opts.angle_tol_deg;
    return rep;
}

DownwardCone downward_cone(const FamilyMap& fam, const ConeOptions& opts) {
    double f_base = conformal_factor(fam.system, fam.base);
    if (f_base > opts.max_base_f)
        throw DomainError("downward_cone: base is not inside the near-boundary band");

    DownwardCone cone;
    cone.base = fam.base;

    auto probe = [&](double theta_rad) -> DirectionRecord {
        DirectionRecord rec;
        rec.theta = theta_rad;
        auto ev = detect_conjugate(fam, Vec{theta_rad}, opts.conj);
        if (ev) {
            rec.has_event = true;
            rec.conjugate_f = conformal_factor(fam.system, ev->point);
            rec.below_base = rec.conjugate_f < f_base;
        }
        return rec;
    };

    const double span = opts.sweep_deg * kDeg;
    std::vector<double> grid(opts.coarse);
    for (std::size_t i = 0; i < opts.coarse; ++i)
        grid[i] = -span + 2.0 * span * static_cast<double>(i) / (opts.coarse - 1);
    cone.records.resize(opts.coarse);
    parallel_for(opts.coarse, [&](std::size_t i) { cone.records[i] = probe(grid[i]); });

    // bisect on each side for the below/not-below transition
    auto bisect_side = [&](double sgn) -> double {
        double inside = 0.0, outside = sgn * span;
        // innermost coarse sample that is not below, as the outer bracket
        for (const auto& r : cone.records) {
            if (sgn * r.theta <= 0) continue;
            if (r.has_event && r.below_base && sgn * r.theta > sgn * inside) inside = r.theta;
        }
        for (const auto& r : cone.records) {
            if (sgn * r.theta <= sgn * inside) continue;
            if (!r.has_event) continue;  // no event: excluded from the bracket
            if (!r.below_base && sgn * r.theta < sgn * outside) outside = r.theta;
        }
        while (std::fabs(outside - inside) > opts.refine_deg * kDeg) {
            double mid = 0.5 * (inside + outside);
            DirectionRecord r = probe(mid);
            if (r.has_event && r.below_base)
                inside = mid;
            else
                outside = mid;
        }
        return 0.5 * std::fabs(inside + outside);
    };
    cone.aperture_deg = 0.5 * (bisect_side(1.0) + bisect_side(-1.0)) / kDeg;
    return cone;
}

SideTangencyReport side_and_tangency_check(const FamilyMap& fam, const ConjugateLocus& locus,
                                           double angle_tol_deg) {
    SideTangencyReport rep;
    std::vector<Vec> pts = locus.points();
    if (pts.size() < 3) throw ConfigError("locus too sparse for side/tangency checks");

    // chord sag of the polyline: the side of a point closer than this to the
    // polyline cannot be determined at the sampling resolution
    double sag = 0.0;
    for (std::size_t i = 0; i + 2 < pts.size(); ++i) {
        Vec ab = pts[i + 2] - pts[i];
        Vec am = pts[i + 1] - pts[i];
        double L = norm(ab);
        if (L == 0) continue;
        sag = std::max(sag, std::fabs(cross2(ab, am)) / L * 0.5);
    }
    double side_floor = std::max(3.0 * sag, 1e-12);

    // Signed side of the locus polyline; 0 when the nearest point clamps to a
    // polyline end (no side information out there) or sits inside the sag band.
    auto signed_side = [&](const Vec& q) {
        double best = 1e300;
        double side = 0.0;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            Vec a = pts[i], b = pts[i + 1];
            Vec ab = b - a, aq = q - a;
            double L2 = dot(ab, ab);
            double u = L2 > 0 ? dot(aq, ab) / L2 : 0.0;
            bool clamped = (i == 0 && u < 0.0) || (i + 2 == pts.size() && u > 1.0);
            u = std::clamp(u, 0.0, 1.0);
            Vec c = a + u * ab;
            double d2 = dot(q - c, q - c);
            if (d2 < best) {
                best = d2;
                side = clamped ? 0.0 : cross2(ab, aq);
            }
        }
        return best < side_floor * side_floor ? 0.0 : side;
    };

    // derivative of the locus curve in theta through three events (exact for
    // quadratic arcs, so the chord bias drops out)
    auto locus_tangent = [&](std::size_t i) -> std::optional<Vec> {
        std::size_t lo = (i > 0 && locus.events[i - 1]) ? i - 1 : i;
        std::size_t hi = (i + 1 < locus.events.size() && locus.events[i + 1]) ? i + 1 : i;
        if (lo == i || hi == i) return std::nullopt;  // one-sided: skip
        double t0 = locus.events[lo]->theta[0], t1 = locus.events[i]->theta[0],
               t2 = locus.events[hi]->theta[0];
        const Vec &p0 = locus.events[lo]->point, &p1 = locus.events[i]->point,
                  &p2 = locus.events[hi]->point;
        double w0 = (t1 - t2) / ((t0 - t1) * (t0 - t2));
        double w1 = (2 * t1 - t0 - t2) / ((t1 - t0) * (t1 - t2));
        double w2 = (t1 - t0) / ((t2 - t0) * (t2 - t1));
        Vec d(p1.size());
        for (std::size_t c = 0; c < d.size(); ++c)
            d[c] = w0 * p0[c] + w1 * p1[c] + w2 * p2[c];
        return d;
    };

    double speed_floor = 1e-6 * std::sqrt(conformal_factor(fam.system, fam.base));

    for (std::size_t i = 0; i < locus.events.size(); ++i) {
        if (!locus.events[i]) continue;
        const ConjugateEvent& ev = *locus.events[i];
        Trajectory traj = member_trajectory(fam, ev.theta);

        // (a) the member must not cross the locus polyline before t*
        double ref_sign = 0.0;
        bool crossed = false;
        double guard = 2.0 * fam.opts.step;  // tangential-contact tie-break window
        for (std::size_t k = 1; k < traj.size(); ++k) {
            double t = traj.times[k];
            if (t >= ev.t_star - guard) break;
            double sgn = signed_side(traj.states[k].q);
            if (sgn == 0.0) continue;
            if (ref_sign == 0.0)
                ref_sign = sgn;
            else if ((sgn > 0) != (ref_sign > 0))
                crossed = true;
        }
        if (crossed) {
            rep.side_ok = false;
            rep.offending_thetas.push_back(ev.theta[0]);
        }

        // (b) tangency of the member velocity with the locus tangent at t*
        State st = state_at(fam.system, traj, ev.t_star);
        if (norm(st.v) < speed_floor) {
            ++rep.exempt_count;  // brake point: the member tangent vanishes
            continue;
        }
        auto tangent = locus_tangent(i);
        if (!tangent) continue;
        double c = std::fabs(dot(normalized(*tangent), normalized(st.v)));
        double ang = std::acos(std::clamp(c, 0.0, 1.0)) * 180.0 / kPi;
        rep.max_tangency_angle_deg = std::max(rep.max_tangency_angle_deg, ang);
    }
    (void)angle_tol_deg;
    return rep;
}

double hausdorff_distance(const std::vector<Vec>& a, const std::vector<Vec>& b) {
    if (a.empty() || b.empty()) return a.empty() && b.empty() ? 0.0 : 1e300;
    auto one_sided = [](const std::vector<Vec>& from, const std::vector<Vec>& to) {
        double worst = 0.0;
        for (const Vec& p : from) {
            double best = 1e300;
            for (const Vec& q : to) {
                Vec d = p - q;
                best = std::min(best, dot(d, d));
            }
            worst = std::max(worst, best);
        }
        return std::sqrt(worst);
    };
    return std::max(one_sided(a, b), one_sided(b, a));
}

ReparamInvarianceReport reparam_invariance_check(const FamilyMap& fam,
                                                 const std::vector<Vec>& theta_grid,
                                                 const ReparamOptions& opts) {
    ReparamInvarianceReport rep;

    ConjugateLocus newton = conjugate_locus(fam, theta_grid, opts.conj);
    rep.newtonian_points = newton.points();

    IntegrateOptions plain = fam.opts;
    plain.with_variations = false;

    // One family member with its accumulated JM arclength s(t); truncated
    // before the conformal factor degenerates (brake points).
    struct ArcMember {
        Trajectory traj;
        std::vector<double> s;
    };
    auto member_arclength = [&](double theta) -> ArcMember {
        State init{fam.base, fam.velocity(Vec{theta})};
        ArcMember m{integrate(fam.system, init, {0.0, fam.t_max}, plain), {}};
        std::size_t keep = m.traj.size();
        std::vector<double> fs(m.traj.size());
        for (std::size_t k = 0; k < m.traj.size(); ++k) {
            fs[k] = conformal_factor(fam.system, m.traj.states[k].q);
            if (fs[k] < 1e-12) {
                keep = k;
                break;
            }
        }
        m.traj.times.resize(keep);
        m.traj.states.resize(keep);
        m.s.assign(keep, 0.0);
        for (std::size_t k = 1; k < keep; ++k) {
            double dt = m.traj.times[k] - m.traj.times[k - 1];
            // ds = sqrt(f) |v| dt, and |v| = sqrt(f) along energy-matched members
            m.s[k] = m.s[k - 1] + 0.5 * dt * (fs[k - 1] + fs[k]);
        }
        return m;
    };

    // Family differential in the arclength parameterization, with the theta
    // derivative taken by central finite differences across members (the
    // tangent flow is never used on this route):
    //   dGamma/ds        = v / f
    //   dGamma/dtheta|_s = dGamma/dtheta|_t - (v / f) * ds/dtheta|_t
    std::vector<std::optional<Vec>> found(theta_grid.size());
    parallel_for(theta_grid.size(), [&](std::size_t gi) {
        double th = theta_grid[gi][0];
        ArcMember mid = member_arclength(th);
        ArcMember lo = member_arclength(th - opts.theta_fd);
        ArcMember hi = member_arclength(th + opts.theta_fd);
        std::size_t valid = std::min({mid.traj.size(), lo.traj.size(), hi.traj.size()});
        if (valid < 12) return;

        std::vector<double> dets(valid, 0.0);
        for (std::size_t k = 1; k < valid; ++k) {
            double f = conformal_factor(fam.system, mid.traj.states[k].q);
            Vec c_s = (1.0 / f) * mid.traj.states[k].v;
            double ds_dth = (hi.s[k] - lo.s[k]) / (2.0 * opts.theta_fd);
            Vec dq_dth =
                (1.0 / (2.0 * opts.theta_fd)) * (hi.traj.states[k].q - lo.traj.states[k].q);
            Vec c_th = dq_dth - ds_dth * c_s;
            Mat dG(2, 2);
            dG.set_col(0, c_s);
            dG.set_col(1, c_th);
            dets[k] = det(dG);
        }

        // origin guard: same plateau rule as the Newtonian-time route
        std::size_t probe = std::min<std::size_t>(10, valid - 1);
        double plateau = std::fabs(dets[probe]) / mid.s[probe];
        std::size_t k0 = 1;
        while (k0 < valid - 1 &&
               std::fabs(dets[k0]) / std::max(mid.s[k0], 1e-300) < 0.5 * plateau)
            ++k0;
        k0 = std::max<std::size_t>(k0, 10);

        for (std::size_t k = k0; k + 1 < valid; ++k) {
            if (!(dets[k] > 0) == !(dets[k + 1] > 0)) continue;
            // inverse-linear interpolation of the crossing in s, then Hermite
            // position on the mid member (nodes carry dq/ds = v/f)
            double s0 = mid.s[k], s1 = mid.s[k + 1];
            double w = dets[k] / (dets[k] - dets[k + 1]);
            double s_star = s0 + w * (s1 - s0);
            double hseg = s1 - s0;
            double u = (s_star - s0) / hseg;
            double u2 = u * u, u3 = u2 * u;
            const Vec& q0 = mid.traj.states[k].q;
            const Vec& q1 = mid.traj.states[k + 1].q;
            double f0 = conformal_factor(fam.system, q0);
            double f1v = conformal_factor(fam.system, q1);
            Vec m0 = (hseg / f0) * mid.traj.states[k].v;
            Vec m1 = (hseg / f1v) * mid.traj.states[k + 1].v;
            Vec pos(q0.size());
            for (std::size_t d = 0; d < pos.size(); ++d)
                pos[d] = (2 * u3 - 3 * u2 + 1) * q0[d] + (u3 - 2 * u2 + u) * m0[d] +
                         (-2 * u3 + 3 * u2) * q1[d] + (u3 - u2) * m1[d];
            found[gi] = pos;
            return;
        }
    });

    for (auto& p : found) {
        if (p)
            rep.arclength_points.push_back(*p);
        else
            ++rep.arclength_gaps;
    }
    rep.hausdorff = hausdorff_distance(rep.newtonian_points, rep.arclength_points);
    return rep;
}

}  // namespace hillscope
