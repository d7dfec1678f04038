#include "hillscope/seifert.hpp"

#include <algorithm>
#include <cmath>

#include "hillscope/parallel.hpp"

namespace hillscope {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::size_t locate(const std::vector<double>& ys, double y) {
    auto it = std::upper_bound(ys.begin(), ys.end(), y);
    std::size_t k = (it == ys.begin()) ? 0 : static_cast<std::size_t>(it - ys.begin()) - 1;
    if (k + 1 >= ys.size()) k = ys.size() - 2;
    return k;
}

double lsq_slope(const std::vector<double>& xs, const std::vector<double>& yss,
                 double* intercept = nullptr) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += yss[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * yss[i];
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    if (intercept) *intercept = (sy - slope * sx) / n;
    return slope;
}

}  // namespace

Vec VerticalLine::position(double y) const {
    if (y < -1e-12 || y > ys.back() + 1e-9)
        throw DomainError("height outside vertical line range");
    y = std::max(y, 0.0);
    std::size_t k = locate(ys, y);
    double hy = ys[k + 1] - ys[k];
    double u = (y - ys[k]) / hy;
    double u2 = u * u, u3 = u2 * u;
    Vec out(boundary.size());
    for (std::size_t d = 0; d < out.size(); ++d)
        out[d] = (2 * u3 - 3 * u2 + 1) * states[k].q[d] + (u3 - 2 * u2 + u) * hy * dq_dy[k][d] +
                 (-2 * u3 + 3 * u2) * states[k + 1].q[d] + (u3 - u2) * hy * dq_dy[k + 1][d];
    return out;
}

Vec VerticalLine::dposition_dy(double y) const {
    y = std::max(y, 0.0);
    std::size_t k = locate(ys, y);
    double hy = ys[k + 1] - ys[k];
    double u = (y - ys[k]) / hy;
    double u2 = u * u;
    Vec out(boundary.size());
    for (std::size_t d = 0; d < out.size(); ++d)
        out[d] = ((6 * u2 - 6 * u) * states[k].q[d] + (3 * u2 - 4 * u + 1) * hy * dq_dy[k][d] +
                  (-6 * u2 + 6 * u) * states[k + 1].q[d] + (3 * u2 - 2 * u) * hy * dq_dy[k + 1][d]) /
                 hy;
    return out;
}

double VerticalLine::time_at(double y) const {
    y = std::max(y, 0.0);
    std::size_t k = locate(ys, y);
    double u = (y - ys[k]) / (ys[k + 1] - ys[k]);
    return times[k] + u * (times[k + 1] - times[k]);
}

VerticalLine integrate_vertical_line(const MechanicalSystem& s, const SeifertChart& chart,
                                     double x, double height, double step) {
    VerticalLine line;
    line.x = x;

    // boundary sheet: root of f along the normal from the tangent-plane point
    Vec p0 = chart.center + (x / chart.x_scale) * chart.tangent;
    auto f_at = [&](double sn) { return conformal_factor(s, p0 + sn * chart.normal_in); };
    double f0 = f_at(0.0);
    double lo = 0.0, hi = 0.0;
    if (f0 != 0.0) {
        double b = std::max(1e-6, chart.extent / 8.0);
        bool bracketed = false;
        for (int it = 0; it < 60; ++it) {
            // f increases along the inward normal near the center
            double cand = f0 > 0 ? -b : b;
            if ((f_at(cand) > 0) != (f0 > 0)) {
                lo = std::min(0.0, cand);
                hi = std::max(0.0, cand);
                bracketed = true;
                break;
            }
            b *= 1.7;
        }
        if (!bracketed)
            throw ConfigError("boundary sheet root-finding failed at x = " + std::to_string(x));
        double flo = f_at(lo);
        for (int it = 0; it < 80; ++it) {
            double mid = 0.5 * (lo + hi);
            double fm = f_at(mid);
            if ((fm > 0) == (flo > 0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
    }
    double sn = 0.5 * (lo + hi);
    for (int it = 0; it < 3; ++it) {  // Newton polish
        Vec q = p0 + sn * chart.normal_in;
        double df = dot(conformal_gradient(s, q), chart.normal_in);
        if (df == 0) break;
        sn -= conformal_factor(s, q) / df;
    }
    line.boundary = p0 + sn * chart.normal_in;
    if (std::fabs(conformal_factor(s, line.boundary)) > 1e-10)
        throw ConfigError("boundary sheet root-finding failed at x = " + std::to_string(x));

    // brake orbit from rest; chart height from the accumulated JM length
    Vec a0 = -1.0 * s.potential.gradient(line.boundary);
    double g0 = norm(a0);
    if (g0 == 0) throw ConfigError("boundary point is not regular at x = " + std::to_string(x));

    State st{line.boundary, Vec(line.boundary.size(), 0.0)};
    double t = 0.0, jm = 0.0;
    line.times.push_back(0.0);
    line.ys.push_back(0.0);
    line.states.push_back(st);
    line.dq_dy.push_back((0.5 / std::pow(g0 * g0 / 2.0, 2.0 / 3.0)) * a0);

    const std::size_t max_steps = 20000000;
    for (std::size_t k = 0; k < max_steps; ++k) {
        double fa = conformal_factor(s, st.q);
        State mid = st;
        vv_step(s, mid, 0.5 * step);
        double fm = conformal_factor(s, mid.q);
        vv_step(s, st, step);
        double fb = conformal_factor(s, st.q);
        jm += step / 6.0 * (fa + 4.0 * fm + fb);  // ds = f dt along zero-residual orbits
        t += step;
        double y = std::pow(1.5 * jm, 2.0 / 3.0);
        line.times.push_back(t);
        line.ys.push_back(y);
        line.states.push_back(st);
        line.dq_dy.push_back((std::sqrt(y) / fb) * st.v);
        if (y >= height) return line;
    }
    throw ConfigError("brake orbit failed to reach chart height at x = " + std::to_string(x));
}

Vec SeifertChart::forward(double x, double y) const {
    if (x < -extent - 1e-12 || x > extent + 1e-12)
        throw DomainError("chart x outside the cylinder");
    const std::size_t nx = lines.size();
    double dx = 2.0 * extent / static_cast<double>(nx - 1);
    double pos = (x + extent) / dx;
    std::size_t i = std::min(static_cast<std::size_t>(std::max(pos, 0.0)), nx - 2);
    double u = pos - static_cast<double>(i);
    Vec a = lines[i].position(y), b = lines[i + 1].position(y);
    Vec out(a.size());
    for (std::size_t d = 0; d < a.size(); ++d) out[d] = (1 - u) * a[d] + u * b[d];
    return out;
}

Mat SeifertChart::jacobian(double x, double y) const {
    const std::size_t nx = lines.size();
    double dx = 2.0 * extent / static_cast<double>(nx - 1);
    double pos = (x + extent) / dx;
    std::size_t i = std::min(static_cast<std::size_t>(std::max(pos, 0.0)), nx - 2);
    double u = pos - static_cast<double>(i);
    Vec a = lines[i].position(y), b = lines[i + 1].position(y);
    Vec da = lines[i].dposition_dy(y), db = lines[i + 1].dposition_dy(y);
    Mat J(2, 2);
    for (std::size_t d = 0; d < 2; ++d) {
        J(d, 0) = (b[d] - a[d]) / dx;
        J(d, 1) = (1 - u) * da[d] + u * db[d];
    }
    return J;
}

SeifertChart::ChartPoint SeifertChart::inverse(const Vec& q) const {
    ChartPoint hint;
    hint.x = std::clamp(x_scale * dot(q - center, tangent), -extent, extent);
    double f = conformal_factor(system, q);
    double g0 = grad_v_norm_at_center();
    hint.y = std::clamp(f * std::pow(2.0 * g0, -2.0 / 3.0), 1e-9, height);
    return inverse(q, hint);
}

SeifertChart::ChartPoint SeifertChart::inverse(const Vec& q, ChartPoint hint) const {
    double x = std::clamp(hint.x, -extent, extent);
    double y = std::clamp(hint.y, 0.0, lines[0].ys.back() * 0.999);
    double scale = std::max(1.0, norm(q));
    double best_res = 1e300;
    for (int it = 0; it < 60; ++it) {
        Vec r = forward(x, y) - q;
        double res = norm(r);
        if (res < opts.newton_tol * scale) return ChartPoint{x, y};
        Mat J = jacobian(x, y);
        Vec d = solve(J, r);
        double damp = 1.0;
        if (res > best_res) damp = 0.5;
        best_res = std::min(best_res, res);
        x = std::clamp(x - damp * d[0], -extent, extent);
        y = std::clamp(y - damp * d[1], 0.0, lines[0].ys.back() * 0.9999);
    }
    Vec r = forward(x, y) - q;
    if (norm(r) < 1e-7 * scale) return ChartPoint{x, y};  // boundary-pinned points
    throw DomainError("chart inverse did not converge (point outside the cylinder?)");
}

Vec SeifertChart::chart_velocity(double x, double y, const Vec& v_ambient) const {
    return solve(jacobian(x, y), v_ambient);
}

double SeifertChart::angle_to_vertical_deg(const Vec& v_chart) {
    return std::atan2(std::fabs(v_chart[0]), std::fabs(v_chart[1])) * 180.0 / kPi;
}

double SeifertChart::grad_v_norm_at_center() const {
    return norm(system.potential.gradient(center));
}

SeifertChart build_chart(const MechanicalSystem& s, const Vec& q0, double extent, double height,
                         const ChartOptions& opts) {
    if (s.dimension() != 2)
        throw ConfigError("cylinder charts are implemented for planar systems");
    HillClassification cls = hill_classify(s, q0);
    if (cls.cls != HillClass::Boundary)
        throw ConfigError("chart center must lie on the Hill boundary");
    if (!cls.regular) throw ConfigError("chart center must be a regular boundary point");
    if (extent <= 0 || height <= 0) throw ConfigError("chart extent and height must be > 0");
    if (opts.nx < 3) throw ConfigError("chart needs nx >= 3 boundary samples");

    SeifertChart chart;
    chart.system = s;
    chart.center = q0;
    chart.extent = extent;
    chart.height = height;
    chart.opts = opts;
    chart.normal_in = normalized(conformal_gradient(s, q0));
    chart.tangent = Vec{chart.normal_in[1], -chart.normal_in[0]};
    chart.x_scale = std::pow(2.0 * norm(s.potential.gradient(q0)), 1.0 / 3.0);

    chart.lines.resize(opts.nx);
    parallel_for(opts.nx, [&](std::size_t i) {
        double x = -extent + 2.0 * extent * static_cast<double>(i) /
                                 static_cast<double>(opts.nx - 1);
        chart.lines[i] =
            integrate_vertical_line(s, chart, x, height * 1.05, opts.step);
    });
    return chart;
}

PropertyReport chart_metric_check(const SeifertChart& chart, std::size_t y_samples,
                                  double cross_tol) {
    PropertyReport rep;
    rep.property = 2;

    const std::size_t nx = chart.lines.size();
    double dx = 2.0 * chart.extent / static_cast<double>(nx - 1);

    double yy_dev = 0.0, cross_max = 0.0;
    std::vector<double> fit_x, fit_y, fit_v;
    std::vector<double> logy, loggyy;

    for (std::size_t i = 1; i + 1 < nx; ++i) {
        double x = -chart.extent + dx * static_cast<double>(i);
        for (std::size_t j = 0; j < y_samples; ++j) {
            double y = chart.height * static_cast<double>(j + 1) /
                       static_cast<double>(y_samples + 1);
            Vec colx = (1.0 / (2.0 * dx)) *
                       (chart.lines[i + 1].position(y) - chart.lines[i - 1].position(y));
            Vec coly = chart.lines[i].dposition_dy(y);
            Vec q = chart.lines[i].position(y);
            double f = conformal_factor(chart.system, q);
            double gyy = f * dot(coly, coly);
            double gxy = f * dot(colx, coly);
            double gxx = f * dot(colx, colx);
            yy_dev = std::max(yy_dev, std::fabs(gyy / y - 1.0));
            cross_max = std::max(cross_max, std::fabs(gxy) / y);
            fit_x.push_back(x);
            fit_y.push_back(y);
            fit_v.push_back(gxx / y - 1.0);
            if (i == nx / 2) {
                logy.push_back(std::log(y));
                loggyy.push_back(std::log(std::max(gyy, 1e-300)));
            }
        }
    }

    // least squares f_meas - 1 = c0 + a x + b y + quadratic terms; the
    // quadratic block absorbs the h_ij = O(x^2 + y^2) part of the normal form
    Mat A(6, 6);
    Vec rhs(6, 0.0);
    auto basis = [](double x, double y) {
        return Vec{1.0, x, y, x * x, y * y, x * y};
    };
    for (std::size_t k = 0; k < fit_v.size(); ++k) {
        Vec row = basis(fit_x[k], fit_y[k]);
        for (std::size_t r = 0; r < 6; ++r) {
            rhs[r] += row[r] * fit_v[k];
            for (std::size_t c = 0; c < 6; ++c) A(r, c) += row[r] * row[c];
        }
    }
    Vec coef = solve(A, rhs);
    double h_resid = 0.0, h_mag = 0.0;
    for (std::size_t k = 0; k < fit_v.size(); ++k) {
        Vec row = basis(fit_x[k], fit_y[k]);
        double fitted = 0.0;
        for (std::size_t r = 0; r < 6; ++r) fitted += coef[r] * row[r];
        h_resid = std::max(h_resid, std::fabs(fit_v[k] - fitted));
        h_mag = std::max(h_mag, std::fabs(coef[3] * row[3] + coef[4] * row[4] +
                                          coef[5] * row[5]));
    }

    double gyy_slope = lsq_slope(logy, loggyy);

    rep.measured["dyy_coeff_rel_dev"] = yy_dev;
    rep.measured["cross_term_ratio"] = cross_max;
    rep.measured["f_center_offset"] = coef[0];
    rep.measured["f1_a"] = coef[1];
    rep.measured["f1_b"] = coef[2];
    rep.measured["h_magnitude"] = h_mag;
    rep.measured["h_residual"] = h_resid;
    rep.measured["gyy_loglog_slope"] = gyy_slope;
    rep.thresholds["dyy_coeff_rel_dev"] = 1e-6;
    rep.thresholds["cross_term_ratio"] = cross_tol;
    rep.thresholds["f_center_offset"] = 1e-2;
    rep.pass = yy_dev < 1e-6 && cross_max < cross_tol && std::fabs(coef[0]) < 1e-2 &&
               std::fabs(gyy_slope - 1.0) < 0.05;
    return rep;
}

PropertyReport property1_check(const SeifertChart& chart, const std::vector<double>& heights) {
    if (heights.size() < 3) throw ConfigError("need >= 3 heights for fit");
    PropertyReport rep;
    rep.property = 1;

    // fresh brake orbit at x = 0, quadrature independent of the chart build
    VerticalLine line = integrate_vertical_line(chart.system, chart, 0.0,
                                                chart.height * 1.1, chart.opts.step * 0.5);
    Trajectory traj;
    traj.times = line.times;
    traj.states = line.states;

    std::vector<double> logy, logd;
    for (double y : heights) {
        Vec target = chart.forward(0.0, y);
        // locate the pass-by of the target point along the fresh orbit
        std::size_t best = 0;
        double bd = 1e300;
        for (std::size_t k = 0; k < traj.size(); ++k) {
            Vec d = traj.states[k].q - target;
            double dd = dot(d, d);
            if (dd < bd) {
                bd = dd;
                best = k;
            }
        }
        Trajectory cut;
        cut.times.assign(traj.times.begin(), traj.times.begin() + best + 1);
        cut.states.assign(traj.states.begin(), traj.states.begin() + best + 1);
        double d = jm_length(chart.system, cut);
        // partial last interval to the projection of the target
        if (best + 1 < traj.size()) {
            Vec seg = traj.states[best + 1].q - traj.states[best].q;
            double L2 = dot(seg, seg);
            if (L2 > 0) {
                double u = std::clamp(dot(target - traj.states[best].q, seg) / L2, 0.0, 1.0);
                double dt = (traj.times[best + 1] - traj.times[best]) * u;
                double f = conformal_factor(chart.system, traj.states[best].q);
                d += std::sqrt(std::max(f, 0.0)) * norm(traj.states[best].v) * dt;
            }
        }
        logy.push_back(std::log(y));
        logd.push_back(std::log(d));
    }
    double intercept = 0.0;
    double slope = lsq_slope(logy, logd, &intercept);
    rep.measured["slope"] = slope;
    rep.measured["prefactor"] = std::exp(intercept);
    rep.thresholds["slope_dev"] = 0.01;
    rep.pass = std::fabs(slope - 1.5) <= 0.01;
    return rep;
}

std::vector<TransitSample> default_transit_samples(double x_span, double depth_max) {
    std::vector<TransitSample> out;
    const double depth_fracs[] = {0.18, 0.35, 0.52, 0.70, 0.85, 0.97};
    const double x_fracs[] = {-0.5, 0.0, 0.5};
    double dir = 1.0;
    for (double xf : x_fracs)
        for (double df : depth_fracs) {
            out.push_back(TransitSample{xf * x_span, df * depth_max, dir});
            dir = -dir;
        }
    return out;
}

TransitTrack integrate_transit(const SeifertChart& chart, const TransitSample& sample,
                               double y_stop, double step) {
    if (sample.depth <= 0 || sample.depth >= y_stop)
        throw ConfigError("transit vertex depth must lie in (0, y_stop)");
    TransitTrack track;
    track.sample = sample;

    Vec q0 = chart.forward(sample.x_vertex, sample.depth);
    Mat J = chart.jacobian(sample.x_vertex, sample.depth);
    Vec dir_amb = normalized(J.col(0));
    double speed = std::sqrt(conformal_factor(chart.system, q0));
    Vec v0 = (sample.direction * speed) * dir_amb;

    auto run_leg = [&](double sgn) {
        std::vector<State> leg;
        std::vector<SeifertChart::ChartPoint> legc;
        State st{q0, v0};
        SeifertChart::ChartPoint cp{sample.x_vertex, sample.depth};
        for (std::size_t k = 0; k < 4000000; ++k) {
            vv_step(chart.system, st, sgn * step);
            bool outside = false;
            try {
                cp = chart.inverse(st.q, cp);
            } catch (const DomainError&) {
                outside = true;
            }
            if (outside || std::fabs(cp.x) > chart.extent * 0.98) {
                track.left_chart_sideways = true;
                break;
            }
            leg.push_back(st);
            legc.push_back(cp);
            if (cp.y >= y_stop) break;
        }
        return std::pair(leg, legc);
    };

    auto [fwd, fwdc] = run_leg(1.0);
    auto [bwd, bwdc] = run_leg(-1.0);

    const std::size_t nb = bwd.size();
    for (std::size_t k = 0; k < nb; ++k) {
        track.t.push_back(-step * static_cast<double>(nb - k));
        track.states.push_back(bwd[nb - 1 - k]);
        track.chart.push_back(bwdc[nb - 1 - k]);
    }
    track.t.push_back(0.0);
    track.states.push_back(State{q0, v0});
    track.chart.push_back(SeifertChart::ChartPoint{sample.x_vertex, sample.depth});
    for (std::size_t k = 0; k < fwd.size(); ++k) {
        track.t.push_back(step * static_cast<double>(k + 1));
        track.states.push_back(fwd[k]);
        track.chart.push_back(fwdc[k]);
    }
    track.y_min = 1e300;
    for (const auto& cp : track.chart) track.y_min = std::min(track.y_min, cp.y);
    return track;
}

PropertyReport property3_check(const SeifertChart& chart, double eps_A, double eps_B,
                               double delta_deg, const std::vector<TransitSample>& samples,
                               double inner_half_width) {
    if (!(eps_B < eps_A && eps_A <= chart.height))
        throw ConfigError("property 3 needs eps_B < eps_A <= chart height");
    if (delta_deg >= 45.0) throw ConfigError("property 3 angle must be below 45 degrees");
    double w_b = inner_half_width > 0 ? inner_half_width : chart.extent * 0.45;

    PropertyReport rep;
    rep.property = 3;
    double max_angle = 0.0, max_ymin = 0.0;
    std::size_t entered = 0, side_exits = 0, angle_violations = 0;

    for (const auto& sample : samples) {
        if (sample.depth >= eps_A) continue;
        TransitTrack track = integrate_transit(chart, sample, eps_A * 1.35, chart.opts.step);
        // entering B means dipping below eps_B inside B's footprint
        bool entered_b = false;
        for (std::size_t k = 0; k < track.chart.size(); ++k)
            if (track.chart[k].y < eps_B && std::fabs(track.chart[k].x) <= w_b) entered_b = true;
        if (!entered_b) continue;
        ++entered;
        max_ymin = std::max(max_ymin, track.y_min);
        if (track.left_chart_sideways) {
            ++side_exits;
            rep.note += "side exit at x_vertex=" + std::to_string(sample.x_vertex) +
                        " depth=" + std::to_string(sample.depth) + "; ";
            continue;
        }
        // roof crossings of eps_A, angle to the vertical at each
        for (std::size_t k = 0; k + 1 < track.chart.size(); ++k) {
            double a = track.chart[k].y - eps_A, b = track.chart[k + 1].y - eps_A;
            if ((a > 0) == (b > 0)) continue;
            double u = a / (a - b);
            Vec va = chart.chart_velocity(track.chart[k].x, track.chart[k].y,
                                          track.states[k].v);
            Vec vb = chart.chart_velocity(track.chart[k + 1].x, track.chart[k + 1].y,
                                          track.states[k + 1].v);
            Vec vc{(1 - u) * va[0] + u * vb[0], (1 - u) * va[1] + u * vb[1]};
            double ang = SeifertChart::angle_to_vertical_deg(vc);
            max_angle = std::max(max_angle, ang);
            if (ang >= delta_deg) ++angle_violations;
        }
    }

    rep.measured["max_roof_angle_deg"] = max_angle;
    rep.measured["lambda_empirical"] = max_ymin > 0 ? eps_A / max_ymin : 0.0;
    rep.measured["entered"] = static_cast<double>(entered);
    rep.measured["side_exits"] = static_cast<double>(side_exits);
    rep.measured["angle_violations"] = static_cast<double>(angle_violations);
    rep.thresholds["delta_deg"] = delta_deg;
    rep.thresholds["lambda_min_for_delta"] =
        1.0 + 1.0 / std::pow(std::tan(delta_deg * kPi / 180.0), 2.0);
    rep.pass = entered > 0 && side_exits == 0 && angle_violations == 0;
    return rep;
}

PropertyReport property4_check(const SeifertChart& chart,
                               const std::vector<TransitSample>& samples) {
    PropertyReport rep;
    rep.property = 4;
    double min_d2 = 1e300;
    std::size_t max_minima = 0;
    const double h = chart.opts.step;
    // second differences over a stride that clears the piecewise-linear
    // x-interpolation noise of the chart inverse
    const std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(0.02 / h));
    const double dt = static_cast<double>(stride) * h;

    for (const auto& sample : samples) {
        TransitTrack track = integrate_transit(chart, sample, chart.height * 0.9, h);
        if (track.chart.size() < 3 * stride) continue;
        std::size_t minima = 0;
        for (std::size_t k = stride; k + stride < track.chart.size(); k += stride) {
            double d2 = track.chart[k + stride].y - 2.0 * track.chart[k].y +
                        track.chart[k - stride].y;
            min_d2 = std::min(min_d2, d2 / (dt * dt));
            if (track.chart[k].y < track.chart[k - stride].y &&
                track.chart[k].y < track.chart[k + stride].y)
                ++minima;
        }
        max_minima = std::max(max_minima, minima);
    }
    rep.measured["min_second_difference"] = min_d2;
    rep.measured["max_local_minima"] = static_cast<double>(max_minima);
    rep.pass = min_d2 > 0 && max_minima == 1;
    return rep;
}

PropertyReport property5_check(const SeifertChart& chart, const std::vector<double>& h_values,
                               const std::vector<TransitSample>& samples, double safety) {
    PropertyReport rep;
    rep.property = 5;
    double g0 = chart.grad_v_norm_at_center();
    double C = safety * 2.0 * std::sqrt(2.0) / g0;

    double h_max = *std::max_element(h_values.begin(), h_values.end());
    std::vector<TransitTrack> tracks;
    for (const auto& sample : samples) {
        if (sample.depth >= h_max * 1.3) continue;
        tracks.push_back(integrate_transit(chart, sample, h_max * 1.4, chart.opts.step));
    }
    // near-brake transit: the worst case for residence times
    tracks.push_back(integrate_transit(
        chart, TransitSample{0.0, 0.02 * *std::min_element(h_values.begin(), h_values.end()), 1.0},
        h_max * 1.4, chart.opts.step));

    std::vector<double> logh, logres;
    double worst_ratio = 0.0;
    bool all_within = true;
    for (double h : h_values) {
        double residence = 0.0;
        for (const auto& track : tracks) {
            if (track.y_min >= h) continue;
            double t_down = 0.0, t_up = 0.0;
            bool have_down = false;
            for (std::size_t k = 0; k + 1 < track.chart.size(); ++k) {
                double a = track.chart[k].y - h, b = track.chart[k + 1].y - h;
                if ((a > 0) == (b > 0)) continue;
                double u = a / (a - b);
                double tc = track.t[k] + u * (track.t[k + 1] - track.t[k]);
                if (a > 0 && !have_down) {
                    t_down = tc;
                    have_down = true;
                } else if (a <= 0 && have_down) {
                    t_up = tc;
                    break;
                }
            }
            if (have_down && t_up > t_down) residence = std::max(residence, t_up - t_down);
        }
        if (residence == 0.0) continue;
        double bound = C * std::sqrt(h);
        worst_ratio = std::max(worst_ratio, residence / std::sqrt(h));
        if (residence > bound) all_within = false;
        logh.push_back(std::log(h));
        logres.push_back(std::log(residence));
    }
    double slope = logh.size() >= 2 ? lsq_slope(logh, logres) : 0.0;

    rep.measured["worst_residence_over_sqrt_h"] = worst_ratio;
    rep.measured["bound_constant"] = C;
    rep.measured["loglog_slope"] = slope;
    rep.thresholds["bound_constant"] = C;
    rep.thresholds["slope_dev"] = 0.02;
    rep.pass = all_within && std::fabs(slope - 0.5) <= 0.02 && !logh.empty();
    return rep;
}

RescaleReport rescale_compare(const SeifertChart& chart, const std::vector<double>& eps_list,
                              double entry_angle_deg, double max_spread) {
    RescaleReport rep;
    const double beta = entry_angle_deg * kPi / 180.0;

    for (double eps : eps_list) {
        double xbar0 = -0.6, ybar0 = 1.0;
        Vec q0 = chart.forward(eps * xbar0, eps * ybar0);
        Mat J = chart.jacobian(eps * xbar0, eps * ybar0);
        Vec dch{std::sin(beta), -std::cos(beta)};
        Vec v0 = normalized(J * dch);
        double speed = std::sqrt(conformal_factor(chart.system, q0));
        State st{q0, speed * v0};

        // rescaled-model parabola with the same initial condition (g = 1/2)
        double v1bar = std::sqrt(ybar0) * std::sin(beta);
        double ym = v1bar * v1bar;
        double xm = xbar0 + 2.0 * std::sqrt(std::max(ym * (ybar0 - ym), 0.0));

        double deviation = 0.0;
        SeifertChart::ChartPoint cp{eps * xbar0, eps * ybar0};
        double step = chart.opts.step;
        for (std::size_t k = 0; k < 4000000; ++k) {
            vv_step(chart.system, st, step);
            cp = chart.inverse(st.q, cp);
            double xb = cp.x / eps, yb = cp.y / eps;
            if (yb > ybar0 * 1.001 && k > 10) break;
            double model_y = ym + (xb - xm) * (xb - xm) / (4.0 * ym);
            deviation = std::max(deviation, std::fabs(yb - model_y));
        }
        rep.eps.push_back(eps);
        rep.deviation.push_back(deviation);
        rep.ratio.push_back(deviation / eps);
    }
    double rmin = *std::min_element(rep.ratio.begin(), rep.ratio.end());
    double rmax = *std::max_element(rep.ratio.begin(), rep.ratio.end());
    double dmax = *std::max_element(rep.deviation.begin(), rep.deviation.end());
    rep.ratio_spread = rmin > 0 ? rmax / rmin : (dmax < 1e-8 ? 1.0 : 1e300);
    rep.pass = dmax < 1e-8 || rep.ratio_spread <= max_spread;
    return rep;
}

ScanReport conjugate_pair_scan(const SeifertChart& chart, double approach_dist,
                               const ScanOptions& opts) {
    double y_roof = opts.roof_factor * approach_dist;
    if (y_roof > chart.height * 0.95)
        throw ConfigError("scan roof exceeds the chart height; enlarge the chart");

    ScanReport rep;
    std::vector<TransitSample> samples;
    for (std::size_t i = 0; i < opts.samples; ++i) {
        double u = std::fmod(0.6180339887 * static_cast<double>(i + 1), 1.0);
        double w = std::fmod(0.4142135624 * static_cast<double>(i + 1), 1.0);
        double depth = approach_dist * (0.25 + 0.60 * u);
        double xv = (2.0 * w - 1.0) * 0.5 * approach_dist;
        double r = std::hypot(xv, depth);
        if (r > 0.95 * approach_dist) {
            double shrink = 0.95 * approach_dist / r;
            xv *= shrink;
            depth *= shrink;
        }
        samples.push_back(TransitSample{xv, depth, i % 2 == 0 ? 1.0 : -1.0});
    }
    if (opts.include_misses) {
        samples.push_back(TransitSample{0.0, 2.2 * approach_dist, 1.0});
        samples.push_back(TransitSample{0.3 * approach_dist, 2.5 * approach_dist, -1.0});
    }
    rep.samples = samples.size();

    for (const auto& sample : samples) {
        TransitTrack track = integrate_transit(chart, sample, y_roof * 1.3, opts.step);
        double min_approach = 1e300;
        for (const auto& cp : track.chart)
            min_approach = std::min(min_approach, std::hypot(cp.x, cp.y));
        if (min_approach > approach_dist) {
            ++rep.skipped;
            continue;
        }
        ++rep.entered;

        // first downward crossing of the roof: the entry of the cylinder
        std::optional<std::size_t> cross;
        for (std::size_t k = 0; k + 1 < track.chart.size(); ++k) {
            if (track.chart[k].y >= y_roof && track.chart[k + 1].y < y_roof) {
                cross = k;
                break;
            }
        }
        if (!cross) continue;
        std::size_t k = *cross;
        double a = track.chart[k].y - y_roof, b = track.chart[k + 1].y - y_roof;
        double u = a / (a - b);
        Vec q1(2), vel1(2);
        for (std::size_t d = 0; d < 2; ++d) {
            q1[d] = (1 - u) * track.states[k].q[d] + u * track.states[k + 1].q[d];
            vel1[d] = (1 - u) * track.states[k].v[d] + u * track.states[k + 1].v[d];
        }

        double g1 = norm(chart.system.potential.gradient(q1));
        double delta_amb = y_roof * std::pow(2.0 * g1, -1.0 / 3.0);
        double t_fall = std::sqrt(2.0 * delta_amb / g1);
        double t_max = 8.0 * t_fall;

        IntegrateOptions iopts;
        iopts.step = opts.step;
        std::optional<ConjugateEvent> ev;
        double theta_e = 0.0;
        for (int attempt = 0; attempt < 2 && !ev; ++attempt) {
            FamilyMap fam = make_family_map(chart.system, q1, t_max, iopts);
            Vec dir = normalized(vel1);
            theta_e = std::atan2(dot(dir, fam.perp_basis[0]), dot(dir, fam.down_axis));
            ev = detect_conjugate(fam, Vec{theta_e});
            t_max *= 2.5;
        }
        if (!ev) continue;

        ConjugatePair pair;
        pair.entry_point = q1;
        pair.conjugate_point = ev->point;
        pair.entry_height = chart.inverse(q1).y;
        pair.conjugate_height = chart.inverse(ev->point).y;
        Vec vch = chart.chart_velocity(track.chart[k].x, track.chart[k].y, vel1);
        pair.entry_angle_deg = SeifertChart::angle_to_vertical_deg(vch);
        pair.min_approach = min_approach;
        if (pair.conjugate_height < pair.entry_height) {
            ++rep.pairs_found;
            rep.max_pair_height =
                std::max({rep.max_pair_height, pair.entry_height, pair.conjugate_height});
            rep.pairs.push_back(pair);
        }
    }
    rep.all_entering_paired = rep.entered > 0 && rep.pairs_found == rep.entered;
    return rep;
}

}  // namespace hillscope
