#include "hillscope/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace hillscope {

namespace {

Vec acceleration(const MechanicalSystem& s, const Vec& q) {
    return -1.0 * s.potential.gradient(q);
}

void append_sample(Trajectory& traj, double t, const State& st, const Mat* M) {
    traj.times.push_back(t);
    traj.states.push_back(st);
    if (M) traj.tangents.push_back(*M);
}

// One adaptive RKF45 step attempt on the first-order system (q, v).
struct RkResult {
    State st;
    double err = 0.0;
};

RkResult rkf45_attempt(const MechanicalSystem& s, const State& st, double h) {
    auto deriv = [&](const State& x) -> State {
        return State{x.v, acceleration(s, x.q)};
    };
    auto axpy = [](const State& x, double a, const State& d) {
        State r = x;
        for (std::size_t i = 0; i < r.q.size(); ++i) {
            r.q[i] += a * d.q[i];
            r.v[i] += a * d.v[i];
        }
        return r;
    };
    State k1 = deriv(st);
    State k2 = deriv(axpy(st, h / 4.0, k1));
    State t3 = axpy(axpy(st, 3.0 * h / 32.0, k1), 9.0 * h / 32.0, k2);
    State k3 = deriv(t3);
    State t4 = axpy(axpy(axpy(st, 1932.0 / 2197.0 * h, k1), -7200.0 / 2197.0 * h, k2),
                    7296.0 / 2197.0 * h, k3);
    State k4 = deriv(t4);
    State t5 = axpy(axpy(axpy(axpy(st, 439.0 / 216.0 * h, k1), -8.0 * h, k2),
                         3680.0 / 513.0 * h, k3),
                    -845.0 / 4104.0 * h, k4);
    State k5 = deriv(t5);
    State t6 = axpy(axpy(axpy(axpy(axpy(st, -8.0 / 27.0 * h, k1), 2.0 * h, k2),
                              -3544.0 / 2565.0 * h, k3),
                         1859.0 / 4104.0 * h, k4),
                    -11.0 / 40.0 * h, k5);
    State k6 = deriv(t6);

    RkResult out;
    out.st = st;
    double err2 = 0.0;
    for (std::size_t i = 0; i < st.q.size(); ++i) {
        double q5 = st.q[i] + h * (16.0 / 135.0 * k1.q[i] + 6656.0 / 12825.0 * k3.q[i] +
                                   28561.0 / 56430.0 * k4.q[i] - 9.0 / 50.0 * k5.q[i] +
                                   2.0 / 55.0 * k6.q[i]);
        double v5 = st.v[i] + h * (16.0 / 135.0 * k1.v[i] + 6656.0 / 12825.0 * k3.v[i] +
                                   28561.0 / 56430.0 * k4.v[i] - 9.0 / 50.0 * k5.v[i] +
                                   2.0 / 55.0 * k6.v[i]);
        double q4 = st.q[i] + h * (25.0 / 216.0 * k1.q[i] + 1408.0 / 2565.0 * k3.q[i] +
                                   2197.0 / 4104.0 * k4.q[i] - 1.0 / 5.0 * k5.q[i]);
        double v4 = st.v[i] + h * (25.0 / 216.0 * k1.v[i] + 1408.0 / 2565.0 * k3.v[i] +
                                   2197.0 / 4104.0 * k4.v[i] - 1.0 / 5.0 * k5.v[i]);
        err2 += (q5 - q4) * (q5 - q4) + (v5 - v4) * (v5 - v4);
        out.st.q[i] = q5;
        out.st.v[i] = v5;
    }
    out.err = std::sqrt(err2);
    return out;
}

Trajectory integrate_rk45(const MechanicalSystem& s, const State& init,
                          std::pair<double, double> t_span, const IntegrateOptions& opts) {
    Trajectory traj;
    traj.step = opts.step;
    double t = t_span.first;
    const double t_end = t_span.second;
    const double dir = t_end > t ? 1.0 : -1.0;
    State st = init;
    append_sample(traj, t, st, nullptr);
    double h = dir * opts.step;
    const double h_min = std::fabs(t_end - t_span.first) * 1e-14 + 1e-300;
    while (dir * (t_end - t) > 1e-15) {
        if (std::fabs(h) > std::fabs(t_end - t)) h = t_end - t;
        RkResult r = rkf45_attempt(s, st, h);
        double scale = opts.rk_abs_tol + opts.rk_rel_tol * (norm(st.q) + norm(st.v));
        if (r.err > scale && std::fabs(h) > h_min) {
            double shrink = 0.9 * std::pow(scale / (r.err + 1e-300), 0.25);
            h *= std::clamp(shrink, 0.1, 0.9);
            if (std::fabs(h) <= h_min)
                throw IntegrationError("adaptive step underflow at t = " + std::to_string(t) +
                                       " (last good state retained in trajectory)");
            continue;
        }
        t += h;
        st = r.st;
        double f = conformal_factor(s, st.q);
        if (f < -opts.domain_tol) {
            traj.exited_domain = true;
            traj.exit_time = t;
            break;
        }
        append_sample(traj, t, st, nullptr);
        if (r.err > 0) {
            double grow = 0.9 * std::pow(scale / (r.err + 1e-300), 0.2);
            h *= std::clamp(grow, 0.2, 4.0);
        }
    }
    return traj;
}

}  // namespace

void vv_step(const MechanicalSystem& s, State& st, double h, Mat* M) {
    const std::size_t n = st.q.size();
    Vec a0 = acceleration(s, st.q);
    Mat hess0;
    if (M) hess0 = s.potential.hessian(st.q);

    Vec q1(n);
    for (std::size_t i = 0; i < n; ++i) q1[i] = st.q[i] + h * st.v[i] + 0.5 * h * h * a0[i];
    Vec a1 = acceleration(s, q1);

    if (M) {
        // Differentiate the discrete step:
        //   dq1 = dq + h dv - h^2/2 H(q) dq
        //   dv1 = dv - h/2 (H(q) dq + H(q1) dq1)
        Mat hess1 = s.potential.hessian(q1);
        const std::size_t m = M->cols;
        Mat next(2 * n, m);
        for (std::size_t c = 0; c < m; ++c) {
            Vec dq(n), dv(n);
            for (std::size_t i = 0; i < n; ++i) {
                dq[i] = (*M)(i, c);
                dv[i] = (*M)(n + i, c);
            }
            Vec h0dq = hess0 * dq;
            Vec dq1(n);
            for (std::size_t i = 0; i < n; ++i)
                dq1[i] = dq[i] + h * dv[i] - 0.5 * h * h * h0dq[i];
            Vec h1dq1 = hess1 * dq1;
            for (std::size_t i = 0; i < n; ++i) {
                next(i, c) = dq1[i];
                next(n + i, c) = dv[i] - 0.5 * h * (h0dq[i] + h1dq1[i]);
            }
        }
        *M = next;
    }

    for (std::size_t i = 0; i < n; ++i) {
        st.v[i] += 0.5 * h * (a0[i] + a1[i]);
        st.q[i] = q1[i];
    }
}

Trajectory integrate(const MechanicalSystem& s, const State& init,
                     std::pair<double, double> t_span, const IntegrateOptions& opts) {
    if (init.q.size() != s.dimension() || init.v.size() != s.dimension())
        throw ConfigError("initial state dimension mismatch");
    if (t_span.first == t_span.second) throw ConfigError("degenerate time span");
    if (opts.step <= 0) throw ConfigError("step must be > 0");

    if (opts.kind == IntegratorKind::AdaptiveRK45 && !opts.with_variations)
        return integrate_rk45(s, init, t_span, opts);

    Trajectory traj;
    traj.step = opts.step;
    const double t0 = t_span.first, t_end = t_span.second;
    const double dir = t_end > t0 ? 1.0 : -1.0;
    const double h = dir * opts.step;
    const double H0 = total_energy(s, init);

    State st = init;
    Mat M;
    Mat* Mp = nullptr;
    if (opts.with_variations) {
        M = Mat::identity(2 * s.dimension());
        Mp = &M;
    }
    append_sample(traj, t0, st, Mp);

    const auto n_steps = static_cast<std::size_t>(std::ceil(std::fabs(t_end - t0) / opts.step - 1e-12));
    for (std::size_t k = 1; k <= n_steps; ++k) {
        double t_next = (k == n_steps) ? t_end : t0 + dir * static_cast<double>(k) * opts.step;
        double hk = t_next - traj.times.back();
        (void)h;
        vv_step(s, st, hk, Mp);
        double f = conformal_factor(s, st.q);
        if (f < -opts.domain_tol) {
            traj.exited_domain = true;
            traj.exit_time = t_next;
            break;
        }
        append_sample(traj, t_next, st, Mp);
        if (opts.check_energy) {
            double drift = std::fabs(total_energy(s, st) - H0);
            if (drift > opts.energy_tol)
                throw IntegrationError("energy drift " + std::to_string(drift) +
                                       " exceeds tolerance at t = " + std::to_string(t_next));
        }
    }
    return traj;
}

Trajectory integrate_with_variations(const MechanicalSystem& s, const State& init,
                                     std::pair<double, double> t_span, IntegrateOptions opts) {
    opts.with_variations = true;
    opts.kind = IntegratorKind::VelocityVerlet;
    return integrate(s, init, t_span, opts);
}

State state_at(const MechanicalSystem& s, const Trajectory& traj, double t, Mat* tangent_out) {
    if (traj.size() == 0) throw ConfigError("empty trajectory");
    // locate last sample with time <= t (assumes forward time ordering)
    auto it = std::upper_bound(traj.times.begin(), traj.times.end(), t);
    std::size_t k = (it == traj.times.begin()) ? 0 : static_cast<std::size_t>(it - traj.times.begin()) - 1;
    if (k >= traj.size()) k = traj.size() - 1;
    State st = traj.states[k];
    Mat M;
    Mat* Mp = nullptr;
    if (tangent_out) {
        if (!traj.has_tangents()) throw ConfigError("trajectory has no tangent data");
        M = traj.tangents[k];
        Mp = &M;
    }
    double dt = t - traj.times[k];
    if (dt != 0.0) vv_step(s, st, dt, Mp);
    if (tangent_out) *tangent_out = M;
    return st;
}

std::vector<BrakeEvent> detect_brake(const MechanicalSystem& s, const Trajectory& traj,
                                     double brake_tol, double candidate_speed) {
    std::vector<BrakeEvent> events;
    if (traj.size() < 2) return events;

    auto dspeed2 = [&](double t) {
        State st = state_at(s, traj, t);
        return dot(st.v, acceleration(s, st.q));
    };

    auto refine = [&](double lo, double hi) -> std::optional<BrakeEvent> {
        double glo = dspeed2(lo);
        for (int it = 0; it < 60 && hi - lo > 0; ++it) {
            double mid = 0.5 * (lo + hi);
            double gm = dspeed2(mid);
            if ((glo <= 0) == (gm <= 0)) {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
            }
        }
        double tb = 0.5 * (lo + hi);
        State st = state_at(s, traj, tb);
        double speed = norm(st.v);
        if (speed > brake_tol) return std::nullopt;
        return BrakeEvent{tb, st.q, speed};
    };

    const std::size_t m = traj.size();
    std::vector<double> g(m);
    for (std::size_t k = 0; k < m; ++k)
        g[k] = dot(traj.states[k].v, acceleration(s, traj.states[k].q));

    for (std::size_t k = 0; k + 1 < m; ++k) {
        if (g[k] <= 0 && g[k + 1] > 0) {
            double slo = norm(traj.states[k].v), shi = norm(traj.states[k + 1].v);
            if (std::min(slo, shi) > candidate_speed) continue;
            if (auto ev = refine(traj.times[k], traj.times[k + 1])) events.push_back(*ev);
        }
    }
    // endpoint minima: speed still decreasing at the final sample
    if (g[m - 1] <= 0 && norm(traj.states[m - 1].v) <= brake_tol)
        events.push_back(BrakeEvent{traj.times[m - 1], traj.states[m - 1].q,
                                    norm(traj.states[m - 1].v)});
    if (g[0] > 0 && norm(traj.states[0].v) <= brake_tol)
        events.insert(events.begin(), BrakeEvent{traj.times[0], traj.states[0].q,
                                                 norm(traj.states[0].v)});
    return events;
}

BrakeReflectionReport brake_reflection_check(const MechanicalSystem& s, const BrakeEvent& event,
                                             double h_max, const IntegrateOptions& opts) {
    State brake_state{event.q_brake, Vec(event.q_brake.size(), 0.0)};
    Trajectory fwd = integrate(s, brake_state, {0.0, h_max}, opts);
    Trajectory bwd = integrate(s, brake_state, {0.0, -h_max}, opts);

    BrakeReflectionReport rep;
    Vec grad = s.potential.gradient(event.q_brake);
    std::size_t m = std::min(fwd.size(), bwd.size());
    for (std::size_t k = 0; k < m; ++k) {
        rep.max_mismatch = std::max(rep.max_mismatch, norm(fwd.states[k].q - bwd.states[k].q));
        double h = fwd.times[k];
        Vec taylor = event.q_brake - (0.5 * h * h) * grad;
        rep.max_taylor_residual =
            std::max(rep.max_taylor_residual, norm(fwd.states[k].q - taylor));
    }
    return rep;
}

ReparameterizedTrajectory reparameterize(const MechanicalSystem& s, const Trajectory& traj,
                                         Parameterization parameter) {
    ReparameterizedTrajectory out;
    out.traj = traj;
    out.newtonian_times = traj.times;
    out.parameter = parameter;
    if (parameter == Parameterization::NewtonianTime) return out;

    const std::size_t m = traj.size();
    Vec g(m);
    for (std::size_t k = 0; k < m; ++k) {
        double f = conformal_factor(s, traj.states[k].q);
        if (f <= 0)
            throw DomainError("JM arclength undefined: f <= 0 at sample " + std::to_string(k));
        g[k] = std::sqrt(f) * norm(traj.states[k].v);
    }
    // per-interval Simpson with Hermite midpoints, so the accumulated total
    // agrees with the composite quadrature of jm_length
    Vec snew(m, 0.0);
    for (std::size_t k = 1; k < m; ++k) {
        double dt = traj.times[k] - traj.times[k - 1];
        const State& a = traj.states[k - 1];
        const State& b = traj.states[k];
        Vec acc_a = -1.0 * s.potential.gradient(a.q);
        Vec acc_b = -1.0 * s.potential.gradient(b.q);
        State mid;
        mid.q.resize(a.q.size());
        mid.v.resize(a.q.size());
        for (std::size_t d = 0; d < a.q.size(); ++d) {
            mid.q[d] = 0.5 * (a.q[d] + b.q[d]) + 0.125 * dt * (a.v[d] - b.v[d]);
            mid.v[d] = 0.5 * (a.v[d] + b.v[d]) + 0.125 * dt * (acc_a[d] - acc_b[d]);
        }
        double fm = conformal_factor(s, mid.q);
        double gm = std::sqrt(std::max(fm, 0.0)) * norm(mid.v);
        snew[k] = snew[k - 1] + dt / 6.0 * (g[k - 1] + 4.0 * gm + g[k]);
    }
    out.traj.times = snew;
    return out;
}

Trajectory resample_uniform(const MechanicalSystem& s, const ReparameterizedTrajectory& rt,
                            std::size_t count) {
    return resample_range(s, rt, rt.traj.times.front(), rt.traj.times.back(), count);
}

Trajectory resample_range(const MechanicalSystem& s, const ReparameterizedTrajectory& rt,
                          double p0, double p1, std::size_t count) {
    if (count < 2) throw ConfigError("resample needs count >= 2");
    const Trajectory& tr = rt.traj;
    const std::size_t m = tr.size();
    if (m < 2) throw ConfigError("resample needs >= 2 samples");
    if (p0 < tr.times.front() - 1e-12 || p1 > tr.times.back() + 1e-12 || p1 <= p0)
        throw ConfigError("resample range outside trajectory span");
    const std::size_t n = tr.states[0].q.size();

    // dq/dparam at nodes: v for Newtonian time, v / f for JM arclength
    std::vector<Vec> deriv(m);
    for (std::size_t k = 0; k < m; ++k) {
        if (rt.parameter == Parameterization::NewtonianTime) {
            deriv[k] = tr.states[k].v;
        } else {
            double f = conformal_factor(s, tr.states[k].q);
            deriv[k] = (1.0 / f) * tr.states[k].v;
        }
    }

    Trajectory out;
    out.step = 0.0;
    std::size_t seg = 0;
    for (std::size_t i = 0; i < count; ++i) {
        double p = p0 + (p1 - p0) * static_cast<double>(i) / static_cast<double>(count - 1);
        while (seg + 2 < m && tr.times[seg + 1] <= p) ++seg;
        double h = tr.times[seg + 1] - tr.times[seg];
        double u = (p - tr.times[seg]) / h;
        double u2 = u * u, u3 = u2 * u;
        double c0 = 2 * u3 - 3 * u2 + 1, c1 = u3 - 2 * u2 + u;
        double c2 = -2 * u3 + 3 * u2, c3 = u3 - u2;
        State st;
        st.q.resize(n);
        st.v.resize(n);
        for (std::size_t d = 0; d < n; ++d) {
            st.q[d] = c0 * tr.states[seg].q[d] + c1 * h * deriv[seg][d] +
                      c2 * tr.states[seg + 1].q[d] + c3 * h * deriv[seg + 1][d];
            // velocity interpolated linearly; adequate for resampled queries
            st.v[d] = (1 - u) * tr.states[seg].v[d] + u * tr.states[seg + 1].v[d];
        }
        out.times.push_back(p);
        out.states.push_back(st);
    }
    return out;
}

void write_trajectory_csv(std::ostream& os, const MechanicalSystem& s, const Trajectory& traj) {
    const std::size_t n = s.dimension();
    os << "t";
    for (std::size_t i = 1; i <= n; ++i) os << ",q" << i;
    for (std::size_t i = 1; i <= n; ++i) os << ",v" << i;
    os << ",f,H\n";
    char buf[64];
    auto put = [&](double x, char sep) {
        std::snprintf(buf, sizeof buf, "%.17g%c", x, sep);
        os << buf;
    };
    for (std::size_t k = 0; k < traj.size(); ++k) {
        put(traj.times[k], ',');
        for (std::size_t i = 0; i < n; ++i) put(traj.states[k].q[i], ',');
        for (std::size_t i = 0; i < n; ++i) put(traj.states[k].v[i], ',');
        put(conformal_factor(s, traj.states[k].q), ',');
        put(total_energy(s, traj.states[k]), '\n');
    }
}

}  // namespace hillscope
