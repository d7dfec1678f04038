// Acceptance suite: every check below pins its tolerance in code and prints
// one PASS/FAIL line. Exit code is the number of failed criteria.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "hillscope/conjugate.hpp"
#include "hillscope/dynamics.hpp"
#include "hillscope/model.hpp"
#include "hillscope/seifert.hpp"

using namespace hillscope;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = kPi / 180.0;

char detail_buf[512];

#define DETAIL(...) std::snprintf(detail_buf, sizeof detail_buf, __VA_ARGS__)

// 1. numerical integrator against the ballistic closed form
bool criterion1() {
    MechanicalSystem sys = make_model_system();
    model::ModelPoint p{{0.0}, 1.0};
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ang(-80.0 * kDeg, 80.0 * kDeg);
    std::uniform_real_distribution<double> frac(0.05, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        model::ThrowParams tp{ang(rng), 0.5};
        double t_b = model::brake_time(p, model::ThrowParams{0.0, 0.5});
        double t = 2.0 * t_b * frac(rng);
        State init = model::ballistic_state(p, tp, 0.0);
        Trajectory traj = integrate(sys, init, {0.0, t}, {});
        State expect = model::ballistic_state(p, tp, traj.times.back());
        worst = std::max(worst, norm(traj.states.back().q - expect.q));
    }
    DETAIL("worst position error %.3g (tol 1e-8) over 50 random throws", worst);
    return worst < 1e-8;
}

// 2. detected conjugate locus of the base (0,1) equals the envelope parabola
bool criterion2() {
    FamilyMap fam = make_family_map(make_model_system(), Vec{0.0, 1.0}, 5.2);
    ConjugateLocus locus = conjugate_locus(fam, planar_theta_grid(-60.0, 60.0, 61));
    double worst = 0.0, off_brake_min_y = 1e300, brake_y = 1e300;
    for (const auto& ev : locus.events) {
        if (!ev) return false;
        worst = std::max(worst, std::fabs(ev->point[1] - ev->point[0] * ev->point[0] / 4.0));
        if (std::fabs(ev->theta[0]) < 1e-9)
            brake_y = ev->point[1];
        else
            off_brake_min_y = std::min(off_brake_min_y, ev->point[1]);
    }
    DETAIL("max |y - x^2/4| = %.3g (tol 1e-6); boundary touch y = %.3g, min off-brake y = %.3g",
           worst, brake_y, off_brake_min_y);
    return worst < 1e-6 && brake_y < 1e-8 && off_brake_min_y > 1e-6;
}

// 3. closed-form family Jacobian against finite differences of the numerical
//    family map, and the critical locus relation v2 t* = 2 y0
bool criterion3() {
    MechanicalSystem sys = make_model_system();
    FamilyMap fam = make_family_map(sys, Vec{0.0, 1.0}, 5.2);
    model::ModelPoint p{{0.0}, 1.0};

    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> ang(-70.0 * kDeg, 70.0 * kDeg);
    std::uniform_real_distribution<double> tt(0.2, 3.8);
    double worst_rel = 0.0;
    const double h = 1e-5;
    for (int i = 0; i < 25; ++i) {
        double theta = ang(rng), t = tt(rng);
        auto oracle = model::gamma_jacobian(p, {theta, 0.5}, t);
        FamilyEval ce = family_map_eval(fam, Vec{theta}, t);
        (void)ce;
        // finite differences of the numerical family map positions
        Vec qp = family_map_eval(fam, Vec{theta + h}, t).point;
        Vec qm = family_map_eval(fam, Vec{theta - h}, t).point;
        Vec tp = family_map_eval(fam, Vec{theta}, t + h).point;
        Vec tm = family_map_eval(fam, Vec{theta}, t - h).point;
        for (std::size_t r = 0; r < 2; ++r) {
            double fd_t = (tp[r] - tm[r]) / (2 * h);
            double fd_th = (qp[r] - qm[r]) / (2 * h);
            worst_rel = std::max(worst_rel, std::fabs(fd_t - oracle.m(r, 0)) /
                                                std::max(1.0, std::fabs(oracle.m(r, 0))));
            worst_rel = std::max(worst_rel, std::fabs(fd_th - oracle.m(r, 1)) /
                                                std::max(1.0, std::fabs(oracle.m(r, 1))));
        }
    }

    double worst_crit = 0.0;
    for (double deg = -60.0; deg <= 60.0; deg += 10.0) {
        auto ev = detect_conjugate(fam, Vec{deg * kDeg});
        if (!ev) return false;
        double v2 = std::cos(deg * kDeg);
        worst_crit = std::max(worst_crit, std::fabs(v2 * ev->t_star - 2.0));
    }
    DETAIL("Jacobian rel err %.3g (tol 1e-6); |v2 t* - 2 y0| %.3g (tol 1e-9)", worst_rel,
           worst_crit);
    return worst_rel < 1e-6 && worst_crit < 1e-9;
}

// 4. every detected conjugate event on both systems certifies as a fold
bool criterion4() {
    std::size_t events = 0, folds = 0;
    bool brake_ok = true;
    {
        FamilyMap fam = make_family_map(make_model_system(), Vec{0.0, 1.0}, 5.2);
        ConjugateLocus locus = conjugate_locus(fam, planar_theta_grid(-60.0, 60.0, 31));
        for (const auto& ev : locus.events) {
            if (!ev) continue;
            ++events;
            FoldReport fr = fold_check(fam, *ev);
            if (fr.fold_certified) ++folds;
            if (std::fabs(ev->theta[0]) < 1e-9 && !fr.fold_certified) brake_ok = false;
        }
    }
    {
        FamilyMap fam = make_family_map(make_oscillator_system(), Vec{0.9, 0.0}, 1.6);
        ConjugateLocus locus = conjugate_locus(fam, planar_theta_grid(-60.0, 60.0, 31));
        for (const auto& ev : locus.events) {
            if (!ev) continue;
            ++events;
            FoldReport fr = fold_check(fam, *ev);
            if (fr.fold_certified) ++folds;
            if (std::fabs(ev->theta[0]) < 1e-9 && !fr.fold_certified) brake_ok = false;
        }
    }
    DETAIL("%zu of %zu events certified (brake-direction events %s)", folds, events,
           brake_ok ? "certified" : "NOT certified");
    return events == 62 && folds == events && brake_ok;
}

// 5. downward-cone apertures: 45 deg for the model at three heights; the
//    oscillator sequence converges monotonically toward 45 deg
bool criterion5() {
    double model_worst = 0.0;
    for (double y0 : {0.25, 1.0, 4.0}) {
        FamilyMap fam = make_family_map(make_model_system(), Vec{0.0, y0},
                                        5.5 * std::sqrt(y0));
        DownwardCone cone = downward_cone(fam);
        model_worst = std::max(model_worst, std::fabs(cone.aperture_deg - 45.0));
    }

    SeifertChart chart = build_chart(make_oscillator_system(), Vec{1.0, 0.0}, 0.35, 0.12);
    std::vector<double> apertures;
    bool monotone = true;
    double prev = 1e300;
    for (double ych : {0.08, 0.04, 0.02, 0.01}) {
        Vec base = chart.forward(0.0, ych);
        FamilyMap fam = make_family_map(make_oscillator_system(), base, 1.6);
        DownwardCone cone = downward_cone(fam);
        apertures.push_back(cone.aperture_deg);
        if (cone.aperture_deg >= prev) monotone = false;
        prev = cone.aperture_deg;
    }
    bool trend_to_45 = monotone && apertures.front() > apertures.back() &&
                       apertures.back() > 45.0 - 2.0;
    double final_dev = std::fabs(apertures.back() - 45.0);
    DETAIL("model |aperture-45| %.3g (tol 0.05); oscillator %.2f -> %.2f -> %.2f -> %.2f "
           "(monotone %s, final dev %.2f, tol 2)",
           model_worst, apertures[0], apertures[1], apertures[2], apertures[3],
           monotone ? "yes" : "no", final_dev);
    return model_worst <= 0.05 && trend_to_45 && final_dev <= 2.0;
}

// 6. oscillator conjugate locus touches the Hill circle only near (1,0),
//    tangentially in chart coordinates; brake-direction point is (1,0)
bool criterion6() {
    MechanicalSystem sys = make_oscillator_system();
    FamilyMap fam = make_family_map(sys, Vec{0.9, 0.0}, 1.6);
    ConjugateLocus locus = conjugate_locus(fam, planar_theta_grid(-60.0, 60.0, 121));
    SeifertChart chart = build_chart(sys, Vec{1.0, 0.0}, 0.35, 0.2);

    // distance of locus samples to the Hill circle; the touch must be near (1,0)
    std::size_t nearest = 0;
    double min_f = 1e300;
    for (std::size_t i = 0; i < locus.events.size(); ++i) {
        if (!locus.events[i]) return false;
        double f = conformal_factor(sys, locus.events[i]->point);
        if (f < min_f) {
            min_f = f;
            nearest = i;
        }
    }
    Vec touch = locus.events[nearest]->point;
    double touch_dist = norm(touch - Vec{1.0, 0.0});

    // chart slope between the boundary-nearest sample and its neighbor
    auto cp0 = chart.inverse(locus.events[nearest]->point);
    auto cp1 = chart.inverse(locus.events[nearest + 1]->point);
    double slope = std::fabs((cp1.y - cp0.y) / (cp1.x - cp0.x));

    auto brake_ev = detect_conjugate(fam, Vec{0.0});
    if (!brake_ev) return false;
    double brake_err = norm(brake_ev->point - Vec{1.0, 0.0});

    DETAIL("touch at distance %.3g from (1,0); chart slope %.3g (tol 0.1); brake point err "
           "%.3g (tol 1e-6)",
           touch_dist, slope, brake_err);
    return touch_dist < 1e-3 && slope < 0.1 && brake_err < 1e-6;
}

// 7. near-boundary scan: every sampled geodesic passing within 0.02 of the
//    boundary point yields a conjugate pair at chart height < 0.05
bool criterion7() {
    SeifertChart chart = build_chart(make_oscillator_system(), Vec{1.0, 0.0}, 0.35, 0.12);
    ScanOptions opts;
    opts.samples = 50;
    ScanReport rep = conjugate_pair_scan(chart, 0.02, opts);
    DETAIL("%zu samples entered, %zu paired, max pair height %.4f (tol 0.05), %zu misses "
           "skipped",
           rep.entered, rep.pairs_found, rep.max_pair_height, rep.skipped);
    return rep.entered >= 50 && rep.all_entering_paired && rep.max_pair_height < 0.05;
}

// 8. cylinder-coordinate properties on both systems. Property 3 runs at the
//    stated lambda = 1.4, delta = 44 deg; the geometric minimum ratio for a
//    44-degree exit is 1 + cot^2(44 deg) = 2.07, so the stated parameters
//    cannot pass for grazing entries (see the corrected-lambda diagnostics).
bool criterion8() {
    SeifertChart model = build_chart(make_model_system(), Vec{0.0, 0.0}, 1.0, 0.6);
    SeifertChart osc = build_chart(make_oscillator_system(), Vec{1.0, 0.0}, 0.35, 0.12);

    PropertyReport p1m = property1_check(model, {0.05, 0.1, 0.2, 0.4});
    PropertyReport p1o = property1_check(osc, {0.01, 0.02, 0.04, 0.08});

    const double lambda_stated = 1.4, delta = 44.0;
    double eps_Am = 0.25, eps_Ao = 0.05;
    auto samples_m = default_transit_samples(model.extent * 0.4, eps_Am / lambda_stated);
    auto samples_o = default_transit_samples(osc.extent * 0.4, eps_Ao / lambda_stated);
    PropertyReport p3m = property3_check(model, eps_Am, eps_Am / lambda_stated, delta, samples_m);
    PropertyReport p3o = property3_check(osc, eps_Ao, eps_Ao / lambda_stated, delta, samples_o);

    PropertyReport p4m = property4_check(model, default_transit_samples(model.extent * 0.3, 0.1));
    PropertyReport p4o = property4_check(osc, default_transit_samples(osc.extent * 0.3, 0.02));

    PropertyReport p5m = property5_check(
        model, {0.04, 0.08, 0.16}, default_transit_samples(model.extent * 0.3, 0.16));
    PropertyReport p5o = property5_check(
        osc, {0.0125, 0.025, 0.05}, default_transit_samples(osc.extent * 0.3, 0.05));

    // corrected-lambda diagnostics (not part of the pass decision)
    const double lambda_fixed_m = 2.2, lambda_fixed_o = 2.4;
    PropertyReport p3m_fix = property3_check(
        model, eps_Am, eps_Am / lambda_fixed_m, delta,
        default_transit_samples(model.extent * 0.4, eps_Am / lambda_fixed_m));
    PropertyReport p3o_fix = property3_check(
        osc, eps_Ao, eps_Ao / lambda_fixed_o, delta,
        default_transit_samples(osc.extent * 0.4, eps_Ao / lambda_fixed_o));
    std::printf("      diagnostic: property 3 at lambda=%.1f: model %s (max angle %.1f deg), "
                "oscillator %s (max angle %.1f deg)\n",
                lambda_stated, p3m.pass ? "pass" : "FAIL",
                p3m.measured.at("max_roof_angle_deg"), p3o.pass ? "pass" : "FAIL",
                p3o.measured.at("max_roof_angle_deg"));
    std::printf("      diagnostic: property 3 at lambda=%.1f/%.1f: model %s, oscillator %s "
                "(geometric minimum 1+cot^2(44deg) = %.3f)\n",
                lambda_fixed_m, lambda_fixed_o, p3m_fix.pass ? "pass" : "FAIL",
                p3o_fix.pass ? "pass" : "FAIL",
                1.0 + 1.0 / std::pow(std::tan(delta * kDeg), 2.0));

    DETAIL("p1 slopes %.4f/%.4f (1.5 +- 0.01); p3(lambda=1.4) %s/%s; p4 %s/%s; p5 %s/%s "
           "slope %.3f/%.3f",
           p1m.measured.at("slope"), p1o.measured.at("slope"), p3m.pass ? "pass" : "FAIL",
           p3o.pass ? "pass" : "FAIL", p4m.pass ? "pass" : "FAIL", p4o.pass ? "pass" : "FAIL",
           p5m.pass ? "pass" : "FAIL", p5o.pass ? "pass" : "FAIL",
           p5m.measured.at("loglog_slope"), p5o.measured.at("loglog_slope"));
    return p1m.pass && p1o.pass && p3m.pass && p3o.pass && p4m.pass && p4o.pass && p5m.pass &&
           p5o.pass;
}

// 9. conjugate loci from Newtonian-time and JM-arclength parameterizations
bool criterion9() {
    auto grid = [](double lo, double hi, double step) {
        std::vector<Vec> g;
        for (double d = lo; d <= hi + 1e-9; d += step) {
            g.push_back(Vec{d * kDeg});
            g.push_back(Vec{-d * kDeg});
        }
        return g;
    };
    FamilyMap model_fam = make_family_map(make_model_system(), Vec{0.0, 1.0}, 5.2);
    ReparamInvarianceReport m = reparam_invariance_check(model_fam, grid(1.5, 45.0, 1.5));

    FamilyMap osc_fam = make_family_map(make_oscillator_system(), Vec{0.9, 0.0}, 1.6);
    ReparamInvarianceReport o = reparam_invariance_check(osc_fam, grid(2.0, 40.0, 2.0));

    DETAIL("Hausdorff model %.3g (tol 1e-5), oscillator %.3g (tol 1e-4); gaps %zu/%zu", m.hausdorff,
           o.hausdorff, m.arclength_gaps, o.arclength_gaps);
    return m.hausdorff < 1e-5 && o.hausdorff < 1e-4 && m.arclength_gaps == 0 &&
           o.arclength_gaps == 0;
}

// 10. rescaled near-boundary flows against the parabola, and the perturbed
//     model's measured linear metric coefficient
bool criterion10() {
    SeifertChart osc = build_chart(make_oscillator_system(), Vec{1.0, 0.0}, 0.35, 0.12);
    RescaleReport rescale = rescale_compare(osc, {0.1, 0.05, 0.025});

    MechanicalSystem perturbed{
        PolynomialPotential(2, {{-0.5, {0, 1}}, {-0.05, {1, 1}}}), 0.0};
    SeifertChart chart = build_chart(perturbed, Vec{0.0, 0.0}, 0.6, 0.35);
    PropertyReport metric = chart_metric_check(chart, 12, 5e-3);
    double a = metric.measured.at("f1_a");
    const double expect = 2.0 / 3.0 * 0.1;  // chart-frame coefficient of V = -y(1+0.1x)/2
    double rel = std::fabs(a - expect) / expect;

    DETAIL("ratio spread %.2f (tol 3); f1 a = %.5f vs %.5f (rel dev %.3f, tol 0.10)",
           rescale.ratio_spread, a, expect, rel);
    return rescale.pass && rescale.ratio_spread <= 3.0 && rel <= 0.10;
}

struct Criterion {
    int id;
    const char* name;
    bool (*fn)();
};

const Criterion kCriteria[] = {
    {1, "integrator matches the ballistic closed form", criterion1},
    {2, "conjugate locus equals the envelope parabola", criterion2},
    {3, "family Jacobian closed form and critical locus", criterion3},
    {4, "all conjugate events certify as folds", criterion4},
    {5, "downward-cone apertures and the 45-degree limit", criterion5},
    {6, "locus meets the boundary tangentially at the brake point", criterion6},
    {7, "near-boundary geodesics carry conjugate pairs", criterion7},
    {8, "cylinder coordinate properties (1,3,4,5)", criterion8},
    {9, "parameterization invariance of the locus", criterion9},
    {10, "rescaling limit and perturbed-model coefficient", criterion10},
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);
    }
    int failures = 0;
    for (const auto& c : kCriteria) {
        if (only != 0 && c.id != only) continue;
        detail_buf[0] = '\0';
        bool ok = false;
        try {
            ok = c.fn();
        } catch (const std::exception& e) {
            DETAIL("exception: %s", e.what());
        }
        std::printf("criterion %2d [%s] %s — %s\n", c.id, ok ? "PASS" : "FAIL", c.name,
                    detail_buf);
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures;
}
