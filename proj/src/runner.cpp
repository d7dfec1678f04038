#include "runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hillscope/conjugate.hpp"
#include "hillscope/dynamics.hpp"
#include "hillscope/model.hpp"
#include "hillscope/seifert.hpp"
#include "hillscope/svg.hpp"

namespace hillscope {

namespace {

constexpr double kPi = 3.14159265358979323846;
namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double num_or(const json& j, const std::string& key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
}

Vec vec_of(const json& j, const std::string& key) {
    Vec v;
    for (const auto& e : j.at(key)) v.push_back(e.get<double>());
    return v;
}

std::ofstream open_out(const RunFlags& flags, RunManifest& manifest, const std::string& name) {
    fs::create_directories(flags.out_dir);
    std::string path = flags.out_dir + "/" + name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + path);
    manifest.outputs.push_back(path);
    return out;
}

/// Trace the Hill boundary contour near a point, for figure overlays.
std::vector<Vec> trace_boundary(const MechanicalSystem& s, const Vec& near_q, double arc,
                                std::size_t count) {
    std::vector<Vec> pts;
    Vec b0 = nearest_boundary_point(s, near_q);
    double ds = 2.0 * arc / static_cast<double>(count - 1);
    for (int dir = -1; dir <= 1; dir += 2) {
        Vec b = b0;
        std::vector<Vec> side;
        for (std::size_t k = 0; k < count / 2; ++k) {
            Vec g = conformal_gradient(s, b);
            Vec t{-g[1], g[0]};
            t = normalized(t);
            b = b + (dir * ds) * t;
            for (int it = 0; it < 4; ++it) {  // project back to f = 0
                Vec gg = conformal_gradient(s, b);
                double f = conformal_factor(s, b);
                double gn2 = dot(gg, gg);
                if (gn2 == 0) break;
                b = b - (f / gn2) * gg;
            }
            side.push_back(b);
        }
        if (dir == -1) {
            std::reverse(side.begin(), side.end());
            pts = side;
            pts.push_back(b0);
        } else {
            pts.insert(pts.end(), side.begin(), side.end());
        }
    }
    return pts;
}

model::ModelPoint model_point_from(const Vec& base) {
    model::ModelPoint p;
    p.x0 = Vec(base.begin(), base.end() - 1);
    p.y0 = base.back();
    return p;
}

IntegrateOptions opts_from(const json& exp) {
    IntegrateOptions opts;
    opts.step = num_or(exp, "step", 5e-5);
    return opts;
}

int cmd_simulate(const ScenarioConfig& cfg, const RunFlags& flags, RunManifest& manifest) {
    IntegrateOptions opts = opts_from(cfg.experiment);
    opts.energy_tol = num_or(cfg.experiment, "energy_tol", 1e-9);
    State init{vec_of(cfg.experiment, "q0"), vec_of(cfg.experiment, "v0")};
    Trajectory traj = integrate(cfg.system, init,
                                {cfg.experiment.at("t0").get<double>(),
                                 cfg.experiment.at("t1").get<double>()},
                                opts);
    auto out = open_out(flags, manifest, "trajectory.csv");
    write_trajectory_csv(out, cfg.system, traj);
    manifest.checks.push_back({"integration completed", true});
    if (traj.exited_domain)
        manifest.config_echo["exit_time"] = traj.exit_time;
    return 0;
}

int cmd_model_envelope(const ScenarioConfig& cfg, const RunFlags& flags, RunManifest& manifest) {
    const json& exp = cfg.experiment;
    model::ModelPoint p = model_point_from(vec_of(exp, "base"));
    model::ThrowParams tp;
    tp.gravity = num_or(exp, "gravity", 0.5);
    double theta_max = num_or(exp, "theta_max_deg", 80.0);
    std::size_t n_env = static_cast<std::size_t>(num_or(exp, "theta_count", 161));
    std::size_t n_throws = static_cast<std::size_t>(num_or(exp, "throw_count", 17));

    auto throws_csv = open_out(flags, manifest, "throws.csv");
    throws_csv << "theta_deg,t,x,y\n";
    std::vector<std::vector<Vec>> families;
    for (std::size_t i = 0; i < n_throws; ++i) {
        double deg = -theta_max + 2.0 * theta_max * static_cast<double>(i) /
                                      static_cast<double>(n_throws - 1);
        tp.theta = deg * kPi / 180.0;
        double t_end = 2.4 * model::brake_time(p, model::ThrowParams{0.0, tp.gravity});
        std::vector<Vec> fam_pts;
        for (std::size_t k = 0; k <= 160; ++k) {
            double t = t_end * static_cast<double>(k) / 160.0;
            State st = model::ballistic_state(p, tp, t);
            if (st.q.back() < 0) break;
            throws_csv << fmt(deg) << "," << fmt(t) << "," << fmt(st.q[0]) << ","
                       << fmt(st.q.back()) << "\n";
            fam_pts.push_back(st.q);
        }
        families.push_back(fam_pts);
    }

    auto env_csv = open_out(flags, manifest, "envelope.csv");
    env_csv << "theta_deg,t,x,y\n";
    std::vector<Vec> env_pts;
    double env_max = std::min(theta_max, 80.0);
    for (std::size_t i = 0; i < n_env; ++i) {
        double deg = -env_max + 2.0 * env_max * static_cast<double>(i) /
                                    static_cast<double>(n_env - 1);
        tp.theta = deg * kPi / 180.0;
        double ts = model::critical_time(p, tp);
        Vec q = model::envelope_point(p, tp);
        env_csv << fmt(deg) << "," << fmt(ts) << "," << fmt(q[0]) << "," << fmt(q.back()) << "\n";
        env_pts.push_back(q);
    }

    if (flags.svg) {
        SvgScene scene(720, 540);
        double span = 3.2 * p.y0;
        scene.set_world(p.x0[0] - span, p.x0[0] + span, -0.1 * p.y0, 2.2 * p.y0, flags.flip);
        scene.polyline({Vec{p.x0[0] - span, 0.0}, Vec{p.x0[0] + span, 0.0}}, "black", 2.0);
        for (const auto& famp : families) scene.polyline(famp, "#4477cc", 1.0);
        scene.polyline(env_pts, "#cc3322", 2.0);
        scene.circle(Vec{p.x0[0], p.y0}, 4.0, "black");
        scene.write(flags.out_dir + "/envelope.svg");
        manifest.outputs.push_back(flags.out_dir + "/envelope.svg");
    }
    manifest.checks.push_back({"envelope family computed", true});
    return 0;
}

struct LocusRun {
    FamilyMap fam;
    ConjugateLocus locus;
    std::vector<FoldReport> folds;
};

LocusRun run_locus(const ScenarioConfig& cfg, const RunFlags& flags) {
    const json& exp = cfg.experiment;
    LocusRun run{make_family_map(cfg.system, vec_of(exp, "base"),
                                 exp.at("t_max").get<double>(), opts_from(exp)),
                 {},
                 {}};
    auto grid = planar_theta_grid(exp.at("theta_min_deg").get<double>(),
                                  exp.at("theta_max_deg").get<double>(),
                                  static_cast<std::size_t>(exp.at("theta_count").get<double>()));
    run.locus = conjugate_locus(run.fam, grid, {}, flags.threads);
    run.folds.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (run.locus.events[i]) run.folds[i] = fold_check(run.fam, *run.locus.events[i]);
    return run;
}

void write_locus_csv(std::ofstream& out, const LocusRun& run) {
    out << "theta_deg,t_star,px,py,det_deriv_kernel,fold_ok\n";
    for (std::size_t i = 0; i < run.locus.events.size(); ++i) {
        if (!run.locus.events[i]) continue;
        const auto& ev = *run.locus.events[i];
        out << fmt(ev.theta[0] * 180.0 / kPi) << "," << fmt(ev.t_star) << "," << fmt(ev.point[0])
            << "," << fmt(ev.point[1]) << "," << fmt(run.folds[i].det_derivative_along_kernel)
            << "," << (run.folds[i].fold_certified ? 1 : 0) << "\n";
    }
}

int cmd_conjugate_locus(const ScenarioConfig& cfg, const RunFlags& flags, RunManifest& manifest) {
    LocusRun run = run_locus(cfg, flags);
    auto out = open_out(flags, manifest, "locus.csv");
    write_locus_csv(out, run);

    std::size_t n_events = 0, n_folds = 0;
    for (std::size_t i = 0; i < run.locus.events.size(); ++i) {
        if (!run.locus.events[i]) continue;
        ++n_events;
        if (run.folds[i].fold_certified) ++n_folds;
    }
    manifest.config_echo["events"] = n_events;

    if (flags.svg && n_events > 0) {
        SvgScene scene(720, 540);
        Vec base = run.fam.base;
        double span = 3.0 * norm(base - run.locus.points().front());
        scene.set_world(base[0] - span, base[0] + span, base[1] - span, base[1] + span);
        scene.polyline(trace_boundary(cfg.system, base, span, 120), "black", 2.0);
        for (std::size_t i = 0; i < run.locus.theta_grid.size(); i += 5) {
            State init{base, run.fam.velocity(run.locus.theta_grid[i])};
            IntegrateOptions plain = run.fam.opts;
            plain.with_variations = false;
            Trajectory traj = integrate(cfg.system, init, {0.0, run.fam.t_max}, plain);
            std::vector<Vec> pts;
            for (std::size_t k = 0; k < traj.size(); k += 40) pts.push_back(traj.states[k].q);
            scene.polyline(pts, "#4477cc", 1.0);
        }
        scene.polyline(run.locus.points(), "#cc3322", 2.0);
        scene.circle(base, 4.0, "black");
        scene.write(flags.out_dir + "/locus.svg");
        manifest.outputs.push_back(flags.out_dir + "/locus.svg");
    }
    manifest.checks.push_back({"conjugate events found", n_events > 0});
    manifest.checks.push_back({"all events fold-certified", n_events > 0 && n_folds == n_events});
    return 0;
}

int cmd_fold_report(const ScenarioConfig& cfg, const RunFlags& flags, RunManifest& manifest) {
    LocusRun run = run_locus(cfg, flags);
    json reports = json::array();
    bool all_ok = true;
    for (std::size_t i = 0; i < run.locus.events.size(); ++i) {
        if (!run.locus.events[i]) continue;
        const auto& ev = *run.locus.events[i];
        const auto& fr = run.folds[i];
        json r;
        r["theta_deg"] = ev.theta[0] * 180.0 / kPi;
        r["t_star"] = ev.t_star;
        r["point"] = ev.point;
        r["singular_values"] = fr.singular_values;
        r["kernel"] = fr.kernel;
        r["critical_tangent"] = fr.critical_tangent;
        r["transversality_angle_deg"] = fr.transversality_angle_deg;
        r["det_derivative_along_kernel"] = fr.det_derivative_along_kernel;
        r["rank_ratio"] = fr.rank_ratio;
        r["degenerate"] = fr.degenerate;
        r["fold_certified"] = fr.fold_certified;
        reports.push_back(r);
        all_ok = all_ok && fr.fold_certified;
    }
    auto out = open_out(flags, manifest, "folds.json");
    out << reports.dump(2) << "\n";
    manifest.checks.push_back({"all events fold-certified", all_ok && !reports.empty()});
    return 0;
}

int cmd_downward_cone(const ScenarioConfig& cfg, const RunFlags& flags, RunManifest& manifest) {
    const json& exp = cfg.experiment;
    FamilyMap fam = make_family_map(cfg.system, vec_of(exp, "base"),
                                    exp.at("t_max").get<double>(), opts_from(exp));
    ConeOptions copts;
    copts.sweep_deg = num_or(exp, "sweep_deg", 75.0);
    copts.coarse = static_cast<std::size_t>(num_or(exp, "coarse", 31));
    copts.max_base_f = num_or(exp, "max_base_f", 1e9);
    DownwardCone cone = downward_cone(fam, copts);

    auto out = open_out(flags, manifest, "cone.csv");
    out << "theta_deg,conjugate_f,below\n";
    for (const auto& rec : cone.records) {
        out << fmt(rec.theta * 180.0 / kPi) << ","
            << (rec.has_event ? fmt(rec.conjugate_f) : "nan") << ","
            << (rec.has_event ? (rec.below_base ? "1" : "0") : "none") << "\n";
    }
    manifest.config_echo["aperture_deg"] = cone.aperture_deg;
    manifest.checks.push_back({"aperture located", cone.aperture_deg > 0});
    return 0;
}

SeifertChart chart_from(const ScenarioConfig& cfg) {
    const json& exp = cfg.experiment;
    ChartOptions copts;
    copts.nx = static_cast<std::size_t>(num_or(exp, "nx", 41));
    copts.step = num_or(exp, "step", 5e-5);
    return build_chart(cfg.system, vec_of(exp, "center"), exp.at("extent").get<double>(),
                       exp.at("height").get<double>(), copts);
}

int cmd_seifert_build(const ScenarioConfig& cfg, const RunFlags& flags, RunManifest& manifest) {
    SeifertChart chart = chart_from(cfg);
    auto out = open_out(flags, manifest, "chart.csv");
    out << "x1,y,q1,q2\n";
    for (const auto& line : chart.lines) {
        for (std::size_t j = 0; j < 24; ++j) {
            double y = chart.height * static_cast<double>(j) / 23.0;
            Vec q = line.position(y);
            out << fmt(line.x) << "," << fmt(y) << "," << fmt(q[0]) << "," << fmt(q[1]) << "\n";
        }
    }
    // chart axioms: the solved boundary sheet sits on f = 0, round trips close
    double f_worst = 0.0, rt_worst = 0.0;
    for (const auto& line : chart.lines)
        f_worst = std::max(f_worst, std::fabs(conformal_factor(cfg.system, line.boundary)));
    for (std::size_t i = 0; i < 20; ++i) {
        double x = -chart.extent * 0.9 + 1.8 * chart.extent * static_cast<double>(i) / 19.0;
        for (std::size_t j = 1; j <= 20; ++j) {
            double y = chart.height * 0.95 * static_cast<double>(j) / 20.0;
            auto cp = chart.inverse(chart.forward(x, y));
            rt_worst = std::max(rt_worst, std::hypot(cp.x - x, cp.y - y));
        }
    }
    manifest.config_echo["boundary_f_worst"] = f_worst;
    manifest.config_echo["roundtrip_worst"] = rt_worst;
    manifest.checks.push_back({"boundary sheet on f=0", f_worst < 1e-9});
    manifest.checks.push_back({"inverse/forward round trip", rt_worst < 1e-8});
    return 0;
}

json report_to_json(const PropertyReport& rep) {
    json r;
    r["property"] = rep.property;
    r["pass"] = rep.pass;
    r["measured"] = rep.measured;
    r["thresholds"] = rep.thresholds;
    if (!rep.note.empty()) r["note"] = rep.note;
    return r;
}

int cmd_seifert_properties(const ScenarioConfig& cfg, const RunFlags& flags,
                           RunManifest& manifest) {
    const json& exp = cfg.experiment;
    SeifertChart chart = chart_from(cfg);
    double lambda = num_or(exp, "lambda", 1.4);
    double delta = num_or(exp, "delta_deg", 44.0);
    double eps_A = num_or(exp, "eps_A", chart.height * 0.5);
    double eps_B = eps_A / lambda;
    double cross_tol = num_or(exp, "cross_tol", 1e-3);

    std::vector<double> heights, h_values;
    for (const auto& e : exp.at("heights")) heights.push_back(e.get<double>());
    for (const auto& e : exp.at("h_values")) h_values.push_back(e.get<double>());

    auto samples = default_transit_samples(chart.extent * 0.4, eps_B);
    json reports = json::array();
    std::vector<PropertyReport> reps;
    reps.push_back(property1_check(chart, heights));
    reps.push_back(chart_metric_check(chart, 12, cross_tol));
    reps.push_back(property3_check(chart, eps_A, eps_B, delta, samples));
    reps.push_back(property4_check(chart, samples));
    reps.push_back(property5_check(chart, h_values, samples));
    for (const auto& r : reps) {
        reports.push_back(report_to_json(r));
        manifest.checks.push_back({"property " + std::to_string(r.property), r.pass});
    }
    auto out = open_out(flags, manifest, "properties.json");
    out << reports.dump(2) << "\n";

    if (flags.svg) {
        SvgScene scene(720, 540);
        scene.set_world(-chart.extent, chart.extent, -0.05 * chart.height, 1.3 * chart.height);
        scene.polyline({Vec{-chart.extent, 0.0}, Vec{chart.extent, 0.0}}, "black", 2.0);
        scene.polyline({Vec{-chart.extent * 0.98, eps_A}, Vec{chart.extent * 0.98, eps_A}},
                       "#888888", 1.0);
        scene.polyline({Vec{-chart.extent * 0.45, eps_B}, Vec{chart.extent * 0.45, eps_B}},
                       "#bbbbbb", 1.0);
        TransitTrack track = integrate_transit(chart, {0.0, eps_B * 0.6, 1.0}, eps_A * 1.25,
                                               chart.opts.step);
        std::vector<Vec> pts;
        for (std::size_t k = 0; k < track.chart.size(); k += 25)
            pts.push_back(Vec{track.chart[k].x, track.chart[k].y});
        scene.polyline(pts, "#4477cc", 1.5);
        scene.write(flags.out_dir + "/cylinders.svg");
        manifest.outputs.push_back(flags.out_dir + "/cylinders.svg");
    }
    return 0;
}

int cmd_rescale_compare(const ScenarioConfig& cfg, const RunFlags& flags, RunManifest& manifest) {
    const json& exp = cfg.experiment;
    SeifertChart chart = chart_from(cfg);
    std::vector<double> eps_list;
    for (const auto& e : exp.at("eps_list")) eps_list.push_back(e.get<double>());
    RescaleReport rep = rescale_compare(chart, eps_list, num_or(exp, "entry_angle_deg", 30.0));

    auto out = open_out(flags, manifest, "rescale.csv");
    out << "eps,deviation,ratio\n";
    for (std::size_t i = 0; i < rep.eps.size(); ++i)
        out << fmt(rep.eps[i]) << "," << fmt(rep.deviation[i]) << "," << fmt(rep.ratio[i]) << "\n";
    manifest.config_echo["ratio_spread"] = rep.ratio_spread;
    manifest.checks.push_back({"deviation is O(eps)", rep.pass});

    if (exp.contains("expected_f1_a")) {
        double expect = exp.at("expected_f1_a").get<double>();
        PropertyReport metric = chart_metric_check(chart, 12, num_or(exp, "cross_tol", 1e-3));
        double measured = metric.measured.at("f1_a");
        manifest.config_echo["f1_a_measured"] = measured;
        manifest.checks.push_back(
            {"f1 coefficient within 10%", std::fabs(measured - expect) <= 0.10 * std::fabs(expect)});
    }
    return 0;
}

int cmd_theorem1_scan(const ScenarioConfig& cfg, const RunFlags& flags, RunManifest& manifest) {
    const json& exp = cfg.experiment;
    SeifertChart chart = chart_from(cfg);
    ScanOptions sopts;
    sopts.roof_factor = num_or(exp, "roof_factor", 2.4);
    sopts.samples = static_cast<std::size_t>(num_or(exp, "samples", 60));
    sopts.step = num_or(exp, "step", 5e-5);
    ScanReport rep = conjugate_pair_scan(chart, exp.at("approach_dist").get<double>(), sopts);

    auto out = open_out(flags, manifest, "pairs.csv");
    out << "entry_x,entry_y,conj_x,conj_y,entry_height,conjugate_height,entry_angle_deg\n";
    for (const auto& pair : rep.pairs) {
        out << fmt(pair.entry_point[0]) << "," << fmt(pair.entry_point[1]) << ","
            << fmt(pair.conjugate_point[0]) << "," << fmt(pair.conjugate_point[1]) << ","
            << fmt(pair.entry_height) << "," << fmt(pair.conjugate_height) << ","
            << fmt(pair.entry_angle_deg) << "\n";
    }
    manifest.config_echo["entered"] = rep.entered;
    manifest.config_echo["skipped"] = rep.skipped;
    manifest.config_echo["pairs_found"] = rep.pairs_found;
    manifest.config_echo["max_pair_height"] = rep.max_pair_height;
    manifest.checks.push_back({"every entering geodesic paired", rep.all_entering_paired});
    return 0;
}

// Canonical verify-all batteries per preset; parameters mirror the bundled
// scenarios (see README).
int cmd_verify_all(const ScenarioConfig& cfg, const RunFlags& flags, RunManifest& manifest) {
    std::string preset = cfg.experiment.at("preset").get<std::string>();
    auto check = [&](const std::string& name, bool ok) {
        manifest.checks.push_back({name, ok});
    };

    if (preset == "model") {
        MechanicalSystem sys = make_model_system();
        // integrator against the ballistic closed form
        model::ModelPoint p{{0.0}, 1.0};
        double worst = 0.0;
        for (int i = 0; i < 12; ++i) {
            model::ThrowParams tp{(-75.0 + 150.0 * i / 11.0) * kPi / 180.0, 0.5};
            State init = model::ballistic_state(p, tp, 0.0);
            Trajectory traj = integrate(sys, init, {0.0, 2.0}, {});
            State expect = model::ballistic_state(p, tp, traj.times.back());
            worst = std::max(worst, norm(traj.states.back().q - expect.q));
        }
        check("integrator matches ballistic closed form", worst < 1e-8);

        FamilyMap fam = make_family_map(sys, Vec{0.0, 1.0}, 5.2);
        ConjugateLocus locus = conjugate_locus(fam, planar_theta_grid(-60, 60, 41), {},
                                               flags.threads);
        double dev = 0.0;
        bool all_fold = true;
        for (std::size_t i = 0; i < locus.events.size(); ++i) {
            if (!locus.events[i]) {
                all_fold = false;
                continue;
            }
            const Vec& q = locus.events[i]->point;
            dev = std::max(dev, std::fabs(q[1] - q[0] * q[0] / 4.0));
            all_fold = all_fold && fold_check(fam, *locus.events[i]).fold_certified;
        }
        check("conjugate locus matches the envelope parabola", dev < 1e-6);
        check("all locus events fold-certified", all_fold);

        DownwardCone cone = downward_cone(fam);
        check("downward cone aperture 45 deg", std::fabs(cone.aperture_deg - 45.0) <= 0.05);

        SeifertChart chart = build_chart(sys, Vec{0.0, 0.0}, 1.0, 0.6);
        check("cylinder distance exponent 3/2",
              property1_check(chart, {0.05, 0.1, 0.2, 0.4}).pass);
        check("cylinder metric normal form", chart_metric_check(chart).pass);
        double eps_A = 0.25, lambda = 2.2;
        auto samples = default_transit_samples(chart.extent * 0.4, eps_A / lambda);
        check("steep roof exit (lambda 2.2, delta 44)",
              property3_check(chart, eps_A, eps_A / lambda, 44.0, samples).pass);
        check("height convexity", property4_check(chart, samples).pass);
        check("residence times", property5_check(chart, {0.04, 0.08, 0.16}, samples).pass);

        ReparamInvarianceReport inv =
            reparam_invariance_check(fam, planar_theta_grid(1.5, 45.0, 16));
        check("arclength/Newtonian locus agreement", inv.hausdorff < 1e-5);
    } else if (preset == "oscillator") {
        MechanicalSystem sys = make_oscillator_system();
        FamilyMap fam = make_family_map(sys, Vec{0.9, 0.0}, 1.6);
        ConjugateLocus locus = conjugate_locus(fam, planar_theta_grid(-60, 60, 41), {},
                                               flags.threads);
        bool all_fold = true;
        std::size_t events = 0;
        for (std::size_t i = 0; i < locus.events.size(); ++i) {
            if (!locus.events[i]) continue;
            ++events;
            all_fold = all_fold && fold_check(fam, *locus.events[i]).fold_certified;
        }
        check("locus events found", events == locus.events.size());
        check("all locus events fold-certified", all_fold);

        auto brake_ev = detect_conjugate(fam, Vec{0.0});
        check("brake-direction conjugate point at (1,0)",
              brake_ev && norm(brake_ev->point - Vec{1.0, 0.0}) < 1e-6);

        SeifertChart chart = build_chart(sys, Vec{1.0, 0.0}, 0.35, 0.12);
        check("cylinder distance exponent 3/2",
              property1_check(chart, {0.01, 0.02, 0.04, 0.08}).pass);
        check("cylinder metric normal form", chart_metric_check(chart).pass);
        double eps_A = 0.05, lambda = 2.4;
        auto samples = default_transit_samples(chart.extent * 0.4, eps_A / lambda);
        check("steep roof exit (lambda 2.4, delta 44)",
              property3_check(chart, eps_A, eps_A / lambda, 44.0, samples).pass);
        check("height convexity", property4_check(chart, samples).pass);
        check("residence times", property5_check(chart, {0.0125, 0.025, 0.05}, samples).pass);

        ScanOptions sopts;
        ScanReport scan = conjugate_pair_scan(chart, 0.02, sopts);
        check("conjugate pairs for all entering geodesics",
              scan.all_entering_paired && scan.max_pair_height < 0.05);

        RescaleReport rescale = rescale_compare(chart, {0.1, 0.05, 0.025});
        check("rescaled flows O(eps) from the parabola", rescale.pass);
    } else {  // perturbed-model
        MechanicalSystem sys = cfg.system;
        SeifertChart chart = build_chart(sys, Vec{0.0, 0.0}, 0.6, 0.35);
        PropertyReport metric = chart_metric_check(chart, 12, 5e-3);
        double measured = metric.measured.at("f1_a");
        manifest.config_echo["f1_a_measured"] = measured;
        double expect = num_or(cfg.experiment, "expected_f1_a", 2.0 / 3.0 * 0.1);
        check("f1 coefficient within 10%",
              std::fabs(measured - expect) <= 0.10 * std::fabs(expect));
        check("cylinder distance exponent 3/2",
              property1_check(chart, {0.04, 0.08, 0.16, 0.3}).pass);
        RescaleReport rescale = rescale_compare(chart, {0.2, 0.1, 0.05});
        check("rescaled flows O(eps) from the parabola", rescale.pass);
    }
    (void)flags;
    return 0;
}

}  // namespace

bool RunManifest::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

nlohmann::json RunManifest::to_json() const {
    json j;
    j["scenario"] = scenario;
    j["config"] = config_echo;
    j["outputs"] = outputs;
    j["checks"] = json::array();
    for (const auto& c : checks) j["checks"].push_back({{"name", c.name}, {"pass", c.pass}});
    j["wall_seconds"] = wall_seconds;
    return j;
}

int run_subcommand(const std::string& command, const ScenarioConfig& cfg, const RunFlags& flags,
                   RunManifest& manifest) {
    if (command != cfg.kind)
        throw ConfigError("scenario experiment.kind '" + cfg.kind +
                          "' does not match subcommand '" + command + "'");
    manifest.scenario = cfg.source_path;
    manifest.config_echo["kind"] = cfg.kind;
    manifest.config_echo["experiment"] = cfg.experiment;

    auto start = std::chrono::steady_clock::now();
    if (command == "simulate")
        cmd_simulate(cfg, flags, manifest);
    else if (command == "model-envelope")
        cmd_model_envelope(cfg, flags, manifest);
    else if (command == "conjugate-locus")
        cmd_conjugate_locus(cfg, flags, manifest);
    else if (command == "fold-report")
        cmd_fold_report(cfg, flags, manifest);
    else if (command == "downward-cone")
        cmd_downward_cone(cfg, flags, manifest);
    else if (command == "seifert-build")
        cmd_seifert_build(cfg, flags, manifest);
    else if (command == "seifert-properties")
        cmd_seifert_properties(cfg, flags, manifest);
    else if (command == "rescale-compare")
        cmd_rescale_compare(cfg, flags, manifest);
    else if (command == "theorem1-scan")
        cmd_theorem1_scan(cfg, flags, manifest);
    else if (command == "verify-all")
        cmd_verify_all(cfg, flags, manifest);
    else
        throw ConfigError("unknown subcommand: " + command);
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::filesystem::create_directories(flags.out_dir);
    std::ofstream mf(flags.out_dir + "/manifest.json", std::ios::binary);
    mf << manifest.to_json().dump(2) << "\n";
    return manifest.all_pass() ? 0 : 1;
}

}  // namespace hillscope
