#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hillscope/conjugate.hpp"
#include "hillscope/dynamics.hpp"
#include "hillscope/model.hpp"
#include "hillscope/seifert.hpp"

namespace py = pybind11;
using namespace hillscope;

namespace {

MechanicalSystem system_from(std::size_t dimension, double energy,
                             const std::vector<std::pair<double, std::vector<int>>>& terms) {
    std::vector<MonomialTerm> ts;
    for (const auto& [c, e] : terms) ts.push_back(MonomialTerm{c, e});
    return MechanicalSystem{PolynomialPotential(dimension, std::move(ts)), energy};
}

std::vector<std::vector<double>> mat_rows(const Mat& m) {
    std::vector<std::vector<double>> rows(m.rows, std::vector<double>(m.cols));
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) rows[i][j] = m(i, j);
    return rows;
}

}  // namespace

PYBIND11_MODULE(_hillscope, m) {
    m.doc() = "Geodesics, conjugate loci and cylinder coordinates near the Hill boundary";

    py::register_exception<ConfigError>(m, "HSConfigError");
    py::register_exception<DomainError>(m, "HSDomainError");
    py::register_exception<IntegrationError>(m, "HSIntegrationError");

    py::class_<MechanicalSystem>(m, "MechanicalSystem")
        .def(py::init(&system_from), py::arg("dimension"), py::arg("energy"), py::arg("terms"),
             "terms: list of (coeff, exponents) monomials of the potential")
        .def_readonly("energy", &MechanicalSystem::energy)
        .def_property_readonly("dimension", &MechanicalSystem::dimension)
        .def("potential_value",
             [](const MechanicalSystem& s, const Vec& q) { return s.potential.value(q); })
        .def("potential_gradient",
             [](const MechanicalSystem& s, const Vec& q) { return s.potential.gradient(q); })
        .def("potential_hessian", [](const MechanicalSystem& s, const Vec& q) {
            return mat_rows(s.potential.hessian(q));
        });

    m.def("make_model_system", &make_model_system, py::arg("dim") = 2, py::arg("gravity") = 0.5);
    m.def("make_oscillator_system", &make_oscillator_system, py::arg("dim") = 2,
          py::arg("energy") = 0.5);
    m.def("conformal_factor", &conformal_factor, py::arg("system"), py::arg("q"));

    py::enum_<HillClass>(m, "HillClass")
        .value("Interior", HillClass::Interior)
        .value("Boundary", HillClass::Boundary)
        .value("Exterior", HillClass::Exterior);
    py::class_<HillClassification>(m, "HillClassification")
        .def_readonly("cls", &HillClassification::cls)
        .def_readonly("f_value", &HillClassification::f_value)
        .def_readonly("regular", &HillClassification::regular)
        .def_readonly("grad_norm", &HillClassification::grad_norm);
    m.def("hill_classify", &hill_classify, py::arg("system"), py::arg("q"),
          py::arg("tol_boundary") = kDefaultBoundaryTol);

    py::class_<State>(m, "State")
        .def(py::init([](Vec q, Vec v) { return State{std::move(q), std::move(v)}; }),
             py::arg("q"), py::arg("v"))
        .def_readwrite("q", &State::q)
        .def_readwrite("v", &State::v);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("times", &Trajectory::times)
        .def_readonly("exited_domain", &Trajectory::exited_domain)
        .def_property_readonly("positions",
                               [](const Trajectory& t) {
                                   std::vector<Vec> qs;
                                   for (const auto& st : t.states) qs.push_back(st.q);
                                   return qs;
                               })
        .def_property_readonly("velocities", [](const Trajectory& t) {
            std::vector<Vec> vs;
            for (const auto& st : t.states) vs.push_back(st.v);
            return vs;
        });

    m.def(
        "integrate",
        [](const MechanicalSystem& s, const State& init, double t0, double t1, double step) {
            IntegrateOptions opts;
            opts.step = step;
            return integrate(s, init, {t0, t1}, opts);
        },
        py::arg("system"), py::arg("init"), py::arg("t0"), py::arg("t1"),
        py::arg("step") = 1e-4);
    m.def("jm_length", &jm_length, py::arg("system"), py::arg("trajectory"),
          py::arg("domain_tol") = kDefaultBoundaryTol);

    py::class_<BrakeEvent>(m, "BrakeEvent")
        .def_readonly("t_brake", &BrakeEvent::t_brake)
        .def_readonly("q_brake", &BrakeEvent::q_brake)
        .def_readonly("residual_speed", &BrakeEvent::residual_speed);
    m.def(
        "detect_brake",
        [](const MechanicalSystem& s, const Trajectory& t, double tol) {
            return detect_brake(s, t, tol);
        },
        py::arg("system"), py::arg("trajectory"), py::arg("brake_tol") = kDefaultBrakeTol);

    auto mod = m.def_submodule("model", "closed-form constant-force family");
    py::class_<model::ModelPoint>(mod, "ModelPoint")
        .def(py::init([](Vec x0, double y0) { return model::ModelPoint{std::move(x0), y0}; }),
             py::arg("x0"), py::arg("y0"));
    py::class_<model::ThrowParams>(mod, "ThrowParams")
        .def(py::init([](double theta, double g) { return model::ThrowParams{theta, g}; }),
             py::arg("theta"), py::arg("gravity") = 0.5);
    mod.def("ballistic_state", &model::ballistic_state);
    mod.def("critical_time", &model::critical_time);
    mod.def("envelope_point", &model::envelope_point);
    mod.def("min_height", &model::min_height);
    mod.def("gamma_jacobian", [](const model::ModelPoint& p, const model::ThrowParams& tp,
                                 double t) {
        auto j = model::gamma_jacobian(p, tp, t);
        return std::make_pair(mat_rows(j.m), j.determinant);
    });

    py::class_<FamilyMap>(m, "FamilyMap")
        .def_readonly("base", &FamilyMap::base)
        .def_readonly("down_axis", &FamilyMap::down_axis)
        .def_readonly("t_max", &FamilyMap::t_max);
    m.def(
        "make_family_map",
        [](const MechanicalSystem& s, const Vec& base, double t_max, double step) {
            IntegrateOptions opts;
            opts.step = step;
            return make_family_map(s, base, t_max, opts);
        },
        py::arg("system"), py::arg("base"), py::arg("t_max"), py::arg("step") = 1e-4);

    py::class_<ConjugateEvent>(m, "ConjugateEvent")
        .def_readonly("theta", &ConjugateEvent::theta)
        .def_readonly("t_star", &ConjugateEvent::t_star)
        .def_readonly("point", &ConjugateEvent::point)
        .def_readonly("kernel", &ConjugateEvent::kernel);
    m.def(
        "detect_conjugate",
        [](const FamilyMap& fam, double theta) -> std::optional<ConjugateEvent> {
            return detect_conjugate(fam, Vec{theta});
        },
        py::arg("family"), py::arg("theta"));
    m.def(
        "conjugate_locus",
        [](const FamilyMap& fam, double deg_min, double deg_max, std::size_t count) {
            ConjugateLocus locus =
                conjugate_locus(fam, planar_theta_grid(deg_min, deg_max, count));
            return locus.points();
        },
        py::arg("family"), py::arg("deg_min"), py::arg("deg_max"), py::arg("count"));

    py::class_<FoldReport>(m, "FoldReport")
        .def_readonly("singular_values", &FoldReport::singular_values)
        .def_readonly("kernel", &FoldReport::kernel)
        .def_readonly("transversality_angle_deg", &FoldReport::transversality_angle_deg)
        .def_readonly("det_derivative_along_kernel", &FoldReport::det_derivative_along_kernel)
        .def_readonly("fold_certified", &FoldReport::fold_certified)
        .def_readonly("degenerate", &FoldReport::degenerate);
    m.def("fold_check",
          [](const FamilyMap& fam, const ConjugateEvent& ev) { return fold_check(fam, ev); });

    py::class_<DownwardCone>(m, "DownwardCone")
        .def_readonly("aperture_deg", &DownwardCone::aperture_deg);
    m.def("downward_cone", [](const FamilyMap& fam) { return downward_cone(fam); });

    py::class_<SeifertChart>(m, "SeifertChart")
        .def_readonly("extent", &SeifertChart::extent)
        .def_readonly("height", &SeifertChart::height)
        .def("forward", &SeifertChart::forward, py::arg("x"), py::arg("y"))
        .def(
            "inverse",
            [](const SeifertChart& c, const Vec& q) {
                auto cp = c.inverse(q);
                return std::make_pair(cp.x, cp.y);
            },
            py::arg("q"));
    m.def(
        "build_chart",
        [](const MechanicalSystem& s, const Vec& q0, double extent, double height) {
            return build_chart(s, q0, extent, height);
        },
        py::arg("system"), py::arg("center"), py::arg("extent"), py::arg("height"));

    py::class_<PropertyReport>(m, "PropertyReport")
        .def_readonly("property", &PropertyReport::property)
        .def_readonly("pass_", &PropertyReport::pass)
        .def_readonly("measured", &PropertyReport::measured)
        .def_readonly("thresholds", &PropertyReport::thresholds);
    m.def("chart_metric_check", &chart_metric_check, py::arg("chart"),
          py::arg("y_samples") = 12, py::arg("cross_tol") = 1e-3);
    m.def("property1_check", &property1_check, py::arg("chart"), py::arg("heights"));

    py::class_<ScanReport>(m, "ScanReport")
        .def_readonly("entered", &ScanReport::entered)
        .def_readonly("skipped", &ScanReport::skipped)
        .def_readonly("pairs_found", &ScanReport::pairs_found)
        .def_readonly("max_pair_height", &ScanReport::max_pair_height)
        .def_readonly("all_entering_paired", &ScanReport::all_entering_paired);
    m.def(
        "conjugate_pair_scan",
        [](const SeifertChart& chart, double approach, std::size_t samples) {
            ScanOptions opts;
            opts.samples = samples;
            return conjugate_pair_scan(chart, approach, opts);
        },
        py::arg("chart"), py::arg("approach_dist"), py::arg("samples") = 60);
}
