#pragma once

#include <map>
#include <string>

#include "hillscope/conjugate.hpp"
#include "hillscope/dynamics.hpp"

namespace hillscope {

/// One brake orbit integrated from rest on the Hill boundary, sampled along
/// the cylinder height coordinate y = ((3/2) * d_JM)^(2/3). That choice makes
/// the pulled-back dy^2 coefficient exactly y and reproduces ambient height
/// in the constant-force case.
struct VerticalLine {
    double x = 0.0;
    Vec boundary;               ///< ambient boundary point (y = 0)
    std::vector<double> times;  ///< Newtonian time since release
    std::vector<double> ys;     ///< chart heights, ascending
    std::vector<State> states;
    std::vector<Vec> dq_dy;     ///< ambient derivative along the line

    Vec position(double y) const;
    Vec dposition_dy(double y) const;
    double time_at(double y) const;
};

struct ChartOptions {
    std::size_t nx = 41;        ///< boundary grid resolution across [-extent, extent]
    double step = 5e-5;         ///< brake-orbit integration step
    double boundary_tol = 1e-12;
    double newton_tol = 1e-12;  ///< inverse-map convergence
};

/// Cylinder coordinates near a regular Hill boundary point: x parameterizes
/// the boundary sheet, vertical lines are brake orbits, y = 0 is the boundary.
/// Both coordinates carry the (2 |grad V(q0)|)^(1/3) normalization, which
/// makes the pulled-back metric y dy^2 + y f(x,y) dx^2 with f(0,0) = 1 (and
/// the rescaling limit the g = 1/2 constant-force metric). Interpolation is
/// cubic along each brake orbit and linear across x. Planar systems only.
class SeifertChart {
public:
    MechanicalSystem system;
    Vec center;
    double extent = 0.0;
    double height = 0.0;
    Vec normal_in;              ///< unit grad f(q0): into the Hill region
    Vec tangent;                ///< unit boundary tangent at q0
    double x_scale = 1.0;       ///< chart x per tangent-plane length
    ChartOptions opts;
    std::vector<VerticalLine> lines;

    Vec forward(double x, double y) const;
    /// Columns (d/dx, d/dy) of the interpolated forward map.
    Mat jacobian(double x, double y) const;

    struct ChartPoint {
        double x = 0.0;
        double y = 0.0;
    };
    ChartPoint inverse(const Vec& q) const;
    ChartPoint inverse(const Vec& q, ChartPoint hint) const;

    /// Chart components of an ambient velocity at (x, y).
    Vec chart_velocity(double x, double y, const Vec& v_ambient) const;
    /// Angle to the vertical (brake) direction, degrees in [0, 90].
    static double angle_to_vertical_deg(const Vec& v_chart);

    double grad_v_norm_at_center() const;
};

SeifertChart build_chart(const MechanicalSystem& s, const Vec& q0, double extent, double height,
                         const ChartOptions& opts = {});

/// Builds one brake-orbit line at arbitrary x (used by checks that need
/// values off the chart grid, and by the chart builder itself).
VerticalLine integrate_vertical_line(const MechanicalSystem& s, const SeifertChart& chart,
                                     double x, double height, double step);

struct PropertyReport {
    int property = 0;
    bool pass = false;
    std::map<std::string, double> measured;
    std::map<std::string, double> thresholds;
    std::string note;
};

/// Pullback of the JM metric through the chart (property 2): dy^2 coefficient
/// equals y, cross terms vanish toward the center, dx^2 coefficient is
/// y * (1 + a x + b y + O(2)). Reports the fitted linear part.
PropertyReport chart_metric_check(const SeifertChart& chart, std::size_t y_samples = 12,
                                  double cross_tol = 1e-3);

/// Property 1: JM distance to the boundary scales as y^(3/2). Distances are
/// recomputed by quadrature along freshly integrated brake orbits.
PropertyReport property1_check(const SeifertChart& chart, const std::vector<double>& heights);

/// Geodesic transiting the cylinder, generated from its lowest point.
struct TransitSample {
    double x_vertex = 0.0;   ///< chart x of the lowest point
    double depth = 0.0;      ///< chart y of the lowest point
    double direction = 1.0;  ///< horizontal travel direction at the vertex
};

std::vector<TransitSample> default_transit_samples(double x_span, double depth_max);

/// Chart-coordinate track of a transit geodesic.
struct TransitTrack {
    TransitSample sample;
    Vec t;                   ///< Newtonian time, uniform steps
    std::vector<SeifertChart::ChartPoint> chart;
    std::vector<State> states;
    double y_min = 0.0;
    bool left_chart_sideways = false;
};

TransitTrack integrate_transit(const SeifertChart& chart, const TransitSample& sample,
                               double y_stop, double step = 5e-5);

/// Property 3: every geodesic entering the inner cylinder B (height eps_B)
/// leaves the outer cylinder A (height eps_A) through its roof, at an angle
/// to the vertical below delta_deg at both roof crossings.
PropertyReport property3_check(const SeifertChart& chart, double eps_A, double eps_B,
                               double delta_deg, const std::vector<TransitSample>& samples,
                               double inner_half_width = 0.0);

/// Property 4: the height y(t) of a transiting geodesic is strictly convex in
/// Newtonian time with a unique interior minimum.
PropertyReport property4_check(const SeifertChart& chart,
                               const std::vector<TransitSample>& samples);

/// Property 5: residence time below height h is at most C sqrt(h) with
/// C = safety * 2 sqrt(2) / |grad V(q0)|, and scales as sqrt(h).
PropertyReport property5_check(const SeifertChart& chart, const std::vector<double>& h_values,
                               const std::vector<TransitSample>& samples,
                               double safety = 1.05);

struct RescaleReport {
    std::vector<double> eps;
    std::vector<double> deviation;
    std::vector<double> ratio;   ///< deviation / eps
    bool pass = false;           ///< ratios bounded within ratio_spread
    double ratio_spread = 0.0;   ///< max ratio / min ratio
};

/// Maps geodesics into rescaled chart coordinates (x, y) -> (x/eps, y/eps)
/// and measures the deviation from the matching constant-force parabola with
/// the same rescaled initial condition. Deviations must be O(eps).
RescaleReport rescale_compare(const SeifertChart& chart, const std::vector<double>& eps_list,
                              double entry_angle_deg = 30.0, double max_spread = 3.0);

struct ConjugatePair {
    Vec entry_point;             ///< ambient roof-entry position
    Vec conjugate_point;
    double entry_height = 0.0;   ///< chart heights
    double conjugate_height = 0.0;
    double entry_angle_deg = 0.0;
    double min_approach = 0.0;   ///< chart distance of the transit to the center
};

struct ScanReport {
    std::size_t samples = 0;
    std::size_t entered = 0;     ///< transits passing within approach_dist
    std::size_t skipped = 0;     ///< transits that missed the cylinder
    std::size_t pairs_found = 0;
    double max_pair_height = 0.0;
    bool all_entering_paired = false;
    std::vector<ConjugatePair> pairs;
};

struct ScanOptions {
    double roof_factor = 2.4;    ///< roof height = roof_factor * approach_dist
    std::size_t samples = 60;
    bool include_misses = true;  ///< add deliberate misses to exercise skipping
    double step = 5e-5;
};

/// For every sampled geodesic passing within approach_dist of the chart
/// center: restart a direction family at its roof-entry point (the actual
/// entry direction is in the grid) and report the conjugate pair, the second
/// point strictly lower than the first.
ScanReport conjugate_pair_scan(const SeifertChart& chart, double approach_dist,
                               const ScanOptions& opts = {});

}  // namespace hillscope
