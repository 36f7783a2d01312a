#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cpschwarz/geometry.hpp"

namespace cps {

/// Result of projecting an ambient point onto the curve.
struct ClosestPoint {
    Vec point;         ///< cp(x), the nearest curve point
    double t = 0.0;    ///< parameter of the nearest point, in [0, period)
    double s = 0.0;    ///< arclength of the nearest point, in [0, length)
    double dist = 0.0; ///< |x - cp(x)|
    /// True when the query point lies strictly within the minimal radius of
    /// curvature, where the projection is provably unique.  Outside that
    /// reach the returned point is still the numerical global minimizer.
    bool inside_reach = true;
};

/// Smooth closed curve in R^d given by a periodic parametrization.
///
/// Construction validates closure and builds an arclength table; afterwards
/// the object is immutable and all queries are const and thread-safe.
/// Derivatives are taken from the supplied callbacks when present and from
/// central differences otherwise.
class Curve {
public:
    using Map = std::function<Vec(double)>;

    Curve(int dim, double period, Map position, Map velocity = nullptr,
          Map acceleration = nullptr, std::string name = "custom");
    ~Curve();

    Curve(Curve&&) noexcept;
    Curve& operator=(Curve&&) noexcept;
    Curve(const Curve&) = delete;
    Curve& operator=(const Curve&) = delete;

    /// Unit-speed circle of the given radius about the origin in R^2.
    static Curve circle(double radius = 1.0);

    /// Boundary of a Mobius strip of the given width whose center circle has
    /// the given radius; a closed non-planar curve in R^3 traversed over one
    /// parameter period of 4*pi.
    static Curve mobius_boundary(double width = 1.0, double center_radius = 1.0);

    int dim() const { return dim_; }
    double period() const { return period_; }
    const std::string& name() const { return name_; }

    /// Total arclength L.
    double length() const;

    /// Minimal radius of curvature over the curve (1 / max curvature).
    double min_curvature_radius() const;

    Vec position(double t) const;
    Vec velocity(double t) const;
    Vec acceleration(double t) const;

    /// Arclength s(t) measured from parameter 0, wrapped into [0, L).
    double arclength_at(double t) const;

    /// Inverse of arclength_at; s is wrapped into [0, L).
    double param_at_arclength(double s) const;

    Vec point_at_arclength(double s) const;

    /// Global closest-point query.  Throws NonUniqueClosestPoint when two
    /// parameter-distant branches of the curve are equidistant from x to
    /// within 1e-9.
    ClosestPoint closest_point(const Vec& x) const;

private:
    struct Tables;

    double speed(double t) const;
    double segment_length_adaptive(double a, double b, double fa, double fm, double fb,
                                   double whole, double tol, int depth) const;
    double arclength_unwrapped(double tw) const;
    double refine_local_min(const Vec& x, double lo, double hi) const;

    int dim_;
    double period_;
    Map pos_, vel_, acc_;
    std::string name_;
    double fd_step_;
    std::unique_ptr<Tables> tab_;
};

/// Parses a curve name: "circle", "circle:R=<radius>", "mobius-boundary".
/// Throws ConfigError mentioning "unknown curve" for anything else.
Curve make_curve(std::string_view spec);

}  // namespace cps
