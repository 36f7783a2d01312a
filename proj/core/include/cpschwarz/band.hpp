#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "cpschwarz/curve.hpp"
#include "cpschwarz/geometry.hpp"
#include "cpschwarz/sparse.hpp"

namespace cps {

/// Radius of the computational tube for grid spacing h and interpolation
/// degree p in dimension d: sqrt((d-1)(p+1)^2 + (p+3)^2) * h / 2.
double tube_radius(int dim, int degree, double h);

enum class BandPointKind : unsigned char {
    Core,   ///< within the tube radius of the curve
    Grown,  ///< added so every interpolation stencil of an unknown is resolvable
    Halo    ///< carries only curve data and an interpolation row, not an unknown
};

struct BandPoint {
    GridIndex index;
    Vec x;             ///< grid coordinates, x = h * index
    Vec cp;            ///< closest curve point
    double s = 0.0;    ///< arclength of cp
    double dist = 0.0; ///< |x - cp|
    BandPointKind kind = BandPointKind::Core;
};

inline constexpr int kMaxDegree = 9;

/// One interpolation stencil along a single axis: nodes base..base+degree in
/// grid units with barycentric Lagrange weights that sum to exactly 1.
struct AxisStencil {
    int base = 0;
    std::array<double, kMaxDegree + 1> w{};
};

/// Equispaced Lagrange stencil containing coord/h, placed so the query lies
/// in the central cell (ties between cells resolve toward the lower index).
AxisStencil interp_axis_stencil(double coord, double h, int degree);

/// The discrete tube around a curve.  Points are ordered by the arclength of
/// their closest curve point; the first size() entries are unknowns, the
/// remaining ones the interpolation halo.
class Band {
public:
    int dim() const { return dim_; }
    double spacing() const { return h_; }
    int degree() const { return degree_; }
    double radius() const { return radius_; }

    /// Number of unknowns (core + grown points).
    int size() const { return n_band_; }
    /// Unknowns plus halo points.
    int total_size() const { return static_cast<int>(points_.size()); }

    const std::vector<BandPoint>& points() const { return points_; }
    const BandPoint& point(int ordinal) const { return points_[ordinal]; }

    std::optional<int> ordinal(const GridIndex& g) const;

private:
    friend Band build_band(const Curve&, double, int);

    int dim_ = 0;
    double h_ = 0.0;
    int degree_ = 0;
    double radius_ = 0.0;
    int n_band_ = 0;
    std::vector<BandPoint> points_;
    std::unordered_map<GridIndex, int, GridIndexHash> lookup_;
};

/// Flood-fills the tube {x : dist(x, curve) <= tube_radius} outward from the
/// curve, then closes it so every unknown referenced through an
/// interpolation stencil is itself an unknown.  Throws TubeTooWide when the
/// radius reaches the curve's minimal radius of curvature.
Band build_band(const Curve& curve, double h, int degree);

/// Interpolation (extension) operator: total_size x size rows of stencil
/// weights; row i evaluates a grid function at cp of point i.
SparseMatrix extension_matrix(const Band& band, const Curve& curve);

/// Second-order centered Laplacian: size x total_size, one 2d+1 point cross
/// stencil per unknown.
SparseMatrix laplacian(const Band& band);

/// A = c I - Lap E + (2d/h^2) (I - E_band) over the band unknowns.
SparseMatrix assemble_helmholtz(const Band& band, double c, const SparseMatrix& extension,
                                const SparseMatrix& lap);

/// Same combination from explicit parts; penalty is the 2d/h^2 factor.
SparseMatrix assemble_helmholtz_parts(double c, double penalty, const SparseMatrix& extension,
                                      const SparseMatrix& lap);

/// Samples f at the arclength of each point's closest curve point.
std::vector<double> assemble_rhs(const Band& band, const std::function<double(double)>& f);

/// Interpolates a band function at curve points given by arclengths.
std::vector<double> restrict_to_curve(const Band& band, const Curve& curve,
                                      std::span<const double> u,
                                      std::span<const double> arclengths);

}  // namespace cps
