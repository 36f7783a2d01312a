#include "cpschwarz/band.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

#include "cpschwarz/errors.hpp"

namespace cps {

double tube_radius(int dim, int degree, double h) {
    if (dim < 1 || degree < 1) throw ConfigError("tube radius needs dim >= 1 and degree >= 1");
    if (h < 0.0) throw ConfigError("tube radius needs h >= 0");
    double p1 = degree + 1.0, p3 = degree + 3.0;
    return 0.5 * h * std::sqrt((dim - 1) * p1 * p1 + p3 * p3);
}

AxisStencil interp_axis_stencil(double coord, double h, int degree) {
    if (degree < 1 || degree > kMaxDegree)
        throw ConfigError("interpolation degree out of range");
    if (!(h > 0.0)) throw ConfigError("grid spacing must be positive");

    double g = coord / h;
    double cell = std::floor(g);
    if (cell == g) cell -= 1.0;  // tie between cells resolves to the lower one
    AxisStencil st;
    st.base = static_cast<int>(cell) - degree / 2;

    // The hit test must run on xi, not on g: subtracting the base can round
    // a near-node query onto the node exactly, which would divide by zero
    // below.
    double xi = g - st.base;
    double xr = std::nearbyint(xi);
    if (xi == xr && xr >= 0.0 && xr <= static_cast<double>(degree)) {
        st.w[static_cast<int>(xr)] = 1.0;  // exact Kronecker row
        return st;
    }

    // Barycentric weights for equispaced nodes: b_j = (-1)^j C(p, j).
    double bj = 1.0;
    double total = 0.0;
    for (int j = 0; j <= degree; ++j) {
        double wj = bj / (xi - j);
        st.w[j] = wj;
        total += wj;
        bj *= -static_cast<double>(degree - j) / (j + 1);
    }
    for (int j = 0; j <= degree; ++j) st.w[j] /= total;
    return st;
}

namespace {

struct PointRec {
    Vec x;
    Vec cp;
    double s = 0.0;
    double dist = 0.0;
    bool in_band = false;
    bool ambiguous = false;  ///< equidistant from several curve branches
};

Vec grid_to_point(const GridIndex& g, double h) {
    Vec x(g.dim);
    for (int k = 0; k < g.dim; ++k) x[k] = h * g.i[k];
    return x;
}

}  // namespace

std::optional<int> Band::ordinal(const GridIndex& g) const {
    auto it = lookup_.find(g);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

Band build_band(const Curve& curve, double h, int degree) {
    if (!(h > 0.0)) throw ConfigError("band spacing must be positive");
    if (degree < 1 || degree > kMaxDegree) throw ConfigError("interpolation degree out of range");
    const int d = curve.dim();

    const double r = tube_radius(d, degree, h);
    const double r0 = curve.min_curvature_radius();
    if (r >= r0)
        throw TubeTooWide("tube radius " + std::to_string(r) +
                          " reaches the curve's minimal curvature radius " + std::to_string(r0) +
                          "; decrease h or the interpolation degree");

    // Interpolation stencils anchored on the curve stay within this distance,
    // so growing the band to reach covers every stencil of an on-curve query.
    const double stencil_span = ((degree + 1) / 2 + (degree % 2 == 0 ? 1 : 0)) * h;
    const double reach = std::max(r, stencil_span * std::sqrt(static_cast<double>(d)));
    // The interpolation halo sits one axis step beyond the grown band, and
    // every one of its points needs a single-valued projection.
    if (reach + h >= r0)
        throw TubeTooWide("stencil reach " + std::to_string(reach) + " plus one grid step " +
                          "exceeds the curve's minimal curvature radius " + std::to_string(r0));
    const double expand_r = reach + std::sqrt(static_cast<double>(d)) * h;

    std::unordered_map<GridIndex, PointRec, GridIndexHash> visited;
    std::deque<GridIndex> queue;

    auto visit = [&](const GridIndex& g) -> PointRec& {
        auto it = visited.find(g);
        if (it != visited.end()) return it->second;
        PointRec rec;
        rec.x = grid_to_point(g, h);
        try {
            ClosestPoint cp = curve.closest_point(rec.x);
            rec.cp = cp.point;
            rec.s = cp.s;
            rec.dist = cp.dist;
        } catch (const NonUniqueClosestPoint& e) {
            // Equidistant from several branches: the curvature guard above
            // cannot see this (it is a global property of the curve), so the
            // scan itself detects the medial axis.  Points the band needs
            // make the tube invalid; anything further out is just skipped.
            if (e.distance <= reach)
                throw TubeTooWide("tube contains a point equidistant from several curve "
                                  "branches at distance " +
                                  std::to_string(e.distance) + "; decrease h");
            rec.dist = e.distance;
            rec.ambiguous = true;
        }
        return visited.emplace(g, std::move(rec)).first->second;
    };

    const int nseed = 4096;
    for (int j = 0; j < nseed; ++j) {
        Vec p = curve.position(curve.period() * j / nseed);
        GridIndex base;
        base.dim = d;
        for (int k = 0; k < d; ++k) base.i[k] = static_cast<std::int32_t>(std::floor(p[k] / h));
        for (int corner = 0; corner < (1 << d); ++corner) {
            GridIndex g = base;
            for (int k = 0; k < d; ++k) g.i[k] += (corner >> k) & 1;
            queue.push_back(g);
        }
    }

    while (!queue.empty()) {
        GridIndex g = queue.front();
        queue.pop_front();
        if (visited.count(g)) continue;
        PointRec& rec = visit(g);
        if (rec.dist <= expand_r) {
            for (int k = 0; k < d; ++k) {
                for (int dir : {-1, +1}) {
                    GridIndex q = g;
                    q.i[k] += dir;
                    if (!visited.count(q)) queue.push_back(q);
                }
            }
        }
    }

    for (auto& [g, rec] : visited) rec.in_band = !rec.ambiguous && rec.dist <= reach;

    std::vector<std::pair<GridIndex, const PointRec*>> band_list, halo_list;
    for (auto& [g, rec] : visited) {
        if (rec.in_band) band_list.emplace_back(g, &rec);
    }
    if (band_list.empty()) throw ConfigError("band is empty; h too coarse for this curve");

    {
        // Pointers into the map stay valid across rehashes, so collecting
        // them while visit() inserts new halo records is safe.
        std::unordered_map<GridIndex, const PointRec*, GridIndexHash> halo;
        for (auto& [g, rec] : band_list) {
            for (int k = 0; k < d; ++k) {
                for (int dir : {-1, +1}) {
                    GridIndex q = g;
                    q.i[k] += dir;
                    const PointRec& nb = visit(q);
                    if (nb.ambiguous)
                        throw TubeTooWide(
                            "a stencil neighbor of the tube is equidistant from several "
                            "curve branches at distance " +
                            std::to_string(nb.dist) + "; decrease h");
                    if (!nb.in_band) halo.emplace(q, &nb);
                }
            }
        }
        halo_list.assign(halo.begin(), halo.end());
    }

    auto by_arclength = [](const std::pair<GridIndex, const PointRec*>& a,
                           const std::pair<GridIndex, const PointRec*>& b) {
        if (a.second->s != b.second->s) return a.second->s < b.second->s;
        return a.first.lex_less(b.first);
    };
    std::sort(band_list.begin(), band_list.end(), by_arclength);
    std::sort(halo_list.begin(), halo_list.end(), by_arclength);

    Band band;
    band.dim_ = d;
    band.h_ = h;
    band.degree_ = degree;
    band.radius_ = r;
    band.n_band_ = static_cast<int>(band_list.size());
    band.points_.reserve(band_list.size() + halo_list.size());
    auto append = [&](const std::pair<GridIndex, const PointRec*>& e, BandPointKind kind) {
        BandPoint p;
        p.index = e.first;
        p.x = e.second->x;
        p.cp = e.second->cp;
        p.s = e.second->s;
        p.dist = e.second->dist;
        p.kind = kind;
        band.lookup_.emplace(p.index, static_cast<int>(band.points_.size()));
        band.points_.push_back(std::move(p));
    };
    for (const auto& e : band_list)
        append(e, e.second->dist <= r ? BandPointKind::Core : BandPointKind::Grown);
    for (const auto& e : halo_list) append(e, BandPointKind::Halo);
    return band;
}

namespace {

// Iterates the (degree+1)^d tensor stencil of a query point, calling
// emit(grid_index, weight) for every node with a nonzero weight.
template <typename Emit>
void for_tensor_stencil(const Vec& q, int dim, double h, int degree, Emit&& emit) {
    std::array<AxisStencil, kMaxDim> ax;
    for (int k = 0; k < dim; ++k) ax[k] = interp_axis_stencil(q[k], h, degree);
    std::array<int, kMaxDim> c{};
    while (true) {
        double w = 1.0;
        GridIndex g;
        g.dim = dim;
        for (int k = 0; k < dim; ++k) {
            w *= ax[k].w[c[k]];
            g.i[k] = ax[k].base + c[k];
        }
        if (w != 0.0) emit(g, w);
        int k = 0;
        while (k < dim && ++c[k] > degree) c[k++] = 0;
        if (k == dim) break;
    }
}

}  // namespace

SparseMatrix extension_matrix(const Band& band, const Curve& curve) {
    if (curve.dim() != band.dim())
        throw DimensionMismatch("extension_matrix: curve and band dimensions differ");
    std::vector<Triplet> ts;
    ts.reserve(static_cast<std::size_t>(band.total_size()) *
               static_cast<std::size_t>(std::pow(band.degree() + 1, band.dim())));
    for (int i = 0; i < band.total_size(); ++i) {
        const BandPoint& p = band.point(i);
        for_tensor_stencil(p.cp, band.dim(), band.spacing(), band.degree(),
                           [&](const GridIndex& g, double w) {
                               auto ord = band.ordinal(g);
                               if (!ord || *ord >= band.size())
                                   throw Error("internal: interpolation stencil node missing "
                                               "from band");
                               ts.push_back({i, *ord, w});
                           });
    }
    return SparseMatrix::from_triplets(band.total_size(), band.size(), std::move(ts));
}

SparseMatrix laplacian(const Band& band) {
    const int d = band.dim();
    const double ih2 = 1.0 / (band.spacing() * band.spacing());
    std::vector<Triplet> ts;
    ts.reserve(static_cast<std::size_t>(band.size()) * (2 * d + 1));
    for (int i = 0; i < band.size(); ++i) {
        ts.push_back({i, i, -2.0 * d * ih2});
        for (int k = 0; k < d; ++k) {
            for (int dir : {-1, +1}) {
                GridIndex q = band.point(i).index;
                q.i[k] += dir;
                auto ord = band.ordinal(q);
                if (!ord) throw Error("internal: Laplacian neighbor missing from band/halo");
                ts.push_back({i, *ord, ih2});
            }
        }
    }
    return SparseMatrix::from_triplets(band.size(), band.total_size(), std::move(ts));
}

SparseMatrix assemble_helmholtz_parts(double c, double penalty, const SparseMatrix& extension,
                                      const SparseMatrix& lap) {
    const int n = extension.cols();
    if (lap.rows() != n || lap.cols() != extension.rows())
        throw DimensionMismatch("assemble: extension and Laplacian shapes are inconsistent");
    if (penalty < 0.0) throw ConfigError("assemble: penalty must be nonnegative");
    SparseMatrix lap_e = spmm(lap, extension);
    SparseMatrix combined = add_scaled(1.0, lap_e, penalty, extension.top_rows(n));
    return add_scaled(c + penalty, SparseMatrix::identity(n), -1.0, combined);
}

SparseMatrix assemble_helmholtz(const Band& band, double c, const SparseMatrix& extension,
                                const SparseMatrix& lap) {
    if (!(c > 0.0)) throw ConfigError("assemble: reaction coefficient c must be positive");
    if (extension.rows() != band.total_size() || extension.cols() != band.size())
        throw DimensionMismatch("assemble: extension shape does not match band");
    double h = band.spacing();
    double penalty = 2.0 * band.dim() / (h * h);
    return assemble_helmholtz_parts(c, penalty, extension, lap);
}

std::vector<double> assemble_rhs(const Band& band, const std::function<double(double)>& f) {
    if (!f) throw ConfigError("assemble_rhs: source function must be set");
    std::vector<double> b(band.size());
    for (int i = 0; i < band.size(); ++i) b[i] = f(band.point(i).s);
    return b;
}

std::vector<double> restrict_to_curve(const Band& band, const Curve& curve,
                                      std::span<const double> u,
                                      std::span<const double> arclengths) {
    if (static_cast<int>(u.size()) != band.size())
        throw DimensionMismatch("restrict_to_curve: solution length does not match band");
    if (curve.dim() != band.dim())
        throw DimensionMismatch("restrict_to_curve: curve and band dimensions differ");
    std::vector<double> out;
    out.reserve(arclengths.size());
    for (double s : arclengths) {
        Vec q = curve.point_at_arclength(s);
        double val = 0.0;
        for_tensor_stencil(q, band.dim(), band.spacing(), band.degree(),
                           [&](const GridIndex& g, double w) {
                               auto ord = band.ordinal(g);
                               if (!ord || *ord >= band.size())
                                   throw Error("restriction stencil leaves the band; "
                                               "the query point is outside the tube");
                               val += w * u[*ord];
                           });
        out.push_back(val);
    }
    return out;
}

}  // namespace cps
