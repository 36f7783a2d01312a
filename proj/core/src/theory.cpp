#include "cpschwarz/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cpschwarz/errors.hpp"
#include "cpschwarz/geometry.hpp"
#include "cpschwarz/sparse.hpp"

namespace cps::theory {

namespace {

// sinh(x)/sinh(y) for 0 <= x <= y without overflow: all exponents stay <= 0.
// The product form keeps the result positive down to e^(x-y) ~ 1e-300;
// differencing expm1 terms instead would absorb values below epsilon.
double sinh_ratio(double x, double y) {
    return std::exp(x - y) * (-std::expm1(-2.0 * x)) / (-std::expm1(-2.0 * y));
}

// cosh(x)/cosh(y) for 0 <= x <= y.
double cosh_ratio(double x, double y) {
    double num = std::exp(x - y) + std::exp(-x - y);
    double den = 1.0 + std::exp(-2.0 * y);
    return num / den;
}

}  // namespace

void SchwarzConfig1D::validate() const {
    if (!(c > 0.0)) throw ConfigError("config: c must be positive");
    if (!(length > 0.0)) throw ConfigError("config: interval length must be positive");
    // check the overlaps before the interval ordering: a vanishing overlap
    // also breaks the ordering, and deserves the more specific diagnosis
    double o1 = delta1(), o2 = delta2();
    if (!(o1 > 0.0) || !(o2 > 0.0)) throw InvalidOverlap("config: overlaps must be positive");
    if (!(a1 < 0.0 && 0.0 < a2 && a2 < b1 && b1 < length && length < b2))
        throw ConfigError("config: subdomain intervals must satisfy "
                          "a1 < 0 < a2 < b1 < L < b2");
    if (!(o1 + o2 < std::min(l1(), l2())))
        throw InvalidOverlap("config: total overlap " + std::to_string(o1 + o2) +
                             " must stay below the shorter subdomain length " +
                             std::to_string(std::min(l1(), l2())));
}

SchwarzConfig1D SchwarzConfig1D::from_split(double c, double length, double first_fraction,
                                            double overlap1, double overlap2) {
    if (!(first_fraction > 0.0 && first_fraction < 1.0))
        throw ConfigError("config: split fraction must lie in (0, 1)");
    double m = first_fraction * length;
    SchwarzConfig1D cfg;
    cfg.c = c;
    cfg.length = length;
    cfg.a1 = -0.5 * overlap2;
    cfg.b1 = m + 0.5 * overlap1;
    cfg.a2 = m - 0.5 * overlap1;
    cfg.b2 = length + 0.5 * overlap2;
    cfg.validate();
    return cfg;
}

SchwarzConfig1D SchwarzConfig1D::equal_split(double c, double length, double overlap) {
    return from_split(c, length, 0.5, overlap, overlap);
}

EntrySet entries(double c, double l, double delta_prev, double delta_self) {
    if (!(c > 0.0)) throw ConfigError("entries: c must be positive");
    if (!(l > 0.0)) throw ConfigError("entries: subdomain length must be positive");
    if (delta_prev < 0.0 || delta_prev > l || delta_self < 0.0 || delta_self > l)
        throw InvalidOverlap("entries: overlaps must lie in [0, l]");
    double a = std::sqrt(c);
    if (a * l > 700.0)
        throw NumericalError("entries: sqrt(c) * l exceeds 700; coefficients underflow");
    EntrySet e;
    e.p = sinh_ratio(a * (l - delta_prev), a * l);
    e.r = sinh_ratio(a * delta_prev, a * l);
    e.q = sinh_ratio(a * (l - delta_self), a * l);
    e.s = sinh_ratio(a * delta_self, a * l);
    return e;
}

IterationMatrix iteration_matrix(const SchwarzConfig1D& cfg) {
    cfg.validate();
    IterationMatrix m;
    m.first = entries(cfg.c, cfg.l1(), cfg.delta2(), cfg.delta1());
    m.second = entries(cfg.c, cfg.l2(), cfg.delta1(), cfg.delta2());
    m.m[0][2] = m.first.r;
    m.m[0][3] = m.first.p;
    m.m[1][2] = m.first.q;
    m.m[1][3] = m.first.s;
    m.m[2][0] = m.second.r;
    m.m[2][1] = m.second.p;
    m.m[3][0] = m.second.q;
    m.m[3][1] = m.second.s;
    return m;
}

double inf_norm(const IterationMatrix& m) {
    double best = 0.0;
    for (int i = 0; i < 4; ++i) {
        double row = 0.0;
        for (int j = 0; j < 4; ++j) row += std::abs(m.m[i][j]);
        best = std::max(best, row);
    }
    return best;
}

double spectral_radius(const IterationMatrix& m) {
    // With zero diagonal blocks, M^2 = diag(B C, C B), so rho(M)^2 = rho(BC).
    double b00 = m.m[0][2], b01 = m.m[0][3], b10 = m.m[1][2], b11 = m.m[1][3];
    double c00 = m.m[2][0], c01 = m.m[2][1], c10 = m.m[3][0], c11 = m.m[3][1];
    double d00 = b00 * c00 + b01 * c10;
    double d01 = b00 * c01 + b01 * c11;
    double d10 = b10 * c00 + b11 * c10;
    double d11 = b10 * c01 + b11 * c11;
    double tr = d00 + d11;
    // (d00 - d11)^2 + 4 d01 d10 equals tr^2 - 4 det but does not cancel when
    // the eigenvalues nearly coincide; the off-diagonal product is
    // nonnegative here, so the spectrum is real.
    double disc = (d00 - d11) * (d00 - d11) + 4.0 * (d01 * d10);
    double rho2;
    if (disc >= 0.0) {
        double sq = std::sqrt(disc);
        rho2 = std::max(std::abs(0.5 * (tr + sq)), std::abs(0.5 * (tr - sq)));
    } else {
        rho2 = std::sqrt(d00 * d11 - d01 * d10);  // complex pair, |lambda| = sqrt(det)
    }
    return std::sqrt(std::max(rho2, 0.0));
}

double kappa_bound(const SchwarzConfig1D& cfg) {
    double n = inf_norm(iteration_matrix(cfg));
    return n * n;
}

double equal_sized_kappa(double c, double length, double overlap) {
    if (!(c > 0.0)) throw ConfigError("equal_sized_kappa: c must be positive");
    if (!(length > 0.0)) throw ConfigError("equal_sized_kappa: length must be positive");
    if (!(overlap > 0.0 && overlap < 0.5 * length))
        throw InvalidOverlap("equal_sized_kappa: overlap must lie in (0, L/2)");
    double a = std::sqrt(c);
    double l = 0.5 * length + overlap;
    if (a * l > 700.0)
        throw NumericalError("equal_sized_kappa: sqrt(c) * l exceeds 700");
    double val = cosh_ratio(a * (0.5 * l - overlap), a * 0.5 * l);
    return val * val;
}

double corollary_printed_kappa(double c, double length, double delta) {
    if (!(c > 0.0)) throw ConfigError("corollary_printed_kappa: c must be positive");
    if (!(length > 0.0)) throw ConfigError("corollary_printed_kappa: length must be positive");
    if (!(delta > 0.0 && delta < 0.5 * length))
        throw InvalidOverlap("corollary_printed_kappa: delta must lie in (0, L/2)");
    double a = std::sqrt(c);
    if (a * (0.5 * length + delta) > 700.0)
        throw NumericalError("corollary_printed_kappa: sqrt(c) * L exceeds 700");
    // (e^{aL/2} + e^{ad}) / (1 + e^{a(L/2+d)}) rewritten through cosh.
    double val = cosh_ratio(0.5 * a * (0.5 * length - delta), 0.5 * a * (0.5 * length + delta));
    return val * val;
}

double analytic_error_solve(double c, double a, double b, double alpha, double beta, double s) {
    if (!(c > 0.0)) throw ConfigError("analytic_error_solve: c must be positive");
    if (!(b > a)) throw ConfigError("analytic_error_solve: need b > a");
    if (s < a || s > b) throw ConfigError("analytic_error_solve: s must lie in [a, b]");
    double rc = std::sqrt(c);
    return alpha * sinh_ratio(rc * (b - s), rc * (b - a)) +
           beta * sinh_ratio(rc * (s - a), rc * (b - a));
}

std::vector<std::array<double, 4>> simulate_error_recursion(const SchwarzConfig1D& cfg,
                                                            const std::array<double, 4>& eps0,
                                                            int steps) {
    cfg.validate();
    if (steps < 0) throw ConfigError("simulate_error_recursion: steps must be >= 0");
    std::vector<std::array<double, 4>> out;
    out.reserve(steps + 1);
    out.push_back(eps0);
    std::array<double, 4> e = eps0;
    for (int n = 0; n < steps; ++n) {
        // Subdomain 1 solves on [a1, b1] with ends from subdomain 2's trace,
        // subdomain 2 on [a2, b2] with ends from subdomain 1's, both reading
        // the previous state.
        std::array<double, 4> w;
        w[0] = analytic_error_solve(cfg.c, cfg.a1, cfg.b1, e[3], e[2], cfg.b2 - cfg.length);
        w[1] = analytic_error_solve(cfg.c, cfg.a1, cfg.b1, e[3], e[2], cfg.a2);
        w[2] = analytic_error_solve(cfg.c, cfg.a2, cfg.b2, e[1], e[0], cfg.b1);
        w[3] = analytic_error_solve(cfg.c, cfg.a2, cfg.b2, e[1], e[0], cfg.a1 + cfg.length);
        e = w;
        out.push_back(e);
    }
    return out;
}

namespace {

// Circular interval membership helpers with a small symmetric fuzz so grid
// nodes that land exactly on an endpoint classify predictably.
bool in_closed_mod(double s, double a, double b, double period, double fuzz) {
    double w = wrap_period(s - a + fuzz, period);
    return w <= (b - a) + 2.0 * fuzz;
}

bool in_half_open_mod(double s, double a, double b, double period, double fuzz) {
    double w = wrap_period(s - a + fuzz, period);
    return w < (b - a) + fuzz;
}

}  // namespace

Ras1dResult reference_ras_1d(double c, double length, const std::function<double(double)>& f,
                             const SchwarzConfig1D& cfg, double h, std::span<const double> u0,
                             int iterations) {
    if (!f) throw ConfigError("reference_ras_1d: source function must be set");
    cfg.validate();
    if (std::abs(c - cfg.c) > 1e-12 * std::max(1.0, std::abs(c)) ||
        std::abs(length - cfg.length) > 1e-12 * length)
        throw ConfigError("reference_ras_1d: c/length disagree with the interval config");
    if (!(h > 0.0)) throw ConfigError("reference_ras_1d: h must be positive");
    if (iterations < 0) throw ConfigError("reference_ras_1d: iterations must be >= 0");

    const int n = static_cast<int>(std::llround(length / h));
    if (n < 8) throw ConfigError("reference_ras_1d: grid too coarse");
    const double he = length / n;
    const double fuzz = 1e-3 * he;

    Ras1dResult out;
    out.grid.resize(n);
    for (int k = 0; k < n; ++k) out.grid[k] = he * k;

    const double ih2 = 1.0 / (he * he);
    std::vector<Triplet> ts;
    ts.reserve(3 * n);
    for (int k = 0; k < n; ++k) {
        ts.push_back({k, k, c + 2.0 * ih2});
        ts.push_back({k, (k + 1) % n, -ih2});
        ts.push_back({k, (k + n - 1) % n, -ih2});
    }
    SparseMatrix a = SparseMatrix::from_triplets(n, n, std::move(ts));
    std::vector<double> rhs(n);
    for (int k = 0; k < n; ++k) rhs[k] = f(out.grid[k]);
    SparseFactor full(a);
    out.u_single = full.solve_refined(a, rhs, 1e-13);
    // Push the reference past the cond(A)*eps forward error of a single
    // factorized solve; otherwise the deep error history floors on the
    // reference rather than on the iteration.
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<double> res = residual(a, out.u_single, rhs);
        std::vector<double> dx = full.solve(res);
        for (int k = 0; k < n; ++k) out.u_single[k] += dx[k];
    }

    struct Local {
        std::vector<int> nodes;        // global node ids, members of the subdomain
        std::vector<char> is_boundary; // per member
        SparseMatrix mat;
        SparseFactor factor;
        Local(std::vector<int> nd, std::vector<char> bd, SparseMatrix m, SparseFactor fc)
            : nodes(std::move(nd)), is_boundary(std::move(bd)), mat(std::move(m)),
              factor(std::move(fc)) {}
    };
    std::vector<Local> locals;
    std::vector<int> owner(n, -1);

    const double m1 = 0.5 * (cfg.a2 + cfg.b1);
    const double m0 = 0.5 * (cfg.a1 + cfg.b2 - cfg.length);
    for (int j = 0; j < 2; ++j) {
        double lo = j == 0 ? cfg.a1 : cfg.a2;
        double hi = j == 0 ? cfg.b1 : cfg.b2;
        std::vector<int> nodes;
        for (int k = 0; k < n; ++k)
            if (in_closed_mod(out.grid[k], lo, hi, length, fuzz)) nodes.push_back(k);
        if (nodes.size() < 3) throw EmptySubdomain("reference_ras_1d: subdomain has no interior");
        // order members along the subdomain so its ends are the boundary
        std::sort(nodes.begin(), nodes.end(), [&](int p, int q) {
            return wrap_period(out.grid[p] - lo + fuzz, length) <
                   wrap_period(out.grid[q] - lo + fuzz, length);
        });
        std::vector<char> bd(nodes.size(), 0);
        bd.front() = 1;
        bd.back() = 1;

        std::vector<int> local_of(n, -1);
        for (std::size_t i = 0; i < nodes.size(); ++i) local_of[nodes[i]] = static_cast<int>(i);
        std::vector<Triplet> lts;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            int k = nodes[i];
            if (bd[i]) {
                lts.push_back({static_cast<int>(i), static_cast<int>(i), 1.0});
                continue;
            }
            lts.push_back({static_cast<int>(i), static_cast<int>(i), c + 2.0 * ih2});
            for (int nb : {(k + 1) % n, (k + n - 1) % n}) {
                if (local_of[nb] < 0)
                    throw Error("internal: interior 1d node is missing a member neighbor");
                lts.push_back({static_cast<int>(i), local_of[nb], -ih2});
            }
        }
        int ln = static_cast<int>(nodes.size());
        SparseMatrix lm = SparseMatrix::from_triplets(ln, ln, std::move(lts));
        SparseFactor lf(lm);
        locals.emplace_back(std::move(nodes), std::move(bd), std::move(lm), std::move(lf));
        for (int k : locals.back().nodes) {
            bool own = j == 0 ? in_half_open_mod(out.grid[k], m0, m1, length, fuzz)
                              : !in_half_open_mod(out.grid[k], m0, m1, length, fuzz);
            if (own) owner[k] = j;
        }
    }
    for (int k = 0; k < n; ++k)
        if (owner[k] < 0) throw Error("internal: 1d node not owned by any subdomain");

    std::vector<double> u(n, 0.0);
    if (!u0.empty()) {
        if (static_cast<int>(u0.size()) != n)
            throw DimensionMismatch("reference_ras_1d: u0 length does not match the grid");
        u.assign(u0.begin(), u0.end());
    }
    out.iterates.push_back(u);
    out.error_history.push_back([&] {
        double e = 0.0;
        for (int k = 0; k < n; ++k) e = std::max(e, std::abs(u[k] - out.u_single[k]));
        return e;
    }());

    for (int it = 0; it < iterations; ++it) {
        std::vector<double> next = u;
        for (int j = 0; j < 2; ++j) {
            const Local& loc = locals[j];
            std::vector<double> lb(loc.nodes.size());
            for (std::size_t i = 0; i < loc.nodes.size(); ++i)
                lb[i] = loc.is_boundary[i] ? u[loc.nodes[i]] : rhs[loc.nodes[i]];
            std::vector<double> lx = loc.factor.solve(lb);
            // Solved values land in the iterate unscaled, so refine once to
            // keep each sweep's cond(A)*eps solve error from accumulating
            // into a floor above the averaging cutoff.
            {
                std::vector<double> res = residual(loc.mat, lx, lb);
                std::vector<double> dx = loc.factor.solve(res);
                for (std::size_t i = 0; i < lx.size(); ++i) lx[i] += dx[i];
            }
            for (std::size_t i = 0; i < loc.nodes.size(); ++i) {
                int k = loc.nodes[i];
                if (owner[k] == j) next[k] = lx[i];
            }
        }
        u = std::move(next);
        out.iterates.push_back(u);
        double e = 0.0;
        for (int k = 0; k < n; ++k) e = std::max(e, std::abs(u[k] - out.u_single[k]));
        out.error_history.push_back(e);
    }
    return out;
}

double observed_kappa(std::span<const double> error_history) {
    if (error_history.size() < 3)
        throw ConfigError("observed_kappa: need at least three history entries");
    for (double e : error_history)
        if (!(e > 0.0)) throw ConfigError("observed_kappa: history entries must be positive");
    double cutoff = 1e3 * std::numeric_limits<double>::epsilon() * error_history[0];
    std::size_t end = error_history.size() - 1;
    while (end > 0 && error_history[end] < cutoff) --end;
    if (end < 2)
        throw NumericalError("observed_kappa: no valid ratios above the roundoff floor");
    double acc = 0.0;
    int count = 0;
    for (std::size_t k = 0; k + 2 <= end; ++k) {
        acc += std::log(error_history[k + 2] / error_history[k]);
        ++count;
    }
    return std::exp(acc / count);
}

}  // namespace cps::theory
