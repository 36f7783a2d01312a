#include "cpschwarz/curve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>

#include "cpschwarz/errors.hpp"

namespace cps {

namespace {

constexpr int kTableSize = 1 << 14;
constexpr int kCoarseSamples = 1 << 12;
constexpr int kCurvatureSamples = 1 << 13;
constexpr int kMaxQuadDepth = 30;

// 5-point Gauss-Legendre nodes and weights on [-1, 1].
constexpr double kGx[5] = {0.0, -0.5384693101056831, 0.5384693101056831,
                           -0.9061798459386640, 0.9061798459386640};
constexpr double kGw[5] = {0.5688888888888889, 0.4786286704993665,
                           0.4786286704993665, 0.2369268850561891,
                           0.2369268850561891};

constexpr double kInvPhi = 0.6180339887498949;

}  // namespace

struct Curve::Tables {
    std::vector<double> t, s, spd;  // arclength table, kTableSize + 1 nodes
    double length = 0.0;
    std::vector<Vec> coarse;        // cached positions for closest-point scans
    double max_speed = 0.0;

    mutable std::once_flag r0_once;
    mutable double r0 = 0.0;
    mutable std::exception_ptr r0_error;
};

Curve::Curve(int dim, double period, Map position, Map velocity, Map acceleration,
             std::string name)
    : dim_(dim),
      period_(period),
      pos_(std::move(position)),
      vel_(std::move(velocity)),
      acc_(std::move(acceleration)),
      name_(std::move(name)),
      fd_step_(1e-6 * period),
      tab_(std::make_unique<Tables>()) {
    if (dim_ < 2 || dim_ > kMaxDim)
        throw ConfigError("curve dimension must be between 2 and " + std::to_string(kMaxDim));
    if (!(period_ > 0.0)) throw ConfigError("curve period must be positive");
    if (!pos_) throw ConfigError("curve position map must be set");

    // Closure check before any quadrature: the two parameter endpoints must
    // map to the same point relative to the curve's overall extent.
    double diam = 0.0;
    Vec p0 = pos_(0.0);
    if (p0.dim() != dim_) throw DimensionMismatch("curve position map has wrong dimension");
    for (int j = 1; j < 64; ++j) {
        diam = std::max(diam, p0.dist(pos_(period_ * j / 64.0)));
    }
    double gap = p0.dist(pos_(period_ * (1.0 - 1e-8)));
    if (gap > 1e-6 * std::max(diam, 1e-300))
        throw ConfigError("curve is not closed: endpoint gap " + std::to_string(gap));

    // Arclength table: cumulative adaptive Simpson of the speed over each of
    // kTableSize uniform parameter intervals.
    tab_->t.resize(kTableSize + 1);
    tab_->s.resize(kTableSize + 1);
    tab_->spd.resize(kTableSize + 1);
    for (int k = 0; k <= kTableSize; ++k) {
        tab_->t[k] = period_ * k / kTableSize;
        tab_->spd[k] = speed(tab_->t[k]);
        tab_->max_speed = std::max(tab_->max_speed, tab_->spd[k]);
    }
    tab_->s[0] = 0.0;
    double crude = 0.0;
    for (int k = 0; k < kTableSize; ++k)
        crude += 0.5 * (tab_->spd[k] + tab_->spd[k + 1]) * (tab_->t[k + 1] - tab_->t[k]);
    double tol = 1e-11 * std::max(crude, 1e-300) / kTableSize;
    for (int k = 0; k < kTableSize; ++k) {
        double a = tab_->t[k], b = tab_->t[k + 1];
        double fa = tab_->spd[k], fb = tab_->spd[k + 1];
        double fm = speed(0.5 * (a + b));
        double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        double seg = segment_length_adaptive(a, b, fa, fm, fb, whole, tol, 0);
        tab_->s[k + 1] = tab_->s[k] + seg;
        if (!(tab_->s[k + 1] > tab_->s[k]))
            throw NumericalError("degenerate parametrization: arclength not strictly increasing");
    }
    tab_->length = tab_->s[kTableSize];

    tab_->coarse.reserve(kCoarseSamples);
    for (int j = 0; j < kCoarseSamples; ++j)
        tab_->coarse.push_back(pos_(period_ * j / kCoarseSamples));
}

Curve::~Curve() = default;
Curve::Curve(Curve&&) noexcept = default;
Curve& Curve::operator=(Curve&&) noexcept = default;

double Curve::segment_length_adaptive(double a, double b, double fa, double fm, double fb,
                                      double whole, double tol, int depth) const {
    if (depth > kMaxQuadDepth)
        throw NumericalError("arclength quadrature failed to converge");
    double m = 0.5 * (a + b);
    double flm = speed(0.5 * (a + m));
    double frm = speed(0.5 * (m + b));
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double err = left + right - whole;
    if (std::abs(err) <= 15.0 * tol) return left + right + err / 15.0;
    return segment_length_adaptive(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           segment_length_adaptive(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

double Curve::length() const { return tab_->length; }

Vec Curve::position(double t) const { return pos_(wrap_period(t, period_)); }

Vec Curve::velocity(double t) const {
    double tw = wrap_period(t, period_);
    if (vel_) return vel_(tw);
    return (position(tw + fd_step_) - position(tw - fd_step_)) * (0.5 / fd_step_);
}

Vec Curve::acceleration(double t) const {
    double tw = wrap_period(t, period_);
    if (acc_) return acc_(tw);
    Vec d = position(tw + fd_step_) + position(tw - fd_step_) - 2.0 * position(tw);
    return d * (1.0 / (fd_step_ * fd_step_));
}

double Curve::speed(double t) const { return velocity(t).norm(); }

double Curve::min_curvature_radius() const {
    std::call_once(tab_->r0_once, [this] {
        try {
            double max_kappa = 0.0;
            for (int j = 0; j < kCurvatureSamples; ++j) {
                double t = period_ * j / kCurvatureSamples;
                Vec v = velocity(t);
                double sp = v.norm();
                if (sp < 1e-12)
                    throw NumericalError("zero-speed point on curve at t=" + std::to_string(t));
                Vec a = acceleration(t);
                double cross2 = v.norm2() * a.norm2() - v.dot(a) * v.dot(a);
                double kappa = std::sqrt(std::max(cross2, 0.0)) / (sp * sp * sp);
                max_kappa = std::max(max_kappa, kappa);
            }
            tab_->r0 = max_kappa > 1e-300 ? 1.0 / max_kappa
                                          : std::numeric_limits<double>::infinity();
        } catch (...) {
            tab_->r0_error = std::current_exception();
        }
    });
    if (tab_->r0_error) std::rethrow_exception(tab_->r0_error);
    return tab_->r0;
}

double Curve::arclength_unwrapped(double tw) const {
    double dt = period_ / kTableSize;
    int k = std::min(static_cast<int>(tw / dt), kTableSize - 1);
    if (tw < tab_->t[k]) --k;
    double a = tab_->t[k];
    double h2 = 0.5 * (tw - a);
    double c = 0.5 * (tw + a);
    double acc = 0.0;
    for (int i = 0; i < 5; ++i) acc += kGw[i] * speed(c + h2 * kGx[i]);
    return tab_->s[k] + acc * h2;
}

double Curve::arclength_at(double t) const {
    double s = arclength_unwrapped(wrap_period(t, period_));
    if (s >= tab_->length) s -= tab_->length;
    return std::max(s, 0.0);
}

double Curve::param_at_arclength(double s) const {
    double sw = wrap_period(s, tab_->length);
    auto it = std::upper_bound(tab_->s.begin(), tab_->s.end(), sw);
    int k = std::max(0, static_cast<int>(it - tab_->s.begin()) - 1);
    k = std::min(k, kTableSize - 1);

    // Cubic Hermite guess for t(s) on [s_k, s_{k+1}], slopes 1/speed.
    double s0 = tab_->s[k], s1 = tab_->s[k + 1];
    double t0 = tab_->t[k], t1 = tab_->t[k + 1];
    double ds = s1 - s0;
    double u = (sw - s0) / ds;
    double m0 = ds / std::max(tab_->spd[k], 1e-300);
    double m1 = ds / std::max(tab_->spd[k + 1], 1e-300);
    double u2 = u * u, u3 = u2 * u;
    double t = t0 * (2 * u3 - 3 * u2 + 1) + m0 * (u3 - 2 * u2 + u) +
               t1 * (-2 * u3 + 3 * u2) + m1 * (u3 - u2);
    t = std::clamp(t, t0, t1);

    for (int iter = 0; iter < 3; ++iter) {
        double r = arclength_unwrapped(t) - sw;
        double sp = speed(t);
        if (std::abs(r) < 1e-14 * tab_->length || sp < 1e-300) break;
        t = std::clamp(t - r / sp, t0, t1);
    }
    return wrap_period(t, period_);
}

Vec Curve::point_at_arclength(double s) const { return position(param_at_arclength(s)); }

double Curve::refine_local_min(const Vec& x, double lo, double hi) const {
    // Golden-section on the squared distance, then a few safeguarded Newton
    // steps on g(t) = (x - c(t)) . c'(t).
    auto f = [&](double t) { return (x - position(t)).norm2(); };
    double a = lo, b = hi;
    double c1 = b - kInvPhi * (b - a), c2 = a + kInvPhi * (b - a);
    double f1 = f(c1), f2 = f(c2);
    for (int it = 0; it < 28; ++it) {
        if (f1 < f2) {
            b = c2; c2 = c1; f2 = f1;
            c1 = b - kInvPhi * (b - a); f1 = f(c1);
        } else {
            a = c1; c1 = c2; f1 = f2;
            c2 = a + kInvPhi * (b - a); f2 = f(c2);
        }
    }
    double t = f1 < f2 ? c1 : c2;

    double tn = t;
    for (int it = 0; it < 6; ++it) {
        Vec dvec = x - position(tn);
        Vec v = velocity(tn);
        double g = dvec.dot(v);
        if (std::abs(g) <= 1e-13 * v.norm() * std::max(1.0, x.norm())) break;
        double gp = -v.norm2() + dvec.dot(acceleration(tn));
        if (std::abs(gp) < 1e-300) break;
        double next = tn - g / gp;
        if (next < lo || next > hi) break;
        tn = next;
    }
    // The squared distance is flat to first order at the minimum, so close to
    // convergence its rounding noise masks real progress; judge the Newton
    // iterate by the stationarity residual instead.
    auto station = [&](double tt) { return std::abs((x - position(tt)).dot(velocity(tt))); };
    if (station(tn) <= station(t)) t = tn;
    return t;
}

ClosestPoint Curve::closest_point(const Vec& x) const {
    if (x.dim() != dim_)
        throw DimensionMismatch("closest_point: query dimension does not match curve");

    const int n = kCoarseSamples;
    double dc = period_ / n;
    int kbest = 0;
    double dbest = std::numeric_limits<double>::max();
    for (int k = 0; k < n; ++k) {
        double d2 = (x - tab_->coarse[k]).norm2();
        if (d2 < dbest) { dbest = d2; kbest = k; }
    }

    double t1 = refine_local_min(x, (kbest - 2) * dc, (kbest + 2) * dc);
    double d1 = (x - position(t1)).norm();

    // Probe for an equidistant branch well separated in parameter.
    int kfar = -1;
    double dfar = std::numeric_limits<double>::max();
    for (int k = 0; k < n; ++k) {
        int sep = std::abs(k - kbest);
        sep = std::min(sep, n - sep);
        if (sep <= n / 8) continue;
        double d2 = (x - tab_->coarse[k]).norm2();
        if (d2 < dfar) { dfar = d2; kfar = k; }
    }
    if (kfar >= 0) {
        double margin = tab_->max_speed * dc + 1e-9;
        if (std::sqrt(dfar) <= d1 + margin) {
            double t2 = refine_local_min(x, (kfar - 2) * dc, (kfar + 2) * dc);
            double d2 = (x - position(t2)).norm();
            if (std::abs(d2 - d1) < 1e-9)
                throw NonUniqueClosestPoint(
                    "ambiguous projection: two curve branches at distance " +
                        std::to_string(0.5 * (d1 + d2)),
                    0.5 * (d1 + d2));
            if (d2 < d1) { t1 = t2; d1 = d2; }
        }
    }

    ClosestPoint r;
    r.t = wrap_period(t1, period_);
    r.point = position(r.t);
    r.s = arclength_at(r.t);
    r.dist = d1;
    r.inside_reach = d1 < min_curvature_radius();
    return r;
}

Curve Curve::circle(double radius) {
    if (!(radius > 0.0)) throw ConfigError("circle radius must be positive");
    double R = radius;
    auto pos = [R](double t) { return Vec{R * std::cos(t), R * std::sin(t)}; };
    auto vel = [R](double t) { return Vec{-R * std::sin(t), R * std::cos(t)}; };
    auto acc = [R](double t) { return Vec{-R * std::cos(t), -R * std::sin(t)}; };
    std::string name = "circle";
    if (radius != 1.0) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "circle:R=%g", radius);
        name = buf;
    }
    return Curve(2, 2.0 * M_PI, pos, vel, acc, name);
}

Curve Curve::mobius_boundary(double width, double center_radius) {
    if (!(width > 0.0) || !(center_radius > 0.0))
        throw ConfigError("mobius boundary needs positive width and radius");
    double w = width, R = center_radius;
    auto pos = [w, R](double t) {
        double rho = R + 0.5 * w * std::cos(0.5 * t);
        return Vec{rho * std::cos(t), rho * std::sin(t), 0.5 * w * std::sin(0.5 * t)};
    };
    auto vel = [w, R](double t) {
        double rho = R + 0.5 * w * std::cos(0.5 * t);
        double drho = -0.25 * w * std::sin(0.5 * t);
        return Vec{drho * std::cos(t) - rho * std::sin(t),
                   drho * std::sin(t) + rho * std::cos(t), 0.25 * w * std::cos(0.5 * t)};
    };
    auto acc = [w, R](double t) {
        double rho = R + 0.5 * w * std::cos(0.5 * t);
        double drho = -0.25 * w * std::sin(0.5 * t);
        double ddrho = -0.125 * w * std::cos(0.5 * t);
        return Vec{(ddrho - rho) * std::cos(t) - 2.0 * drho * std::sin(t),
                   (ddrho - rho) * std::sin(t) + 2.0 * drho * std::cos(t),
                   -0.125 * w * std::sin(0.5 * t)};
    };
    return Curve(3, 4.0 * M_PI, pos, vel, acc, "mobius-boundary");
}

Curve make_curve(std::string_view spec) {
    if (spec == "circle") return Curve::circle();
    if (spec == "mobius-boundary") return Curve::mobius_boundary();
    if (spec.rfind("circle:R=", 0) == 0) {
        std::string num(spec.substr(9));
        double radius = 0.0;
        try {
            std::size_t used = 0;
            radius = std::stod(num, &used);
            if (used != num.size()) throw std::invalid_argument(num);
        } catch (const std::exception&) {
            throw ConfigError("invalid circle radius '" + num + "'");
        }
        return Curve::circle(radius);
    }
    throw ConfigError("unknown curve '" + std::string(spec) + "'");
}

}  // namespace cps
