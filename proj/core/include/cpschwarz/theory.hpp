#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace cps::theory {

/// Two overlapping subdomains of a periodic interval [0, L):
/// S1 = [a1, b1] and S2 = [a2, b2] with a1 < 0 < a2 < b1 < L < b2, so S1
/// wraps the origin.  The overlaps are d1 = b1 - a2 around the split and
/// d2 = b2 - (a1 + L) around the origin.
struct SchwarzConfig1D {
    double c = 1.0;
    double length = 0.0;
    double a1 = 0.0, b1 = 0.0, a2 = 0.0, b2 = 0.0;

    double l1() const { return b1 - a1; }
    double l2() const { return b2 - a2; }
    double delta1() const { return b1 - a2; }
    double delta2() const { return b2 - (a1 + length); }

    /// Throws ConfigError / InvalidOverlap unless c > 0, the interval layout
    /// is ordered, both overlaps are positive, and their sum stays below the
    /// shorter subdomain (the contraction hypothesis).
    void validate() const;

    /// Splits [0, L) at m = first_fraction * L into disjoint parts, then
    /// extends both parts symmetrically so the defined overlaps equal the
    /// requested ones exactly: a1 = -o2/2, b1 = m + o1/2, a2 = m - o1/2,
    /// b2 = L + o2/2.
    static SchwarzConfig1D from_split(double c, double length, double first_fraction,
                                      double overlap1, double overlap2);

    static SchwarzConfig1D equal_split(double c, double length, double overlap);
};

/// Boundary-to-boundary transfer coefficients of one subdomain of length l:
/// with a = sqrt(c),
///   p = sinh(a (l - d_prev)) / sinh(a l),  r = sinh(a d_prev) / sinh(a l),
///   q = sinh(a (l - d_self)) / sinh(a l),  s = sinh(a d_self) / sinh(a l).
struct EntrySet {
    double p = 0.0, q = 0.0, r = 0.0, s = 0.0;
};

/// Evaluated in overflow-safe exponential form; throws NumericalError when
/// sqrt(c) * l > 700 where even that form loses its meaning.
EntrySet entries(double c, double l, double delta_prev, double delta_self);

/// The 4x4 error propagation matrix acting on boundary errors
/// (e1(b2 - L), e1(a2), e2(b1), e2(a1 + L)); its diagonal 2x2 blocks are
/// zero, the off-diagonal blocks carry the EntrySet coefficients.
struct IterationMatrix {
    std::array<std::array<double, 4>, 4> m{};
    EntrySet first, second;

    double operator()(int i, int j) const { return m[i][j]; }
};

IterationMatrix iteration_matrix(const SchwarzConfig1D& cfg);

double inf_norm(const IterationMatrix& m);

/// Exact spectral radius via the even-power block structure:
/// rho(M)^2 = rho(B C) for the two 2x2 off-diagonal blocks.
double spectral_radius(const IterationMatrix& m);

/// Contraction factor bound per double iteration: inf_norm squared.
double kappa_bound(const SchwarzConfig1D& cfg);

/// Closed form of kappa_bound for equal-sized subdomains with equal
/// overlaps o: with l = L/2 + o,
/// kappa = (cosh(sqrt(c)(l/2 - o)) / cosh(sqrt(c) l/2))^2.
double equal_sized_kappa(double c, double length, double overlap);

/// The commonly quoted closed form
/// ((e^{a L/2} + e^{a d}) / (1 + e^{a(L/2 + d)}))^2, a = sqrt(c);
/// identical to equal_sized_kappa(c, L, d).
double corollary_printed_kappa(double c, double length, double delta);

/// Solution of (c - u'') = 0 on [a, b] with u(a) = alpha, u(b) = beta,
/// evaluated at s in [a, b].
double analytic_error_solve(double c, double a, double b, double alpha, double beta, double s);

/// Runs the alternating-subdomain boundary error recursion for the given
/// number of double iterations, starting from eps0; returns all states
/// including the initial one.
std::vector<std::array<double, 4>> simulate_error_recursion(const SchwarzConfig1D& cfg,
                                                            const std::array<double, 4>& eps0,
                                                            int steps);

struct Ras1dResult {
    std::vector<double> grid;                   ///< node coordinates in [0, L)
    std::vector<double> u_single;               ///< single-domain solution
    std::vector<std::vector<double>> iterates;  ///< u^0 .. u^n
    std::vector<double> error_history;          ///< max-norm vs u_single
};

/// Periodic 1D finite-difference reference of the two-subdomain iteration:
/// 3-point stencil for (c - d^2/ds^2), Dirichlet coupling rows at subdomain
/// ends, restricted updates split at the overlap midpoints.
Ras1dResult reference_ras_1d(double c, double length, const std::function<double(double)>& f,
                             const SchwarzConfig1D& cfg, double h,
                             std::span<const double> u0, int iterations);

/// Geometric mean of error ratios two iterations apart, ignoring trailing
/// entries within 1e3 machine epsilons of history[0] scale.
double observed_kappa(std::span<const double> error_history);

}  // namespace cps::theory
