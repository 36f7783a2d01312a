#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "cpschwarz/band.hpp"
#include "cpschwarz/sparse.hpp"
#include "cpschwarz/theory.hpp"

namespace cps {

using theory::observed_kappa;

/// Two overlapping arclength subdomains of a closed curve of length L:
/// S1 = [a1, b1] with a1 < 0 wraps the origin, S2 = [a2, b2] with b2 > L
/// wraps the far end.  Holds the induced index sets over a band: members
/// (points projecting into the subdomain), interior, boundary (members whose
/// operator row reaches outside the member set) and owned (restricted-update
/// sets, disjoint and covering the band).
struct Partition {
    double length = 0.0;
    double a1 = 0.0, b1 = 0.0, a2 = 0.0, b2 = 0.0;
    double split = 0.0;  ///< disjoint split point m; owned sets are [0,m), [m,L)

    std::array<std::vector<int>, 2> members;
    std::array<std::vector<int>, 2> interior;
    std::array<std::vector<int>, 2> boundary;
    std::array<std::vector<int>, 2> owned;

    double delta1() const { return b1 - a2; }
    double delta2() const { return b2 - (a1 + length); }

    /// Matching 1D theory configuration for a reaction coefficient c.
    theory::SchwarzConfig1D config1d(double c) const;
};

/// Splits [0, L) at m = split_fractions.first * L, extends both parts so the
/// realized overlaps equal the requested ones exactly, and classifies every
/// band point by the arclength of its closest curve point.
Partition make_partition(const Band& band, double length,
                         std::pair<double, double> split_fractions,
                         std::pair<double, double> overlaps, const SparseMatrix& op);

/// How subdomain solves see the rest of the domain.
enum class ExchangeMode {
    /// Solve truncated local systems on the residual and add the owned
    /// corrections; data moves through the residual itself.
    residual,
    /// Dirichlet rows on the boundary layer pinned to the previous iterate's
    /// values at those points.
    direct,
    /// Dirichlet rows pinned to the closest-point interpolant of the
    /// previous iterate.
    extension,
};

struct RasOptions {
    double inner_tol = 1e-12;  ///< backward error required of local solves
    ExchangeMode exchange = ExchangeMode::residual;
    /// Interpret the ras_solve tolerance as a fraction of the initial error.
    bool tol_relative = false;
    /// When positive, ras_solve also stops (unconverged) after this many
    /// consecutive sweeps without a new error minimum, instead of bouncing
    /// on the rounding floor until max_iter.
    int stall_window = 0;
};

/// Factorizes both local systems once and applies restricted additive
/// Schwarz sweeps; both subdomains read the same previous iterate.
/// Keeps a reference to the operator, which must outlive the iteration.
class RasIteration {
public:
    RasIteration(const SparseMatrix& a, std::span<const double> b, const Partition& partition,
                 const SparseMatrix& extension, RasOptions opts = {});

    std::vector<double> step(std::span<const double> u_prev) const;

private:
    struct Local {
        std::vector<int> nodes;
        std::vector<char> is_boundary;
        std::vector<std::pair<int, int>> owned;  // (local, global)
        SparseMatrix mat;
        SparseFactor factor;
        SparseMatrix boundary_ext;  // extension rows of boundary nodes, for extension mode

        Local(std::vector<int> n, std::vector<char> g, std::vector<std::pair<int, int>> o,
              SparseMatrix m, SparseFactor f, SparseMatrix e)
            : nodes(std::move(n)), is_boundary(std::move(g)), owned(std::move(o)),
              mat(std::move(m)), factor(std::move(f)), boundary_ext(std::move(e)) {}
    };

    const SparseMatrix& a_;
    std::vector<double> b_;
    RasOptions opts_;
    std::vector<Local> locals_;
};

/// One sweep without reusing factorizations; convenience wrapper.
std::vector<double> ras_step(const SparseMatrix& a, std::span<const double> b,
                             const Partition& partition, const SparseMatrix& extension,
                             std::span<const double> u_prev, RasOptions opts = {});

struct RasResult {
    std::vector<double> u;
    std::vector<double> u_single;        ///< single-domain reference solution
    std::vector<double> error_history;   ///< max-norm of u^n - u_single, n = 0..
    int iterations = 0;
    bool converged = false;
};

/// Iterates until the max-norm error against the single-domain solution
/// drops to tol or max_iter sweeps are spent.
RasResult ras_solve(const SparseMatrix& a, std::span<const double> b,
                    const Partition& partition, const SparseMatrix& extension,
                    std::span<const double> u0, double tol, int max_iter, RasOptions opts = {});

}  // namespace cps
