#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace cps {

struct Triplet {
    int row = 0;
    int col = 0;
    double value = 0.0;
};

/// Compressed sparse row matrix.  Within each row the column indices are
/// strictly increasing and no explicit zeros are stored; assembly merges
/// duplicate coordinates by summation.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(int rows, int cols);

    static SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> entries);
    static SparseMatrix identity(int n, double scale = 1.0);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::int64_t nnz() const { return static_cast<std::int64_t>(vals_.size()); }

    const std::vector<std::int64_t>& row_ptr() const { return row_ptr_; }
    const std::vector<int>& col_idx() const { return cols_idx_; }
    const std::vector<double>& values() const { return vals_; }

    std::vector<double> matvec(std::span<const double> v) const;

    /// First n rows as their own matrix (same column space).
    SparseMatrix top_rows(int n) const;

    double row_sum(int i) const;

private:
    friend SparseMatrix spmm(const SparseMatrix&, const SparseMatrix&);
    friend SparseMatrix add_scaled(double, const SparseMatrix&, double, const SparseMatrix&);
    friend class SparseFactor;

    int rows_ = 0, cols_ = 0;
    std::vector<std::int64_t> row_ptr_{0};
    std::vector<int> cols_idx_;
    std::vector<double> vals_;
};

/// C = A * B.
SparseMatrix spmm(const SparseMatrix& a, const SparseMatrix& b);

/// C = alpha * A + beta * B; entries cancelling to exactly zero are dropped.
SparseMatrix add_scaled(double alpha, const SparseMatrix& a, double beta, const SparseMatrix& b);

/// Plain-text triplet format: one "rows cols nnz" header line, then one
/// "row col value" line per entry, zero-based.
void write_triplets(const SparseMatrix& a, std::ostream& out);
SparseMatrix read_triplets(std::istream& in);

struct SolveOptions {
    double tol = 1e-12;    ///< relative residual target |b - Ax| / |b|
    int max_iter = 5000;   ///< total Krylov steps across restarts
    int restart = 50;
};

struct SolveReport {
    std::vector<double> x;
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Restarted GMRES with right diagonal (Jacobi) preconditioning; a zero
/// diagonal entry falls back to 1 in the preconditioner.  The returned
/// residual is recomputed from A and x, never taken from the recurrence;
/// failure to meet tol throws NoConvergence.
SolveReport gmres_solve(const SparseMatrix& a, std::span<const double> b,
                        const SolveOptions& opts = {});

/// Sparse LU factorization for repeated solves against one matrix.
class SparseFactor {
public:
    explicit SparseFactor(const SparseMatrix& a);
    ~SparseFactor();
    SparseFactor(SparseFactor&&) noexcept;
    SparseFactor& operator=(SparseFactor&&) noexcept;
    SparseFactor(const SparseFactor&) = delete;
    SparseFactor& operator=(const SparseFactor&) = delete;

    std::vector<double> solve(std::span<const double> b) const;

    /// Solve plus iterative refinement until the measured normwise backward
    /// error |b - Ax| / (|b| + |A|_inf |x|) drops to tol; throws
    /// NoConvergence if refinement stalls above tol.
    std::vector<double> solve_refined(const SparseMatrix& a, std::span<const double> b,
                                      double tol) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

double norm2(std::span<const double> v);
double norm_inf(std::span<const double> v);
/// max_i sum_j |a_ij|, the operator infinity norm.
double op_inf_norm(const SparseMatrix& a);
std::vector<double> residual(const SparseMatrix& a, std::span<const double> x,
                             std::span<const double> b);

}  // namespace cps
