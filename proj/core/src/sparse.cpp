#include "cpschwarz/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "cpschwarz/errors.hpp"

namespace cps {

SparseMatrix::SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) throw DimensionMismatch("negative matrix dimension");
    row_ptr_.assign(static_cast<std::size_t>(rows) + 1, 0);
}

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::vector<Triplet> entries) {
    SparseMatrix m(rows, cols);
    for (const auto& t : entries) {
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
            throw DimensionMismatch("triplet index out of range");
    }
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    m.cols_idx_.reserve(entries.size());
    m.vals_.reserve(entries.size());
    std::size_t i = 0;
    for (int r = 0; r < rows; ++r) {
        while (i < entries.size() && entries[i].row == r) {
            int c = entries[i].col;
            double v = 0.0;
            while (i < entries.size() && entries[i].row == r && entries[i].col == c)
                v += entries[i++].value;
            if (v != 0.0) {
                m.cols_idx_.push_back(c);
                m.vals_.push_back(v);
            }
        }
        m.row_ptr_[r + 1] = static_cast<std::int64_t>(m.vals_.size());
    }
    return m;
}

SparseMatrix SparseMatrix::identity(int n, double scale) {
    SparseMatrix m(n, n);
    if (scale == 0.0) return m;
    m.cols_idx_.resize(n);
    m.vals_.assign(n, scale);
    for (int i = 0; i < n; ++i) {
        m.cols_idx_[i] = i;
        m.row_ptr_[i + 1] = i + 1;
    }
    return m;
}

std::vector<double> SparseMatrix::matvec(std::span<const double> v) const {
    if (static_cast<int>(v.size()) != cols_)
        throw DimensionMismatch("matvec: vector length does not match matrix columns");
    std::vector<double> out(rows_, 0.0);
    for (int i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::int64_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            s += vals_[k] * v[cols_idx_[k]];
        out[i] = s;
    }
    return out;
}

SparseMatrix SparseMatrix::top_rows(int n) const {
    if (n < 0 || n > rows_) throw DimensionMismatch("top_rows: bad row count");
    SparseMatrix m(n, cols_);
    std::int64_t end = row_ptr_[n];
    m.row_ptr_.assign(row_ptr_.begin(), row_ptr_.begin() + n + 1);
    m.cols_idx_.assign(cols_idx_.begin(), cols_idx_.begin() + end);
    m.vals_.assign(vals_.begin(), vals_.begin() + end);
    return m;
}

double SparseMatrix::row_sum(int i) const {
    double s = 0.0;
    for (std::int64_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += vals_[k];
    return s;
}

SparseMatrix spmm(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.cols_ != b.rows_) throw DimensionMismatch("spmm: inner dimensions differ");
    SparseMatrix c(a.rows_, b.cols_);
    std::vector<double> acc(b.cols_, 0.0);
    std::vector<int> touched;
    touched.reserve(256);
    for (int i = 0; i < a.rows_; ++i) {
        touched.clear();
        for (std::int64_t ka = a.row_ptr_[i]; ka < a.row_ptr_[i + 1]; ++ka) {
            int j = a.cols_idx_[ka];
            double av = a.vals_[ka];
            for (std::int64_t kb = b.row_ptr_[j]; kb < b.row_ptr_[j + 1]; ++kb) {
                int col = b.cols_idx_[kb];
                if (acc[col] == 0.0 && std::find(touched.begin(), touched.end(), col) == touched.end())
                    touched.push_back(col);
                acc[col] += b.vals_[kb] * av;
            }
        }
        std::sort(touched.begin(), touched.end());
        for (int col : touched) {
            if (acc[col] != 0.0) {
                c.cols_idx_.push_back(col);
                c.vals_.push_back(acc[col]);
            }
            acc[col] = 0.0;
        }
        c.row_ptr_[i + 1] = static_cast<std::int64_t>(c.vals_.size());
    }
    return c;
}

SparseMatrix add_scaled(double alpha, const SparseMatrix& a, double beta, const SparseMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
        throw DimensionMismatch("add_scaled: shapes differ");
    SparseMatrix c(a.rows_, a.cols_);
    c.cols_idx_.reserve(a.vals_.size() + b.vals_.size());
    c.vals_.reserve(a.vals_.size() + b.vals_.size());
    for (int i = 0; i < a.rows_; ++i) {
        std::int64_t ka = a.row_ptr_[i], ea = a.row_ptr_[i + 1];
        std::int64_t kb = b.row_ptr_[i], eb = b.row_ptr_[i + 1];
        while (ka < ea || kb < eb) {
            int ca = ka < ea ? a.cols_idx_[ka] : std::numeric_limits<int>::max();
            int cb = kb < eb ? b.cols_idx_[kb] : std::numeric_limits<int>::max();
            int col;
            double v;
            if (ca < cb) {
                col = ca; v = alpha * a.vals_[ka++];
            } else if (cb < ca) {
                col = cb; v = beta * b.vals_[kb++];
            } else {
                col = ca; v = alpha * a.vals_[ka++] + beta * b.vals_[kb++];
            }
            if (v != 0.0) {
                c.cols_idx_.push_back(col);
                c.vals_.push_back(v);
            }
        }
        c.row_ptr_[i + 1] = static_cast<std::int64_t>(c.vals_.size());
    }
    return c;
}

void write_triplets(const SparseMatrix& a, std::ostream& out) {
    out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
    char buf[64];
    const auto& rp = a.row_ptr();
    for (int i = 0; i < a.rows(); ++i) {
        for (std::int64_t k = rp[i]; k < rp[i + 1]; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", a.values()[k]);
            out << i << ' ' << a.col_idx()[k] << ' ' << buf << '\n';
        }
    }
}

SparseMatrix read_triplets(std::istream& in) {
    long long rows = 0, cols = 0, nnz = 0;
    if (!(in >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0)
        throw ConfigError("triplet input: malformed header");
    std::vector<Triplet> ts;
    ts.reserve(static_cast<std::size_t>(nnz));
    for (long long k = 0; k < nnz; ++k) {
        Triplet t;
        if (!(in >> t.row >> t.col >> t.value))
            throw ConfigError("triplet input: truncated entry list");
        ts.push_back(t);
    }
    return SparseMatrix::from_triplets(static_cast<int>(rows), static_cast<int>(cols),
                                       std::move(ts));
}

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double norm_inf(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

double op_inf_norm(const SparseMatrix& a) {
    double best = 0.0;
    for (int i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::int64_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k)
            s += std::abs(a.values()[k]);
        best = std::max(best, s);
    }
    return best;
}

std::vector<double> residual(const SparseMatrix& a, std::span<const double> x,
                             std::span<const double> b) {
    if (static_cast<int>(x.size()) != a.cols() || static_cast<int>(b.size()) != a.rows())
        throw DimensionMismatch("residual: shape mismatch");
    // Extended-precision accumulation: entries of scale 1/h^2 would otherwise
    // leave rounding noise of eps/h^2 in the residual, which caps how far any
    // residual-driven iteration can descend.
    std::vector<double> r(a.rows());
    for (int i = 0; i < a.rows(); ++i) {
        long double acc = b[i];
        for (std::int64_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k)
            acc -= static_cast<long double>(a.values()[k]) * x[a.col_idx()[k]];
        r[i] = static_cast<double>(acc);
    }
    return r;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

SolveReport gmres_solve(const SparseMatrix& a, std::span<const double> b,
                        const SolveOptions& opts) {
    const int n = a.rows();
    if (a.cols() != n) throw DimensionMismatch("gmres: matrix must be square");
    if (static_cast<int>(b.size()) != n) throw DimensionMismatch("gmres: rhs length mismatch");
    if (!(opts.tol > 0.0) || opts.max_iter < 1 || opts.restart < 1)
        throw ConfigError("gmres: invalid solve options");

    std::vector<double> x(n, 0.0);
    double bnorm = norm2(b);
    if (bnorm == 0.0) return {std::move(x), 0, 0.0};

    // Right Jacobi preconditioner, with identity fallback on zero pivots.
    std::vector<double> minv(n, 1.0);
    for (int i = 0; i < n; ++i) {
        for (std::int64_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
            if (a.col_idx()[k] == i && a.values()[k] != 0.0) {
                minv[i] = 1.0 / a.values()[k];
                break;
            }
        }
    }

    const int m = opts.restart;
    std::vector<std::vector<double>> V(m + 1);
    std::vector<std::vector<double>> H(m + 1, std::vector<double>(m, 0.0));
    std::vector<double> cs(m, 0.0), sn(m, 0.0), g(m + 1, 0.0), z(n), w(n);

    int total = 0;
    double last_rr = std::numeric_limits<double>::max();
    while (true) {
        std::vector<double> r = residual(a, x, b);
        double rnorm = norm2(r);
        last_rr = rnorm / bnorm;
        if (last_rr <= opts.tol) return {std::move(x), total, last_rr};
        if (total >= opts.max_iter) break;

        for (auto& h : H) std::fill(h.begin(), h.end(), 0.0);
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = rnorm;
        V[0] = r;
        for (double& v : V[0]) v /= rnorm;

        int k = 0;
        bool breakdown = false;
        while (k < m && total < opts.max_iter) {
            for (int i = 0; i < n; ++i) z[i] = minv[i] * V[k][i];
            w = a.matvec(z);
            for (int i = 0; i <= k; ++i) {
                double h = dot(w, V[i]);
                H[i][k] = h;
                for (int j = 0; j < n; ++j) w[j] -= h * V[i][j];
            }
            double hn = norm2(w);
            H[k + 1][k] = hn;
            if (hn > 1e-300) {
                V[k + 1] = w;
                for (double& v : V[k + 1]) v /= hn;
            } else {
                breakdown = true;
            }
            for (int i = 0; i < k; ++i) {
                double t = cs[i] * H[i][k] + sn[i] * H[i + 1][k];
                H[i + 1][k] = -sn[i] * H[i][k] + cs[i] * H[i + 1][k];
                H[i][k] = t;
            }
            double denom = std::hypot(H[k][k], H[k + 1][k]);
            cs[k] = denom == 0.0 ? 1.0 : H[k][k] / denom;
            sn[k] = denom == 0.0 ? 0.0 : H[k + 1][k] / denom;
            H[k][k] = denom;
            H[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            ++total;
            ++k;
            if (breakdown || std::abs(g[k]) <= 0.5 * opts.tol * bnorm) break;
        }

        // y = H^{-1} g, then x += M^{-1} V y.
        std::vector<double> y(k, 0.0);
        for (int i = k - 1; i >= 0; --i) {
            double s = g[i];
            for (int j = i + 1; j < k; ++j) s -= H[i][j] * y[j];
            y[i] = H[i][i] != 0.0 ? s / H[i][i] : 0.0;
        }
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < k; ++j) s += V[j][i] * y[j];
            x[i] += minv[i] * s;
        }
    }

    throw NoConvergence("gmres: no convergence after " + std::to_string(total) +
                            " iterations (relative residual " + std::to_string(last_rr) + ")",
                        total, last_rr);
}

}  // namespace cps
