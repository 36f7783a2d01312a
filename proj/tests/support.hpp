#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpschwarz/sparse.hpp"
#include "cpschwarz/theory.hpp"

namespace cps::test {

// All randomized tests draw from this engine with a fixed seed so every run
// sees the same sample.
inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline double log_uniform(std::mt19937_64& g, double lo, double hi) {
    return std::exp(uniform(g, std::log(lo), std::log(hi)));
}

// Row-major dense mirror of a sparse matrix.
inline std::vector<double> to_dense(const SparseMatrix& a) {
    std::vector<double> d(static_cast<std::size_t>(a.rows()) * a.cols(), 0.0);
    for (int i = 0; i < a.rows(); ++i)
        for (std::int64_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k)
            d[static_cast<std::size_t>(i) * a.cols() + a.col_idx()[k]] = a.values()[k];
    return d;
}

inline std::vector<double> dense_matvec(const std::vector<double>& d, int rows, int cols,
                                        std::span<const double> v) {
    std::vector<double> w(rows, 0.0);
    for (int i = 0; i < rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < cols; ++j) s += d[static_cast<std::size_t>(i) * cols + j] * v[j];
        w[i] = s;
    }
    return w;
}

inline std::vector<double> dense_mult(const std::vector<double>& a, int ar, int ac,
                                      const std::vector<double>& b, int bc) {
    std::vector<double> c(static_cast<std::size_t>(ar) * bc, 0.0);
    for (int i = 0; i < ar; ++i)
        for (int k = 0; k < ac; ++k) {
            double aik = a[static_cast<std::size_t>(i) * ac + k];
            if (aik == 0.0) continue;
            for (int j = 0; j < bc; ++j)
                c[static_cast<std::size_t>(i) * bc + j] += aik * b[static_cast<std::size_t>(k) * bc + j];
        }
    return c;
}

// Gaussian elimination with partial pivoting; the independent solve oracle.
inline std::vector<double> dense_solve(std::vector<double> a, int n, std::vector<double> b) {
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(a[static_cast<std::size_t>(i) * n + k]) >
                std::abs(a[static_cast<std::size_t>(piv) * n + k]))
                piv = i;
        if (a[static_cast<std::size_t>(piv) * n + k] == 0.0)
            throw std::runtime_error("dense_solve: singular matrix");
        if (piv != k) {
            for (int j = 0; j < n; ++j)
                std::swap(a[static_cast<std::size_t>(k) * n + j],
                          a[static_cast<std::size_t>(piv) * n + j]);
            std::swap(b[k], b[piv]);
        }
        for (int i = k + 1; i < n; ++i) {
            double m = a[static_cast<std::size_t>(i) * n + k] / a[static_cast<std::size_t>(k) * n + k];
            if (m == 0.0) continue;
            for (int j = k; j < n; ++j)
                a[static_cast<std::size_t>(i) * n + j] -= m * a[static_cast<std::size_t>(k) * n + j];
            b[i] -= m * b[k];
        }
    }
    std::vector<double> x(n, 0.0);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= a[static_cast<std::size_t>(i) * n + j] * x[j];
        x[i] = s / a[static_cast<std::size_t>(i) * n + i];
    }
    return x;
}

// Random two-subdomain layout satisfying the contraction hypothesis
// delta1 + delta2 < min(l1, l2), with c in [1e-2, 1e2].
inline theory::SchwarzConfig1D random_config(std::mt19937_64& g) {
    double c = log_uniform(g, 1e-2, 1e2);
    double length = uniform(g, 1.0, 20.0);
    double frac = uniform(g, 0.2, 0.8);
    double m = frac * length;
    double cap = 2.0 * std::min(m, length - m);
    double total = uniform(g, 0.02, 0.95) * cap;
    double o1 = uniform(g, 0.05, 0.95) * total;
    double o2 = total - o1;
    return theory::SchwarzConfig1D::from_split(c, length, frac, o1, o2);
}

inline theory::SchwarzConfig1D random_equal_config(std::mt19937_64& g) {
    double c = log_uniform(g, 1e-2, 1e2);
    double length = uniform(g, 1.0, 20.0);
    double o = uniform(g, 0.01, 0.48) * length;
    return theory::SchwarzConfig1D::equal_split(c, length, o);
}

// Pearson correlation of (n, log err_n); the log-linearity metric for
// geometric error decay.
inline double log_linear_correlation(std::span<const double> history, std::size_t first) {
    std::vector<double> xs, ys;
    for (std::size_t n = first; n < history.size(); ++n) {
        if (history[n] <= 0.0) break;
        xs.push_back(static_cast<double>(n));
        ys.push_back(std::log(history[n]));
    }
    std::size_t n = xs.size();
    if (n < 3) return 0.0;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path();
        for (int i = 0; i < 10000; ++i) {
            auto cand = base / (tag + "-" + std::to_string(i));
            std::error_code ec;
            if (std::filesystem::create_directory(cand, ec)) {
                path_ = cand;
                return;
            }
        }
        throw std::runtime_error("TempDir: could not create scratch directory");
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace cps::test
