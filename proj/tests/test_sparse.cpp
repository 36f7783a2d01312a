#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "cpschwarz/errors.hpp"
#include "cpschwarz/sparse.hpp"
#include "support.hpp"

using namespace cps;
using cps::test::dense_matvec;
using cps::test::dense_mult;
using cps::test::dense_solve;
using cps::test::to_dense;
using cps::test::uniform;

namespace {

SparseMatrix random_sparse(std::mt19937_64& g, int rows, int cols, double fill) {
    std::vector<Triplet> tr;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            if (uniform(g, 0.0, 1.0) < fill) tr.push_back({i, j, uniform(g, -2.0, 2.0)});
    return SparseMatrix::from_triplets(rows, cols, std::move(tr));
}

void check_csr_invariants(const SparseMatrix& a) {
    REQUIRE(static_cast<int>(a.row_ptr().size()) == a.rows() + 1);
    CHECK(a.row_ptr().front() == 0);
    CHECK(a.row_ptr().back() == a.nnz());
    for (int i = 0; i < a.rows(); ++i) {
        CHECK(a.row_ptr()[i] <= a.row_ptr()[i + 1]);
        for (std::int64_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
            CHECK(a.values()[k] != 0.0);
            if (k > a.row_ptr()[i]) CHECK(a.col_idx()[k - 1] < a.col_idx()[k]);
        }
    }
}

// Periodic 1D finite-difference operator c - D2 on n nodes of spacing h.
SparseMatrix periodic_helmholtz_1d(int n, double c, double h) {
    std::vector<Triplet> tr;
    double d = c + 2.0 / (h * h);
    double o = -1.0 / (h * h);
    for (int i = 0; i < n; ++i) {
        tr.push_back({i, i, d});
        tr.push_back({i, (i + 1) % n, o});
        tr.push_back({i, (i + n - 1) % n, o});
    }
    return SparseMatrix::from_triplets(n, n, std::move(tr));
}

}  // namespace

TEST_CASE("assembly merges duplicates and keeps rows sorted") {
    std::vector<Triplet> tr = {{1, 2, 1.5}, {0, 0, 1.0}, {1, 2, 0.5}, {1, 0, -1.0},
                               {2, 1, 3.0}, {2, 1, -3.0}, {0, 3, 4.0}};
    SparseMatrix a = SparseMatrix::from_triplets(3, 4, std::move(tr));
    check_csr_invariants(a);
    // 1.5 + 0.5 merged, 3.0 - 3.0 cancelled away entirely
    CHECK(a.nnz() == 4);
    std::vector<double> v = {1.0, 1.0, 1.0, 1.0};
    std::vector<double> w = a.matvec(v);
    CHECK(w[0] == doctest::Approx(5.0));
    CHECK(w[1] == doctest::Approx(1.0));
    CHECK(w[2] == doctest::Approx(0.0));
}

TEST_CASE("matvec identities") {
    auto g = cps::test::rng(2024101);
    SparseMatrix eye = SparseMatrix::identity(17);
    SparseMatrix zero(9, 17);
    std::vector<double> v(17);
    for (auto& x : v) x = uniform(g, -1.0, 1.0);
    std::vector<double> w = eye.matvec(v);
    for (int i = 0; i < 17; ++i) CHECK(w[i] == v[i]);
    for (double x : zero.matvec(v)) CHECK(x == 0.0);
}

TEST_CASE("matvec matches the dense oracle on random instances") {
    auto g = cps::test::rng(2024102);
    for (int trial = 0; trial < 20; ++trial) {
        SparseMatrix a = random_sparse(g, 50, 50, 0.1);
        check_csr_invariants(a);
        std::vector<double> v(50);
        for (auto& x : v) x = uniform(g, -1.0, 1.0);
        std::vector<double> w = a.matvec(v);
        std::vector<double> wd = dense_matvec(to_dense(a), 50, 50, v);
        for (int i = 0; i < 50; ++i) CHECK(std::abs(w[i] - wd[i]) <= 1e-13);
    }
}

TEST_CASE("matvec is linear") {
    auto g = cps::test::rng(2024103);
    SparseMatrix a = random_sparse(g, 40, 40, 0.15);
    std::vector<double> u(40), v(40);
    for (auto& x : u) x = uniform(g, -1.0, 1.0);
    for (auto& x : v) x = uniform(g, -1.0, 1.0);
    double al = 0.7, be = -1.3;
    std::vector<double> lin(40);
    for (int i = 0; i < 40; ++i) lin[i] = al * u[i] + be * v[i];
    std::vector<double> lhs = a.matvec(lin);
    std::vector<double> au = a.matvec(u), av = a.matvec(v);
    for (int i = 0; i < 40; ++i) CHECK(std::abs(lhs[i] - (al * au[i] + be * av[i])) <= 1e-12);
}

TEST_CASE("spmm identities and dense oracle") {
    auto g = cps::test::rng(2024104);
    SparseMatrix a = random_sparse(g, 30, 40, 0.12);
    SparseMatrix b = random_sparse(g, 40, 25, 0.12);
    SparseMatrix ia = spmm(a, SparseMatrix::identity(40));
    SparseMatrix ib = spmm(SparseMatrix::identity(40), b);
    CHECK(to_dense(ia) == to_dense(a));
    CHECK(to_dense(ib) == to_dense(b));

    SparseMatrix ab = spmm(a, b);
    check_csr_invariants(ab);
    std::vector<double> oracle = dense_mult(to_dense(a), 30, 40, to_dense(b), 25);
    std::vector<double> got = to_dense(ab);
    for (std::size_t i = 0; i < oracle.size(); ++i) CHECK(std::abs(got[i] - oracle[i]) <= 1e-13);
}

TEST_CASE("add_scaled combines and drops exact cancellation") {
    auto g = cps::test::rng(2024105);
    SparseMatrix a = random_sparse(g, 20, 20, 0.2);
    SparseMatrix s = add_scaled(1.0, a, -1.0, a);
    CHECK(s.nnz() == 0);
    SparseMatrix b = random_sparse(g, 20, 20, 0.2);
    SparseMatrix c = add_scaled(0.5, a, 2.0, b);
    check_csr_invariants(c);
    std::vector<double> da = to_dense(a), db = to_dense(b), dc = to_dense(c);
    for (std::size_t i = 0; i < dc.size(); ++i)
        CHECK(std::abs(dc[i] - (0.5 * da[i] + 2.0 * db[i])) <= 1e-13);
}

TEST_CASE("top_rows keeps the leading block") {
    auto g = cps::test::rng(2024106);
    SparseMatrix a = random_sparse(g, 12, 7, 0.3);
    SparseMatrix t = a.top_rows(5);
    CHECK(t.rows() == 5);
    CHECK(t.cols() == 7);
    std::vector<double> da = to_dense(a), dt = to_dense(t);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 7; ++j) CHECK(dt[i * 7 + j] == da[i * 7 + j]);
}

TEST_CASE("triplet text format round-trips") {
    auto g = cps::test::rng(2024107);
    SparseMatrix a = random_sparse(g, 23, 31, 0.1);
    std::stringstream ss;
    write_triplets(a, ss);
    SparseMatrix b = read_triplets(ss);
    CHECK(b.rows() == a.rows());
    CHECK(b.cols() == a.cols());
    CHECK(b.nnz() == a.nnz());
    CHECK(to_dense(a) == to_dense(b));
}

TEST_CASE("gmres solves trivial systems exactly") {
    std::vector<double> b = {2.0, 8.0};
    SparseMatrix d = SparseMatrix::from_triplets(2, 2, {{0, 0, 2.0}, {1, 1, 4.0}});
    SolveReport r = gmres_solve(d, b);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.x[1] == doctest::Approx(2.0).epsilon(1e-12));

    SparseMatrix eye = SparseMatrix::identity(6);
    std::vector<double> rhs = {1.0, -2.0, 3.0, 0.5, 0.0, 4.0};
    SolveReport ri = gmres_solve(eye, rhs);
    for (int i = 0; i < 6; ++i) CHECK(ri.x[i] == doctest::Approx(rhs[i]).epsilon(1e-13));
}

TEST_CASE("gmres residual contract holds on every accepted solve") {
    auto g = cps::test::rng(2024108);
    double pi2 = 2.0 * std::numbers::pi;
    for (int trial = 0; trial < 5; ++trial) {
        int n = 64;
        double h = pi2 / n;
        SparseMatrix a = periodic_helmholtz_1d(n, 1.0 + trial, h);
        std::vector<double> b(n);
        for (int i = 0; i < n; ++i) b[i] = std::sin(pi2 * i / n) + 0.3 * uniform(g, -1.0, 1.0);
        SolveOptions opts;
        SolveReport r = gmres_solve(a, b, opts);
        std::vector<double> res = residual(a, r.x, b);
        CHECK(norm2(res) / norm2(b) <= opts.tol);
        CHECK(r.relative_residual <= opts.tol);
    }
}

TEST_CASE("periodic 1D system matches the dense factorization oracle") {
    int n = 64;
    double pi2 = 2.0 * std::numbers::pi;
    double h = pi2 / n;
    SparseMatrix a = periodic_helmholtz_1d(n, 1.0, h);
    std::vector<double> b(n);
    for (int i = 0; i < n; ++i) b[i] = std::sin(pi2 * i / n);
    std::vector<double> xd = dense_solve(to_dense(a), n, b);

    SolveReport kr = gmres_solve(a, b);
    SparseFactor lu(a);
    std::vector<double> xl = lu.solve(b);
    for (int i = 0; i < n; ++i) {
        CHECK(std::abs(kr.x[i] - xd[i]) <= 1e-10);
        CHECK(std::abs(xl[i] - xd[i]) <= 1e-10);
    }
}

TEST_CASE("solve_refined reaches the requested backward error") {
    auto g = cps::test::rng(2024109);
    int n = 200;
    SparseMatrix a = periodic_helmholtz_1d(n, 2.0, 0.02);
    std::vector<double> b(n);
    for (auto& x : b) x = uniform(g, -1.0, 1.0);
    SparseFactor lu(a);
    std::vector<double> x = lu.solve_refined(a, b, 1e-14);
    std::vector<double> r = residual(a, x, b);
    double eta = norm2(r) / (norm2(b) + op_inf_norm(a) * norm2(x));
    CHECK(eta <= 1e-14);
}

TEST_CASE("residual matches the dense oracle") {
    auto g = cps::test::rng(2024110);
    SparseMatrix a = random_sparse(g, 35, 35, 0.2);
    std::vector<double> x(35), b(35);
    for (auto& v : x) v = uniform(g, -1.0, 1.0);
    for (auto& v : b) v = uniform(g, -1.0, 1.0);
    std::vector<double> r = residual(a, x, b);
    std::vector<double> ax = dense_matvec(to_dense(a), 35, 35, x);
    for (int i = 0; i < 35; ++i) CHECK(std::abs(r[i] - (b[i] - ax[i])) <= 1e-13);
}

TEST_CASE("operator infinity norm is the max absolute row sum") {
    SparseMatrix a =
        SparseMatrix::from_triplets(3, 3, {{0, 0, 1.0}, {0, 2, -3.0}, {1, 1, 2.5}, {2, 0, -1.0}});
    CHECK(op_inf_norm(a) == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("shape mismatches are rejected") {
    SparseMatrix a(4, 5);
    std::vector<double> v(3, 1.0);
    CHECK_THROWS_AS((void)a.matvec(v), DimensionMismatch);
    SparseMatrix b(6, 4);
    CHECK_THROWS_AS((void)spmm(a, a), DimensionMismatch);
    CHECK_THROWS_AS((void)add_scaled(1.0, a, 1.0, b), DimensionMismatch);
}
