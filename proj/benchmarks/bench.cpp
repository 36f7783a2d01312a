#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "cpschwarz/band.hpp"
#include "cpschwarz/curve.hpp"
#include "cpschwarz/runconfig.hpp"
#include "cpschwarz/schwarz.hpp"
#include "cpschwarz/sparse.hpp"
#include "cpschwarz/theory.hpp"

namespace {

using namespace cps;

// Shared fixtures built once; the loops below only time the operation named
// by the benchmark.
struct CircleProblem {
    Curve curve = make_curve("circle");
    Band band;
    SparseMatrix ext, lap, a;
    std::vector<double> b;

    explicit CircleProblem(double h) : band(build_band(curve, h, 4)) {
        ext = extension_matrix(band, curve);
        lap = laplacian(band);
        a = assemble_helmholtz(band, 1.0, ext, lap);
        b = assemble_rhs(band, make_rhs("sin-mode-1", curve.length()));
    }
};

CircleProblem& circle_coarse() {
    static CircleProblem p(0.05);
    return p;
}

CircleProblem& circle_fine() {
    static CircleProblem p(0.01);
    return p;
}

void bm_closest_point(benchmark::State& state, const Curve& curve) {
    std::mt19937_64 g(12345);
    std::uniform_real_distribution<double> off(-0.2, 0.2);
    std::uniform_real_distribution<double> par(0.0, curve.period());
    std::vector<Vec> pts;
    for (int i = 0; i < 1024; ++i) {
        Vec x = curve.position(par(g));
        for (int d = 0; d < curve.dim(); ++d) x[d] += off(g);
        pts.push_back(x);
    }
    std::size_t k = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(curve.closest_point(pts[k]));
        k = (k + 1) % pts.size();
    }
}

void bm_closest_point_circle(benchmark::State& state) {
    Curve c = make_curve("circle");
    bm_closest_point(state, c);
}

void bm_closest_point_mobius(benchmark::State& state) {
    Curve c = make_curve("mobius-boundary");
    bm_closest_point(state, c);
}

void bm_build_band(benchmark::State& state) {
    Curve curve = make_curve("circle");
    double h = 1e-3 * state.range(0);
    for (auto _ : state) {
        Band band = build_band(curve, h, 4);
        benchmark::DoNotOptimize(band.size());
    }
}

void bm_assemble(benchmark::State& state) {
    CircleProblem& p = circle_fine();
    for (auto _ : state) {
        SparseMatrix a = assemble_helmholtz(p.band, 1.0, p.ext, p.lap);
        benchmark::DoNotOptimize(a.nnz());
    }
}

void bm_matvec(benchmark::State& state) {
    CircleProblem& p = circle_fine();
    std::vector<double> x(p.a.cols(), 1.0);
    for (auto _ : state) {
        std::vector<double> y = p.a.matvec(x);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * p.a.nnz());
}

void bm_factorize(benchmark::State& state) {
    CircleProblem& p = circle_coarse();
    for (auto _ : state) {
        SparseFactor f(p.a);
        benchmark::DoNotOptimize(&f);
    }
}

void bm_solve_refined(benchmark::State& state) {
    CircleProblem& p = circle_coarse();
    SparseFactor f(p.a);
    for (auto _ : state) {
        std::vector<double> u = f.solve_refined(p.a, p.b, 1e-12);
        benchmark::DoNotOptimize(u.data());
    }
}

void bm_gmres(benchmark::State& state) {
    // periodic 1D Helmholtz row stencil (c + 2/h^2, -1/h^2, -1/h^2)
    const int n = 2048;
    const double h = 2.0 * M_PI / n, c = 1.0;
    std::vector<Triplet> trips;
    for (int i = 0; i < n; ++i) {
        trips.push_back({i, i, c + 2.0 / (h * h)});
        trips.push_back({i, (i + 1) % n, -1.0 / (h * h)});
        trips.push_back({i, (i + n - 1) % n, -1.0 / (h * h)});
    }
    SparseMatrix a = SparseMatrix::from_triplets(n, n, std::move(trips));
    std::vector<double> b(n);
    for (int i = 0; i < n; ++i) b[i] = std::sin(h * i);
    SolveOptions opts;
    opts.tol = 1e-10;
    for (auto _ : state) {
        SolveReport r = gmres_solve(a, b, opts);
        benchmark::DoNotOptimize(r.iterations);
    }
}

void bm_theory_entries(benchmark::State& state) {
    std::mt19937_64 g(777);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(theory::entries(u(g), 3.0 + u(g), u(g), u(g)));
    }
}

void bm_ras_sweep(benchmark::State& state) {
    CircleProblem& p = circle_coarse();
    double L = p.curve.length();
    Partition part = make_partition(p.band, L, {0.5, 0.5}, {0.1 * L, 0.1 * L}, p.a);
    RasIteration iter(p.a, p.b, part, SparseMatrix());
    std::vector<double> u(p.a.cols(), 0.0);
    for (auto _ : state) {
        u = iter.step(u);
        benchmark::DoNotOptimize(u.data());
    }
}

BENCHMARK(bm_closest_point_circle);
BENCHMARK(bm_closest_point_mobius);
BENCHMARK(bm_build_band)->Arg(50)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_assemble)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_matvec);
BENCHMARK(bm_factorize)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_solve_refined)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_gmres)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_theory_entries);
BENCHMARK(bm_ras_sweep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
