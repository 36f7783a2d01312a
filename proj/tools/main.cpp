#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"

#include "cpschwarz/csv.hpp"
#include "cpschwarz/curve.hpp"
#include "cpschwarz/errors.hpp"
#include "cpschwarz/experiments.hpp"
#include "cpschwarz/runconfig.hpp"
#include "cpschwarz/theory.hpp"

namespace {

using namespace cps;

// One instance per subcommand; a config file is applied first, then every
// flag the user actually passed overrides it.
struct Flags {
    std::string config;
    std::string curve, split, overlap, f, out;
    double h = 0.0, c = 0.0, tol = 0.0, inner_tol = 0.0;
    int degree = 0, max_iter = 0;
    CLI::App* cmd = nullptr;
};

void add_common(CLI::App* cmd, Flags& fl) {
    fl.cmd = cmd;
    // frees the short -h so --h can be the spacing flag
    cmd->set_help_flag("--help", "print this help and exit");
    cmd->add_option("--config", fl.config, "key=value config file");
    cmd->add_option("--curve", fl.curve,
                    "curve name: circle, circle:R=<r>, mobius-boundary");
    cmd->add_option("--h", fl.h, "grid spacing");
    cmd->add_option("--degree", fl.degree, "interpolation degree");
    cmd->add_option("--c", fl.c, "reaction coefficient, must be positive");
    cmd->add_option("--split", fl.split, "subdomain arclength ratio, e.g. 1:2");
    cmd->add_option("--overlap", fl.overlap,
                    "overlap width(s); plain arclength or fraction with L suffix, "
                    "one value or delta1,delta2");
    cmd->add_option("--f", fl.f, "right hand side: sin-mode-1 or zero");
    cmd->add_option("--tol", fl.tol, "outer tolerance, relative to the initial error");
    cmd->add_option("--inner-tol", fl.inner_tol, "backward error target of direct solves");
    cmd->add_option("--max-iter", fl.max_iter, "iteration cap");
    cmd->add_option("--out", fl.out, "output directory");
}

RunConfig build_config(const Flags& fl, bool h_means_sweep = false) {
    RunConfig cfg;
    if (fl.cmd->count("--config")) cfg = RunConfig::load(fl.config);
    if (fl.cmd->count("--curve")) cfg.curve = fl.curve;
    if (fl.cmd->count("--h")) cfg.h = fl.h;
    if (fl.cmd->count("--degree")) cfg.degree = fl.degree;
    if (fl.cmd->count("--c")) cfg.c = fl.c;
    if (fl.cmd->count("--split")) cfg.split = fl.split;
    if (fl.cmd->count("--overlap")) cfg.overlap = fl.overlap;
    if (fl.cmd->count("--f")) cfg.f = fl.f;
    if (fl.cmd->count("--tol")) cfg.tol = fl.tol;
    if (fl.cmd->count("--inner-tol")) cfg.inner_tol = fl.inner_tol;
    if (fl.cmd->count("--max-iter")) cfg.max_iter = fl.max_iter;
    if (fl.cmd->count("--out")) cfg.out = fl.out;
    // an explicit --h on an experiment narrows the default h sweep to it
    if (h_means_sweep && fl.cmd->count("--h") && cfg.hs.empty()) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", cfg.h);
        cfg.hs = buf;
    }
    return cfg;
}

int run_theory(const RunConfig& cfg, bool sweep) {
    Curve curve = make_curve(cfg.curve);
    const double L = curve.length();
    auto fr = cfg.split_fractions();
    auto ov = cfg.overlap_pair(L);
    auto c1 = theory::SchwarzConfig1D::from_split(cfg.c, L, fr[0], ov[0], ov[1]);
    auto m = theory::iteration_matrix(c1);

    std::printf("curve=%s L=%.12g c=%.12g\n", curve.name().c_str(), L, cfg.c);
    std::printf("a1=%.12g b1=%.12g a2=%.12g b2=%.12g\n", c1.a1, c1.b1, c1.a2, c1.b2);
    std::printf("l1=%.12g l2=%.12g delta1=%.12g delta2=%.12g\n", c1.l1(), c1.l2(),
                c1.delta1(), c1.delta2());
    std::printf("S1: p=%.12g q=%.12g r=%.12g s=%.12g\n", m.first.p, m.first.q, m.first.r,
                m.first.s);
    std::printf("S2: p=%.12g q=%.12g r=%.12g s=%.12g\n", m.second.p, m.second.q, m.second.r,
                m.second.s);
    std::printf("inf_norm=%.12g\n", theory::inf_norm(m));
    std::printf("rho=%.12g\n", theory::spectral_radius(m));
    std::printf("kappa_bound=%.12g\n", theory::kappa_bound(c1));

    if (std::abs(c1.l1() - c1.l2()) <= 1e-9 * L &&
        std::abs(c1.delta1() - c1.delta2()) <= 1e-9 * L) {
        // constant row and column sums characterize the equal-sized case
        double sums[8];
        for (int i = 0; i < 4; ++i) {
            sums[i] = sums[4 + i] = 0.0;
            for (int j = 0; j < 4; ++j) {
                sums[i] += m(i, j);
                sums[4 + i] += m(j, i);
            }
        }
        bool ok = true;
        for (int i = 1; i < 8; ++i)
            if (std::abs(sums[i] - sums[0]) > 1e-12) ok = false;
        std::printf("doubly-stochastic check %s\n", ok ? "PASS" : "FAIL");
        std::printf("equal_sized_kappa=%.12g\n", theory::equal_sized_kappa(cfg.c, L, ov[0]));
        std::printf("corollary_printed_kappa=%.12g\n",
                    theory::corollary_printed_kappa(cfg.c, L, ov[0]));
    }

    if (sweep) {
        std::filesystem::path dir(cfg.out);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec)
            throw ConfigError("cannot create output directory '" + dir.string() +
                              "': " + ec.message());
        cfg.save(dir / "run.config");
        CsvWriter csv(dir / "theory_sweep.csv", {"delta", "inf_norm", "rho", "kappa_bound"});
        for (int i = 1; i <= 10; ++i) {
            double delta = 0.02 * i * L;
            auto sc = theory::SchwarzConfig1D::from_split(cfg.c, L, fr[0], delta, delta);
            csv.row({delta, theory::inf_norm(theory::iteration_matrix(sc)),
                     theory::spectral_radius(theory::iteration_matrix(sc)),
                     theory::kappa_bound(sc)});
        }
        std::printf("wrote %s\n", (dir / "theory_sweep.csv").string().c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Helmholtz solver on closed curves via closest point extension, "
                 "with a two-subdomain Schwarz iteration"};
    app.set_help_flag("--help", "print this help and exit");
    app.require_subcommand(1);

    Flags solve_fl, ras_fl, theory_fl, mob_fl, ov_fl;
    bool sweep = false;
    int rc = 0;

    CLI::App* solve_cmd = app.add_subcommand("solve", "single-domain solve, writes solution.csv");
    add_common(solve_cmd, solve_fl);
    solve_cmd->callback([&] {
        RunConfig cfg = build_config(solve_fl);
        SolveSummary sum = run_solve(cfg);
        std::printf("unknowns=%d L=%.12g backward_error=%.3e\n", sum.unknowns, sum.length,
                    sum.residual);
        if (!std::isnan(sum.max_abs_err)) std::printf("max_abs_err=%.6e\n", sum.max_abs_err);
        std::printf("wrote %s\n", (std::filesystem::path(cfg.out) / "solution.csv").string().c_str());
    });

    CLI::App* ras_cmd =
        app.add_subcommand("ras", "two-subdomain Schwarz run, writes history.csv");
    add_common(ras_cmd, ras_fl);
    ras_cmd->callback([&] {
        RunConfig cfg = build_config(ras_fl);
        RasSummary sum = run_ras(cfg);
        std::printf("unknowns=%d L=%.12g iterations=%d converged=%s\n", sum.unknowns,
                    sum.length, sum.iterations, sum.converged ? "yes" : "no");
        std::printf("kappa_obs=%.9g kappa_bound=%.9g rho=%.9g\n", sum.kappa_observed,
                    sum.kappa_bound, sum.rho);
        std::printf("wrote %s\n", (std::filesystem::path(cfg.out) / "history.csv").string().c_str());
        if (!sum.converged) {
            std::fprintf(stderr, "error: iteration hit max_iter above tolerance\n");
            rc = 3;
        }
    });

    CLI::App* theory_cmd =
        app.add_subcommand("theory", "print the 1D contraction analysis for a configuration");
    add_common(theory_cmd, theory_fl);
    theory_cmd->add_flag("--sweep", sweep, "also write theory_sweep.csv over an overlap grid");
    theory_cmd->callback([&] { rc = run_theory(build_config(theory_fl), sweep); });

    CLI::App* exp_cmd = app.add_subcommand("experiment", "built-in studies");
    exp_cmd->set_help_flag("--help", "print this help and exit");
    exp_cmd->require_subcommand(1);

    CLI::App* mob_cmd = exp_cmd->add_subcommand(
        "mobius", "contraction vs spacing on the Mobius boundary, 1:2 split, 0.1L overlap");
    add_common(mob_cmd, mob_fl);
    mob_cmd->callback([&] {
        RunConfig cfg = build_config(mob_fl, true);
        MobiusResult res = run_mobius_experiment(cfg);
        std::printf("L=%.12g kappa_bound=%.9g rho=%.9g\n", res.length, res.kappa_bound,
                    res.rho);
        for (const MobiusRun& run : res.runs)
            std::printf("h=%g unknowns=%d sweeps=%d kappa_obs=%.9g\n", run.h, run.unknowns,
                        run.iterations, run.kappa_observed);
        std::printf("wrote %s\n",
                    (std::filesystem::path(cfg.out) / "mobius_summary.csv").string().c_str());
    });

    CLI::App* ov_cmd = exp_cmd->add_subcommand(
        "circle-overlap", "observed vs predicted contraction over an overlap sweep");
    add_common(ov_cmd, ov_fl);
    ov_cmd->callback([&] {
        RunConfig cfg = build_config(ov_fl, true);
        CircleOverlapResult res = run_circle_overlap_experiment(cfg);
        std::printf("rows=%zu\n", res.rows.size());
        std::printf("wrote %s\n",
                    (std::filesystem::path(cfg.out) / "circle_overlap.csv").string().c_str());
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return rc;
}
