#include "cpschwarz/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cpschwarz/band.hpp"
#include "cpschwarz/csv.hpp"
#include "cpschwarz/curve.hpp"
#include "cpschwarz/errors.hpp"
#include "cpschwarz/schwarz.hpp"
#include "cpschwarz/svg.hpp"

namespace cps {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v, const char* spec = "%g") {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

struct Problem {
    Curve curve;
    Band band;
    SparseMatrix a;
    std::vector<double> b;
};

// Assembles the discrete operator and drops the intermediates immediately;
// the residual-exchange sweeps never read the extension matrix again, and at
// the finest spacings those factors dominate the footprint.
Problem build_problem(const RunConfig& cfg) {
    Curve curve = make_curve(cfg.curve);
    Band band = build_band(curve, cfg.h, cfg.degree);
    SparseMatrix a;
    {
        SparseMatrix ext = extension_matrix(band, curve);
        SparseMatrix lap = laplacian(band);
        a = assemble_helmholtz(band, cfg.c, ext, lap);
    }
    std::vector<double> b = assemble_rhs(band, make_rhs(cfg.f, curve.length()));
    return {std::move(curve), std::move(band), std::move(a), std::move(b)};
}

fs::path prepare_out(const RunConfig& cfg) {
    fs::path dir(cfg.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw ConfigError("cannot create output directory '" + dir.string() +
                          "': " + ec.message());
    cfg.save(dir / "run.config");
    return dir;
}

class RunLog {
public:
    explicit RunLog(const fs::path& path) : out_(path) {
        if (!out_) throw ConfigError("log: cannot open '" + path.string() + "' for writing");
    }
    void line(const std::string& s) { out_ << s << '\n'; }

private:
    std::ofstream out_;
};

void write_subdomains(const fs::path& path, const Band& band, const Partition& part) {
    std::vector<int> owner(band.size(), 0);
    for (int i : part.owned[0]) owner[i] = 1;
    for (int i : part.owned[1]) owner[i] = 2;

    std::vector<std::string> cols;
    if (band.dim() == 2) cols = {"x", "y", "s", "owner"};
    else cols = {"x", "y", "z", "s", "owner"};
    CsvWriter csv(path, cols);
    for (int i = 0; i < band.size(); ++i) {
        const BandPoint& p = band.point(i);
        if (band.dim() == 2)
            csv.row({p.x[0], p.x[1], p.s, static_cast<double>(owner[i])});
        else
            csv.row({p.x[0], p.x[1], p.x[2], p.s, static_cast<double>(owner[i])});
    }
}

double kappa_or_nan(std::span<const double> history) {
    try {
        return observed_kappa(history);
    } catch (const Error&) {
        return kNaN;
    }
}

RasOptions outer_options(const RunConfig& cfg) {
    RasOptions opts;
    opts.inner_tol = cfg.inner_tol;
    opts.tol_relative = true;
    return opts;
}

}  // namespace

SolveSummary run_solve(const RunConfig& cfg) {
    fs::path dir = prepare_out(cfg);
    RunLog log(dir / "run.log");
    Problem p = build_problem(cfg);
    const double length = p.curve.length();

    SparseFactor factor(p.a);
    std::vector<double> u = factor.solve_refined(p.a, p.b, cfg.inner_tol);

    SolveSummary sum;
    sum.unknowns = p.band.size();
    sum.length = length;
    {
        std::vector<double> r = residual(p.a, u, p.b);
        sum.residual = norm2(r) / (norm2(p.b) + op_inf_norm(p.a) * norm2(u) + 1e-300);
    }

    const int n_samples = 256;
    std::vector<double> s(n_samples);
    for (int i = 0; i < n_samples; ++i) s[i] = length * i / n_samples;
    std::vector<double> us = restrict_to_curve(p.band, p.curve, u, s);

    {
        CsvWriter csv(dir / "solution.csv", {"s", "u"});
        for (int i = 0; i < n_samples; ++i) csv.row({s[i], us[i]});
    }

    // closed forms: any circle with the single-mode load, or a zero load
    sum.max_abs_err = kNaN;
    std::function<double(double)> exact;
    if (cfg.f == "zero") {
        exact = [](double) { return 0.0; };
    } else if (cfg.f == "sin-mode-1" && p.curve.name().rfind("circle", 0) == 0) {
        double k = 2.0 * M_PI / length;
        double amp = 1.0 / (cfg.c + k * k);
        exact = [k, amp](double sv) { return amp * std::sin(k * sv); };
    }
    if (exact) {
        CsvWriter csv(dir / "error.csv", {"s", "u", "u_exact", "abs_err"});
        double worst = 0.0;
        for (int i = 0; i < n_samples; ++i) {
            double ue = exact(s[i]);
            double err = std::abs(us[i] - ue);
            worst = std::max(worst, err);
            csv.row({s[i], us[i], ue, err});
        }
        sum.max_abs_err = worst;
    }

    log.line("command: solve");
    log.line("curve: " + p.curve.name() + "  L=" + fmt(length, "%.12g"));
    log.line("h=" + fmt(cfg.h) + " degree=" + std::to_string(cfg.degree) + " c=" + fmt(cfg.c) +
             " unknowns=" + std::to_string(sum.unknowns));
    log.line("backward_error=" + fmt(sum.residual, "%.3e"));
    if (exact) log.line("max_abs_err=" + fmt(sum.max_abs_err, "%.6e"));
    return sum;
}

RasSummary run_ras(const RunConfig& cfg) {
    fs::path dir = prepare_out(cfg);
    RunLog log(dir / "run.log");
    Problem p = build_problem(cfg);
    const double length = p.curve.length();

    auto fr = cfg.split_fractions();
    auto ov = cfg.overlap_pair(length);
    Partition part = make_partition(p.band, length, {fr[0], fr[1]}, {ov[0], ov[1]}, p.a);
    theory::SchwarzConfig1D cfg1d = part.config1d(cfg.c);

    RasResult res = ras_solve(p.a, p.b, part, SparseMatrix(), {}, cfg.tol, cfg.max_iter,
                              outer_options(cfg));

    RasSummary sum;
    sum.unknowns = p.band.size();
    sum.length = length;
    sum.iterations = res.iterations;
    sum.converged = res.converged;
    sum.kappa_observed = kappa_or_nan(res.error_history);
    sum.kappa_bound = theory::kappa_bound(cfg1d);
    sum.rho = theory::spectral_radius(theory::iteration_matrix(cfg1d));
    sum.error_history = res.error_history;

    {
        CsvWriter csv(dir / "history.csv", {"iter", "error"});
        for (std::size_t k = 0; k < res.error_history.size(); ++k)
            csv.row({static_cast<double>(k), res.error_history[k]});
    }
    write_subdomains(dir / "subdomains.csv", p.band, part);

    {
        LinePlot plot("Schwarz convergence, " + p.curve.name(), "iteration", "max error");
        plot.log_y(true);
        PlotSeries obs;
        obs.label = "observed";
        for (std::size_t k = 0; k < res.error_history.size(); ++k) {
            obs.x.push_back(static_cast<double>(k));
            obs.y.push_back(res.error_history[k]);
        }
        plot.add(std::move(obs));

        if (res.error_history.size() > 2) {
            PlotSeries th;
            th.label = "theory slope";
            th.dashed = true;
            double anchor = res.error_history[2];
            for (std::size_t k = 2; k < res.error_history.size(); ++k) {
                th.x.push_back(static_cast<double>(k));
                th.y.push_back(anchor *
                               std::pow(sum.kappa_bound, 0.5 * static_cast<double>(k - 2)));
            }
            plot.add(std::move(th));
        }
        plot.write(dir / "convergence.svg");
    }

    log.line("command: ras");
    log.line("curve: " + p.curve.name() + "  L=" + fmt(length, "%.12g"));
    log.line("h=" + fmt(cfg.h) + " c=" + fmt(cfg.c) + " split=" + cfg.split + " overlap=" +
             cfg.overlap + " unknowns=" + std::to_string(sum.unknowns));
    log.line("intervals: a1=" + fmt(part.a1, "%.9g") + " b1=" + fmt(part.b1, "%.9g") +
             " a2=" + fmt(part.a2, "%.9g") + " b2=" + fmt(part.b2, "%.9g"));
    log.line("iterations=" + std::to_string(sum.iterations) +
             " converged=" + (sum.converged ? std::string("yes") : std::string("no")));
    log.line("kappa_obs=" + fmt(sum.kappa_observed, "%.6g") + " kappa_bound=" +
             fmt(sum.kappa_bound, "%.6g") + " rho=" + fmt(sum.rho, "%.6g"));
    return sum;
}

MobiusResult run_mobius_experiment(const RunConfig& cfg) {
    RunConfig local = cfg;
    local.curve = "mobius-boundary";
    local.split = "1:2";
    local.overlap = "0.1L";
    fs::path dir = prepare_out(local);
    RunLog log(dir / "run.log");

    std::vector<double> hs = local.h_list();
    const bool default_hs = hs.empty();
    if (default_hs) hs = {0.05, 0.02, 0.01};

    log.line("experiment: mobius");
    log.line("split=1:2 overlap=0.1L c=" + fmt(local.c) + " f=" + local.f);
    {
        std::string hline = "h set:";
        for (double h : hs) hline += " " + fmt(h);
        if (default_hs)
            hline += " (default; finer spacings cost minutes and are reachable via hs=)";
        log.line(hline);
    }

    MobiusResult result;
    LinePlot plot("RAS contraction, Mobius boundary", "double iteration", "max error");
    plot.log_y(true);

    const int max_sweeps = 2 * local.max_iter;
    for (double h : hs) {
        local.h = h;
        Problem p = build_problem(local);
        const double length = p.curve.length();
        auto fr = local.split_fractions();
        auto ov = local.overlap_pair(length);
        Partition part = make_partition(p.band, length, {fr[0], fr[1]}, {ov[0], ov[1]}, p.a);
        if (result.runs.empty()) {
            result.length = length;
            theory::SchwarzConfig1D cfg1d = part.config1d(local.c);
            result.kappa_bound = theory::kappa_bound(cfg1d);
            result.rho = theory::spectral_radius(theory::iteration_matrix(cfg1d));
            log.line("L=" + fmt(length, "%.12g") + " kappa_bound=" +
                     fmt(result.kappa_bound, "%.9g") + " rho=" + fmt(result.rho, "%.9g"));
        }

        RasResult res = ras_solve(p.a, p.b, part, SparseMatrix(), {}, local.tol, max_sweeps,
                                  outer_options(local));

        MobiusRun run;
        run.h = h;
        run.unknowns = p.band.size();
        run.iterations = res.iterations;
        run.converged = res.converged;
        run.kappa_observed = kappa_or_nan(res.error_history);
        run.error_history = res.error_history;

        // double-iteration table with the predicted decay alongside
        {
            CsvWriter csv(dir / ("mobius_h" + fmt(h) + ".csv"), {"n", "error", "theory"});
            double e0 = res.error_history.empty() ? 0.0 : res.error_history[0];
            for (std::size_t i = 0; 2 * i < res.error_history.size(); ++i)
                csv.row({static_cast<double>(i), res.error_history[2 * i],
                         e0 * std::pow(result.kappa_bound, static_cast<double>(i))});
        }
        {
            PlotSeries series;
            series.label = "h=" + fmt(h);
            series.markers = true;
            for (std::size_t i = 0; 2 * i < res.error_history.size(); ++i) {
                series.x.push_back(static_cast<double>(i));
                series.y.push_back(res.error_history[2 * i]);
            }
            plot.add(std::move(series));
        }

        log.line("h=" + fmt(h) + " unknowns=" + std::to_string(run.unknowns) +
                 " sweeps=" + std::to_string(run.iterations) + " converged=" +
                 (run.converged ? std::string("yes") : std::string("no")) +
                 " kappa_obs=" + fmt(run.kappa_observed, "%.9g"));

        if (h == hs.back()) write_subdomains(dir / "mobius_subdomains.csv", p.band, part);
        result.runs.push_back(std::move(run));
    }

    {
        CsvWriter csv(dir / "mobius_summary.csv",
                      {"h", "unknowns", "iterations", "kappa_obs", "kappa_bound"});
        for (const MobiusRun& run : result.runs)
            csv.row({run.h, static_cast<double>(run.unknowns),
                     static_cast<double>(run.iterations), run.kappa_observed,
                     result.kappa_bound});
    }
    {
        PlotSeries th;
        th.label = "theory";
        th.dashed = true;
        const std::vector<double>& hist = result.runs.back().error_history;
        double e0 = hist.empty() ? 1.0 : hist[0];
        for (std::size_t i = 0; 2 * i < hist.size(); ++i) {
            th.x.push_back(static_cast<double>(i));
            th.y.push_back(e0 * std::pow(result.kappa_bound, static_cast<double>(i)));
        }
        plot.add(std::move(th));
        plot.write(dir / "mobius.svg");
    }
    return result;
}

CircleOverlapResult run_circle_overlap_experiment(const RunConfig& cfg) {
    RunConfig local = cfg;
    local.curve = "circle";
    local.split = "1:1";
    fs::path dir = prepare_out(local);
    RunLog log(dir / "run.log");

    std::vector<double> hs = local.h_list();
    const bool default_hs = hs.empty();
    if (default_hs) hs = {0.05, 0.01, 0.005};

    log.line("experiment: circle-overlap");
    log.line("split=1:1 c=" + fmt(local.c) + " f=" + local.f);
    {
        std::string hline = "h set:";
        for (double h : hs) hline += " " + fmt(h);
        if (default_hs) hline += " (default; extend via hs=)";
        log.line(hline);
    }

    CircleOverlapResult result;
    CsvWriter csv(dir / "circle_overlap.csv", {"h", "delta", "kappa_obs", "kappa_theory"});
    LinePlot plot("Observed vs predicted contraction, unit circle", "overlap delta", "kappa");
    plot.log_y(true);

    std::vector<double> fractions;
    for (int i = 1; i <= 10; ++i) fractions.push_back(0.02 * i);

    bool theory_plotted = false;
    for (double h : hs) {
        local.h = h;
        Problem p = build_problem(local);
        const double length = p.curve.length();

        PlotSeries series;
        series.label = "h=" + fmt(h);
        series.markers = true;
        PlotSeries theory_series;
        theory_series.label = "theory";
        theory_series.dashed = true;

        for (double frac : fractions) {
            double delta = frac * length;
            OverlapRow row;
            row.h = h;
            row.delta_fraction = frac;
            try {
                Partition part =
                    make_partition(p.band, length, {0.5, 0.5}, {delta, delta}, p.a);
                row.kappa_theory = theory::kappa_bound(part.config1d(local.c));
                RasResult res = ras_solve(p.a, p.b, part, SparseMatrix(), {}, local.tol,
                                          local.max_iter, outer_options(local));
                row.kappa_observed = kappa_or_nan(res.error_history);
                log.line("h=" + fmt(h) + " delta=" + fmt(delta, "%.9g") + " sweeps=" +
                         std::to_string(res.iterations) + " kappa_obs=" +
                         fmt(row.kappa_observed, "%.9g") + " kappa_theory=" +
                         fmt(row.kappa_theory, "%.9g"));
            } catch (const ConfigError& err) {
                std::fprintf(stderr, "warning: skipping h=%s delta=%s: %s\n", fmt(h).c_str(),
                             fmt(delta, "%.9g").c_str(), err.what());
                log.line("h=" + fmt(h) + " delta=" + fmt(delta, "%.9g") + " skipped: " +
                         err.what());
                continue;
            }
            csv.row({row.h, delta, row.kappa_observed, row.kappa_theory});
            series.x.push_back(delta);
            series.y.push_back(row.kappa_observed);
            if (!theory_plotted) {
                theory_series.x.push_back(delta);
                theory_series.y.push_back(row.kappa_theory);
            }
            result.rows.push_back(row);
        }
        plot.add(std::move(series));
        if (!theory_plotted && !theory_series.x.empty()) {
            plot.add(std::move(theory_series));
            theory_plotted = true;
        }
    }
    plot.write(dir / "circle_overlap.svg");
    return result;
}

}  // namespace cps
