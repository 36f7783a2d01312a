#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace cps {

// Parameters shared by the solver drivers.  Configs live in plain
// `key=value` files; '#' starts a comment line and blank lines are ignored.
// `split` keeps its raw "a:b" ratio token and `overlap` keeps its raw token
// (absolute width, or a multiple of the curve length when suffixed with 'L',
// optionally a comma separated pair), so that saving a loaded config
// reproduces it byte for byte.
struct RunConfig {
    std::string curve = "circle";
    double h = 0.05;
    std::string hs;  ///< comma separated h sweep for experiments; empty = driver default
    int degree = 4;
    double c = 1.0;
    std::string split = "1:1";
    std::string overlap = "0.1L";
    std::string f = "sin-mode-1";
    /// Outer stopping tolerance, relative to the initial error; the default
    /// is the averaging cutoff 1e3 * machine epsilon.
    double tol = 2.220446049250313e-13;
    double inner_tol = 1e-12;
    int max_iter = 400;
    std::string out = "out";

    // Assigns one key.  Throws ConfigError for unknown keys or unparsable
    // values; numeric validation beyond syntax happens where the value is
    // consumed.
    void apply(const std::string& key, const std::string& value);

    // Fractions of total arclength per subdomain, normalized to sum to 1.
    std::array<double, 2> split_fractions() const;

    // Overlap widths (delta1, delta2) in arclength units for a curve of
    // length `length`.  A single token applies to both interfaces.
    std::array<double, 2> overlap_pair(double length) const;

    // Parsed `hs`; empty when unset.
    std::vector<double> h_list() const;

    void write(std::ostream& out_stream) const;
    void save(const std::filesystem::path& path) const;

    static RunConfig parse(std::istream& in);
    static RunConfig load(const std::filesystem::path& path);
};

// Right hand side selector: "sin-mode-1" is sin(2*pi*s/L), "zero" is the
// zero function.
std::function<double(double)> make_rhs(const std::string& name, double length);

}  // namespace cps
