#include "cpschwarz/runconfig.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "cpschwarz/errors.hpp"

namespace cps {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& value) {
    const char* begin = value.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || !std::isfinite(v))
        throw ConfigError("config: bad numeric value for '" + key + "': '" + value + "'");
    return v;
}

int parse_int(const std::string& key, const std::string& value) {
    const char* begin = value.c_str();
    char* end = nullptr;
    long v = std::strtol(begin, &end, 10);
    if (end == begin || *end != '\0')
        throw ConfigError("config: bad integer value for '" + key + "': '" + value + "'");
    return static_cast<int>(v);
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// One overlap token: "<x>" absolute arclength or "<x>L" multiple of the
// curve length.
double overlap_token(const std::string& tok, double length) {
    std::string t = trim(tok);
    bool of_length = !t.empty() && (t.back() == 'L' || t.back() == 'l');
    if (of_length) t.pop_back();
    double v = parse_double("overlap", t);
    return of_length ? v * length : v;
}

}  // namespace

void RunConfig::apply(const std::string& key, const std::string& value) {
    if (key == "curve") curve = value;
    else if (key == "h") h = parse_double(key, value);
    else if (key == "hs") hs = value;
    else if (key == "degree") degree = parse_int(key, value);
    else if (key == "c") c = parse_double(key, value);
    else if (key == "split") split = value;
    else if (key == "overlap") overlap = value;
    else if (key == "f") f = value;
    else if (key == "tol") tol = parse_double(key, value);
    else if (key == "inner_tol") inner_tol = parse_double(key, value);
    else if (key == "max_iter") max_iter = parse_int(key, value);
    else if (key == "out") out = value;
    else throw ConfigError("config: unknown key '" + key + "'");
}

std::array<double, 2> RunConfig::split_fractions() const {
    auto colon = split.find(':');
    if (colon == std::string::npos)
        throw ConfigError("config: split must be 'a:b', got '" + split + "'");
    double a = parse_double("split", trim(split.substr(0, colon)));
    double b = parse_double("split", trim(split.substr(colon + 1)));
    if (!(a > 0.0) || !(b > 0.0))
        throw ConfigError("config: split ratios must be positive, got '" + split + "'");
    return {a / (a + b), b / (a + b)};
}

std::vector<double> RunConfig::h_list() const {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= hs.size() && !hs.empty()) {
        std::size_t comma = hs.find(',', pos);
        std::string tok = trim(hs.substr(pos, comma == std::string::npos ? std::string::npos
                                                                         : comma - pos));
        if (!tok.empty()) {
            double v = parse_double("hs", tok);
            if (!(v > 0.0)) throw ConfigError("config: hs entries must be positive");
            out.push_back(v);
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::array<double, 2> RunConfig::overlap_pair(double length) const {
    auto comma = overlap.find(',');
    if (comma == std::string::npos) {
        double v = overlap_token(overlap, length);
        return {v, v};
    }
    return {overlap_token(overlap.substr(0, comma), length),
            overlap_token(overlap.substr(comma + 1), length)};
}

void RunConfig::write(std::ostream& out_stream) const {
    out_stream << "curve=" << curve << '\n'
               << "h=" << fmt_double(h) << '\n'
               << "hs=" << hs << '\n'
               << "degree=" << degree << '\n'
               << "c=" << fmt_double(c) << '\n'
               << "split=" << split << '\n'
               << "overlap=" << overlap << '\n'
               << "f=" << f << '\n'
               << "tol=" << fmt_double(tol) << '\n'
               << "inner_tol=" << fmt_double(inner_tol) << '\n'
               << "max_iter=" << max_iter << '\n'
               << "out=" << out << '\n';
}

void RunConfig::save(const std::filesystem::path& path) const {
    std::ofstream file(path);
    if (!file) throw ConfigError("config: cannot open '" + path.string() + "' for writing");
    write(file);
    if (!file) throw ConfigError("config: write to '" + path.string() + "' failed");
}

RunConfig RunConfig::parse(std::istream& in) {
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) +
                              " is not 'key=value': '" + t + "'");
        cfg.apply(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) throw ConfigError("config: cannot open '" + path.string() + "'");
    return parse(file);
}

std::function<double(double)> make_rhs(const std::string& name, double length) {
    if (name == "sin-mode-1") {
        double k = 2.0 * M_PI / length;
        return [k](double s) { return std::sin(k * s); };
    }
    if (name == "zero") return [](double) { return 0.0; };
    throw ConfigError("config: unknown right hand side '" + name + "'");
}

}  // namespace cps
