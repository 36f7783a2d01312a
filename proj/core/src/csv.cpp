#include "cpschwarz/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "cpschwarz/errors.hpp"

namespace cps {

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns)
    : ncols_(columns.size()), path_(path) {
    if (columns.empty()) throw ConfigError("csv: need at least one column");
    out_.open(path);
    if (!out_) throw ConfigError("csv: cannot open '" + path.string() + "' for writing");
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) out_ << ',';
        out_ << columns[i];
    }
    out_ << '\n';
}

void CsvWriter::row(std::span<const double> values) {
    if (values.size() != ncols_)
        throw DimensionMismatch("csv: row width does not match the header");
    char buf[40];
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out_ << ',';
        std::snprintf(buf, sizeof buf, "%.17g", values[i]);
        out_ << buf;
    }
    out_ << '\n';
    if (!out_) throw ConfigError("csv: write to '" + path_.string() + "' failed");
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("csv: cannot open '" + path.string() + "'");
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("csv: '" + path.string() + "' is empty");
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) table.columns.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ls(line);
        while (std::getline(ls, cell, ',')) {
            char* end = nullptr;
            double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str())
                throw ConfigError("csv: non-numeric cell '" + cell + "' in " + path.string());
            row.push_back(v);
        }
        if (row.size() != table.columns.size())
            throw ConfigError("csv: ragged row in " + path.string());
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace cps
