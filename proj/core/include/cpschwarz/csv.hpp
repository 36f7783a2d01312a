#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace cps {

/// Writes numeric CSV with a fixed header; every value is formatted with 17
/// significant digits so identical data produces identical bytes.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns);

    void row(std::span<const double> values);
    void row(std::initializer_list<double> values) {
        row(std::span<const double>(values.begin(), values.size()));
    }

private:
    std::ofstream out_;
    std::size_t ncols_;
    std::filesystem::path path_;
};

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace cps
