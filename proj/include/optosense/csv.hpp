#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace optosense {

// Comma-delimited table with a single header row. Every column name carries
// its unit as a suffix (freq_hz, s_min_n2_per_hz, ...).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(const std::vector<double>& values);
    void add_row(std::vector<std::string> cells);
    std::size_t column(const std::string& name) const;  // throws std::out_of_range
    std::vector<double> numeric_column(const std::string& name) const;
};

// Shortest text that parses back to the identical double.
std::string format_double(double v);

void write_csv(const std::filesystem::path& path, const CsvTable& table);
std::string to_csv_text(const CsvTable& table);

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace optosense
