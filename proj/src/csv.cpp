#include "optosense/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace optosense {

namespace {

bool needs_quotes(const std::string& cell) {
    return cell.find_first_of(",\"\r\n") != std::string::npos;
}

void write_cell(std::ostream& out, const std::string& cell) {
    if (!needs_quotes(cell)) {
        out << cell;
        return;
    }
    out << '"';
    for (char c : cell) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

// Splits one record, honouring quoted cells. `pos` advances past the line end.
std::vector<std::string> read_record(const std::string& text, std::size_t& pos, std::size_t line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    while (pos < text.size()) {
        const char c = text[pos++];
        if (quoted) {
            if (c == '"') {
                if (pos < text.size() && text[pos] == '"') {
                    cell += '"';
                    ++pos;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else if (c == '\n') {
            break;
        } else if (c != '\r') {
            cell += c;
        }
    }
    if (quoted) {
        throw std::runtime_error("csv line " + std::to_string(line) + ": unterminated quote");
    }
    cells.push_back(std::move(cell));
    return cells;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) {
        throw std::runtime_error("format_double: conversion failed");
    }
    return std::string(buf, ptr);
}

void CsvTable::add_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    add_row(std::move(cells));
}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != header.size()) {
        throw std::invalid_argument("CsvTable: row has " + std::to_string(cells.size()) + " cells, header has " +
                                    std::to_string(header.size()));
    }
    rows.push_back(std::move(cells));
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw std::out_of_range("CsvTable: no column '" + name + "'");
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& s = rows[r][c];
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
            throw std::runtime_error("csv row " + std::to_string(r + 2) + ", column " + name + ": '" + s +
                                     "' is not a number");
        }
        out.push_back(v);
    }
    return out;
}

std::string to_csv_text(const CsvTable& table) {
    std::ostringstream out;
    auto emit = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            write_cell(out, cells[i]);
        }
        out << "\r\n";
    };
    emit(table.header);
    for (const auto& row : table.rows) emit(row);
    return out.str();
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << to_csv_text(table);
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::size_t pos = 0;
    std::size_t line = 1;
    if (text.empty()) {
        throw std::runtime_error("csv: empty input");
    }
    table.header = read_record(text, pos, line);
    while (pos < text.size()) {
        ++line;
        auto cells = read_record(text, pos, line);
        if (cells.size() == 1 && cells[0].empty()) continue;
        if (cells.size() != table.header.size()) {
            throw std::runtime_error("csv line " + std::to_string(line) + ": expected " +
                                     std::to_string(table.header.size()) + " cells");
        }
        table.rows.push_back(std::move(cells));
    }
    return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str());
}

}  // namespace optosense
