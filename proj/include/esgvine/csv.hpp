#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace esgvine::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    /// 1-based line number in the source file for each row (diagnostics).
    std::vector<std::size_t> line_numbers;

    std::size_t column(const std::string& name) const;  // throws DataError
};

/// Reads a comma-separated file. Blank lines and lines starting with '#'
/// are skipped; the first remaining line is the header. Fields may be
/// double-quoted.
Table read(const std::filesystem::path& path);

double parse_double(const std::string& cell, const std::string& context);
int parse_int(const std::string& cell, const std::string& context);

std::vector<std::string> split_line(const std::string& line);

/// Quotes a field if it contains a comma, quote or newline.
std::string escape(const std::string& field);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
/// Fixed notation with the given number of decimals.
std::string format_fixed(double value, int decimals);

}  // namespace esgvine::csv
