#pragma once

// Minimal CSV reading for the bundled data tables: comma separated, optional
// double-quoted fields, '#' comment lines, blank lines ignored.

#include <filesystem>
#include <string>
#include <vector>

namespace spdc::detail {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;
};

std::vector<std::string> split_csv_line(const std::string& line);

/// First non-comment line is the header.
CsvTable read_csv(const std::filesystem::path& file);

double parse_double(const std::string& text, const std::string& context);

}  // namespace spdc::detail
