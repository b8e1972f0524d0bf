#pragma once

#include <string>
#include <vector>

namespace ace {

// Minimal CSV support for the formats this project owns. Fields are quoted
// with '"' only when they contain a comma, quote, or newline.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

std::string csv_escape(const std::string& field);
void write_csv(const CsvTable& table, const std::string& path);

}  // namespace ace
