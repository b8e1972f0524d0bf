#include "ace/csv.hpp"

#include <fstream>
#include <sstream>

#include "ace/errors.hpp"

namespace ace {

int CsvTable::column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

namespace {

std::vector<std::string> parse_line(const std::string& text, size_t& pos) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    while (pos < text.size()) {
        char c = text[pos];
        if (quoted) {
            if (c == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    field.push_back('"');
                    ++pos;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
            ++pos;
            fields.push_back(std::move(field));
            return fields;
        } else {
            field.push_back(c);
        }
        ++pos;
    }
    fields.push_back(std::move(field));
    return fields;
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    size_t pos = 0;
    if (text.empty()) throw ParseError("empty CSV content");
    table.header = parse_line(text, pos);
    while (pos < text.size()) {
        auto row = parse_line(text, pos);
        if (row.size() == 1 && row[0].empty()) continue;  // blank line
        if (row.size() != table.header.size())
            throw ParseError("CSV row has " + std::to_string(row.size()) +
                             " fields, header has " + std::to_string(table.header.size()));
        table.rows.push_back(std::move(row));
    }
    return table;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open CSV file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_csv(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::string csv_escape(const std::string& field) {
    bool needs = field.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_csv(const CsvTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write CSV file: " + path);
    auto emit = [&out](const std::vector<std::string>& row) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << csv_escape(row[i]);
        }
        out << '\n';
    };
    emit(table.header);
    for (const auto& row : table.rows) emit(row);
    if (!out) throw Error("write failed: " + path);
}

}  // namespace ace
