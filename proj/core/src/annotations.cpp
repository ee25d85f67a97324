#include "cat/annotations.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "cat/errors.hpp"
#include "cat/io_util.hpp"

namespace cat {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream iss(line);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

bool is_count_line(const std::vector<std::string>& tokens) {
    if (tokens.size() != 1) return false;
    const std::string& t = tokens[0];
    return !t.empty() && std::all_of(t.begin(), t.end(),
                                     [](unsigned char c) { return std::isdigit(c); });
}

std::uint8_t parse_value(const std::string& tok, const std::string& origin, std::size_t line_no) {
    if (tok == "1" || tok == "+1") return 1;
    if (tok == "-1" || tok == "0") return 0;
    throw ParseError(origin + ":" + std::to_string(line_no) + ": unknown attribute value '" +
                     tok + "' (expected -1, +1, 0 or 1)");
}

} // namespace

std::size_t AnnotationTable::attribute_index(const std::string& name) const {
    const auto it = std::find(attributes.begin(), attributes.end(), name);
    if (it == attributes.end())
        throw IndexError("unknown attribute '" + name + "'");
    return static_cast<std::size_t>(it - attributes.begin());
}

bool AnnotationTable::has_attribute(const std::string& name) const {
    return std::find(attributes.begin(), attributes.end(), name) != attributes.end();
}

std::uint8_t AnnotationTable::value(std::size_t row, std::size_t col) const {
    if (row >= values.size())
        throw IndexError("annotation row " + std::to_string(row) + " out of range");
    if (col >= attributes.size())
        throw IndexError("annotation column " + std::to_string(col) + " out of range");
    return values[row][col];
}

void AnnotationTable::validate() const {
    if (ids.size() != values.size())
        throw ConfigError("annotation table has " + std::to_string(ids.size()) + " ids but " +
                          std::to_string(values.size()) + " value rows");
    std::unordered_set<std::string> seen_names(attributes.begin(), attributes.end());
    if (seen_names.size() != attributes.size())
        throw ConfigError("annotation table has duplicate attribute names");
    std::unordered_set<std::string> seen_ids;
    for (std::size_t r = 0; r < ids.size(); ++r) {
        if (!seen_ids.insert(ids[r]).second)
            throw ConfigError("duplicate image id '" + ids[r] + "'");
        if (values[r].size() != attributes.size())
            throw ConfigError("annotation row " + std::to_string(r) + " has " +
                              std::to_string(values[r].size()) + " values, expected " +
                              std::to_string(attributes.size()));
        for (const auto v : values[r])
            if (v > 1)
                throw ConfigError("annotation values must be 0 or 1");
    }
}

AnnotationTable parse_annotations_text(const std::string& content, const std::string& origin) {
    std::istringstream in(content);
    std::string line;
    std::size_t line_no = 0;

    // Header: optional count line, then the attribute-name line.
    std::vector<std::string> header;
    bool have_count = false;
    std::size_t declared_rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        if (!have_count && is_count_line(tokens)) {
            have_count = true;
            declared_rows = std::stoull(tokens[0]);
            continue;
        }
        header = std::move(tokens);
        break;
    }
    if (header.empty())
        throw ParseError(origin + ": missing attribute header line");

    AnnotationTable table;
    table.attributes = header;

    std::unordered_set<std::string> seen_ids;
    while (std::getline(in, line)) {
        ++line_no;
        auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        if (tokens.size() != header.size() + 1)
            throw ParseError(origin + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size() + 1) + " fields (id + " +
                             std::to_string(header.size()) + " values), got " +
                             std::to_string(tokens.size()));
        if (!seen_ids.insert(tokens[0]).second)
            throw ParseError(origin + ":" + std::to_string(line_no) + ": duplicate image id '" +
                             tokens[0] + "'");
        std::vector<std::uint8_t> row;
        row.reserve(header.size());
        for (std::size_t c = 1; c < tokens.size(); ++c)
            row.push_back(parse_value(tokens[c], origin, line_no));
        table.ids.push_back(tokens[0]);
        table.values.push_back(std::move(row));
    }

    if (have_count && declared_rows != table.row_count())
        throw ParseError(origin + ": count line declares " + std::to_string(declared_rows) +
                         " rows but file has " + std::to_string(table.row_count()));
    table.validate();
    return table;
}

AnnotationTable parse_annotations(const std::string& path) {
    return parse_annotations_text(read_file(path), path);
}

void save_annotations(const AnnotationTable& table, const std::string& path) {
    table.validate();
    std::ostringstream out;
    out << table.row_count() << "\n";
    for (std::size_t c = 0; c < table.attributes.size(); ++c) {
        if (c) out << ' ';
        out << table.attributes[c];
    }
    out << "\n";
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        out << table.ids[r];
        for (const auto v : table.values[r]) out << (v ? "  1" : " -1");
        out << "\n";
    }
    atomic_write(path, out.str());
}

} // namespace cat
