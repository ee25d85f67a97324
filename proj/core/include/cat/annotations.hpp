#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cat {

/// Binary attribute annotations for a set of images, in the CelebA list
/// layout: optional row-count line, one line of attribute names, then one
/// line per image ("<id> <v1> <v2> ...") with values in {-1, +1} or {0, 1}.
/// Values are normalized to 0/1 on parse.
struct AnnotationTable {
    std::vector<std::string> attributes;
    std::vector<std::string> ids;
    std::vector<std::vector<std::uint8_t>> values; // values[row][col] in {0, 1}

    std::size_t row_count() const { return ids.size(); }
    std::size_t attribute_count() const { return attributes.size(); }

    /// Index of `name` in `attributes`; throws IndexError when absent.
    std::size_t attribute_index(const std::string& name) const;
    bool has_attribute(const std::string& name) const;

    std::uint8_t value(std::size_t row, std::size_t col) const;

    void validate() const;
};

AnnotationTable parse_annotations(const std::string& path);

/// Parse from an in-memory buffer; `origin` names the source in errors.
AnnotationTable parse_annotations_text(const std::string& content,
                                       const std::string& origin);

/// Writes the CelebA list layout (count line, header line, -1/+1 rows).
void save_annotations(const AnnotationTable& table, const std::string& path);

} // namespace cat
