#include <string>
#include <vector>

#include "cascademl/dataset.hpp"
#include "cascademl/error.hpp"
#include "text_util.hpp"

namespace cascademl {

namespace {

// Splits one CSV record. Double-quoted fields may contain commas; "" is an
// escaped quote.
std::vector<std::string> split_record(std::string_view line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back(detail::trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (quoted) throw ParseError(ParseError::Kind::Syntax, "unterminated quoted field", line_no);
    fields.emplace_back(detail::trim(cur));
    return fields;
}

}  // namespace

MultiLabelDataset parse_csv(std::string_view text, std::size_t label_count, LabelPosition position) {
    const auto lines = detail::split_lines(text);
    std::size_t header_idx = 0;
    while (header_idx < lines.size() && detail::trim(lines[header_idx]).empty()) ++header_idx;
    if (header_idx == lines.size()) throw ParseError(ParseError::Kind::Syntax, "empty CSV file");

    const auto header = split_record(lines[header_idx], header_idx + 1);
    const std::size_t width = header.size();
    if (label_count >= width)
        throw ParseError(ParseError::Kind::Syntax,
                         "CSV has " + std::to_string(width) + " columns, too few for " +
                             std::to_string(label_count) + " labels plus features",
                         header_idx + 1);

    const std::size_t d = width - label_count;
    const std::size_t label_start = position == LabelPosition::Last ? d : 0;
    const std::size_t feature_start = position == LabelPosition::Last ? 0 : label_count;

    MultiLabelDataset ds;
    ds.feature_names.assign(header.begin() + static_cast<std::ptrdiff_t>(feature_start),
                            header.begin() + static_cast<std::ptrdiff_t>(feature_start + d));
    ds.label_names.assign(header.begin() + static_cast<std::ptrdiff_t>(label_start),
                          header.begin() + static_cast<std::ptrdiff_t>(label_start + label_count));

    std::vector<double> xs, ys;
    std::size_t n = 0;
    for (std::size_t li = header_idx + 1; li < lines.size(); ++li) {
        if (detail::trim(lines[li]).empty()) continue;
        const std::size_t line_no = li + 1;
        const auto fields = split_record(lines[li], line_no);
        if (fields.size() != width)
            throw ParseError(ParseError::Kind::Ragged,
                             "expected " + std::to_string(width) + " fields, found " +
                                 std::to_string(fields.size()),
                             line_no);
        for (std::size_t c = 0; c < width; ++c) {
            const bool is_label = c >= label_start && c < label_start + label_count;
            const auto value = detail::parse_double(fields[c]);
            if (is_label) {
                if (!value || (*value != 0.0 && *value != 1.0))
                    throw ParseError(ParseError::Kind::InvalidLabel,
                                     "label cell '" + fields[c] + "' in column '" + header[c] +
                                         "' is not 0 or 1",
                                     line_no, c + 1);
                ys.push_back(*value);
            } else {
                if (!value)
                    throw ParseError(ParseError::Kind::NonNumeric,
                                     "feature cell '" + fields[c] + "' in column '" + header[c] +
                                         "' is not numeric",
                                     line_no, c + 1);
                xs.push_back(*value);
            }
        }
        ++n;
    }
    if (n == 0) throw ParseError(ParseError::Kind::Syntax, "CSV has a header but no data rows");

    ds.x = Matrix(n, d, std::move(xs));
    ds.y = Matrix(n, label_count, std::move(ys));
    ds.validate();
    return ds;
}

MultiLabelDataset load_csv(const std::filesystem::path& path, std::size_t label_count,
                           LabelPosition position) {
    return parse_csv(detail::read_file(path), label_count, position);
}

}  // namespace cascademl
