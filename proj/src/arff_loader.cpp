#include <algorithm>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "cascademl/dataset.hpp"
#include "cascademl/error.hpp"
#include "text_util.hpp"

namespace cascademl {

namespace {

struct Attribute {
    std::string name;
    bool numeric = false;
    std::vector<std::string> values;  // nominal only
    std::size_t line = 0;
};

struct ArffFile {
    std::vector<Attribute> attributes;
    // Raw value strings per row; sparse rows are expanded.
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> row_lines;
};

std::string unquote(std::string_view s) {
    s = detail::trim(s);
    if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front()) {
        std::string out;
        for (std::size_t i = 1; i + 1 < s.size(); ++i) {
            if (s[i] == '\\' && i + 2 < s.size()) ++i;
            out.push_back(s[i]);
        }
        return out;
    }
    return std::string(s);
}

// Splits on `sep` outside single or double quotes.
std::vector<std::string_view> split_quoted(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    char quote = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (quote) {
            if (c == '\\') ++i;
            else if (c == quote) quote = 0;
        } else if (c == '\'' || c == '"') {
            quote = c;
        } else if (c == sep) {
            parts.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    parts.push_back(s.substr(start));
    return parts;
}

// Reads a possibly quoted token from the front of `s` and advances past it.
std::string take_token(std::string_view& s) {
    s = detail::trim(s);
    if (s.empty()) return {};
    std::size_t end = 0;
    if (s.front() == '\'' || s.front() == '"') {
        const char q = s.front();
        end = 1;
        while (end < s.size() && s[end] != q) {
            if (s[end] == '\\') ++end;
            ++end;
        }
        if (end >= s.size()) return {};
        ++end;
    } else {
        while (end < s.size() && s[end] != ' ' && s[end] != '\t' && s[end] != '{') ++end;
    }
    std::string tok = unquote(s.substr(0, end));
    s.remove_prefix(end);
    return tok;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
    return s.size() >= prefix.size() && detail::lower(s.substr(0, prefix.size())) == prefix;
}

ArffFile read_arff(std::string_view text) {
    ArffFile file;
    const auto lines = detail::split_lines(text);
    bool in_data = false;
    bool saw_relation = false;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        const auto line = detail::trim(lines[li]);
        if (line.empty() || line.front() == '%') continue;

        if (!in_data) {
            if (starts_with_ci(line, "@relation")) {
                saw_relation = true;
            } else if (starts_with_ci(line, "@attribute")) {
                auto rest = line.substr(10);
                Attribute attr;
                attr.line = line_no;
                attr.name = take_token(rest);
                if (attr.name.empty())
                    throw ParseError(ParseError::Kind::Syntax, "attribute without a name", line_no);
                rest = detail::trim(rest);
                if (!rest.empty() && rest.front() == '{') {
                    const auto close = rest.rfind('}');
                    if (close == std::string_view::npos)
                        throw ParseError(ParseError::Kind::Syntax,
                                         "unterminated nominal list for '" + attr.name + "'",
                                         line_no);
                    for (auto v : split_quoted(rest.substr(1, close - 1), ','))
                        attr.values.push_back(unquote(v));
                } else {
                    const auto type = detail::lower(detail::trim(rest));
                    if (type == "numeric" || type == "real" || type == "integer")
                        attr.numeric = true;
                    else
                        throw ParseError(ParseError::Kind::Unsupported,
                                         "unsupported type '" + std::string(detail::trim(rest)) +
                                             "' for attribute '" + attr.name + "'",
                                         line_no);
                }
                file.attributes.push_back(std::move(attr));
            } else if (starts_with_ci(line, "@data")) {
                if (!saw_relation || file.attributes.empty())
                    throw ParseError(ParseError::Kind::Syntax,
                                     "@data before @relation/@attribute declarations", line_no);
                in_data = true;
            } else {
                throw ParseError(ParseError::Kind::Syntax,
                                 "unexpected header line '" + std::string(line) + "'", line_no);
            }
            continue;
        }

        const std::size_t width = file.attributes.size();
        std::vector<std::string> row(width);
        if (line.front() == '{') {
            const auto close = line.rfind('}');
            if (close == std::string_view::npos)
                throw ParseError(ParseError::Kind::Syntax, "unterminated sparse row", line_no);
            // Omitted entries take the zero value: 0 for numerics, the first
            // declared value for nominals.
            for (std::size_t a = 0; a < width; ++a)
                row[a] = file.attributes[a].numeric ? "0" : file.attributes[a].values.front();
            const auto body = detail::trim(line.substr(1, close - 1));
            if (!body.empty()) {
                for (auto entry : split_quoted(body, ',')) {
                    entry = detail::trim(entry);
                    const auto space = entry.find_first_of(" \t");
                    if (space == std::string_view::npos)
                        throw ParseError(ParseError::Kind::Syntax,
                                         "sparse entry '" + std::string(entry) +
                                             "' lacks 'index value'",
                                         line_no);
                    const auto idx = detail::parse_double(entry.substr(0, space));
                    if (!idx || *idx < 0 || *idx >= static_cast<double>(width) ||
                        *idx != static_cast<double>(static_cast<std::size_t>(*idx)))
                        throw ParseError(ParseError::Kind::Syntax,
                                         "bad sparse index in '" + std::string(entry) + "'",
                                         line_no);
                    row[static_cast<std::size_t>(*idx)] = unquote(entry.substr(space + 1));
                }
            }
        } else {
            const auto parts = split_quoted(line, ',');
            if (parts.size() != width)
                throw ParseError(ParseError::Kind::Ragged,
                                 "expected " + std::to_string(width) + " values, found " +
                                     std::to_string(parts.size()),
                                 line_no);
            for (std::size_t a = 0; a < width; ++a) row[a] = unquote(parts[a]);
        }
        file.rows.push_back(std::move(row));
        file.row_lines.push_back(line_no);
    }
    if (!in_data) throw ParseError(ParseError::Kind::Syntax, "missing @data section");
    return file;
}

double label_value(const Attribute& attr, const std::string& raw, std::size_t line,
                   std::size_t column) {
    if (raw == "1") return 1.0;
    if (raw == "0") return 0.0;
    if (raw == "?")
        throw ParseError(ParseError::Kind::MissingValue,
                         "missing value for label '" + attr.name + "'", line, column);
    throw ParseError(ParseError::Kind::InvalidLabel,
                     "label '" + attr.name + "' has value '" + raw + "', expected 0 or 1", line,
                     column);
}

MultiLabelDataset build(const ArffFile& file, const std::vector<std::size_t>& label_attrs) {
    std::vector<bool> is_label(file.attributes.size(), false);
    for (auto a : label_attrs) {
        const auto& attr = file.attributes[a];
        const bool binary =
            !attr.numeric && attr.values.size() == 2 &&
            std::is_permutation(attr.values.begin(), attr.values.end(),
                                std::vector<std::string>{"0", "1"}.begin());
        if (!binary)
            throw ParseError(ParseError::Kind::Unsupported,
                             "label attribute '" + attr.name + "' is not a binary {0,1} nominal",
                             attr.line);
        is_label[a] = true;
    }

    MultiLabelDataset ds;
    // Feature layout: numeric -> 1 column, nominal -> one column per value.
    std::vector<std::size_t> feature_attrs;
    for (std::size_t a = 0; a < file.attributes.size(); ++a) {
        if (is_label[a]) continue;
        feature_attrs.push_back(a);
        const auto& attr = file.attributes[a];
        if (attr.numeric) ds.feature_names.push_back(attr.name);
        else
            for (const auto& v : attr.values) ds.feature_names.push_back(attr.name + "=" + v);
    }
    for (auto a : label_attrs) ds.label_names.push_back(file.attributes[a].name);

    const std::size_t n = file.rows.size();
    const std::size_t d = ds.feature_names.size();
    ds.x = Matrix(n, d);
    ds.y = Matrix(n, label_attrs.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = file.rows[i];
        const std::size_t line = file.row_lines[i];
        std::size_t col = 0;
        for (auto a : feature_attrs) {
            const auto& attr = file.attributes[a];
            const auto& raw = row[a];
            if (raw == "?")
                throw ParseError(ParseError::Kind::MissingValue,
                                 "missing value for attribute '" + attr.name + "'", line, a + 1);
            if (attr.numeric) {
                const auto v = detail::parse_double(raw);
                if (!v)
                    throw ParseError(ParseError::Kind::NonNumeric,
                                     "value '" + raw + "' of attribute '" + attr.name +
                                         "' is not numeric",
                                     line, a + 1);
                ds.x(i, col++) = *v;
            } else {
                const auto it = std::find(attr.values.begin(), attr.values.end(), raw);
                if (it == attr.values.end())
                    throw ParseError(ParseError::Kind::Syntax,
                                     "value '" + raw + "' not declared for attribute '" +
                                         attr.name + "'",
                                     line, a + 1);
                ds.x(i, col + static_cast<std::size_t>(it - attr.values.begin())) = 1.0;
                col += attr.values.size();
            }
        }
        for (std::size_t j = 0; j < label_attrs.size(); ++j) {
            const auto a = label_attrs[j];
            ds.y(i, j) = label_value(file.attributes[a], row[a], line, a + 1);
        }
    }
    ds.validate();
    return ds;
}

}  // namespace

MultiLabelDataset parse_arff(std::string_view text, std::span<const std::string> labels) {
    const auto file = read_arff(text);
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t a = 0; a < file.attributes.size(); ++a) index[file.attributes[a].name] = a;

    std::vector<std::size_t> label_attrs;
    for (const auto& name : labels) {
        const auto it = index.find(name);
        if (it == index.end()) {
            std::string available;
            for (const auto& attr : file.attributes)
                available += (available.empty() ? "" : ", ") + attr.name;
            throw ParseError(ParseError::Kind::UnknownName,
                             "unknown label '" + name + "'; available attributes: " + available);
        }
        label_attrs.push_back(it->second);
    }
    return build(file, label_attrs);
}

MultiLabelDataset parse_arff(std::string_view text, std::size_t label_count, LabelPosition position) {
    const auto file = read_arff(text);
    const std::size_t width = file.attributes.size();
    if (label_count >= width)
        throw InvalidArgument("ARFF has " + std::to_string(width) + " attributes, too few for " +
                              std::to_string(label_count) + " labels plus features");
    std::vector<std::size_t> label_attrs(label_count);
    std::iota(label_attrs.begin(), label_attrs.end(),
              position == LabelPosition::Last ? width - label_count : 0);
    return build(file, label_attrs);
}

MultiLabelDataset load_arff(const std::filesystem::path& path, std::span<const std::string> labels) {
    return parse_arff(detail::read_file(path), labels);
}

MultiLabelDataset load_arff(const std::filesystem::path& path, std::size_t label_count,
                            LabelPosition position) {
    return parse_arff(detail::read_file(path), label_count, position);
}

}  // namespace cascademl
