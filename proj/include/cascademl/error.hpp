#pragma once

#include <stdexcept>
#include <string>

namespace cascademl {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Bad argument value (out-of-range constant, empty pool, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Malformed input file. `line` and `column` are 1-based; 0 means unknown.
class ParseError : public Error {
public:
    enum class Kind { Syntax, NonNumeric, InvalidLabel, Ragged, MissingValue, Unsupported, UnknownName };

    ParseError(Kind kind, const std::string& what, std::size_t line = 0, std::size_t column = 0)
        : Error(format(what, line, column)), kind_(kind), line_(line), column_(column) {}

    Kind kind() const noexcept { return kind_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    static std::string format(const std::string& what, std::size_t line, std::size_t column) {
        if (line == 0) return what;
        std::string loc = "line " + std::to_string(line);
        if (column != 0) loc += ", column " + std::to_string(column);
        return loc + ": " + what;
    }

    Kind kind_;
    std::size_t line_;
    std::size_t column_;
};

/// Requested file does not exist or cannot be opened.
class FileNotFound : public Error {
public:
    explicit FileNotFound(const std::string& path)
        : Error("cannot open file: " + path), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace cascademl
