#pragma once

#include <stdexcept>
#include <string>

namespace tabtax {

/// Base of every exception thrown by the library. The category maps onto the
/// HTTP status used by the service layer.
class Error : public std::runtime_error {
public:
    enum class Category { invalid_argument, not_found, conflict, load, parse, io };

    Error(Category category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    Category category() const noexcept { return category_; }

private:
    Category category_;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(Category::invalid_argument, what) {}
};

class NotFound : public Error {
public:
    explicit NotFound(const std::string& what) : Error(Category::not_found, what) {}
};

class Conflict : public Error {
public:
    explicit Conflict(const std::string& what) : Error(Category::conflict, what) {}
};

/// Raised by the CSV loader; carries the 1-based data row (0 = header) and
/// the column when known.
class LoadError : public Error {
public:
    LoadError(const std::string& what, long row = -1, std::string column = {})
        : Error(Category::load, what), row_(row), column_(std::move(column)) {}

    long row() const noexcept { return row_; }
    const std::string& column() const noexcept { return column_; }

private:
    long row_;
    std::string column_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t col)
        : Error(Category::parse, what + " at " + std::to_string(line) + ":" + std::to_string(col)),
          line_(line), col_(col) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t col() const noexcept { return col_; }

private:
    std::size_t line_;
    std::size_t col_;
};

}  // namespace tabtax
