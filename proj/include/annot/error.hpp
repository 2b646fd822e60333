// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace annot {

// Base for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input text. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
        : Error(format(what, line, column)), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    static std::string format(const std::string& what, std::size_t line, std::size_t column) {
        if (line == 0) return what;
        std::string out = "line " + std::to_string(line);
        if (column != 0) out += ", column " + std::to_string(column);
        return out + ": " + what;
    }

    std::size_t line_;
    std::size_t column_;
};

// A referenced id (entity, element, annotation, concept...) does not exist.
class NotFoundError : public Error {
public:
    NotFoundError(const std::string& kind, const std::string& id)
        : Error("unknown " + kind + " '" + id + "'"), kind_(kind), id_(id) {}

    const std::string& kind() const noexcept { return kind_; }
    const std::string& id() const noexcept { return id_; }

private:
    std::string kind_;
    std::string id_;
};

// Well-formed input that breaks a domain invariant.
class InvariantError : public Error {
public:
    InvariantError(const std::string& invariant, const std::string& detail)
        : Error(invariant + ": " + detail), invariant_(invariant) {}

    const std::string& invariant() const noexcept { return invariant_; }

private:
    std::string invariant_;
};

}  // namespace annot
