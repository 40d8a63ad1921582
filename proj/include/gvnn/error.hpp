#pragma once

#include <stdexcept>
#include <string>

namespace gvnn {

// Base of all library exceptions. The three mid-level categories map onto
// the CLI exit codes: ConfigError -> 2, DataError -> 3, NumericError -> 4.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

// ---- numeric failures ------------------------------------------------------

class NotSquareError : public NumericError {
public:
    NotSquareError(std::size_t rows, std::size_t cols)
        : NumericError("matrix is not square: " + std::to_string(rows) + "x" +
                       std::to_string(cols)) {}
};

class NonConvergenceError : public NumericError {
public:
    explicit NonConvergenceError(const std::string& what) : NumericError(what) {}
};

class DimMismatchError : public NumericError {
public:
    explicit DimMismatchError(const std::string& what) : NumericError(what) {}
};

class ShapeMismatchError : public NumericError {
public:
    explicit ShapeMismatchError(const std::string& what) : NumericError(what) {}
};

class NonFiniteError : public NumericError {
public:
    explicit NonFiniteError(const std::string& what) : NumericError(what) {}
};

class DivergenceError : public NumericError {
public:
    explicit DivergenceError(const std::string& what) : NumericError(what) {}
};

class CacheMismatchError : public NumericError {
public:
    explicit CacheMismatchError(const std::string& what) : NumericError(what) {}
};

class MemoryBudgetError : public NumericError {
public:
    explicit MemoryBudgetError(const std::string& what) : NumericError(what) {}
};

class HypothesisViolatedError : public NumericError {
public:
    explicit HypothesisViolatedError(const std::string& what) : NumericError(what) {}
};

class NegativeSupportError : public NumericError {
public:
    explicit NegativeSupportError(const std::string& what) : NumericError(what) {}
};

// ---- data failures ---------------------------------------------------------

class ZeroVarianceError : public DataError {
public:
    explicit ZeroVarianceError(std::size_t node)
        : DataError("signal row " + std::to_string(node) + " has zero variance"),
          node_(node) {}
    std::size_t node() const { return node_; }

private:
    std::size_t node_;
};

class ParseError : public DataError {
public:
    ParseError(std::size_t row, std::size_t col, const std::string& what)
        : DataError("parse error at row " + std::to_string(row) + ", col " +
                    std::to_string(col) + ": " + what),
          row_(row), col_(col) {}
    std::size_t row() const { return row_; }
    std::size_t col() const { return col_; }

private:
    std::size_t row_;
    std::size_t col_;
};

class RaggedRowsError : public DataError {
public:
    explicit RaggedRowsError(const std::string& what) : DataError(what) {}
};

class TooShortError : public DataError {
public:
    explicit TooShortError(const std::string& what) : DataError(what) {}
};

class IoError : public DataError {
public:
    explicit IoError(const std::string& what) : DataError(what) {}
};

}  // namespace gvnn
