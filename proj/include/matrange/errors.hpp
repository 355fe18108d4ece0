#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace matrange {

/// Shapes that do not fit together (member sizes, isometry rows, L dimensions).
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A problem that cannot have a solution for structural reasons, e.g. pq > n
/// or a deflation that needs more room than the space has.
class StructuralError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Invalid values: non-Hermitian input, NaN, singular transforms, bad options.
class ValueError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class RankDeficientError : public std::invalid_argument {
public:
    RankDeficientError(int column, const std::string& what) : std::invalid_argument(what), column_(column) {}
    int column() const { return column_; }

private:
    int column_;
};

/// Iterative kernels that hit their iteration cap.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Exhaustive searches (partition scans, deflation stages) that found nothing.
class SearchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File-format errors. `offset` is the byte position when known.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what, std::size_t offset = 0)
        : std::runtime_error(what), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

}  // namespace matrange
