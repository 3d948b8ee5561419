#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "iochunk/error.hpp"
#include "iochunk/field.hpp"

namespace iochunk {

/// Row-major, single-typed matrix with optional row and column names.
template <class T>
class DenseMatrix {
public:
    using value_type = T;

    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, T fill = T{}) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<T> data) : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_)
            throw Error(ErrorKind::DimensionMismatch, "data length " + std::to_string(data_.size()) + " != " +
                                                          std::to_string(rows_) + "x" + std::to_string(cols_));
    }

    std::size_t n_rows() const noexcept { return rows_; }
    std::size_t n_cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<T> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const T> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    const std::vector<T>& data() const noexcept { return data_; }
    std::vector<T>& data() noexcept { return data_; }

    std::vector<std::string> col_names;
    std::vector<std::string> row_names;

    /// Appends the rows of `other` (same column count).
    void append_rows(const DenseMatrix& other) {
        if (rows_ == 0 && cols_ == 0) {
            *this = other;
            return;
        }
        if (other.cols_ != cols_) throw Error(ErrorKind::DimensionMismatch, "append_rows: column count differs");
        data_.insert(data_.end(), other.data_.begin(), other.data_.end());
        row_names.insert(row_names.end(), other.row_names.begin(), other.row_names.end());
        rows_ += other.rows_;
    }

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

    // Used by the parser, which knows the width only after the first record.
    void reset_shape(std::size_t rows, std::size_t cols) {
        rows_ = rows;
        cols_ = cols;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

/// Element type and null representation per matrix ColumnType.
template <ColumnType Type>
struct MatrixElement;

template <>
struct MatrixElement<ColumnType::Logical> {
    using type = std::int8_t;
    static type na() noexcept { return std::numeric_limits<std::int8_t>::min(); }
};
template <>
struct MatrixElement<ColumnType::Integer> {
    using type = std::int64_t;
    static type na() noexcept { return std::numeric_limits<std::int64_t>::min(); }
};
template <>
struct MatrixElement<ColumnType::Real> {
    using type = double;
    static type na() noexcept { return std::numeric_limits<double>::quiet_NaN(); }
};
template <>
struct MatrixElement<ColumnType::Character> {
    using type = std::string;
    static type na() { return "NA"; }
};
template <>
struct MatrixElement<ColumnType::Complex> {
    using type = std::complex<double>;
    static type na() noexcept {
        return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    }
};

template <ColumnType Type>
using matrix_elem_t = typename MatrixElement<Type>::type;

}  // namespace iochunk
