#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace gridga {

/// Missing-value sentinel (quiet NaN). Infinities are distinct and survive
/// loading untouched.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// Dense column-major matrix of doubles. Column-major because every consumer
/// (imputation, tree growth, masking) walks features, not rows.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[c * rows_ + r]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[c * rows_ + r]; }

    std::span<double> column(std::size_t c) noexcept { return {data_.data() + c * rows_, rows_}; }
    std::span<const double> column(std::size_t c) const noexcept {
        return {data_.data() + c * rows_, rows_};
    }

    /// Rows in the given order (duplicates allowed).
    Matrix take_rows(std::span<const std::size_t> rows) const;
    /// Columns in the given order.
    Matrix take_cols(std::span<const std::size_t> cols) const;

    std::span<const double> data() const noexcept { return data_; }

    friend bool operator==(const Matrix& a, const Matrix& b);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Non-owning view over a subset of a matrix's columns, used to train and
/// score on masked feature sets without copying.
class ColumnView {
public:
    ColumnView() = default;
    explicit ColumnView(const Matrix& m);
    ColumnView(const Matrix& m, std::span<const std::size_t> cols);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return columns_.size(); }
    std::span<const double> column(std::size_t c) const noexcept { return columns_[c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return columns_[c][r]; }

    /// View over a subset of this view's columns.
    ColumnView select(std::span<const std::size_t> cols) const;

private:
    std::size_t rows_ = 0;
    std::vector<std::span<const double>> columns_;
};

}  // namespace gridga
