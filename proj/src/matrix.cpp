#include "gridga/matrix.hpp"

#include <cstring>

#include "gridga/error.hpp"

namespace gridga {

Matrix Matrix::take_rows(std::span<const std::size_t> rows) const {
    Matrix out(rows.size(), cols_);
    for (std::size_t c = 0; c < cols_; ++c) {
        const auto src = column(c);
        auto dst = out.column(c);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i] >= rows_) throw Error(ErrorKind::usage, "row index out of range");
            dst[i] = src[rows[i]];
        }
    }
    return out;
}

Matrix Matrix::take_cols(std::span<const std::size_t> cols) const {
    Matrix out(rows_, cols.size());
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (cols[i] >= cols_) throw Error(ErrorKind::usage, "column index out of range");
        const auto src = column(cols[i]);
        std::copy(src.begin(), src.end(), out.column(i).begin());
    }
    return out;
}

// Bitwise, so NaN cells compare equal to NaN cells.
bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ &&
           (a.data_.empty() ||
            std::memcmp(a.data_.data(), b.data_.data(), a.data_.size() * sizeof(double)) == 0);
}

ColumnView::ColumnView(const Matrix& m) : rows_(m.rows()) {
    columns_.reserve(m.cols());
    for (std::size_t c = 0; c < m.cols(); ++c) columns_.push_back(m.column(c));
}

ColumnView::ColumnView(const Matrix& m, std::span<const std::size_t> cols) : rows_(m.rows()) {
    columns_.reserve(cols.size());
    for (auto c : cols) {
        if (c >= m.cols()) throw Error(ErrorKind::usage, "column index out of range");
        columns_.push_back(m.column(c));
    }
}

ColumnView ColumnView::select(std::span<const std::size_t> cols) const {
    ColumnView out;
    out.rows_ = rows_;
    out.columns_.reserve(cols.size());
    for (auto c : cols) {
        if (c >= columns_.size()) throw Error(ErrorKind::usage, "column index out of range");
        out.columns_.push_back(columns_[c]);
    }
    return out;
}

}  // namespace gridga
