#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "automal/error.hpp"

namespace automal {

// Missing cells are carried as quiet NaN until the preprocessing stage
// imputes them. Never compare against the sentinel directly.
inline double missing_value() { return std::numeric_limits<double>::quiet_NaN(); }
inline bool is_missing(double v) { return std::isnan(v); }

// Dense row-major matrix of doubles. The unit of data every stage consumes.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }
    const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }
    std::span<const double> row(std::size_t r) const { return {row_ptr(r), cols_}; }
    std::span<double> row(std::size_t r) { return {row_ptr(r), cols_}; }

    std::vector<double> column(std::size_t c) const {
        std::vector<double> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
        return out;
    }

    Matrix select_rows(const std::vector<std::size_t>& idx) const {
        Matrix out(idx.size(), cols_);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] >= rows_) throw ValueError("Matrix::select_rows: index out of range");
            const double* src = row_ptr(idx[i]);
            double* dst = out.row_ptr(i);
            for (std::size_t c = 0; c < cols_; ++c) dst[c] = src[c];
        }
        return out;
    }

    Matrix select_cols(const std::vector<std::size_t>& idx) const {
        Matrix out(rows_, idx.size());
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t i = 0; i < idx.size(); ++i) {
                if (idx[i] >= cols_) throw ValueError("Matrix::select_cols: index out of range");
                out(r, i) = (*this)(r, idx[i]);
            }
        return out;
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const Matrix& o) const = default;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

}  // namespace automal
