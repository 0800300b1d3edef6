#pragma once

#include <cstdint>
#include <vector>

#include "ispval/common.hpp"

namespace ispval {

// Dense 0/1 matrix, row-major.
class BinaryMatrix {
public:
    BinaryMatrix() = default;
    BinaryMatrix(int rows, int cols)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0) {
        if (rows < 0 || cols < 0) throw ShapeError("BinaryMatrix: negative dimensions");
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    std::uint8_t operator()(int i, int j) const {
        return data_[static_cast<std::size_t>(i) * cols_ + j];
    }
    void set(int i, int j, std::uint8_t v) {
        data_[static_cast<std::size_t>(i) * cols_ + j] = v ? 1 : 0;
    }

    std::vector<int> row_sums() const {
        std::vector<int> r(rows_, 0);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) r[i] += (*this)(i, j);
        return r;
    }
    std::vector<int> col_sums() const {
        std::vector<int> c(cols_, 0);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) c[j] += (*this)(i, j);
        return c;
    }

    void fill_zero() { std::fill(data_.begin(), data_.end(), 0); }

    bool operator==(const BinaryMatrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

    const std::vector<std::uint8_t>& raw() const { return data_; }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<std::uint8_t> data_;
};

// Dense real matrix, row-major.
class RealMatrix {
public:
    RealMatrix() = default;
    RealMatrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
        if (rows < 0 || cols < 0) throw ShapeError("RealMatrix: negative dimensions");
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double operator()(int i, int j) const {
        return data_[static_cast<std::size_t>(i) * cols_ + j];
    }
    double& operator()(int i, int j) {
        return data_[static_cast<std::size_t>(i) * cols_ + j];
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

}  // namespace ispval
