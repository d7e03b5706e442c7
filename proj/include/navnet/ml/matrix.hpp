#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "navnet/error.hpp"

namespace navnet {

/// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    void append_row(std::span<const double> values) {
        if (rows == 0 && cols == 0) cols = values.size();
        if (values.size() != cols) fail(ErrorCode::invalid_argument, "row width mismatch");
        data.insert(data.end(), values.begin(), values.end());
        ++rows;
    }

    Matrix select_rows(std::span<const std::size_t> indices) const {
        Matrix out(indices.size(), cols);
        for (std::size_t i = 0; i < indices.size(); ++i) {
            const auto src = row(indices[i]);
            std::copy(src.begin(), src.end(), out.row(i).begin());
        }
        return out;
    }

    bool operator==(const Matrix&) const = default;
};

}  // namespace navnet
