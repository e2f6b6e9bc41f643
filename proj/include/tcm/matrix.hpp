#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "tcm/error.hpp"

namespace tcm {

// Dense row-major matrix. Feature matrices are stored as float (matching
// the on-disk format bit for bit); derived quantities use Mat<double>.
template <typename T>
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    friend bool operator==(const Mat&, const Mat&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using FeatureMatrix = Mat<float>;

template <typename A, typename B>
inline double squared_distance(std::span<A> a, std::span<B> b) {
    double acc = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = static_cast<double>(a[d]) - static_cast<double>(b[d]);
        acc += diff * diff;
    }
    return acc;
}

template <typename A, typename B>
inline double euclidean_distance(std::span<A> a, std::span<B> b) {
    return std::sqrt(squared_distance(a, b));
}

template <typename T>
inline bool all_finite(const Mat<T>& m) {
    for (const T& v : m.data()) {
        if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
}

}  // namespace tcm
