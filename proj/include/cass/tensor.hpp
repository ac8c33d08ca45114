#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "cass/errors.hpp"

namespace cass {

// Dense row-major double tensor, rank 1-3. Rank 2 is (rows, cols), rank 3 is
// (channels, rows, cols). Small enough on purpose: everything in this project
// is desk-scale and single precision is not enough for the finite-difference
// gradient checks.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> v;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        v.assign(static_cast<size_t>(numel_of(shape)), 0.0);
    }

    static long numel_of(const std::vector<int>& s) {
        long n = 1;
        for (int d : s) {
            if (d <= 0) throw ArgumentError("tensor dimensions must be positive");
            n *= d;
        }
        return n;
    }

    long numel() const { return static_cast<long>(v.size()); }
    int rank() const { return static_cast<int>(shape.size()); }
    int dim(int i) const { return shape[static_cast<size_t>(i)]; }

    // rank-3 accessors
    double& at(int c, int r, int col) {
        return v[(static_cast<size_t>(c) * shape[1] + r) * shape[2] + col];
    }
    double at(int c, int r, int col) const {
        return v[(static_cast<size_t>(c) * shape[1] + r) * shape[2] + col];
    }

    // rank-2 accessors
    double& at(int r, int col) { return v[static_cast<size_t>(r) * shape[1] + col]; }
    double at(int r, int col) const { return v[static_cast<size_t>(r) * shape[1] + col]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    void fill(double x) { std::fill(v.begin(), v.end(), x); }

    bool all_finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

inline Tensor zeros_like(const Tensor& t) { return Tensor(t.shape); }

} // namespace cass
