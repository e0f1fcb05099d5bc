#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace curvete {

// Dense row-major float32 tensor. All reductions over tensor data elsewhere
// in the library accumulate in double and in a fixed element order, so
// results are reproducible bit-for-bit for a given binary and seed.
struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    Tensor() = default;
    Tensor(std::vector<int> shape_, std::vector<float> data_);

    static Tensor zeros(std::vector<int> shape);
    static Tensor full(std::vector<int> shape, float value);

    std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }

    float& operator[](std::size_t i) { return data[i]; }
    float operator[](std::size_t i) const { return data[i]; }

    // 4-d accessor for [n,c,h,w] layouts.
    float& at4(int n, int c, int h, int w, int C, int H, int W) {
        return data[static_cast<std::size_t>(((n * C + c) * H + h) * W + w)];
    }
    float at4(int n, int c, int h, int w, int C, int H, int W) const {
        return data[static_cast<std::size_t>(((n * C + c) * H + h) * W + w)];
    }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
    std::string shape_str() const;
};

std::int64_t shape_numel(const std::vector<int>& shape);

// Throws NumericalError naming `context` if any element is NaN/Inf.
void check_finite(const Tensor& t, const std::string& context);

}  // namespace curvete
