#include "curvete/tensor.hpp"

#include <cmath>
#include <sstream>

#include "curvete/errors.hpp"

namespace curvete {

std::int64_t shape_numel(const std::vector<int>& shape) {
    std::int64_t n = 1;
    for (const int d : shape) {
        if (d < 0) throw ConfigError("negative dimension in tensor shape");
        n *= d;
    }
    return n;
}

Tensor::Tensor(std::vector<int> shape_, std::vector<float> data_)
    : shape(std::move(shape_)), data(std::move(data_)) {
    if (shape_numel(shape) != static_cast<std::int64_t>(data.size())) {
        throw ConfigError("tensor data length does not match shape " + shape_str());
    }
}

Tensor Tensor::zeros(std::vector<int> shape) {
    const auto n = shape_numel(shape);
    Tensor t;
    t.shape = std::move(shape);
    t.data.assign(static_cast<std::size_t>(n), 0.0f);
    return t;
}

Tensor Tensor::full(std::vector<int> shape, float value) {
    Tensor t = zeros(std::move(shape));
    for (auto& x : t.data) x = value;
    return t;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

void check_finite(const Tensor& t, const std::string& context) {
    for (const float x : t.data) {
        if (!std::isfinite(x)) {
            throw NumericalError("non-finite value in " + context);
        }
    }
}

}  // namespace curvete
