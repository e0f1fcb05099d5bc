#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace curvete {

// Row-per-sample feature matrix; row order matches `ids`.
struct FeatureMatrix {
    std::int64_t n = 0;
    std::int64_t d = 0;
    std::vector<float> values;  // n*d row-major
    std::vector<std::string> ids;

    double at(std::int64_t row, std::int64_t col) const {
        return values[static_cast<std::size_t>(row * d + col)];
    }
    void validate() const;
};

// Little-endian binary: magic "CRVF", u32 version, u64 n, u64 d,
// n*d float32 values, then the id list as u32-length-prefixed UTF-8 strings.
void save_features(const FeatureMatrix& features, const std::string& path);
FeatureMatrix load_features(const std::string& path);

}  // namespace curvete
