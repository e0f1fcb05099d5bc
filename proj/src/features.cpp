#include "curvete/features.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "curvete/errors.hpp"

namespace curvete {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f32(std::ostream& os, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(os, bits);
}

std::uint32_t get_u32(std::istream& is, const std::string& path) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw ParseError(path + ": truncated u32");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t get_u64(std::istream& is, const std::string& path) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw ParseError(path + ": truncated u64");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

float get_f32(std::istream& is, const std::string& path) {
    const std::uint32_t bits = get_u32(is, path);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

}  // namespace

void FeatureMatrix::validate() const {
    if (n < 1) throw InputError("feature matrix must have at least one row");
    if (d < 1) throw InputError("feature matrix must have at least one column");
    if (static_cast<std::int64_t>(values.size()) != n * d) {
        throw InputError("feature matrix value count does not match n*d");
    }
    if (static_cast<std::int64_t>(ids.size()) != n) {
        throw InputError("feature matrix id count does not match row count");
    }
    for (const float v : values) {
        if (!std::isfinite(v)) throw NumericalError("non-finite value in feature matrix");
    }
}

void save_features(const FeatureMatrix& features, const std::string& path) {
    features.validate();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("cannot write feature file " + path);
    f.write("CRVF", 4);
    put_u32(f, 1);
    put_u64(f, static_cast<std::uint64_t>(features.n));
    put_u64(f, static_cast<std::uint64_t>(features.d));
    for (const float v : features.values) put_f32(f, v);
    for (const auto& id : features.ids) {
        put_u32(f, static_cast<std::uint32_t>(id.size()));
        f.write(id.data(), static_cast<std::streamsize>(id.size()));
    }
    if (!f) throw InputError("write failed for feature file " + path);
}

FeatureMatrix load_features(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DependencyError("feature file " + path + " not found");
    char magic[4];
    if (!f.read(magic, 4) || std::memcmp(magic, "CRVF", 4) != 0) {
        throw ParseError(path + ": bad magic (expected CRVF)");
    }
    const std::uint32_t version = get_u32(f, path);
    if (version != 1) throw ParseError(path + ": unsupported version " + std::to_string(version));
    FeatureMatrix m;
    m.n = static_cast<std::int64_t>(get_u64(f, path));
    m.d = static_cast<std::int64_t>(get_u64(f, path));
    if (m.n < 1 || m.d < 1 || m.n > (1LL << 32) || m.d > (1LL << 32)) {
        throw ParseError(path + ": implausible dimensions");
    }
    m.values.resize(static_cast<std::size_t>(m.n * m.d));
    for (auto& v : m.values) v = get_f32(f, path);
    m.ids.resize(static_cast<std::size_t>(m.n));
    for (auto& id : m.ids) {
        const std::uint32_t len = get_u32(f, path);
        id.resize(len);
        if (len && !f.read(id.data(), len)) throw ParseError(path + ": truncated id list");
    }
    m.validate();
    return m;
}

}  // namespace curvete
