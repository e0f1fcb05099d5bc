#include "curvete/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "curvete/errors.hpp"

namespace curvete {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

bool get_u32(std::istream& is, std::uint32_t& out) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) return false;
    out = 0;
    for (int i = 0; i < 4; ++i) out |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return true;
}

std::uint64_t get_u64_or_throw(std::istream& is, const std::string& path) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw ParseError(path + ": truncated u64");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

}  // namespace

std::string bytes_to_hex(const unsigned char* bytes, std::size_t len) {
    static const char* digits = "0123456789abcdef";
    std::string out(len * 2, '0');
    for (std::size_t i = 0; i < len; ++i) {
        out[i * 2] = digits[bytes[i] >> 4];
        out[i * 2 + 1] = digits[bytes[i] & 0xf];
    }
    return out;
}

std::vector<unsigned char> hex_to_bytes(const std::string& hex) {
    if (hex.size() % 2 != 0) throw ParseError("hex string has odd length");
    const auto nibble = [&](char c) -> unsigned {
        if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
        if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
        if (c >= 'A' && c <= 'F') return static_cast<unsigned>(c - 'A' + 10);
        throw ParseError("invalid hex digit");
    };
    std::vector<unsigned char> out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<unsigned char>((nibble(hex[i * 2]) << 4) | nibble(hex[i * 2 + 1]));
    }
    return out;
}

void save_checkpoint(const std::string& path, const std::string& manifest_hash_hex,
                     const std::vector<NamedTensor>& tensors) {
    const auto hash = hex_to_bytes(manifest_hash_hex);
    if (hash.size() != 32) throw InputError("checkpoint: manifest hash must be 32 bytes");
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("cannot write checkpoint " + path);
    f.write("CRVT", 4);
    put_u32(f, 1);
    f.write(reinterpret_cast<const char*>(hash.data()), 32);
    for (const auto& nt : tensors) {
        put_u32(f, static_cast<std::uint32_t>(nt.name.size()));
        f.write(nt.name.data(), static_cast<std::streamsize>(nt.name.size()));
        put_u32(f, static_cast<std::uint32_t>(nt.tensor.shape.size()));
        for (const int d : nt.tensor.shape) put_u64(f, static_cast<std::uint64_t>(d));
        for (const float v : nt.tensor.data) {
            std::uint32_t bits;
            std::memcpy(&bits, &v, 4);
            put_u32(f, bits);
        }
    }
    if (!f) throw InputError("write failed for checkpoint " + path);
}

std::vector<NamedTensor> load_checkpoint(const std::string& path, std::string* manifest_hash_hex) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DependencyError("checkpoint " + path + " not found");
    char magic[4];
    if (!f.read(magic, 4) || std::memcmp(magic, "CRVT", 4) != 0) {
        throw ParseError(path + ": bad magic (expected CRVT)");
    }
    std::uint32_t version = 0;
    if (!get_u32(f, version) || version != 1) throw ParseError(path + ": unsupported version");
    unsigned char hash[32];
    if (!f.read(reinterpret_cast<char*>(hash), 32)) throw ParseError(path + ": truncated hash");
    if (manifest_hash_hex) *manifest_hash_hex = bytes_to_hex(hash, 32);

    std::vector<NamedTensor> out;
    std::uint32_t name_len = 0;
    while (get_u32(f, name_len)) {
        if (name_len > 4096) throw ParseError(path + ": implausible tensor name length");
        NamedTensor nt;
        nt.name.resize(name_len);
        if (name_len && !f.read(nt.name.data(), name_len)) throw ParseError(path + ": truncated name");
        std::uint32_t rank = 0;
        if (!get_u32(f, rank) || rank > 8) throw ParseError(path + ": bad tensor rank");
        nt.tensor.shape.resize(rank);
        std::int64_t numel = 1;
        for (auto& d : nt.tensor.shape) {
            d = static_cast<int>(get_u64_or_throw(f, path));
            if (d < 0) throw ParseError(path + ": negative dimension");
            numel *= d;
        }
        nt.tensor.data.resize(static_cast<std::size_t>(numel));
        for (auto& v : nt.tensor.data) {
            std::uint32_t bits = 0;
            if (!get_u32(f, bits)) throw ParseError(path + ": truncated tensor payload");
            std::memcpy(&v, &bits, 4);
        }
        out.push_back(std::move(nt));
    }
    return out;
}

const Tensor& find_tensor(const std::vector<NamedTensor>& tensors, const std::string& name) {
    for (const auto& nt : tensors) {
        if (nt.name == name) return nt.tensor;
    }
    throw ParseError("checkpoint is missing tensor '" + name + "'");
}

bool has_tensor(const std::vector<NamedTensor>& tensors, const std::string& name) {
    for (const auto& nt : tensors) {
        if (nt.name == name) return true;
    }
    return false;
}

}  // namespace curvete
