#pragma once

#include <string>
#include <vector>

#include "curvete/tensor.hpp"

namespace curvete {

struct NamedTensor {
    std::string name;
    Tensor tensor;
};

// Little-endian binary: magic "CRVT", u32 version, manifest hash (32 bytes),
// then per-tensor records (u32 name length, name, u32 rank, u64 dims,
// float32 payload) until end of file.
void save_checkpoint(const std::string& path, const std::string& manifest_hash_hex,
                     const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_checkpoint(const std::string& path,
                                         std::string* manifest_hash_hex = nullptr);

// Returns the tensor with the given name or throws ParseError.
const Tensor& find_tensor(const std::vector<NamedTensor>& tensors, const std::string& name);
bool has_tensor(const std::vector<NamedTensor>& tensors, const std::string& name);

std::string bytes_to_hex(const unsigned char* bytes, std::size_t len);
std::vector<unsigned char> hex_to_bytes(const std::string& hex);

}  // namespace curvete
