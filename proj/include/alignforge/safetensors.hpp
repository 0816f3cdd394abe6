#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace alignforge {

// Tensor element types. Float types participate in weighted averaging;
// integer types are copied only when identical across inputs.
enum class Dtype { F64, F32, F16, BF16, I64, I32, I16, I8, U8, BOOL };

size_t dtype_size(Dtype d);
bool dtype_is_float(Dtype d);
std::string dtype_name(Dtype d);
Dtype dtype_from_name(const std::string& name); // throws ParseError on unknown

struct TensorInfo {
    Dtype dtype = Dtype::F32;
    std::vector<int64_t> shape;
    uint64_t begin = 0; // byte offsets into the payload
    uint64_t end = 0;

    uint64_t numel() const;
};

// In-memory checkpoint: header infos plus one contiguous payload buffer.
// Tensor accessors are zero-copy views into the payload.
struct Checkpoint {
    std::map<std::string, TensorInfo> tensors;
    std::vector<uint8_t> data;
    std::map<std::string, std::string> metadata;

    std::span<const uint8_t> tensor_bytes(const std::string& name) const;
    std::span<uint8_t> tensor_bytes(const std::string& name);
};

// Container layout: 8-byte little-endian header length, JSON header mapping
// tensor name -> {dtype, shape, data_offsets} (plus optional __metadata__),
// then the raw little-endian payload. Offsets must tile the payload exactly.
Checkpoint load_checkpoint(const std::string& path);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);

// IEEE 754 binary16 and bfloat16 conversions, round-to-nearest-even.
float f16_to_f32(uint16_t h);
uint16_t f32_to_f16(float f);
float bf16_to_f32(uint16_t h);
uint16_t f32_to_bf16(float f);

// Reads/writes element `i` of a raw little-endian buffer as double.
double read_element(std::span<const uint8_t> bytes, Dtype d, size_t i);
void write_element(std::span<uint8_t> bytes, Dtype d, size_t i, double value);

} // namespace alignforge
