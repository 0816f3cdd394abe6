#include "alignforge/safetensors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "alignforge/errors.hpp"
#include "alignforge/jsonl.hpp"

namespace alignforge {

size_t dtype_size(Dtype d) {
    switch (d) {
        case Dtype::F64: case Dtype::I64: return 8;
        case Dtype::F32: case Dtype::I32: return 4;
        case Dtype::F16: case Dtype::BF16: case Dtype::I16: return 2;
        case Dtype::I8: case Dtype::U8: case Dtype::BOOL: return 1;
    }
    return 0;
}

bool dtype_is_float(Dtype d) {
    return d == Dtype::F64 || d == Dtype::F32 || d == Dtype::F16 || d == Dtype::BF16;
}

std::string dtype_name(Dtype d) {
    switch (d) {
        case Dtype::F64: return "F64";
        case Dtype::F32: return "F32";
        case Dtype::F16: return "F16";
        case Dtype::BF16: return "BF16";
        case Dtype::I64: return "I64";
        case Dtype::I32: return "I32";
        case Dtype::I16: return "I16";
        case Dtype::I8: return "I8";
        case Dtype::U8: return "U8";
        case Dtype::BOOL: return "BOOL";
    }
    return "F32";
}

Dtype dtype_from_name(const std::string& name) {
    if (name == "F64") return Dtype::F64;
    if (name == "F32") return Dtype::F32;
    if (name == "F16") return Dtype::F16;
    if (name == "BF16") return Dtype::BF16;
    if (name == "I64") return Dtype::I64;
    if (name == "I32") return Dtype::I32;
    if (name == "I16") return Dtype::I16;
    if (name == "I8") return Dtype::I8;
    if (name == "U8") return Dtype::U8;
    if (name == "BOOL") return Dtype::BOOL;
    throw ParseError("unknown dtype: " + name);
}

uint64_t TensorInfo::numel() const {
    uint64_t n = 1;
    for (int64_t d : shape) {
        if (d < 0) throw ParseError("negative dimension in tensor shape");
        if (d != 0 && n > UINT64_MAX / uint64_t(d)) throw ParseError("tensor shape overflow");
        n *= uint64_t(d);
    }
    return n;
}

std::span<const uint8_t> Checkpoint::tensor_bytes(const std::string& name) const {
    const auto& info = tensors.at(name);
    return {data.data() + info.begin, info.end - info.begin};
}

std::span<uint8_t> Checkpoint::tensor_bytes(const std::string& name) {
    const auto& info = tensors.at(name);
    return {data.data() + info.begin, info.end - info.begin};
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw ParseError("cannot open checkpoint: " + path);
    const auto file_size = uint64_t(in.tellg());
    in.seekg(0);

    if (file_size < 8) throw ParseError("truncated checkpoint (no header length): " + path);
    uint64_t header_len = 0;
    in.read(reinterpret_cast<char*>(&header_len), 8);
    if (!in) throw ParseError("failed to read header length: " + path);
    if (header_len > file_size - 8)
        throw ParseError("header length exceeds file size: " + path);

    std::string header_str(header_len, '\0');
    in.read(header_str.data(), std::streamsize(header_len));
    if (!in) throw ParseError("truncated checkpoint header: " + path);

    json header = json::parse(header_str, nullptr, false);
    if (header.is_discarded() || !header.is_object())
        throw ParseError("checkpoint header is not a JSON object: " + path);

    Checkpoint ckpt;
    const uint64_t data_size = file_size - 8 - header_len;
    ckpt.data.resize(data_size);
    in.read(reinterpret_cast<char*>(ckpt.data.data()), std::streamsize(data_size));
    if (!in) throw ParseError("truncated checkpoint payload: " + path);

    for (const auto& [name, spec] : header.items()) {
        if (name == "__metadata__") {
            if (!spec.is_object()) throw ParseError("__metadata__ must be an object: " + path);
            for (const auto& [k, v] : spec.items()) {
                if (!v.is_string()) throw ParseError("__metadata__ values must be strings: " + path);
                ckpt.metadata[k] = v.get<std::string>();
            }
            continue;
        }
        if (!spec.is_object() || !spec.contains("dtype") || !spec.contains("shape") ||
            !spec.contains("data_offsets"))
            throw ParseError("malformed tensor entry '" + name + "' in " + path);

        TensorInfo info;
        info.dtype = dtype_from_name(spec.at("dtype").get<std::string>());
        info.shape = spec.at("shape").get<std::vector<int64_t>>();
        const auto& off = spec.at("data_offsets");
        if (!off.is_array() || off.size() != 2)
            throw ParseError("data_offsets of '" + name + "' must have two entries");
        info.begin = off.at(0).get<uint64_t>();
        info.end = off.at(1).get<uint64_t>();
        if (info.begin > info.end || info.end > data_size)
            throw ParseError("data_offsets of '" + name + "' out of range");
        if (info.end - info.begin != info.numel() * dtype_size(info.dtype))
            throw ParseError("byte length of '" + name + "' does not match shape and dtype");
        ckpt.tensors.emplace(name, std::move(info));
    }

    // offsets must tile the payload: no overlap, no gap
    std::vector<std::pair<uint64_t, uint64_t>> ranges;
    ranges.reserve(ckpt.tensors.size());
    for (const auto& [_, info] : ckpt.tensors) ranges.emplace_back(info.begin, info.end);
    std::sort(ranges.begin(), ranges.end());
    uint64_t cursor = 0;
    for (const auto& [b, e] : ranges) {
        if (b != cursor)
            throw ParseError(b < cursor ? "overlapping tensor offsets in " + path
                                        : "gap in tensor offsets in " + path);
        cursor = e;
    }
    if (cursor != data_size) throw ParseError("tensor offsets do not cover the payload in " + path);

    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    json header = json::object();
    if (!ckpt.metadata.empty()) header["__metadata__"] = ckpt.metadata;

    // payload laid out in sorted-name order
    uint64_t cursor = 0;
    std::vector<std::pair<std::string, const TensorInfo*>> order;
    for (const auto& [name, info] : ckpt.tensors) order.emplace_back(name, &info);

    std::vector<uint8_t> payload;
    for (const auto& [name, info] : order) {
        const uint64_t len = info->end - info->begin;
        json spec;
        spec["dtype"] = dtype_name(info->dtype);
        spec["shape"] = info->shape;
        spec["data_offsets"] = {cursor, cursor + len};
        header[name] = spec;
        payload.insert(payload.end(), ckpt.data.begin() + std::ptrdiff_t(info->begin),
                       ckpt.data.begin() + std::ptrdiff_t(info->end));
        cursor += len;
    }

    std::string header_str = header.dump();
    uint64_t header_len = header_str.size();

    std::string blob;
    blob.reserve(8 + header_str.size() + payload.size());
    blob.append(reinterpret_cast<const char*>(&header_len), 8);
    blob.append(header_str);
    blob.append(reinterpret_cast<const char*>(payload.data()), payload.size());
    write_file_atomic(path, blob);
}

float f16_to_f32(uint16_t h) {
    uint32_t sign = uint32_t(h >> 15) & 1;
    uint32_t exp = uint32_t(h >> 10) & 0x1F;
    uint32_t mant = uint32_t(h) & 0x3FF;
    uint32_t out;
    if (exp == 0) {
        if (mant == 0) {
            out = sign << 31;
        } else {
            // subnormal: normalize
            int shift = 0;
            while ((mant & 0x400) == 0) {
                mant <<= 1;
                shift++;
            }
            mant &= 0x3FF;
            out = (sign << 31) | uint32_t(127 - 15 - shift + 1) << 23 | (mant << 13);
        }
    } else if (exp == 0x1F) {
        out = (sign << 31) | 0x7F800000 | (mant << 13);
    } else {
        out = (sign << 31) | ((exp - 15 + 127) << 23) | (mant << 13);
    }
    return std::bit_cast<float>(out);
}

uint16_t f32_to_f16(float f) {
    uint32_t x = std::bit_cast<uint32_t>(f);
    uint32_t sign = (x >> 16) & 0x8000;
    uint32_t exp = (x >> 23) & 0xFF;
    uint32_t mant = x & 0x7FFFFF;

    if (exp == 0xFF) { // inf / nan
        return uint16_t(sign | 0x7C00 | (mant ? 0x200 | (mant >> 13) : 0));
    }
    int e = int(exp) - 127 + 15;
    if (e >= 0x1F) return uint16_t(sign | 0x7C00); // overflow -> inf
    if (e <= 0) {
        if (e < -10) return uint16_t(sign); // underflow -> signed zero
        // subnormal half: shift mantissa (with implicit bit) right
        mant |= 0x800000;
        int shift = 14 - e;
        uint32_t half = mant >> shift;
        uint32_t rem = mant & ((1u << shift) - 1);
        uint32_t halfway = 1u << (shift - 1);
        if (rem > halfway || (rem == halfway && (half & 1))) half++;
        return uint16_t(sign | half);
    }
    uint32_t half = uint32_t(e) << 10 | (mant >> 13);
    uint32_t rem = mant & 0x1FFF;
    if (rem > 0x1000 || (rem == 0x1000 && (half & 1))) half++; // may carry into exponent, which is correct
    return uint16_t(sign | half);
}

float bf16_to_f32(uint16_t h) {
    return std::bit_cast<float>(uint32_t(h) << 16);
}

uint16_t f32_to_bf16(float f) {
    uint32_t x = std::bit_cast<uint32_t>(f);
    if ((x & 0x7F800000) == 0x7F800000 && (x & 0x7FFFFF)) // nan: keep it a nan
        return uint16_t((x >> 16) | 0x40);
    uint32_t rounded = x + 0x7FFF + ((x >> 16) & 1);
    return uint16_t(rounded >> 16);
}

double read_element(std::span<const uint8_t> bytes, Dtype d, size_t i) {
    const uint8_t* p = bytes.data() + i * dtype_size(d);
    switch (d) {
        case Dtype::F64: { double v; std::memcpy(&v, p, 8); return v; }
        case Dtype::F32: { float v; std::memcpy(&v, p, 4); return double(v); }
        case Dtype::F16: { uint16_t v; std::memcpy(&v, p, 2); return double(f16_to_f32(v)); }
        case Dtype::BF16: { uint16_t v; std::memcpy(&v, p, 2); return double(bf16_to_f32(v)); }
        case Dtype::I64: { int64_t v; std::memcpy(&v, p, 8); return double(v); }
        case Dtype::I32: { int32_t v; std::memcpy(&v, p, 4); return double(v); }
        case Dtype::I16: { int16_t v; std::memcpy(&v, p, 2); return double(v); }
        case Dtype::I8: { int8_t v; std::memcpy(&v, p, 1); return double(v); }
        case Dtype::U8: case Dtype::BOOL: { uint8_t v = *p; return double(v); }
    }
    return 0.0;
}

void write_element(std::span<uint8_t> bytes, Dtype d, size_t i, double value) {
    uint8_t* p = bytes.data() + i * dtype_size(d);
    switch (d) {
        case Dtype::F64: { std::memcpy(p, &value, 8); return; }
        case Dtype::F32: { float v = float(value); std::memcpy(p, &v, 4); return; }
        case Dtype::F16: { uint16_t v = f32_to_f16(float(value)); std::memcpy(p, &v, 2); return; }
        case Dtype::BF16: { uint16_t v = f32_to_bf16(float(value)); std::memcpy(p, &v, 2); return; }
        default:
            throw Error("write_element only supports float dtypes");
    }
}

} // namespace alignforge
