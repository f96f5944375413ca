#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hubsim {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x00000100000001b3ull;

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnvOffset) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

std::string to_hex(std::uint64_t v);

// Micrometer quantization, round half to even.
inline std::int64_t quantize_um(double v) { return static_cast<std::int64_t>(std::nearbyint(v * 1e6)); }
inline double quantized(double v) { return static_cast<double>(quantize_um(v)) / 1e6; }

// Canonical byte stream: every value is a little-endian int64.
class CanonicalWriter {
public:
    void put_int(std::int64_t v);
    void put_real(double v) { put_int(quantize_um(v)); }
    void put_bool(bool v) { put_int(v ? 1 : 0); }
    void put_string(std::string_view s);

    const std::string& bytes() const { return buf_; }
    std::uint64_t digest() const { return fnv1a64(buf_); }

private:
    std::string buf_;
};

}  // namespace hubsim
