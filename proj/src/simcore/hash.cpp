#include "hubsim/hash.hpp"

namespace hubsim {

std::string to_hex(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

void CanonicalWriter::put_int(std::int64_t v) {
    auto u = static_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
        buf_.push_back(static_cast<char>(u & 0xff));
        u >>= 8;
    }
}

void CanonicalWriter::put_string(std::string_view s) {
    put_int(static_cast<std::int64_t>(s.size()));
    buf_.append(s);
}

}  // namespace hubsim
