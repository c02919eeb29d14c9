#include "dsn/checkpoint.hpp"

namespace dsn::num::detail {

void ckpt_write_bytes(std::FILE* f, const void* p, size_t n) {
    if (n && std::fwrite(p, 1, n, f) != n) throw validation_error("checkpoint: short write");
}

void ckpt_read_bytes(std::FILE* f, void* p, size_t n) {
    if (n && std::fread(p, 1, n, f) != n) throw validation_error("checkpoint: short read");
}

void ckpt_write_u32(std::FILE* f, uint32_t v) { ckpt_write_bytes(f, &v, 4); }
void ckpt_write_u64(std::FILE* f, uint64_t v) { ckpt_write_bytes(f, &v, 8); }

uint32_t ckpt_read_u32(std::FILE* f) {
    uint32_t v = 0;
    ckpt_read_bytes(f, &v, 4);
    return v;
}

uint64_t ckpt_read_u64(std::FILE* f) {
    uint64_t v = 0;
    ckpt_read_bytes(f, &v, 8);
    return v;
}

void ckpt_write_string(std::FILE* f, const std::string& s) {
    ckpt_write_u32(f, static_cast<uint32_t>(s.size()));
    ckpt_write_bytes(f, s.data(), s.size());
}

std::string ckpt_read_string(std::FILE* f) {
    const uint32_t n = ckpt_read_u32(f);
    if (n > (1u << 20)) throw validation_error("checkpoint: implausible string length");
    std::string s(n, '\0');
    ckpt_read_bytes(f, s.data(), n);
    return s;
}

}  // namespace dsn::num::detail
