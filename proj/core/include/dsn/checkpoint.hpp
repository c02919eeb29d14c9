// Version-tagged binary checkpoint: a flat archive of
// (name, dtype, shape, raw little-endian values) records for every
// parameter, optionally followed by AdamW moments and step counter.

#ifndef DSN_CHECKPOINT_HPP
#define DSN_CHECKPOINT_HPP

#include <cstdio>
#include <string>

#include "dsn/optim.hpp"

namespace dsn::num {

namespace detail {
void ckpt_write_bytes(std::FILE* f, const void* p, size_t n);
void ckpt_read_bytes(std::FILE* f, void* p, size_t n);
void ckpt_write_u32(std::FILE* f, uint32_t v);
void ckpt_write_u64(std::FILE* f, uint64_t v);
uint32_t ckpt_read_u32(std::FILE* f);
uint64_t ckpt_read_u64(std::FILE* f);
void ckpt_write_string(std::FILE* f, const std::string& s);
std::string ckpt_read_string(std::FILE* f);

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};

inline constexpr char kMagic[8] = {'D', 'S', 'N', 'C', 'K', 'P', 'T', '1'};

template <class T>
constexpr uint8_t dtype_tag() {
    return sizeof(T) == 4 ? 0 : 1;
}

template <class T>
void write_tensor(std::FILE* f, const Tensor<T>& t) {
    std::fputc(dtype_tag<T>(), f);
    ckpt_write_u32(f, static_cast<uint32_t>(t.rows));
    ckpt_write_u32(f, static_cast<uint32_t>(t.cols));
    ckpt_write_bytes(f, t.ptr(), sizeof(T) * t.size());
}

template <class T>
Tensor<T> read_tensor(std::FILE* f) {
    const int tag = std::fgetc(f);
    if (tag < 0) throw validation_error("checkpoint: truncated tensor record");
    const uint32_t rows = ckpt_read_u32(f);
    const uint32_t cols = ckpt_read_u32(f);
    if (tag == 0) {
        Tensor<float> t(static_cast<int>(rows), static_cast<int>(cols));
        ckpt_read_bytes(f, t.ptr(), sizeof(float) * t.size());
        return t.template cast<T>();
    }
    Tensor<double> t(static_cast<int>(rows), static_cast<int>(cols));
    ckpt_read_bytes(f, t.ptr(), sizeof(double) * t.size());
    return t.template cast<T>();
}
}  // namespace detail

template <class T>
void save_checkpoint(const std::string& path, const ParamStore<T>& store,
                     const AdamW<T>* opt = nullptr) {
    std::unique_ptr<std::FILE, detail::FileCloser> f(std::fopen(path.c_str(), "wb"));
    if (!f) throw validation_error("checkpoint: cannot open for write: " + path);
    detail::ckpt_write_bytes(f.get(), detail::kMagic, 8);
    detail::ckpt_write_u32(f.get(), static_cast<uint32_t>(store.size()));
    for (size_t i = 0; i < store.size(); ++i) {
        detail::ckpt_write_string(f.get(), store[i].name);
        detail::write_tensor(f.get(), store[i].value);
    }
    std::fputc(opt ? 1 : 0, f.get());
    if (opt) {
        detail::ckpt_write_u64(f.get(), static_cast<uint64_t>(opt->step_count()));
        for (size_t i = 0; i < store.size(); ++i) {
            detail::write_tensor(f.get(), opt->moments1()[i]);
            detail::write_tensor(f.get(), opt->moments2()[i]);
        }
    }
}

/// Loads values (and optimizer state if present and requested) into an
/// already-constructed store; names and shapes must match.
template <class T>
void load_checkpoint(const std::string& path, ParamStore<T>& store, AdamW<T>* opt = nullptr) {
    std::unique_ptr<std::FILE, detail::FileCloser> f(std::fopen(path.c_str(), "rb"));
    if (!f) throw validation_error("checkpoint: cannot open: " + path);
    char magic[8];
    detail::ckpt_read_bytes(f.get(), magic, 8);
    if (std::memcmp(magic, detail::kMagic, 8) != 0)
        throw validation_error("checkpoint: bad magic in " + path);
    const uint32_t count = detail::ckpt_read_u32(f.get());
    if (count != store.size())
        throw validation_error("checkpoint: parameter count mismatch in " + path);
    for (uint32_t i = 0; i < count; ++i) {
        const std::string name = detail::ckpt_read_string(f.get());
        Tensor<T> t = detail::read_tensor<T>(f.get());
        Param<T>& p = store.at(name);
        if (!p.value.same_shape(t))
            throw validation_error("checkpoint: shape mismatch for " + name);
        p.value = std::move(t);
    }
    const int has_opt = std::fgetc(f.get());
    if (opt) {
        if (has_opt != 1) throw validation_error("checkpoint: optimizer state missing in " + path);
        opt->set_step_count(static_cast<int64_t>(detail::ckpt_read_u64(f.get())));
        for (uint32_t i = 0; i < count; ++i) {
            opt->moments1()[i] = detail::read_tensor<T>(f.get());
            opt->moments2()[i] = detail::read_tensor<T>(f.get());
        }
    }
}

}  // namespace dsn::num

#endif  // DSN_CHECKPOINT_HPP
