// Shared aliases, error types and small deterministic utilities used
// across the library.

#ifndef DSN_COMMON_HPP
#define DSN_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dsn {

using NodeId = int64_t;
using Time = double;
using StreamIndex = int64_t;

/// Error category, mapped onto process exit codes by the CLI.
enum class ErrorKind {
    Validation,  // bad input, bad config, malformed file (exit 2)
    Invariant,   // internal contract violation (exit 3)
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline Error validation_error(const std::string& what) {
    return Error(ErrorKind::Validation, what);
}
inline Error invariant_error(const std::string& what) {
    return Error(ErrorKind::Invariant, what);
}

// ---------------------------------------------------------------------------
// Deterministic hashing / seed derivation
// ---------------------------------------------------------------------------

/// FNV-1a over a byte range; used for input-file fingerprints in artifacts.
inline uint64_t fnv1a64(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

/// splitmix64 finalizer; the workhorse for deriving independent
/// sub-seeds from (seed, tag, index...) tuples.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t seed, uint64_t tag) {
    return mix64(mix64(seed) ^ tag);
}
inline uint64_t derive_seed(uint64_t seed, uint64_t tag, uint64_t a) {
    return mix64(derive_seed(seed, tag) ^ mix64(a));
}
inline uint64_t derive_seed(uint64_t seed, uint64_t tag, uint64_t a, uint64_t b) {
    return mix64(derive_seed(seed, tag, a) ^ mix64(b + 0x517cc1b727220a95ull));
}

// Stable tags for the independent random streams of a run.
namespace seed_tag {
inline constexpr uint64_t kMaskSample = 0x6d61736b;    // masked-node sampling
inline constexpr uint64_t kEvalNeg = 0x65766e67;       // cached eval negatives
inline constexpr uint64_t kParamInit = 0x696e6974;     // parameter init
inline constexpr uint64_t kWalk = 0x77616c6b;          // per-query walk sampling
inline constexpr uint64_t kDropout = 0x64726f70;       // per-query dropout masks
inline constexpr uint64_t kTrainNeg = 0x746e6567;      // on-the-fly NonEdge pairs
inline constexpr uint64_t kNodeDrop = 0x6e647270;      // unknown-embedding node dropout
}  // namespace seed_tag

}  // namespace dsn

#endif  // DSN_COMMON_HPP
