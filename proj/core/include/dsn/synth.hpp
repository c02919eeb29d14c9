// Deterministic synthetic signed-interaction stream generator. Produces
// trust-network-shaped data (skewed activity, day-granular timestamps,
// rare negatives, community structure, mid-stream behaviour flips) so the
// full pipeline can be exercised end to end when no real dataset file is
// available. The default shape mirrors the BitcoinAlpha statistics.

#ifndef DSN_SYNTH_HPP
#define DSN_SYNTH_HPP

#include <string>

#include "dsn/events.hpp"

namespace dsn {

struct SynthSpec {
    int64_t nodes = 3783;
    int64_t events = 24186;
    int64_t days = 1647;          // unique timestamp grid
    double day_seconds = 86400;   // timestamp stride
    double neg_fraction = 0.064;  // target share of -1 events
    double flip_fraction = 0.06;  // nodes that turn untrustworthy mid-stream
    uint64_t seed = 7;
};

/// Events come out sorted by (time, stream_index) with dense node ids.
EventStream generate_synthetic_stream(const SynthSpec& spec);

/// Writes the stream as a headerless csv (src,dst,time,sign) compatible
/// with ingest_events.
void write_synthetic_csv(const std::string& path, const SynthSpec& spec);

}  // namespace dsn

#endif  // DSN_SYNTH_HPP
