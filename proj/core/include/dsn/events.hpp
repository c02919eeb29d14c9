// Event data model: timestamped directed signed interactions, the strict
// history boundary with micro-step tie-breaking, label semantics, and
// dataset ingestion with dense node-id remapping.

#ifndef DSN_EVENTS_HPP
#define DSN_EVENTS_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dsn/common.hpp"

namespace dsn {

struct SignedEvent {
    NodeId src = 0;
    NodeId dst = 0;
    Time time = 0;
    int sign = +1;       // +1 or -1
    double weight = 1;   // >= 0; 1 for unweighted data
    StreamIndex stream_index = 0;  // position in the source file; unique
};

enum class Label : int { Pos = 0, Neg = 1, NonEdge = 2 };
inline constexpr int kNumLabels = 3;

inline const char* label_name(Label l) {
    switch (l) {
        case Label::Pos: return "pos";
        case Label::Neg: return "neg";
        case Label::NonEdge: return "nonedge";
    }
    return "?";
}

/// Sorted event stream: non-decreasing (time, stream_index).
using EventStream = std::vector<SignedEvent>;

/// Micro-step position: an event at (t, i) may only see strictly earlier
/// positions. Queries without a stream index see everything before t.
struct MicroPos {
    Time time = 0;
    std::optional<StreamIndex> index;

    bool admits(const SignedEvent& e) const {
        if (e.time < time) return true;
        return index && e.time == time && e.stream_index < *index;
    }
};

/// Index of the first event NOT admitted by the position, i.e. events
/// [0, bound) are exactly the available history H(t) (with micro-steps).
size_t history_bound(const EventStream& stream, const MicroPos& pos);

/// The available history H(t) as a view over the sorted stream: every
/// event with time < t, plus same-timestamp events at earlier
/// micro-steps when an index is supplied.
inline std::span<const SignedEvent> history_before(const EventStream& stream, Time t,
                                                   std::optional<StreamIndex> micro = {}) {
    return {stream.data(), history_bound(stream, {t, micro})};
}

/// Ground-truth label of a (u, v, t) query by direction-sensitive lookup.
/// Throws if both a +1 and a -1 event exist at identical (u, v, t).
Label label_of(const EventStream& stream, NodeId u, NodeId v, Time t);

struct DatasetManifest {
    std::string name;
    int64_t node_count = 0;
    int64_t event_count = 0;
    Time time_min = 0;
    Time time_max = 0;
    int64_t pos_count = 0;
    int64_t neg_count = 0;
    std::string sign_encoding;   // "pm1" or "binary01"
    std::string source_checksum; // fnv1a64 of the input bytes, hex
    std::string split_params;    // free-form record of split settings

    std::string to_text() const;
    static DatasetManifest from_text(const std::string& text);
};

enum class IngestFormat { Auto, CsvWithHeader, CsvHeaderless };

struct IngestResult {
    EventStream events;                 // sorted by (time, stream_index), dense ids
    DatasetManifest manifest;
    std::vector<NodeId> node_id_map;    // dense id -> original id
};

/// Reads a delimited text file with columns src,dst,time,sign[,weight].
/// Delimiter auto-detected among comma/tab/space. Sign values {1,-1} pass
/// through; {1,0} map 0 to -1 (recorded in the manifest). Node ids are
/// remapped to 0..V-1 in order of first appearance in the sorted stream.
IngestResult ingest_events(const std::string& path, IngestFormat format = IngestFormat::Auto,
                           const std::string& dataset_name = "");

// Canonical artifact I/O (see docs in events.cpp for the exact layouts).
void write_events_file(const std::string& path, const EventStream& events);
EventStream read_events_file(const std::string& path);
void write_manifest(const std::string& path, const DatasetManifest& m);
DatasetManifest read_manifest(const std::string& path);
void write_node_map(const std::string& path, const std::vector<NodeId>& map,
                    const std::string& checksum);
std::vector<NodeId> read_node_map(const std::string& path);

uint64_t file_checksum(const std::string& path);

}  // namespace dsn

#endif  // DSN_EVENTS_HPP
