#include "dsn/events.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace dsn {

namespace {

bool stream_pos_less(const SignedEvent& e, const std::pair<Time, StreamIndex>& p) {
    if (e.time != p.first) return e.time < p.first;
    return e.stream_index < p.second;
}

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

size_t history_bound(const EventStream& stream, const MicroPos& pos) {
    const std::pair<Time, StreamIndex> key{pos.time,
                                           pos.index ? *pos.index
                                                     : std::numeric_limits<StreamIndex>::min()};
    // Events are sorted by (time, stream_index); find the first event with
    // time >= t (no micro index) or (time, index) >= (t, i).
    auto it = std::lower_bound(stream.begin(), stream.end(), key, stream_pos_less);
    return static_cast<size_t>(it - stream.begin());
}

Label label_of(const EventStream& stream, NodeId u, NodeId v, Time t) {
    auto lo = std::lower_bound(stream.begin(), stream.end(), t,
                               [](const SignedEvent& e, Time x) { return e.time < x; });
    bool pos = false, neg = false;
    for (auto it = lo; it != stream.end() && it->time == t; ++it) {
        if (it->src == u && it->dst == v) {
            if (it->sign > 0) pos = true;
            else neg = true;
        }
    }
    if (pos && neg)
        throw invariant_error("ambiguous label: both +1 and -1 events at identical (u,v,t)");
    if (pos) return Label::Pos;
    if (neg) return Label::Neg;
    return Label::NonEdge;
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

namespace {

char detect_delimiter(const std::string& line) {
    if (line.find(',') != std::string::npos) return ',';
    if (line.find('\t') != std::string::npos) return '\t';
    return ' ';
}

std::vector<std::string_view> split_fields(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (start <= line.size()) {
        size_t end = line.find(delim, start);
        if (end == std::string_view::npos) end = line.size();
        std::string_view f = line.substr(start, end - start);
        // collapse runs of spaces when space-delimited
        if (!(delim == ' ' && f.empty())) out.push_back(f);
        if (end == line.size()) break;
        start = end + 1;
    }
    return out;
}

bool parse_double(std::string_view s, double& out) {
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && p == end;
}

bool parse_int(std::string_view s, int64_t& out) {
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(begin, end, out);
    if (ec == std::errc() && p == end) return true;
    // tolerate integer-valued floats like "42.0"
    double d;
    if (!parse_double(s, d)) return false;
    if (d != std::floor(d)) return false;
    out = static_cast<int64_t>(d);
    return true;
}

bool looks_like_header(const std::vector<std::string_view>& fields) {
    for (auto f : fields) {
        double d;
        if (!parse_double(f, d)) return true;
    }
    return false;
}

}  // namespace

uint64_t file_checksum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot open file: " + path);
    uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        h = fnv1a64(buf, static_cast<size_t>(in.gcount()), h);
    }
    return h;
}

IngestResult ingest_events(const std::string& path, IngestFormat format,
                           const std::string& dataset_name) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open file: " + path);

    struct RawRow {
        int64_t src, dst;
        double time, weight;
        int sign;
        StreamIndex index;
    };
    std::vector<RawRow> rows;
    bool saw_zero_sign = false, saw_minus_sign = false;

    std::string line;
    size_t line_no = 0;
    char delim = 0;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (delim == 0) delim = detect_delimiter(line);
        auto fields = split_fields(line, delim);
        if (first_content_line) {
            first_content_line = false;
            const bool header = format == IngestFormat::CsvWithHeader ||
                                (format == IngestFormat::Auto && looks_like_header(fields));
            if (format == IngestFormat::CsvHeaderless && looks_like_header(fields))
                throw validation_error("row " + std::to_string(line_no) +
                                       ": non-numeric fields in headerless file");
            if (header) continue;
        }
        if (fields.size() < 4 || fields.size() > 5)
            throw validation_error("row " + std::to_string(line_no) + ": expected 4 or 5 columns, got " +
                                   std::to_string(fields.size()));
        RawRow r{};
        int64_t sign_raw;
        if (!parse_int(fields[0], r.src) || !parse_int(fields[1], r.dst) ||
            !parse_double(fields[2], r.time) || !parse_int(fields[3], sign_raw))
            throw validation_error("row " + std::to_string(line_no) + ": malformed field");
        if (r.src < 0 || r.dst < 0)
            throw validation_error("row " + std::to_string(line_no) + ": negative node id");
        if (!std::isfinite(r.time) || r.time < 0)
            throw validation_error("row " + std::to_string(line_no) + ": non-finite or negative time");
        if (sign_raw == 1) r.sign = +1;
        else if (sign_raw == -1) {
            r.sign = -1;
            saw_minus_sign = true;
        } else if (sign_raw == 0) {
            r.sign = -1;
            saw_zero_sign = true;
        } else {
            throw validation_error("row " + std::to_string(line_no) + ": sign must be 1, -1 or 0");
        }
        if (fields.size() == 5) {
            if (!parse_double(fields[4], r.weight))
                throw validation_error("row " + std::to_string(line_no) + ": malformed weight");
            if (!std::isfinite(r.weight) || r.weight < 0)
                throw validation_error("row " + std::to_string(line_no) +
                                       ": non-finite or negative weight");
        } else {
            r.weight = 1.0;
        }
        r.index = static_cast<StreamIndex>(rows.size());
        rows.push_back(r);
    }
    if (rows.empty()) throw validation_error("no events in " + path);
    if (saw_zero_sign && saw_minus_sign)
        throw validation_error("mixed sign encodings ({1,-1} and {1,0}) in " + path);

    std::stable_sort(rows.begin(), rows.end(), [](const RawRow& a, const RawRow& b) {
        if (a.time != b.time) return a.time < b.time;
        return a.index < b.index;
    });

    // Dense ids in order of first appearance in the sorted stream.
    std::unordered_map<int64_t, NodeId> remap;
    std::vector<NodeId> id_map;
    auto dense = [&](int64_t orig) {
        auto [it, inserted] = remap.emplace(orig, static_cast<NodeId>(id_map.size()));
        if (inserted) id_map.push_back(orig);
        return it->second;
    };

    IngestResult out;
    out.events.reserve(rows.size());
    for (const RawRow& r : rows) {
        SignedEvent e;
        e.src = dense(r.src);
        e.dst = dense(r.dst);
        e.time = r.time;
        e.sign = r.sign;
        e.weight = r.weight;
        e.stream_index = r.index;
        out.events.push_back(e);
    }
    out.node_id_map = std::move(id_map);

    DatasetManifest& m = out.manifest;
    m.name = dataset_name.empty() ? path : dataset_name;
    m.node_count = static_cast<int64_t>(out.node_id_map.size());
    m.event_count = static_cast<int64_t>(out.events.size());
    m.time_min = out.events.front().time;
    m.time_max = out.events.back().time;
    for (const auto& e : out.events) (e.sign > 0 ? m.pos_count : m.neg_count)++;
    m.sign_encoding = saw_zero_sign ? "binary01" : "pm1";
    m.source_checksum = hex64(file_checksum(path));
    return out;
}

// ---------------------------------------------------------------------------
// Artifact I/O
// ---------------------------------------------------------------------------
//
// events file: one event per line, "src dst time sign weight stream_index",
//   doubles printed with %.17g so re-reading is bit-exact.
// manifest: "key=value", one datum per line.
// node map: "# checksum=..." then "dense original" per line.

void write_events_file(const std::string& path, const EventStream& events) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw validation_error("cannot write " + path);
    for (const auto& e : events)
        std::fprintf(f, "%lld %lld %.17g %d %.17g %lld\n", static_cast<long long>(e.src),
                     static_cast<long long>(e.dst), e.time, e.sign, e.weight,
                     static_cast<long long>(e.stream_index));
    std::fclose(f);
}

EventStream read_events_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open " + path);
    EventStream out;
    SignedEvent e;
    long long src, dst, idx;
    while (in >> src >> dst >> e.time >> e.sign >> e.weight >> idx) {
        e.src = src;
        e.dst = dst;
        e.stream_index = idx;
        out.push_back(e);
    }
    return out;
}

std::string DatasetManifest::to_text() const {
    std::ostringstream os;
    os.precision(17);
    os << "name=" << name << "\n";
    os << "nodes=" << node_count << "\n";
    os << "events=" << event_count << "\n";
    os << "time_min=" << time_min << "\n";
    os << "time_max=" << time_max << "\n";
    os << "pos_events=" << pos_count << "\n";
    os << "neg_events=" << neg_count << "\n";
    os << "sign_encoding=" << sign_encoding << "\n";
    os << "source_checksum=" << source_checksum << "\n";
    if (!split_params.empty()) os << "split_params=" << split_params << "\n";
    return os.str();
}

DatasetManifest DatasetManifest::from_text(const std::string& text) {
    DatasetManifest m;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "name") m.name = val;
        else if (key == "nodes") m.node_count = std::stoll(val);
        else if (key == "events") m.event_count = std::stoll(val);
        else if (key == "time_min") m.time_min = std::stod(val);
        else if (key == "time_max") m.time_max = std::stod(val);
        else if (key == "pos_events") m.pos_count = std::stoll(val);
        else if (key == "neg_events") m.neg_count = std::stoll(val);
        else if (key == "sign_encoding") m.sign_encoding = val;
        else if (key == "source_checksum") m.source_checksum = val;
        else if (key == "split_params") m.split_params = val;
        else throw validation_error("manifest: unknown key " + key);
    }
    return m;
}

void write_manifest(const std::string& path, const DatasetManifest& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot write " + path);
    out << m.to_text();
}

DatasetManifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return DatasetManifest::from_text(ss.str());
}

void write_node_map(const std::string& path, const std::vector<NodeId>& map,
                    const std::string& checksum) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw validation_error("cannot write " + path);
    std::fprintf(f, "# checksum=%s\n", checksum.c_str());
    for (size_t i = 0; i < map.size(); ++i)
        std::fprintf(f, "%lld %lld\n", static_cast<long long>(i), static_cast<long long>(map[i]));
    std::fclose(f);
}

std::vector<NodeId> read_node_map(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open " + path);
    std::vector<NodeId> map;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        long long dense, orig;
        if (std::sscanf(line.c_str(), "%lld %lld", &dense, &orig) != 2)
            throw validation_error("node map: malformed line in " + path);
        if (dense != static_cast<long long>(map.size()))
            throw validation_error("node map: non-contiguous dense ids in " + path);
        map.push_back(orig);
    }
    return map;
}

}  // namespace dsn
