#include "dsn/split.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

namespace dsn {

bool SplitSpec::is_masked(NodeId n) const {
    return std::binary_search(masked_nodes.begin(), masked_nodes.end(), n);
}

std::pair<Time, Time> chronological_split(const EventStream& stream, double q_train,
                                          double q_val) {
    if (stream.size() < 10)
        throw validation_error("chronological split needs at least 10 events, got " +
                               std::to_string(stream.size()));
    if (!(q_train > 0 && q_train < q_val && q_val < 1))
        throw validation_error("split quantiles must satisfy 0 < q_train < q_val < 1");
    std::vector<Time> times;
    times.reserve(stream.size());
    for (const auto& e : stream) times.push_back(e.time);
    std::sort(times.begin(), times.end());
    const auto n = times.size();
    const Time train_cutoff = times[static_cast<size_t>(std::floor(q_train * n))];
    const Time val_cutoff = times[static_cast<size_t>(std::floor(q_val * n))];
    if (times.front() >= train_cutoff)
        throw validation_error("degenerate split: no event strictly precedes the train cutoff "
                               "(timestamps too concentrated)");
    return {train_cutoff, val_cutoff};
}

std::vector<NodeId> sample_masked_nodes(const EventStream& stream, Time train_cutoff,
                                        int64_t total_nodes, double ratio, uint64_t seed) {
    if (ratio < 0 || ratio > 1) throw validation_error("mask ratio must be in [0,1]");
    std::vector<NodeId> pool;
    {
        std::vector<char> seen(static_cast<size_t>(total_nodes), 0);
        for (const auto& e : stream) {
            if (e.time < train_cutoff) continue;
            for (NodeId n : {e.src, e.dst}) {
                if (n >= total_nodes) throw invariant_error("node id beyond declared node count");
                if (!seen[n]) {
                    seen[n] = 1;
                    pool.push_back(n);
                }
            }
        }
    }
    std::sort(pool.begin(), pool.end());
    const auto want = static_cast<size_t>(std::floor(ratio * static_cast<double>(total_nodes)));
    if (want == 0) return {};
    if (pool.empty()) {
        std::fprintf(stderr, "warning: masked-node pool is empty; masking nothing\n");
        return {};
    }
    std::mt19937_64 rng(derive_seed(seed, seed_tag::kMaskSample));
    const size_t k = std::min(want, pool.size());
    for (size_t i = 0; i < k; ++i) {
        const size_t j = i + static_cast<size_t>(rng() % (pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

SplitSpec apply_mask(const EventStream& stream, std::pair<Time, Time> cutoffs,
                     std::vector<NodeId> masked, uint64_t seed, double mask_ratio) {
    SplitSpec s;
    s.train_cutoff = cutoffs.first;
    s.val_cutoff = cutoffs.second;
    s.masked_nodes = std::move(masked);
    s.seed = seed;
    s.mask_ratio = mask_ratio;
    for (const auto& e : stream) {
        const bool touches_mask = s.is_masked(e.src) || s.is_masked(e.dst);
        if (e.time < s.train_cutoff) {
            if (!touches_mask) s.train_ids.push_back(e.stream_index);
            // masked-incident training events are dropped entirely
        } else if (e.time < s.val_cutoff) {
            s.val_ids.push_back(e.stream_index);
        } else {
            s.test_ids.push_back(e.stream_index);
            (touches_mask ? s.induc_test_ids : s.trans_test_ids).push_back(e.stream_index);
        }
    }
    return s;
}

EventStream retained_stream(const EventStream& stream, const SplitSpec& split) {
    EventStream out;
    out.reserve(stream.size());
    for (const auto& e : stream) {
        if (e.time < split.train_cutoff && (split.is_masked(e.src) || split.is_masked(e.dst)))
            continue;
        out.push_back(e);
    }
    return out;
}

std::vector<NodeId> eval_node_set(const EventStream& stream, const SplitSpec& split) {
    std::vector<NodeId> nodes;
    for (const auto& e : stream) {
        if (e.time < split.train_cutoff) continue;
        nodes.push_back(e.src);
        nodes.push_back(e.dst);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return nodes;
}

EvalNegatives generate_eval_negatives(const std::vector<SignedEvent>& eval_events,
                                      const std::vector<NodeId>& nodes, uint64_t seed) {
    if (nodes.empty()) throw validation_error("negative sampling: empty evaluation node set");
    std::mt19937_64 rng(derive_seed(seed, seed_tag::kEvalNeg));
    EvalNegatives out;
    out.seed = seed;
    out.pairs.reserve(eval_events.size());
    for (const auto& e : eval_events) {
        EvalNegatives::Pair p;
        p.src = nodes[rng() % nodes.size()];
        p.dst = nodes[rng() % nodes.size()];
        p.time = e.time;
        out.pairs.push_back(p);
    }
    return out;
}

// ---------------------------------------------------------------------------
// I/O
// ---------------------------------------------------------------------------

namespace {
void write_id_section(std::FILE* f, const char* name, const std::vector<StreamIndex>& ids) {
    std::fprintf(f, "[%s]\n", name);
    for (StreamIndex i : ids) std::fprintf(f, "%lld\n", static_cast<long long>(i));
}
}  // namespace

void write_split_file(const std::string& path, const SplitSpec& split,
                      const std::string& checksum) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw validation_error("cannot write " + path);
    std::fprintf(f, "# seed=%llu\n", static_cast<unsigned long long>(split.seed));
    std::fprintf(f, "# checksum=%s\n", checksum.c_str());
    std::fprintf(f, "# train_cutoff=%.17g\n", split.train_cutoff);
    std::fprintf(f, "# val_cutoff=%.17g\n", split.val_cutoff);
    std::fprintf(f, "# mask_ratio=%.17g\n", split.mask_ratio);
    std::fprintf(f, "[masked_nodes]\n");
    for (NodeId n : split.masked_nodes) std::fprintf(f, "%lld\n", static_cast<long long>(n));
    write_id_section(f, "train_ids", split.train_ids);
    write_id_section(f, "val_ids", split.val_ids);
    write_id_section(f, "test_ids", split.test_ids);
    write_id_section(f, "trans_test_ids", split.trans_test_ids);
    write_id_section(f, "induc_test_ids", split.induc_test_ids);
    std::fclose(f);
}

SplitSpec read_split_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open " + path);
    SplitSpec s;
    std::string line, section;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = line.substr(2, eq - 2);
            const std::string val = line.substr(eq + 1);
            if (key == "seed") s.seed = std::stoull(val);
            else if (key == "train_cutoff") s.train_cutoff = std::stod(val);
            else if (key == "val_cutoff") s.val_cutoff = std::stod(val);
            else if (key == "mask_ratio") s.mask_ratio = std::stod(val);
            continue;
        }
        if (line[0] == '[') {
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const long long v = std::stoll(line);
        if (section == "masked_nodes") s.masked_nodes.push_back(v);
        else if (section == "train_ids") s.train_ids.push_back(v);
        else if (section == "val_ids") s.val_ids.push_back(v);
        else if (section == "test_ids") s.test_ids.push_back(v);
        else if (section == "trans_test_ids") s.trans_test_ids.push_back(v);
        else if (section == "induc_test_ids") s.induc_test_ids.push_back(v);
        else throw validation_error("split file: value outside any section in " + path);
    }
    return s;
}

void write_negatives_file(const std::string& path, const EvalNegatives& negs,
                          const std::string& checksum) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw validation_error("cannot write " + path);
    std::fprintf(f, "# seed=%llu\n", static_cast<unsigned long long>(negs.seed));
    std::fprintf(f, "# checksum=%s\n", checksum.c_str());
    for (const auto& p : negs.pairs)
        std::fprintf(f, "%lld %lld %.17g\n", static_cast<long long>(p.src),
                     static_cast<long long>(p.dst), p.time);
    std::fclose(f);
}

EvalNegatives read_negatives_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open " + path);
    EvalNegatives out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq != std::string::npos && line.substr(2, eq - 2) == "seed")
                out.seed = std::stoull(line.substr(eq + 1));
            continue;
        }
        EvalNegatives::Pair p;
        long long src, dst;
        if (std::sscanf(line.c_str(), "%lld %lld %lg", &src, &dst, &p.time) != 3)
            throw validation_error("negatives file: malformed row in " + path);
        p.src = src;
        p.dst = dst;
        out.pairs.push_back(p);
    }
    return out;
}

}  // namespace dsn
