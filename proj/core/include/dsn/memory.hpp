// Dual-polarity per-node temporal memory. An observed event builds one
// coupled message from both endpoints' four memory vectors and updates
// only the channel matching the event sign through that channel's GRU.
// Updates are deferred in a raw-message store and applied at batch
// boundaries on a private tape, so one update step stays differentiable
// before states detach.

#ifndef DSN_MEMORY_HPP
#define DSN_MEMORY_HPP

#include <memory>
#include <unordered_map>

#include "dsn/config.hpp"
#include "dsn/events.hpp"
#include "dsn/nn.hpp"

namespace dsn {

inline constexpr int kPosChannel = 0;
inline constexpr int kNegChannel = 1;

/// Plain (detached) memory state: two d_emb vectors and a last-update
/// time per node. Fresh nodes read as zero vectors.
template <class T>
class DualMemory {
public:
    DualMemory(int64_t nodes, int dim, bool shared_channel)
        : dim_(dim), shared_(shared_channel), data_{} {
        data_[0].assign(static_cast<size_t>(nodes) * dim, T(0));
        data_[1].assign(shared_ ? 0 : static_cast<size_t>(nodes) * dim, T(0));
        last_update_.assign(static_cast<size_t>(nodes), Time(0));
        seen_.assign(static_cast<size_t>(nodes), 0);
    }

    int dim() const { return dim_; }
    int64_t nodes() const { return static_cast<int64_t>(seen_.size()); }
    bool shared_channel() const { return shared_; }

    void reset() {
        for (auto& ch : data_) std::fill(ch.begin(), ch.end(), T(0));
        std::fill(last_update_.begin(), last_update_.end(), Time(0));
        std::fill(seen_.begin(), seen_.end(), 0);
    }

    num::Tensor<T> read_row(NodeId u, int channel) const {
        num::Tensor<T> out(1, dim_);
        const auto& ch = data_[channel_index(channel)];
        std::memcpy(out.ptr(), ch.data() + static_cast<size_t>(u) * dim_, sizeof(T) * dim_);
        return out;
    }

    void write_row(NodeId u, int channel, const num::Tensor<T>& v) {
        auto& ch = data_[channel_index(channel)];
        std::memcpy(ch.data() + static_cast<size_t>(u) * dim_, v.ptr(), sizeof(T) * dim_);
    }

    bool seen(NodeId u) const { return seen_[u] != 0; }
    Time last_update(NodeId u) const { return last_update_[u]; }
    void touch(NodeId u, Time t) {
        last_update_[u] = t;
        seen_[u] = 1;
    }

    /// Elapsed-time feature log(1 + max(t - t_last, 0)); 0 for fresh nodes.
    double elapsed_feature(NodeId u, Time t) const {
        if (!seen_[u]) return 0.0;
        return std::log1p(std::max(t - last_update_[u], 0.0));
    }

    const std::vector<T>& raw(int channel) const { return data_[channel_index(channel)]; }

    struct Snapshot {
        std::array<std::vector<T>, 2> data;
        std::vector<Time> last_update;
        std::vector<uint8_t> seen;
    };

    Snapshot snapshot() const { return {data_, last_update_, seen_}; }
    void restore(const Snapshot& s) {
        data_ = s.data;
        last_update_ = s.last_update;
        seen_ = s.seen;
    }

    bool bit_equal(const DualMemory& o) const {
        return data_ == o.data_ && last_update_ == o.last_update_ && seen_ == o.seen_;
    }

private:
    int dim_;
    bool shared_;
    std::array<std::vector<T>, 2> data_;
    std::vector<Time> last_update_;
    std::vector<uint8_t> seen_;

    int channel_index(int channel) const { return shared_ ? 0 : channel; }
};

/// How queries obtain memory vectors on their tape; reads never mutate.
template <class T>
class MemoryReader {
public:
    virtual ~MemoryReader() = default;
    virtual num::Var<T> read(num::Tape<T>& tape, NodeId u, int channel) = 0;
};

/// Detached reads (evaluation, replay).
template <class T>
class ConstMemoryReader : public MemoryReader<T> {
public:
    explicit ConstMemoryReader(const DualMemory<T>& state) : state_(&state) {}
    num::Var<T> read(num::Tape<T>& tape, NodeId u, int channel) override {
        return tape.constant(state_->read_row(u, channel));
    }

private:
    const DualMemory<T>* state_;
};

/// Parameters of the memory module; owned by the model.
template <class T>
struct MemoryParams {
    num::Mlp<T> msg_mlp;        // [4*d_emb + 2] -> msg_hidden -> d_msg
    num::GruCell<T> gru_pos;    // [d_msg + 1] -> d_emb
    num::GruCell<T> gru_neg;

    MemoryParams() = default;
    MemoryParams(num::ParamStore<T>& ps, const ExperimentConfig& cfg)
        : msg_mlp(ps, "memory.msg", {4 * cfg.d_emb + 2, cfg.msg_hidden, cfg.d_msg()}),
          gru_pos(ps, "memory.gru_pos", cfg.d_msg() + 1, cfg.d_emb),
          gru_neg(ps, "memory.gru_neg", cfg.d_msg() + 1, cfg.d_emb) {}
};

/// Raw-message store plus the deferred, one-step-differentiable flush.
template <class T>
class MemoryEngine {
public:
    struct Pending {  // a raw message awaiting application
        NodeId u, v;
        Time t;
        int sign;
        double weight;
        StreamIndex stream_index;
    };

    /// The flush computation graph, kept alive until its seeded backward.
    struct FlushGraph {
        num::Tape<T> tape;
        std::vector<std::pair<uint64_t, num::Var<T>>> outputs;  // key -> final memory Var
        std::unordered_map<uint64_t, int> slot_of;              // key -> slot index
        std::vector<num::Tensor<T>> slot_grads;                 // reduced dL/d(memory value)

        explicit FlushGraph(num::GradSink<T>* sink) : tape(sink) {}

        void run_backward() {
            std::vector<std::pair<num::Var<T>, const num::Tensor<T>*>> seeds;
            for (auto& [key, var] : outputs) {
                const int slot = slot_of.at(key);
                if (slot < static_cast<int>(slot_grads.size()) && !slot_grads[slot].empty())
                    seeds.push_back({var, &slot_grads[slot]});
            }
            if (!seeds.empty()) tape.backward_seeded(seeds);
        }
    };

    static uint64_t slot_key(NodeId u, int channel) {
        return (static_cast<uint64_t>(u) << 1) | static_cast<uint64_t>(channel);
    }

    MemoryEngine(MemoryParams<T>& params, const ExperimentConfig& cfg, int64_t nodes)
        : params_(&params),
          cfg_(&cfg),
          state_(nodes, cfg.d_emb, cfg.ablate_shared_memory) {}

    DualMemory<T>& state() { return state_; }
    const DualMemory<T>& state() const { return state_; }

    void reset() {
        state_.reset();
        pending_.clear();
    }

    size_t pending_count() const { return pending_.size(); }

    /// Raw messages must arrive in non-decreasing (time, stream_index) order.
    void enqueue(const SignedEvent& e) {
        if (!pending_.empty()) {
            const Pending& last = pending_.back();
            if (e.time < last.t || (e.time == last.t && e.stream_index <= last.stream_index))
                throw invariant_error("raw message store: out-of-order enqueue");
        }
        pending_.push_back({e.src, e.dst, e.time, e.sign, e.weight, e.stream_index});
    }

    /// Builds and applies every pending message in order on a fresh tape,
    /// writes the resulting values into the detached state and empties the
    /// store. Returns the graph so the trainer can backpropagate through
    /// this one step; callers that don't need gradients just drop it.
    std::unique_ptr<FlushGraph> flush(num::GradSink<T>* sink = nullptr) {
        auto graph = std::make_unique<FlushGraph>(sink);
        num::Tape<T>& tape = graph->tape;
        std::unordered_map<uint64_t, num::Var<T>> cur;   // live values inside the flush
        std::unordered_map<uint64_t, num::Var<T>> written;

        auto live = [&](NodeId n, int ch) -> num::Var<T> {
            if (state_.shared_channel()) ch = kPosChannel;  // one channel serves both slots
            const uint64_t key = slot_key(n, ch);
            auto it = cur.find(key);
            if (it != cur.end()) return it->second;
            num::Var<T> v = tape.constant(state_.read_row(n, ch));
            cur.emplace(key, v);
            return v;
        };

        for (const Pending& p : pending_) {
            // coupled message from both endpoints' state before this micro-step
            std::vector<num::Var<T>> parts = {
                live(p.u, kPosChannel), live(p.u, kNegChannel),
                live(p.v, kPosChannel), live(p.v, kNegChannel),
                tape.constant_scalar(static_cast<T>(p.weight)),
                tape.constant_scalar(static_cast<T>(p.sign))};
            num::Var<T> msg = params_->msg_mlp(tape, tape.concat_cols(parts));

            const int ch = channel_for_sign(p.sign);
            const num::GruCell<T>& gru = gru_for_sign(p.sign);
            for (NodeId n : {p.u, p.v}) {
                const double dt = state_.elapsed_feature(n, p.t);
                num::Var<T> gin = tape.concat_cols(
                    {msg, tape.constant_scalar(static_cast<T>(dt))});
                num::Var<T> h = gru(tape, gin, live(n, ch));
                const uint64_t key = slot_key(n, ch);
                cur[key] = h;
                written[key] = h;
                state_.touch(n, p.t);
            }
        }

        for (auto& [key, var] : written) {
            state_.write_row(static_cast<NodeId>(key >> 1), static_cast<int>(key & 1),
                             tape.val(var));
            const int slot = static_cast<int>(graph->slot_of.size());
            graph->slot_of.emplace(key, slot);
            graph->outputs.push_back({key, var});
        }
        graph->slot_grads.resize(graph->slot_of.size());
        pending_.clear();
        return graph;
    }

    /// Strict immediate application of one event (evaluation replay).
    void apply_now(const SignedEvent& e) {
        enqueue(e);
        flush(nullptr);
    }

    int channel_for_sign(int sign) const {
        if (sign != 1 && sign != -1) throw invariant_error("memory update: sign must be +1/-1");
        if (cfg_->ablate_shared_memory) return kPosChannel;
        return sign > 0 ? kPosChannel : kNegChannel;
    }

private:
    const num::GruCell<T>& gru_for_sign(int sign) const {
        if (cfg_->ablate_shared_memory) return params_->gru_pos;  // single shared GRU
        return sign > 0 ? params_->gru_pos : params_->gru_neg;
    }

    MemoryParams<T>* params_;
    const ExperimentConfig* cfg_;
    DualMemory<T> state_;
    std::vector<Pending> pending_;
};

/// Training-time reads: values come from the post-flush state; reads of a
/// slot the current flush produced route their gradient into a per-thread
/// accumulator so the flush can be backpropagated once afterwards.
template <class T>
class SlotMemoryReader : public MemoryReader<T> {
public:
    SlotMemoryReader(const DualMemory<T>& state,
                     const std::unordered_map<uint64_t, int>& slot_of)
        : state_(&state), slot_of_(&slot_of), local_(slot_of.size()) {}

    num::Var<T> read(num::Tape<T>& tape, NodeId u, int channel) override {
        const uint64_t key = MemoryEngine<T>::slot_key(
            u, state_->shared_channel() ? kPosChannel : channel);
        auto it = slot_of_->find(key);
        if (it == slot_of_->end()) return tape.constant(state_->read_row(u, channel));
        num::Tensor<T>& g = local_[it->second];
        if (g.empty()) g = num::Tensor<T>::zeros(1, state_->dim());
        return tape.input(state_->read_row(u, channel), &g);
    }

    /// Deterministic reduction into the flush graph's accumulators.
    void reduce_into(std::vector<num::Tensor<T>>& global) {
        for (size_t i = 0; i < local_.size(); ++i) {
            if (local_[i].empty()) continue;
            if (global[i].empty()) global[i] = local_[i];
            else global[i].add_in_place(local_[i]);
        }
    }

private:
    const DualMemory<T>* state_;
    const std::unordered_map<uint64_t, int>* slot_of_;
    std::vector<num::Tensor<T>> local_;
};

}  // namespace dsn

#endif  // DSN_MEMORY_HPP
