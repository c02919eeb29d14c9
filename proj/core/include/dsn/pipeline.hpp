// Training and evaluation orchestration: epoch loop with deferred memory
// flushes (one differentiable step per batch), strict causal evaluation
// replay with cached negatives, early stopping on validation Macro-F1,
// and the per-seed experiment runner.

#ifndef DSN_PIPELINE_HPP
#define DSN_PIPELINE_HPP

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <thread>

#include "dsn/checkpoint.hpp"
#include "dsn/metrics.hpp"
#include "dsn/model.hpp"
#include "dsn/optim.hpp"
#include "dsn/report.hpp"
#include "dsn/split.hpp"

namespace dsn {

class EarlyStopper {
public:
    explicit EarlyStopper(int patience) : patience_(patience) {}

    /// Feed one epoch's validation Macro-F1; true means stop now.
    /// Improvement must be strict; patience 0 stops at the first
    /// non-improving epoch.
    bool observe(double value) {
        ++epoch_;
        if (value > best_) {
            best_ = value;
            best_epoch_ = epoch_;
            since_ = 0;
            return false;
        }
        ++since_;
        return since_ >= patience_ && since_ >= 1;
    }

    double best() const { return best_; }
    int best_epoch() const { return best_epoch_; }  // 1-based

private:
    int patience_;
    int epoch_ = 0;
    double best_ = -std::numeric_limits<double>::infinity();
    int best_epoch_ = 0;
    int since_ = 0;
};

enum class EvalSubset { Val, TestHybrid, TestTrans, TestInduc };

template <class T>
class Trainer {
public:
    struct EvalTriple {
        Metrics hybrid, trans, induc;
    };

    struct TrainResult {
        int best_epoch = 0;  // 1-based; 0 = never improved
        int epochs_run = 0;
        std::vector<double> val_history;
    };

    struct Progress {
        int epoch;
        double loss;
        double val_macro_f1;
        bool improved;
    };

    Trainer(const ExperimentConfig& cfg, const EventStream& full_stream, const SplitSpec& split,
            int64_t num_nodes, uint64_t run_seed)
        : cfg_(cfg),
          split_(split),
          num_nodes_(num_nodes),
          run_seed_(run_seed),
          retained_(retained_stream(full_stream, split)),
          store_(num_nodes),
          model_(cfg, num_nodes, derive_seed(run_seed, seed_tag::kParamInit)),
          engine_(model_.memory_params(), model_.config(), num_nodes),
          opt_(model_.params(),
               {cfg.lr, cfg.weight_decay, 0.9, 0.999, 1e-8}) {
        cfg_.validate();
        for (const SignedEvent& e : retained_) {
            store_.insert(e);
            if (e.time < split_.train_cutoff) train_events_.push_back(e);
            else if (e.time < split_.val_cutoff) val_events_.push_back(e);
            else test_events_.push_back(e);
        }
        if (!retained_.empty()) model_.set_time_origin(retained_.front().time);
        known_.assign(static_cast<size_t>(num_nodes), 0);
        for (const SignedEvent& e : train_events_) known_[e.src] = known_[e.dst] = 1;
        masked_flags_.assign(static_cast<size_t>(num_nodes), 0);
        for (NodeId n : split_.masked_nodes) masked_flags_[static_cast<size_t>(n)] = 1;
    }

    Model<T>& model() { return model_; }
    MemoryEngine<T>& engine() { return engine_; }
    const TemporalStore& store() const { return store_; }
    num::AdamW<T>& optimizer() { return opt_; }
    const std::vector<SignedEvent>& train_events() const { return train_events_; }
    const std::vector<SignedEvent>& val_events() const { return val_events_; }
    const std::vector<SignedEvent>& test_events() const { return test_events_; }
    const EventStream& retained() const { return retained_; }

    /// Test-only hook, called after each batch flush with the memory state.
    void set_post_flush_hook(std::function<void(const DualMemory<T>&)> hook) {
        post_flush_hook_ = std::move(hook);
    }
    void set_update_params(bool v) { update_params_ = v; }
    int64_t last_epoch_queries() const { return last_epoch_queries_; }

    // -- training -------------------------------------------------------------

    double train_epoch(int epoch_index) {
        engine_.reset();
        if (cfg_.hygiene_checks && !split_.masked_nodes.empty())
            model_.set_masked_guard(&masked_flags_);
        std::fill(observed_.begin(), observed_.end(), 0);
        observed_.resize(static_cast<size_t>(num_nodes_), 0);
        observed_list_.clear();
        std::mt19937_64 neg_rng(
            derive_seed(run_seed_, seed_tag::kTrainNeg, static_cast<uint64_t>(epoch_index)));
        last_epoch_queries_ = 0;
        const uint64_t phase_seed =
            derive_seed(run_seed_, 0x45504f43ull, static_cast<uint64_t>(epoch_index));

        double epoch_loss = 0;
        const size_t nb = train_events_.size();
        size_t batch_no = 0;
        for (size_t start = 0; start < nb; start += cfg_.batch, ++batch_no) {
            const size_t end = std::min(nb, start + cfg_.batch);
            const double batch_loss =
                train_batch(train_events_.data() + start, end - start, neg_rng, phase_seed);
            if (!std::isfinite(batch_loss))
                throw invariant_error("non-finite loss in epoch " + std::to_string(epoch_index) +
                                      ", batch " + std::to_string(batch_no));
            epoch_loss += batch_loss;
        }
        model_.set_masked_guard(nullptr);
        return epoch_loss;
    }

    TrainResult train(const EvalNegatives& negs,
                      const std::function<void(const Progress&)>& progress = {},
                      const std::string& ckpt_dir = "") {
        EarlyStopper stopper(cfg_.patience);
        TrainResult result;
        std::vector<num::Tensor<T>> best_values;
        for (int epoch = 1; epoch <= cfg_.max_epochs; ++epoch) {
            const double loss = train_epoch(epoch);
            const EvalTriple val = evaluate_pass(/*test_phase=*/false, negs);
            const double vmf1 = val.hybrid.macro_f1;
            const bool improved = vmf1 > stopper.best();
            const bool stop = stopper.observe(vmf1);
            result.val_history.push_back(vmf1);
            result.epochs_run = epoch;
            if (improved) {
                snapshot_params(best_values);
                if (!ckpt_dir.empty())
                    num::save_checkpoint(ckpt_dir + "/best.ckpt", model_.params(), &opt_);
            }
            if (progress) progress({epoch, loss, vmf1, improved});
            if (stop) break;
        }
        if (!ckpt_dir.empty())
            num::save_checkpoint(ckpt_dir + "/final.ckpt", model_.params(), &opt_);
        result.best_epoch = stopper.best_epoch();
        if (!best_values.empty()) restore_params(best_values);  // test with the best checkpoint
        return result;
    }

    // -- evaluation -----------------------------------------------------------

    /// Rebuilds memory by strict replay (train events; plus val events for
    /// the test phase), then walks the evaluation window in stream order:
    /// each event is scored together with its cached NonEdge partner
    /// before its own memory update is applied. One pass produces the
    /// hybrid/transductive/inductive triple.
    EvalTriple evaluate_pass(bool test_phase, const EvalNegatives& negs) {
        model_.set_masked_guard(nullptr);
        engine_.reset();
        const bool memory_live = !cfg_.ablate_static_only;  // static-only reads no memory
        if (memory_live) {
            for (const SignedEvent& e : train_events_) engine_.apply_now(e);
            if (test_phase)
                for (const SignedEvent& e : val_events_) engine_.apply_now(e);
        }
        const auto& events = test_phase ? test_events_ : val_events_;
        const size_t neg_offset = test_phase ? val_events_.size() : 0;
        if (negs.pairs.size() < neg_offset + events.size())
            throw validation_error("misaligned negatives file: too few rows");

        ConstMemoryReader<T> reader(engine_.state());
        StaticLookupCtx ctx;
        ctx.known = &known_;
        const uint64_t phase_seed = derive_seed(run_seed_, 0x4556414cull);

        Confusion trans{}, induc{};
        for (size_t i = 0; i < events.size(); ++i) {
            const SignedEvent& e = events[i];
            const EvalNegatives::Pair& np = negs.pairs[neg_offset + i];
            if (np.time != e.time)
                throw validation_error("misaligned negatives file: timestamp mismatch at row " +
                                       std::to_string(neg_offset + i));
            Confusion& conf =
                (split_.is_masked(e.src) || split_.is_masked(e.dst)) ? induc : trans;
            add_outcome(conf, e.sign > 0 ? Label::Pos : Label::Neg,
                        score_query(e.src, e.dst, e.time, e.stream_index, reader, ctx,
                                    phase_seed, /*role=*/0));
            add_outcome(conf, Label::NonEdge,
                        score_query(np.src, np.dst, e.time, e.stream_index, reader, ctx,
                                    phase_seed, /*role=*/1));
            if (memory_live) engine_.apply_now(e);  // NonEdge partners never update memory
        }
        EvalTriple out;
        out.trans = compute_metrics(trans);
        out.induc = compute_metrics(induc);
        out.hybrid = compute_metrics(add_confusions(trans, induc));
        return out;
    }

    Metrics evaluate(EvalSubset subset, const EvalNegatives& negs) {
        if (subset == EvalSubset::Val) return evaluate_pass(false, negs).hybrid;
        const EvalTriple t = evaluate_pass(true, negs);
        switch (subset) {
            case EvalSubset::TestHybrid: return t.hybrid;
            case EvalSubset::TestTrans: return t.trans;
            case EvalSubset::TestInduc: return t.induc;
            default: return t.hybrid;
        }
    }

    // -- finite-difference verification probe ---------------------------------
    //
    // Fixes a (prior | pending | batch) partition of the training events,
    // captures the post-prior memory as constants, and exposes the exact
    // deterministic batch loss of the deferred-update scheme: one
    // differentiable flush of `pending` followed by the batch's weighted
    // cross-entropy plus the orthogonality penalty. Repeated evaluation
    // never advances state, so central differences are well defined and
    // must match the analytic gradients produced by `probe_loss(true)`.

    void probe_setup(size_t n_prior, size_t n_pending) {
        if (n_prior + n_pending >= train_events_.size())
            throw invariant_error("probe: not enough training events");
        engine_.reset();
        for (size_t i = 0; i < n_prior; ++i) engine_.apply_now(train_events_[i]);
        probe_snapshot_ = engine_.state().snapshot();
        probe_pending_.assign(train_events_.begin() + n_prior,
                              train_events_.begin() + n_prior + n_pending);
        const size_t batch_end =
            std::min(train_events_.size(), n_prior + n_pending + cfg_.batch);

        // freeze the query list (with NonEdge partners) and class weights
        std::fill(observed_.begin(), observed_.end(), 0);
        observed_.resize(static_cast<size_t>(num_nodes_), 0);
        observed_list_.clear();
        for (size_t i = 0; i < batch_end; ++i)
            for (NodeId nd : {train_events_[i].src, train_events_[i].dst})
                if (!observed_[nd]) {
                    observed_[nd] = 1;
                    observed_list_.push_back(nd);
                }
        std::mt19937_64 neg_rng(derive_seed(run_seed_, seed_tag::kTrainNeg, 0));
        probe_queries_.clear();
        std::array<int64_t, kNumLabels> counts{};
        for (size_t i = n_prior + n_pending; i < batch_end; ++i) {
            const SignedEvent& e = train_events_[i];
            probe_queries_.push_back({e.src, e.dst, e.time, e.stream_index,
                                      e.sign > 0 ? Label::Pos : Label::Neg, 0});
            ++counts[static_cast<int>(probe_queries_.back().label)];
            for (int tries = 0; tries < 100; ++tries) {
                const NodeId nu = observed_list_[neg_rng() % observed_list_.size()];
                const NodeId nv = observed_list_[neg_rng() % observed_list_.size()];
                if (label_of(retained_, nu, nv, e.time) != Label::NonEdge) continue;
                probe_queries_.push_back({nu, nv, e.time, e.stream_index, Label::NonEdge, 1});
                ++counts[static_cast<int>(Label::NonEdge)];
                break;
            }
        }
        probe_weights_ = class_weights(counts, cfg_.eps);
        probe_batch_nodes_ = 0;
        std::vector<uint8_t> seen(static_cast<size_t>(num_nodes_), 0);
        for (QueryDesc& q : probe_queries_) {
            if (!seen[q.u]) seen[q.u] = 1, q.orth_u = true, ++probe_batch_nodes_;
            if (!seen[q.v]) seen[q.v] = 1, q.orth_v = true, ++probe_batch_nodes_;
        }
    }

    double probe_loss(bool backward) {
        engine_.reset();
        engine_.state().restore(probe_snapshot_);
        for (const SignedEvent& e : probe_pending_) engine_.enqueue(e);
        auto graph = engine_.flush();
        SlotMemoryReader<T> reader(engine_.state(), graph->slot_of);
        num::Tape<T> tape;
        StaticLookupCtx ctx;
        ctx.training = true;
        ctx.p_unk = cfg_.p_unk;
        const uint64_t phase_seed = derive_seed(run_seed_, 0x45504f43ull, 0);
        std::optional<num::Var<T>> task, orth;
        const bool use_orth = cfg_.lambda > 0 && !cfg_.ablate_static_only;
        for (const QueryDesc& q : probe_queries_) {
            QueryRngs rngs = QueryRngs::make(phase_seed, q.micro, q.role);
            auto out = model_.predict_query(tape, store_, reader, q.u, q.v, q.t, q.micro, ctx,
                                            rngs, /*training=*/true);
            num::Var<T> lq = tape.cross_entropy(out.probs, static_cast<int>(q.label),
                                                probe_weights_[static_cast<int>(q.label)]);
            task = task ? tape.add(*task, lq) : lq;
            if (use_orth) {
                for (const auto* ep : {&out.u_out, &out.v_out}) {
                    const bool flagged = ep == &out.u_out ? q.orth_u : q.orth_v;
                    if (!flagged || !ep->has_dynamic) continue;
                    num::Var<T> term =
                        tape.add(orthogonality_term(tape, ep->z_stat_pos, ep->z_dyn_pos),
                                 orthogonality_term(tape, ep->z_stat_neg, ep->z_dyn_neg));
                    orth = orth ? tape.add(*orth, term) : term;
                }
            }
        }
        num::Var<T> total = *task;
        if (orth)
            total = tape.add(total,
                             tape.scale(*orth, cfg_.lambda / (2.0 * probe_batch_nodes_)));
        const double loss = static_cast<double>(tape.val(total).item());
        if (backward) {
            tape.backward(total);
            reader.reduce_into(graph->slot_grads);
            graph->run_backward();
        }
        return loss;
    }

private:
    struct QueryDesc {
        NodeId u, v;
        Time t;
        StreamIndex micro;
        Label label;
        int role;  // 0 observed event, 1 NonEdge partner
        bool orth_u = false, orth_v = false;
    };

    int effective_threads() const {
        if (cfg_.threads > 0) return cfg_.threads;
        const unsigned hw = std::thread::hardware_concurrency();
        return hw ? static_cast<int>(hw) : 1;
    }

    Label score_query(NodeId u, NodeId v, Time t, StreamIndex micro, MemoryReader<T>& reader,
                      const StaticLookupCtx& ctx, uint64_t phase_seed, int role) {
        num::Tape<T> tape;
        QueryRngs rngs = QueryRngs::make(phase_seed, micro, role);
        auto out = model_.predict_query(tape, store_, reader, u, v, t, micro, ctx, rngs,
                                        /*training=*/false);
        const num::Tensor<T>& p = tape.val(out.probs);
        int arg = 0;
        for (int c = 1; c < kNumLabels; ++c)
            if (p.data[c] > p.data[arg]) arg = c;
        return static_cast<Label>(arg);
    }

    double train_batch(const SignedEvent* events, size_t n, std::mt19937_64& neg_rng,
                       uint64_t phase_seed) {
        // one differentiable flush of the previous batch's raw messages
        auto graph = engine_.flush();
        if (post_flush_hook_) post_flush_hook_(engine_.state());

        for (size_t i = 0; i < n; ++i)
            for (NodeId nd : {events[i].src, events[i].dst})
                if (!observed_[nd]) {
                    observed_[nd] = 1;
                    observed_list_.push_back(nd);
                }

        std::vector<QueryDesc> queries;
        queries.reserve(2 * n);
        std::array<int64_t, kNumLabels> counts{};
        for (size_t i = 0; i < n; ++i) {
            const SignedEvent& e = events[i];
            QueryDesc q{e.src, e.dst, e.time, e.stream_index,
                        e.sign > 0 ? Label::Pos : Label::Neg, 0};
            queries.push_back(q);
            ++counts[static_cast<int>(q.label)];
            // 1:1 on-the-fly NonEdge partner at the same timestamp, endpoints
            // uniform over nodes observed so far
            for (int tries = 0; tries < 100; ++tries) {
                const NodeId nu = observed_list_[neg_rng() % observed_list_.size()];
                const NodeId nv = observed_list_[neg_rng() % observed_list_.size()];
                if (label_of(retained_, nu, nv, e.time) != Label::NonEdge) continue;
                queries.push_back({nu, nv, e.time, e.stream_index, Label::NonEdge, 1});
                ++counts[static_cast<int>(Label::NonEdge)];
                break;
            }
        }
        const std::array<double, kNumLabels> weights = class_weights(counts, cfg_.eps);
        last_epoch_queries_ += static_cast<int64_t>(queries.size());

        // first occurrence of each endpoint node defines the orthogonality set
        int batch_nodes = 0;
        const bool use_orth = cfg_.lambda > 0 && !cfg_.ablate_static_only;
        if (use_orth) {
            std::vector<uint8_t> seen(static_cast<size_t>(num_nodes_), 0);
            for (QueryDesc& q : queries) {
                if (!seen[q.u]) seen[q.u] = 1, q.orth_u = true, ++batch_nodes;
                if (!seen[q.v]) seen[q.v] = 1, q.orth_v = true, ++batch_nodes;
            }
        }

        const int nthreads =
            std::max(1, std::min<int>(effective_threads(), static_cast<int>(queries.size())));
        const size_t chunk = (queries.size() + nthreads - 1) / nthreads;
        std::vector<std::unique_ptr<num::ThreadGradSink<T>>> sinks(nthreads);
        std::vector<std::unique_ptr<SlotMemoryReader<T>>> readers(nthreads);
        std::vector<double> partial_loss(nthreads, 0.0);
        std::vector<std::exception_ptr> errors(nthreads);

        auto worker = [&](int ti) {
            try {
                sinks[ti] = std::make_unique<num::ThreadGradSink<T>>(model_.params().size());
                readers[ti] =
                    std::make_unique<SlotMemoryReader<T>>(engine_.state(), graph->slot_of);
                const size_t lo = ti * chunk;
                const size_t hi = std::min(queries.size(), lo + chunk);
                if (lo >= hi) return;
                num::Tape<T> tape(sinks[ti].get());
                StaticLookupCtx ctx;
                ctx.training = true;
                ctx.p_unk = cfg_.p_unk;
                std::optional<num::Var<T>> task, orth;
                for (size_t qi = lo; qi < hi; ++qi) {
                    const QueryDesc& q = queries[qi];
                    QueryRngs rngs = QueryRngs::make(phase_seed, q.micro, q.role);
                    auto out = model_.predict_query(tape, store_, *readers[ti], q.u, q.v, q.t,
                                                    q.micro, ctx, rngs, /*training=*/true);
                    num::Var<T> lq = tape.cross_entropy(out.probs, static_cast<int>(q.label),
                                                        weights[static_cast<int>(q.label)]);
                    task = task ? tape.add(*task, lq) : lq;
                    if (use_orth) {
                        for (const auto* ep : {&out.u_out, &out.v_out}) {
                            const bool flagged = ep == &out.u_out ? q.orth_u : q.orth_v;
                            if (!flagged || !ep->has_dynamic) continue;
                            num::Var<T> term = tape.add(
                                orthogonality_term(tape, ep->z_stat_pos, ep->z_dyn_pos),
                                orthogonality_term(tape, ep->z_stat_neg, ep->z_dyn_neg));
                            orth = orth ? tape.add(*orth, term) : term;
                        }
                    }
                }
                if (!task) return;
                num::Var<T> total = *task;
                if (orth)
                    total = tape.add(total,
                                     tape.scale(*orth, cfg_.lambda / (2.0 * batch_nodes)));
                partial_loss[ti] = static_cast<double>(tape.val(total).item());
                tape.backward(total);
            } catch (...) {
                errors[ti] = std::current_exception();
            }
        };

        if (nthreads == 1) {
            worker(0);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(nthreads);
            for (int ti = 0; ti < nthreads; ++ti) pool.emplace_back(worker, ti);
            for (auto& th : pool) th.join();
        }
        for (int ti = 0; ti < nthreads; ++ti)
            if (errors[ti]) std::rethrow_exception(errors[ti]);

        // fixed-order reduction keeps runs bit-reproducible
        double loss = 0;
        for (int ti = 0; ti < nthreads; ++ti) {
            loss += partial_loss[ti];
            if (sinks[ti]) sinks[ti]->reduce_into(model_.params());
            if (readers[ti]) readers[ti]->reduce_into(graph->slot_grads);
        }
        graph->run_backward();  // gradients reach GRU_s and MLP_msg, then states stay detached
        if (update_params_) opt_.step();
        else model_.params().zero_grads();

        for (size_t i = 0; i < n; ++i) engine_.enqueue(events[i]);
        return loss;
    }

    void snapshot_params(std::vector<num::Tensor<T>>& dst) {
        dst.clear();
        dst.reserve(model_.params().size());
        for (size_t i = 0; i < model_.params().size(); ++i)
            dst.push_back(model_.params()[i].value);
    }

    void restore_params(const std::vector<num::Tensor<T>>& src) {
        for (size_t i = 0; i < src.size(); ++i) model_.params()[i].value = src[i];
    }

    ExperimentConfig cfg_;
    SplitSpec split_;
    int64_t num_nodes_;
    uint64_t run_seed_;
    EventStream retained_;
    TemporalStore store_;
    Model<T> model_;
    MemoryEngine<T> engine_;
    num::AdamW<T> opt_;
    std::vector<SignedEvent> train_events_, val_events_, test_events_;
    std::vector<uint8_t> known_, masked_flags_, observed_;
    std::vector<NodeId> observed_list_;
    std::function<void(const DualMemory<T>&)> post_flush_hook_;
    bool update_params_ = true;
    int64_t last_epoch_queries_ = 0;

    typename DualMemory<T>::Snapshot probe_snapshot_;
    std::vector<SignedEvent> probe_pending_;
    std::vector<QueryDesc> probe_queries_;
    std::array<double, kNumLabels> probe_weights_{};
    int probe_batch_nodes_ = 0;
};

// ---------------------------------------------------------------------------
// Per-seed experiment runner
// ---------------------------------------------------------------------------

/// Builds the seeded split and cached negatives, writes them (plus the
/// resolved config) into seed_dir, trains with early stopping and fills a
/// SeedResult from the best checkpoint. `log` gets one line per epoch.
template <class T>
SeedResult run_single_seed(const ExperimentConfig& cfg, const EventStream& events,
                           const DatasetManifest& manifest, int seed,
                           const std::string& seed_dir,
                           const std::function<void(const std::string&)>& log = {}) {
    namespace fs = std::filesystem;
    const auto t0 = std::chrono::steady_clock::now();
    const auto run_seed = static_cast<uint64_t>(seed);

    const auto cutoffs = chronological_split(events);
    auto masked = sample_masked_nodes(events, cutoffs.first, manifest.node_count,
                                      cfg.mask_ratio, run_seed);
    const SplitSpec split = apply_mask(events, cutoffs, std::move(masked), run_seed,
                                       cfg.mask_ratio);

    std::vector<SignedEvent> eval_events;
    for (const SignedEvent& e : events)
        if (e.time >= split.train_cutoff) eval_events.push_back(e);
    const EvalNegatives negs =
        generate_eval_negatives(eval_events, eval_node_set(events, split), run_seed);

    if (!seed_dir.empty()) {
        fs::create_directories(seed_dir);
        write_split_file(seed_dir + "/split.txt", split, manifest.source_checksum);
        write_negatives_file(seed_dir + "/negatives.tsv", negs, manifest.source_checksum);
    }

    Trainer<T> trainer(cfg, events, split, manifest.node_count, run_seed);
    const auto result = trainer.train(
        negs,
        [&](const typename Trainer<T>::Progress& p) {
            if (!log) return;
            char line[160];
            std::snprintf(line, sizeof(line),
                          "seed %d epoch %d loss %.4f val_macro_f1 %.4f%s", seed, p.epoch,
                          p.loss, p.val_macro_f1, p.improved ? " *" : "");
            log(line);
        },
        seed_dir);

    SeedResult sr;
    sr.seed = seed;
    sr.best_epoch = result.best_epoch;
    sr.epochs_run = result.epochs_run;
    const auto val = trainer.evaluate_pass(false, negs);
    const auto test = trainer.evaluate_pass(true, negs);
    sr.val_hybrid = val.hybrid;
    sr.val_trans = val.trans;
    sr.val_induc = val.induc;
    sr.test_hybrid = test.hybrid;
    sr.test_trans = test.trans;
    sr.test_induc = test.induc;
    sr.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (!seed_dir.empty()) {
        write_metrics_file(seed_dir + "/metrics_val_hybrid.txt", sr.val_hybrid);
        write_metrics_file(seed_dir + "/metrics_val_trans.txt", sr.val_trans);
        write_metrics_file(seed_dir + "/metrics_val_induc.txt", sr.val_induc);
        write_metrics_file(seed_dir + "/metrics_test_hybrid.txt", sr.test_hybrid);
        write_metrics_file(seed_dir + "/metrics_test_trans.txt", sr.test_trans);
        write_metrics_file(seed_dir + "/metrics_test_induc.txt", sr.test_induc);
    }
    return sr;
}

/// Multi-seed experiment: per-seed artifacts under run_dir/seed<k>/,
/// per-seed metrics in results.csv, means in report.txt.
template <class T>
RunReport run_experiment(const ExperimentConfig& cfg, const EventStream& events,
                         const DatasetManifest& manifest, const std::string& run_dir,
                         const std::function<void(const std::string&)>& log = {}) {
    namespace fs = std::filesystem;
    RunReport report;
    report.config_text = cfg.to_text();
    if (!run_dir.empty()) {
        fs::create_directories(run_dir);
        cfg.write_file(run_dir + "/config.txt");
        std::ofstream inputs(run_dir + "/inputs.txt", std::ios::binary);
        inputs << "dataset=" << manifest.name << "\n"
               << "source_checksum=" << manifest.source_checksum << "\n"
               << "events=" << manifest.event_count << "\nseeds=";
        for (size_t i = 0; i < cfg.seeds.size(); ++i) inputs << (i ? "," : "") << cfg.seeds[i];
        inputs << "\n";
    }
    for (int seed : cfg.seeds) {
        const std::string seed_dir =
            run_dir.empty() ? "" : run_dir + "/seed" + std::to_string(seed);
        report.per_seed.push_back(
            run_single_seed<T>(cfg, events, manifest, seed, seed_dir, log));
    }
    if (!run_dir.empty()) {
        write_results_csv(run_dir + "/results.csv", report);
        write_report_text(run_dir + "/report.txt", report);
    }
    return report;
}

}  // namespace dsn

#endif  // DSN_PIPELINE_HPP
