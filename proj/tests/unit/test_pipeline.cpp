// Training/evaluation orchestration: early stopping, batch mechanics,
// strict-replay equivalence, determinism and the evaluation protocol.

#include <doctest.h>

#include <filesystem>

#include "dsn/pipeline.hpp"
#include "dsn/synth.hpp"
#include "support/helpers.hpp"

using namespace dsn;
using dsn::test::ev;

namespace {

struct Setup {
    ExperimentConfig cfg;
    EventStream events;
    SplitSpec split;
    EvalNegatives negs;
    int64_t nodes;

    explicit Setup(int n_nodes = 24, int n_events = 400, uint64_t data_seed = 21,
                   ExperimentConfig base = dsn::test::tiny_config())
        : cfg(std::move(base)), nodes(n_nodes) {
        SynthSpec ss;
        ss.nodes = n_nodes;
        ss.events = n_events;
        ss.days = n_events / 6;
        ss.seed = data_seed;
        events = generate_synthetic_stream(ss);
        auto cut = chronological_split(events);
        auto masked = sample_masked_nodes(events, cut.first, n_nodes, 0.1, 0);
        split = apply_mask(events, cut, std::move(masked), 0, 0.1);
        std::vector<SignedEvent> eval_events;
        for (const auto& e : events)
            if (e.time >= split.train_cutoff) eval_events.push_back(e);
        negs = generate_eval_negatives(eval_events, eval_node_set(events, split), 0);
    }
};

}  // namespace

TEST_CASE("early stopping walks the patience rule") {
    // history [.5 .6 .6 .6 .6 .6 .6] with patience 5: stop after epoch 7, best 2
    EarlyStopper s(5);
    const double hist[] = {0.5, 0.6, 0.6, 0.6, 0.6, 0.6, 0.6};
    int stopped_at = 0;
    for (int i = 0; i < 7; ++i)
        if (s.observe(hist[i])) {
            stopped_at = i + 1;
            break;
        }
    CHECK(stopped_at == 7);
    CHECK(s.best_epoch() == 2);

    // monotone improvement never stops
    EarlyStopper m(5);
    for (int i = 0; i < 50; ++i) CHECK(!m.observe(0.1 + 0.01 * i));
    CHECK(m.best_epoch() == 50);

    // patience 0 stops at the first non-improvement
    EarlyStopper z(0);
    CHECK(!z.observe(0.4));
    CHECK(z.observe(0.4));
}

TEST_CASE("a 1-event training stream yields exactly one supervised and one NonEdge query") {
    ExperimentConfig cfg = dsn::test::tiny_config();
    EventStream s;
    // one training event, then enough later events to form val/test buckets
    s.push_back(ev(0, 1, 1.0, 1, 0));
    for (int i = 1; i < 12; ++i) s.push_back(ev(i % 3, (i + 1) % 3, 100.0 + i, 1, i));
    SplitSpec split;
    split.train_cutoff = 50.0;
    split.val_cutoff = 106.0;
    Trainer<double> tr(cfg, s, split, 3, 0);
    REQUIRE(tr.train_events().size() == 1);
    tr.train_epoch(1);
    CHECK(tr.last_epoch_queries() == 2);
}

TEST_CASE("lambda=0 and lambda=0.1 runs share initialization and diverge only after a step") {
    Setup a, b;
    a.cfg.lambda = 0.0;
    b.cfg.lambda = 0.1;
    Trainer<double> ta(a.cfg, a.events, a.split, a.nodes, 3);
    Trainer<double> tb(b.cfg, b.events, b.split, b.nodes, 3);
    auto& pa = ta.model().params();
    auto& pb = tb.model().params();
    REQUIRE(pa.size() == pb.size());
    for (size_t i = 0; i < pa.size(); ++i) CHECK(pa[i].value.bit_equal(pb[i].value));
    ta.train_epoch(1);
    tb.train_epoch(1);
    bool diverged = false;
    for (size_t i = 0; i < pa.size(); ++i)
        if (!pa[i].value.bit_equal(pb[i].value)) diverged = true;
    CHECK(diverged);
}

TEST_CASE("static-table gradients include the orthogonality term iff lambda > 0") {
    Setup s;
    s.cfg.p_unk = 0;  // keep lookups deterministic across the two probes
    s.cfg.dropout = 0;
    auto grads_with_lambda = [&](double lambda) {
        ExperimentConfig cfg = s.cfg;
        cfg.lambda = lambda;
        Trainer<double> tr(cfg, s.events, s.split, s.nodes, 5);
        tr.probe_setup(16, 8);
        tr.model().params().zero_grads();
        tr.probe_loss(true);
        return tr.model().statics().emb_pos().grad;
    };
    auto g0 = grads_with_lambda(0.0);
    auto g1 = grads_with_lambda(0.1);
    CHECK(!g0.bit_equal(g1));
}

TEST_CASE("batch-size-1 memory trajectory bit-equals strict per-event replay") {
    Setup s;
    s.cfg.batch = 1;
    Trainer<double> tr(s.cfg, s.events, s.split, s.nodes, 7);
    tr.set_update_params(false);  // memory math must not see parameter motion

    std::vector<typename DualMemory<double>::Snapshot> trajectory;
    tr.set_post_flush_hook(
        [&](const DualMemory<double>& m) { trajectory.push_back(m.snapshot()); });
    tr.train_epoch(1);

    // strict oracle: immediate per-event updates with the same parameters
    MemoryEngine<double> oracle(tr.model().memory_params(), tr.model().config(), s.nodes);
    REQUIRE(trajectory.size() == tr.train_events().size());
    for (size_t i = 0; i < trajectory.size(); ++i) {
        // hook i fires after events [0, i) were applied
        DualMemory<double> probe(s.nodes, s.cfg.d_emb, false);
        probe.restore(trajectory[i]);
        CHECK(probe.bit_equal(oracle.state()));
        oracle.apply_now(tr.train_events()[i]);
    }
}

TEST_CASE("training is bit-deterministic for a fixed config and seed") {
    auto run = [] {
        Setup s;
        s.cfg.max_epochs = 2;
        s.cfg.patience = 5;
        Trainer<double> tr(s.cfg, s.events, s.split, s.nodes, 11);
        tr.train(s.negs);
        auto t = tr.evaluate_pass(true, s.negs);
        return std::make_pair(t.hybrid.to_text(), t.induc.to_text());
    };
    auto [h1, i1] = run();
    auto [h2, i2] = run();
    CHECK(h1 == h2);
    CHECK(i1 == i2);
}

TEST_CASE("threaded and single-threaded batches produce the same loss to tolerance") {
    Setup s;
    s.cfg.threads = 1;
    Trainer<double> t1(s.cfg, s.events, s.split, s.nodes, 13);
    s.cfg.threads = 2;
    Trainer<double> t2(s.cfg, s.events, s.split, s.nodes, 13);
    t1.set_update_params(false);
    t2.set_update_params(false);
    const double l1 = t1.train_epoch(1);
    const double l2 = t2.train_epoch(1);
    CHECK(l1 == doctest::Approx(l2).epsilon(1e-9));  // only the summation order differs
}

TEST_CASE("evaluation: subsets recompose and repeated runs are bit-identical") {
    Setup s;
    Trainer<double> tr(s.cfg, s.events, s.split, s.nodes, 17);
    tr.train_epoch(1);
    auto t1 = tr.evaluate_pass(true, s.negs);
    auto t2 = tr.evaluate_pass(true, s.negs);
    CHECK(t1.hybrid.to_text() == t2.hybrid.to_text());
    CHECK(add_confusions(t1.trans.confusion, t1.induc.confusion) == t1.hybrid.confusion);
    // every test event contributes itself and its cached partner
    CHECK(t1.hybrid.support() == 2 * static_cast<int64_t>(tr.test_events().size()));

    // subset wrapper agrees with the triple
    CHECK(tr.evaluate(EvalSubset::TestTrans, s.negs).to_text() == t1.trans.to_text());
}

TEST_CASE("an always-Pos predictor on the balanced Pos/NonEdge window scores the book values") {
    // all-positive stream: evaluation queries are half Pos, half NonEdge
    ExperimentConfig cfg = dsn::test::tiny_config();
    std::mt19937_64 rng(23);
    EventStream s = dsn::test::random_stream(rng, 12, 300, 60);
    for (auto& e : s) e.sign = +1;
    auto cut = chronological_split(s);
    SplitSpec split = apply_mask(s, cut, {}, 0, 0.0);
    std::vector<SignedEvent> eval_events;
    for (const auto& e : s)
        if (e.time >= split.train_cutoff) eval_events.push_back(e);
    auto negs = generate_eval_negatives(eval_events, eval_node_set(s, split), 0);

    Trainer<double> tr(cfg, s, split, 12, 0);
    auto& head_b = tr.model().params().at("head.l2.b");
    tr.model().params().at("head.l2.W").value.zero();
    head_b.value.zero();
    head_b.value.data[0] = 50.0;  // logits pinned at (50, 0, 0)
    auto out = tr.evaluate_pass(true, negs);
    CHECK(out.hybrid.accuracy == doctest::Approx(0.5));
    CHECK(out.hybrid.macro_f1 == doctest::Approx((2.0 / 3) / 3).epsilon(1e-9));
}

TEST_CASE("evaluation memory trajectory ignores queries entirely") {
    Setup s;
    Trainer<double> tr(s.cfg, s.events, s.split, s.nodes, 29);
    tr.train_epoch(1);
    tr.evaluate_pass(true, s.negs);
    auto after_eval = tr.engine().state().snapshot();

    // pure replay with no predictions at all
    tr.engine().reset();
    for (const auto& e : tr.train_events()) tr.engine().apply_now(e);
    for (const auto& e : tr.val_events()) tr.engine().apply_now(e);
    for (const auto& e : tr.test_events()) tr.engine().apply_now(e);
    DualMemory<double> probe(s.nodes, s.cfg.d_emb, false);
    probe.restore(after_eval);
    CHECK(probe.bit_equal(tr.engine().state()));
}

TEST_CASE("misaligned negatives are rejected") {
    Setup s;
    Trainer<double> tr(s.cfg, s.events, s.split, s.nodes, 31);
    EvalNegatives bad = s.negs;
    bad.pairs[s.split.val_ids.size() + 3].time += 17.0;  // test-phase row
    CHECK_THROWS_WITH_AS(tr.evaluate_pass(true, bad), doctest::Contains("misaligned"), Error);
    EvalNegatives short_file = s.negs;
    short_file.pairs.resize(4);
    CHECK_THROWS_AS(tr.evaluate_pass(false, short_file), Error);
}

TEST_CASE("masked-node hygiene guard trips on contact with a masked node") {
    Setup s;
    Trainer<double> tr(s.cfg, s.events, s.split, s.nodes, 37);
    REQUIRE(!s.split.masked_nodes.empty());
    // normal training never touches masked nodes
    CHECK_NOTHROW(tr.train_epoch(1));

    std::vector<uint8_t> masked(s.nodes, 0);
    masked[s.split.masked_nodes[0]] = 1;
    tr.model().set_masked_guard(&masked);
    ConstMemoryReader<double> reader(tr.engine().state());
    StaticLookupCtx ctx;
    QueryRngs rngs = QueryRngs::make(1, 0, 0);
    num::Tape<double> tape;
    CHECK_THROWS_WITH_AS(
        tr.model().predict_query(tape, tr.store(), reader, s.split.masked_nodes[0], 1, 1e6,
                                 std::nullopt, ctx, rngs, false),
        doctest::Contains("hygiene"), Error);
    tr.model().set_masked_guard(nullptr);
}

TEST_CASE("ablation wiring: no-walk never samples, static-only skips memory") {
    Setup s;
    s.cfg.ablate_no_walk = true;
    Trainer<double> tr(s.cfg, s.events, s.split, s.nodes, 41);
    tr.train_epoch(1);
    tr.evaluate_pass(false, s.negs);
    CHECK(tr.store().walk_invocations() == 0);

    Setup s2;
    s2.cfg.ablate_static_only = true;
    Trainer<double> tr2(s2.cfg, s2.events, s2.split, s2.nodes, 41);
    tr2.train_epoch(1);
    tr2.evaluate_pass(true, s2.negs);
    CHECK(tr2.store().walk_invocations() == 0);
    CHECK(!tr2.engine().state().seen(0));  // memory never replayed
}

TEST_CASE("trainer rejects non-finite losses with diagnostics") {
    Setup s;
    Trainer<double> tr(s.cfg, s.events, s.split, s.nodes, 43);
    tr.model().params().at("head.l2.b").value.fill(
        std::numeric_limits<double>::quiet_NaN());
    num::g_finite_checks = true;
    CHECK_THROWS_AS(tr.train_epoch(1), Error);
    num::g_finite_checks = true;
}

TEST_CASE("run_experiment: repeated seeds give identical rows; artifacts land on disk") {
    namespace fs = std::filesystem;
    Setup s(20, 300, 51);
    s.cfg.max_epochs = 1;
    s.cfg.seeds = {0, 0};
    DatasetManifest manifest;
    manifest.name = "tiny";
    manifest.node_count = s.nodes;
    manifest.event_count = static_cast<int64_t>(s.events.size());
    manifest.source_checksum = "deadbeef";
    const std::string dir = (fs::temp_directory_path() / "dsn_runexp").string();
    fs::remove_all(dir);
    RunReport rep = run_experiment<double>(s.cfg, s.events, manifest, dir);
    REQUIRE(rep.per_seed.size() == 2);
    CHECK(rep.per_seed[0].test_hybrid.to_text() == rep.per_seed[1].test_hybrid.to_text());
    CHECK(rep.per_seed[0].val_hybrid.to_text() == rep.per_seed[1].val_hybrid.to_text());
    CHECK(fs::exists(dir + "/config.txt"));
    CHECK(fs::exists(dir + "/results.csv"));
    CHECK(fs::exists(dir + "/report.txt"));
    CHECK(fs::exists(dir + "/seed0/split.txt"));
    CHECK(fs::exists(dir + "/seed0/negatives.tsv"));
    CHECK(fs::exists(dir + "/seed0/best.ckpt"));
    CHECK(fs::exists(dir + "/seed0/metrics_test_induc.txt"));

    // results.csv reads back to the same means
    auto rows = read_results_csv(dir + "/results.csv");
    RunReport back;
    back.per_seed = rows;
    CHECK(mean_over_seeds(back, "test", "hybrid").macro_f1 ==
          doctest::Approx(mean_over_seeds(rep, "test", "hybrid").macro_f1));
    fs::remove_all(dir);
}

TEST_CASE("mean-of-seeds is the arithmetic mean of per-seed values") {
    RunReport rep;
    SeedResult a, b;
    a.test_hybrid.macro_f1 = 0.5;
    a.test_hybrid.accuracy = 0.7;
    b.test_hybrid.macro_f1 = 0.9;
    b.test_hybrid.accuracy = 0.8;
    rep.per_seed = {a, b};
    auto m = mean_over_seeds(rep, "test", "hybrid");
    CHECK(m.macro_f1 == doctest::Approx(0.7));
    CHECK(m.accuracy == doctest::Approx(0.75));
}
