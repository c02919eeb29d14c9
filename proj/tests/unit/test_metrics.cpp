// Metric derivations against hand-worked confusion matrices and an
// independent oracle implementation.

#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "dsn/metrics.hpp"
#include "support/helpers.hpp"

using namespace dsn;

TEST_CASE("perfect diagonal scores 1 everywhere") {
    Confusion c{};
    c[0][0] = 10;
    c[1][1] = 3;
    c[2][2] = 7;
    Metrics m = compute_metrics(c);
    CHECK(m.accuracy == 1.0);
    CHECK(m.macro_f1 == 1.0);
    CHECK(m.weighted_f1 == 1.0);
    for (int k = 0; k < 3; ++k) {
        CHECK(m.precision[k] == 1.0);
        CHECK(m.recall[k] == 1.0);
        CHECK(m.f1[k] == 1.0);
    }
}

TEST_CASE("hand-worked case: everything predicted Pos on a Pos/NonEdge set") {
    // true Pos 5 -> Pos; true NonEdge 5 -> Pos; Neg absent
    Confusion c{};
    c[0][0] = 5;
    c[2][0] = 5;
    Metrics m = compute_metrics(c);
    CHECK(m.accuracy == doctest::Approx(0.5));
    CHECK(m.f1[0] == doctest::Approx(2.0 / 3));
    CHECK(m.f1[1] == 0.0);
    CHECK(m.f1[2] == 0.0);
    CHECK(m.macro_f1 == doctest::Approx(0.2222).epsilon(1e-3));
    CHECK(m.weighted_f1 == doctest::Approx(0.5 * (2.0 / 3)).epsilon(1e-12));  // 0.3333
}

TEST_CASE("zero-support classes contribute zero without poisoning the rest") {
    Confusion c{};
    c[0][0] = 4;
    c[0][1] = 1;
    Metrics m = compute_metrics(c);
    CHECK(m.recall[0] == doctest::Approx(0.8));
    CHECK(m.precision[1] == 0.0);  // predicted but never true: 0/0 -> 0 recall, p=0
    CHECK(m.f1[1] == 0.0);
    CHECK(m.f1[2] == 0.0);
}

TEST_CASE("empty confusion is all zeros") {
    Metrics m = compute_metrics(Confusion{});
    CHECK(m.accuracy == 0.0);
    CHECK(m.macro_f1 == 0.0);
    CHECK(m.weighted_f1 == 0.0);
}

TEST_CASE("metrics match the independent oracle on 100 random labelings") {
    std::mt19937_64 rng(77);
    for (int rep = 0; rep < 100; ++rep) {
        Confusion c{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) c[i][j] = static_cast<int64_t>(rng() % 40);
        Metrics m = compute_metrics(c);
        auto o = dsn::test::metrics_oracle(c);
        CHECK(std::abs(m.accuracy - o.accuracy) < 1e-12);
        CHECK(std::abs(m.weighted_f1 - o.weighted_f1) < 1e-12);
        CHECK(std::abs(m.macro_f1 - o.macro_f1) < 1e-12);
        for (int k = 0; k < 3; ++k) CHECK(std::abs(m.f1[k] - o.f1[k]) < 1e-12);
    }
}

TEST_CASE("hybrid = transductive + inductive confusion recomposition") {
    std::mt19937_64 rng(78);
    Confusion a{}, b{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            a[i][j] = static_cast<int64_t>(rng() % 20);
            b[i][j] = static_cast<int64_t>(rng() % 20);
        }
    Confusion h = add_confusions(a, b);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(h[i][j] == a[i][j] + b[i][j]);
    CHECK(compute_metrics(h).support() ==
          compute_metrics(a).support() + compute_metrics(b).support());
}

TEST_CASE("metrics file round trip") {
    namespace fs = std::filesystem;
    Confusion c{};
    c[0][0] = 12;
    c[1][0] = 2;
    c[2][2] = 30;
    Metrics m = compute_metrics(c);
    const std::string path = (fs::temp_directory_path() / "dsn_metrics_rt.txt").string();
    write_metrics_file(path, m);
    Metrics r = read_metrics_file(path);
    CHECK(r.accuracy == m.accuracy);
    CHECK(r.weighted_f1 == m.weighted_f1);
    CHECK(r.macro_f1 == m.macro_f1);
    CHECK(r.confusion == m.confusion);
    std::remove(path.c_str());
}
