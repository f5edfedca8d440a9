#include <algorithm>

#include "doctest.h"
#include "fixtures.hpp"
#include "kanids/metrics.hpp"
#include "kanids/rng.hpp"

using namespace kanids;
using fixtures::error_kind;

TEST_CASE("confusion closed forms") {
    const std::vector<std::uint8_t> ones(7, 1);
    const Confusion all = kanids::accumulate({}, ones, ones);
    CHECK(all == Confusion{7, 0, 0, 0});

    const std::vector<std::uint8_t> actual{1, 0, 1, 1, 0};
    std::vector<std::uint8_t> flipped(actual.size());
    std::transform(actual.begin(), actual.end(), flipped.begin(), [](std::uint8_t v) { return v ? 0 : 1; });
    const Confusion c = kanids::accumulate({}, flipped, actual);
    CHECK(c.tp == 0);
    CHECK(c.tn == 0);
    CHECK(c.fp == 2);
    CHECK(c.fn == 3);

    CHECK(error_kind([&] { kanids::accumulate({}, ones, actual); }) == ErrorKind::LengthMismatch);
    CHECK(error_kind([] { metrics(Confusion{}); }) == ErrorKind::EmptyConfusion);
}

TEST_CASE("metric closed forms") {
    for (const Metrics& m : {metrics({90, 90, 10, 10}), macro_metrics({90, 90, 10, 10})}) {
        CHECK(m.accuracy == doctest::Approx(0.9).epsilon(1e-15));
        CHECK(m.precision == doctest::Approx(0.9).epsilon(1e-15));
        CHECK(m.recall == doctest::Approx(0.9).epsilon(1e-15));
        CHECK(m.f1 == doctest::Approx(0.9).epsilon(1e-15));
    }

    const Metrics none = metrics({0, 20, 0, 5});
    CHECK(none.precision == 0.0);
    CHECK(none.recall == 0.0);
    CHECK(none.f1 == 0.0);
    CHECK(none.accuracy == 0.8);

    const Metrics half = metrics({50, 0, 50, 0});
    CHECK(half.accuracy == 0.5);
    CHECK(half.precision == 0.5);
    CHECK(half.recall == 1.0);
    CHECK(half.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    // Normal-class view of the same counts: precision 0, recall 0.
    const Metrics macro = macro_metrics({50, 0, 50, 0});
    CHECK(macro.precision == 0.25);
    CHECK(macro.recall == 0.5);
    CHECK(macro.f1 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("streaming counts equal a brute-force tally") {
    Rng rng(42);
    std::vector<std::uint8_t> pred(10000), actual(10000);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        pred[i] = rng.uniform(0, 1) < 0.45;
        actual[i] = rng.uniform(0, 1) < 0.3;
    }
    Confusion streamed;
    for (std::size_t start = 0; start < pred.size(); start += 333) {
        const std::size_t n = std::min<std::size_t>(333, pred.size() - start);
        streamed += kanids::accumulate({}, std::span(pred).subspan(start, n), std::span(actual).subspan(start, n));
    }
    CHECK(streamed == kanids::accumulate({}, pred, actual));

    std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        tp += pred[i] == 1 && actual[i] == 1;
        tn += pred[i] == 0 && actual[i] == 0;
        fp += pred[i] == 1 && actual[i] == 0;
        fn += pred[i] == 0 && actual[i] == 1;
    }
    CHECK(streamed == Confusion{tp, tn, fp, fn});

    const Metrics m = metrics(streamed);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    CHECK(m.accuracy == static_cast<double>(tp + tn) / 10000.0);
    CHECK(m.precision == precision);
    CHECK(m.recall == recall);
    CHECK(m.f1 == 2.0 * precision * recall / (precision + recall));
}

TEST_CASE("f1 lies between precision and recall") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        const Confusion c{1 + rng.below(200), rng.below(200), 1 + rng.below(200), 1 + rng.below(200)};
        const Metrics m = metrics(c);
        CHECK(m.f1 <= std::max(m.precision, m.recall) + 1e-15);
        CHECK(m.f1 >= std::min(m.precision, m.recall) - 1e-15);
    }
}
