#pragma once

#include <cstdint>
#include <span>

namespace kanids {

/// Binary confusion counts with attack (label 1) as the positive class.
struct Confusion {
    std::uint64_t tp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const noexcept { return tp + tn + fp + fn; }

    Confusion& operator+=(const Confusion& other) noexcept {
        tp += other.tp;
        tn += other.tn;
        fp += other.fp;
        fn += other.fn;
        return *this;
    }
    friend Confusion operator+(Confusion a, const Confusion& b) noexcept { return a += b; }
    friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct Metrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Adds one count per (predicted, actual) pair; both sequences must be equally long.
Confusion accumulate(Confusion conf, std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> actual);

/// Accuracy, precision, recall and F1 for the attack class. Any 0/0 ratio is 0.
Metrics metrics(const Confusion& conf);

/// Precision, recall and F1 averaged over both classes (normal treated as
/// positive for the second term); accuracy is unchanged.
Metrics macro_metrics(const Confusion& conf);

}  // namespace kanids
