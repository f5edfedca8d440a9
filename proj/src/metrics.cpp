#include "kanids/metrics.hpp"

#include <string>

#include "kanids/error.hpp"

namespace kanids {

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

Metrics one_class(double tp, double fp, double fn, double accuracy) {
    Metrics m;
    m.accuracy = accuracy;
    m.precision = ratio(tp, tp + fp);
    m.recall = ratio(tp, tp + fn);
    m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
    return m;
}

}  // namespace

Confusion accumulate(Confusion conf, std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> actual) {
    require(predicted.size() == actual.size(), ErrorKind::LengthMismatch,
            std::to_string(predicted.size()) + " predictions vs " + std::to_string(actual.size()) + " labels");
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool p = predicted[i] != 0;
        const bool a = actual[i] != 0;
        if (p && a) ++conf.tp;
        else if (!p && !a) ++conf.tn;
        else if (p) ++conf.fp;
        else ++conf.fn;
    }
    return conf;
}

Metrics metrics(const Confusion& conf) {
    require(conf.total() > 0, ErrorKind::EmptyConfusion, "no samples evaluated");
    const double accuracy = static_cast<double>(conf.tp + conf.tn) / static_cast<double>(conf.total());
    return one_class(static_cast<double>(conf.tp), static_cast<double>(conf.fp), static_cast<double>(conf.fn), accuracy);
}

Metrics macro_metrics(const Confusion& conf) {
    const Metrics attack = metrics(conf);
    const Metrics normal = one_class(static_cast<double>(conf.tn), static_cast<double>(conf.fn),
                                     static_cast<double>(conf.fp), attack.accuracy);
    return Metrics{attack.accuracy, (attack.precision + normal.precision) / 2.0, (attack.recall + normal.recall) / 2.0,
                   (attack.f1 + normal.f1) / 2.0};
}

}  // namespace kanids
