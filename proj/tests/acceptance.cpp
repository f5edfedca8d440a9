// Acceptance checks: one PASS / FAIL / SKIP line per criterion. Exit status is
// non-zero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include "fixtures.hpp"
#include "json.hpp"
#include "kanids/data.hpp"
#include "kanids/experiment.hpp"
#include "kanids/gradcheck.hpp"
#include "kanids/kan.hpp"
#include "kanids/metrics.hpp"
#include "kanids/models.hpp"
#include "kanids/spline.hpp"
#include "kanids/train.hpp"

namespace fs = std::filesystem;
using namespace kanids;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
    Status status;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(double v, int precision = 3) {
    std::ostringstream s;
    s << std::setprecision(precision) << v;
    return s.str();
}

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::Pass : Status::Fail, std::move(detail)}; }

Outcome gradient_suite() {
    const auto start = Clock::now();
    const auto cases = run_gradcheck({});
    const double seconds = since(start);
    bool ok = seconds < 120.0;
    double worst = 0.0;
    std::string failed;
    for (const auto& c : cases) {
        ok = ok && c.passed && c.seeds >= 20;
        worst = std::max(worst, c.max_rel_error);
        if (!c.passed) failed += " " + c.name;
    }
    return verdict(ok, std::to_string(cases.size()) + " layer kinds x 20 seeds, max rel error " + fmt(worst) + ", " +
                           fmt(seconds) + " s" + (failed.empty() ? "" : ", failed:" + failed));
}

Outcome spline_properties() {
    double unity = 0.0, oracle = 0.0;
    for (int G = 1; G <= 10; ++G)
        for (int r = 0; r <= 5; ++r) {
            const auto g = make_grid(-1, 1, G, r);
            for (int k = 0; k < 1000; ++k) {
                const double x = -1.0 + 2.0 * (k + 0.5) / 1000.0;
                const auto b = eval_basis(g, x);
                unity = std::max(unity, std::abs(std::accumulate(b.values.begin(), b.values.end(), 0.0) - 1.0));
                for (std::size_t i = 0; i < b.values.size(); ++i)
                    oracle = std::max(oracle,
                                      std::abs(b.values[i] - fixtures::cox_de_boor(g.knots(), static_cast<int>(i), r, x)));
            }
        }
    return verdict(unity < 1e-9 && oracle < 1e-12,
                   "max |sum B - 1| " + fmt(unity) + ", max |iterative - recursive| " + fmt(oracle));
}

Outcome metrics_oracle() {
    Rng rng(2024);
    std::vector<std::uint8_t> pred(10000), actual(10000);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        pred[i] = rng.uniform() < 0.5;
        actual[i] = rng.uniform() < 0.35;
    }
    Confusion streamed;
    for (std::size_t i = 0; i < pred.size(); i += 97) {
        const std::size_t n = std::min<std::size_t>(97, pred.size() - i);
        streamed += kanids::accumulate({}, std::span(pred).subspan(i, n), std::span(actual).subspan(i, n));
    }
    std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] && actual[i]) ++tp;
        else if (!pred[i] && !actual[i]) ++tn;
        else if (pred[i]) ++fp;
        else ++fn;
    }
    const Metrics m = metrics(streamed);
    const double p = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double r = static_cast<double>(tp) / static_cast<double>(tp + fn);
    const bool counts = streamed == Confusion{tp, tn, fp, fn};
    const bool values = m.accuracy == static_cast<double>(tp + tn) / 1e4 && m.precision == p && m.recall == r &&
                        m.f1 == 2 * p * r / (p + r);
    const Metrics none = metrics({0, 10, 0, 4});
    const Metrics half = metrics({50, 0, 50, 0});
    const bool degenerate = none.precision == 0.0 && none.recall == 0.0 && none.f1 == 0.0 && half.precision == 0.5 &&
                            half.recall == 1.0 && std::abs(half.f1 - 2.0 / 3.0) < 1e-15;
    return verdict(counts && values && degenerate, std::string("counts ") + (counts ? "exact" : "differ") +
                                                       ", metrics " + (values ? "exact" : "differ") + ", 0/0 rules " +
                                                       (degenerate ? "hold" : "broken"));
}

Outcome loss_optimizer() {
    Rng rng(77);
    std::vector<double> p(100);
    std::vector<std::uint8_t> y(100);
    long double sum = 0.0L;
    for (std::size_t i = 0; i < 100; ++i) {
        p[i] = rng.uniform();
        y[i] = rng.uniform() < 0.5;
        const long double q = std::clamp<long double>(p[i], 1e-7, 1.0 - 1e-7);
        sum += y[i] ? -std::log(q) : -std::log1p(-q);
    }
    const double bce_err = std::abs(bce_loss(p, y) - static_cast<double>(sum / 100.0L));

    TrainConfig c;
    c.learning_rate = 0.01;
    Parameter theta{"theta", Tensor({1}, -0.8), Tensor({1})};
    AdamW opt(c);
    double t = -0.8, m = 0.0, v = 0.0, adam_err = 0.0;
    const double g = -1.7;
    for (int k = 1; k <= 3; ++k) {
        theta.grad[0] = g;
        opt.step({{"theta", &theta}});
        m = c.beta1 * m + (1 - c.beta1) * g;
        v = c.beta2 * v + (1 - c.beta2) * g * g;
        const double mh = m / (1 - std::pow(c.beta1, k)), vh = v / (1 - std::pow(c.beta2, k));
        t = t - c.learning_rate * mh / (std::sqrt(vh) + c.eps) - c.learning_rate * c.weight_decay * t;
        adam_err = std::max(adam_err, std::abs(theta.value[0] - t));
    }
    return verdict(bce_err < 1e-12 && adam_err < 1e-12,
                   "BCE vs long double " + fmt(bce_err) + ", AdamW 3-step deviation " + fmt(adam_err));
}

Outcome grid_refinement() {
    const auto start = Clock::now();
    const std::vector<int> grids{3, 5, 10, 20};
    const auto losses = fit_smooth_1d([](double x) { return std::sin(M_PI * x); }, grids);
    const double seconds = since(start);
    bool monotone = true;
    std::string detail = "losses";
    for (std::size_t i = 0; i < losses.size(); ++i) {
        detail += " G=" + std::to_string(grids[i]) + ":" + fmt(losses[i]);
        if (i > 0) monotone = monotone && losses[i] <= 1.1 * losses[i - 1];
    }
    return verdict(monotone && seconds < 60.0, detail + ", " + fmt(seconds) + " s");
}

Outcome overfit_smoke() {
    const auto data = fixtures::separable_split(200, 16, 5);
    bool ok = true;
    std::string detail;
    for (ModelKind kind : kAllModelKinds) {
        ModelSpec spec;
        spec.kind = kind;
        spec.input_dim = data.dim();
        TrainConfig c;
        c.learning_rate = 1e-2;
        c.epochs = 2000;
        std::size_t reached = 0;
        double best = 0.0;
        Model model = build(spec);
        const auto start = Clock::now();
        train_model(model, data, {}, c, [&](const EpochLog& log) {
            best = std::max(best, log.train_accuracy);
            // The running figure mixes parameter states within the epoch; stop only once a clean pass agrees.
            if (log.train_accuracy >= 0.99 && metrics(evaluate(model, data)).accuracy >= 0.99) reached = log.epoch;
            return reached == 0;
        });
        const double seconds = since(start);
        // Confirm on a clean pass once training has stopped.
        const double final_acc = metrics(evaluate(model, data)).accuracy;
        const bool pass = reached > 0 && final_acc >= 0.99 && seconds < 60.0;
        ok = ok && pass;
        detail += std::string(detail.empty() ? "" : "; ") + model.name() + " " +
                  (reached ? "epoch " + std::to_string(reached) : "best " + fmt(best)) + " acc " + fmt(final_acc) +
                  " " + fmt(seconds, 2) + "s";
    }
    return verdict(ok, detail);
}

Outcome desk_nsl_kdd() {
    const char* root = std::getenv("KANIDS_NSL_KDD_DIR");
    if (!root || !*root) return {Status::Skip, "set KANIDS_NSL_KDD_DIR to a folder with KDDTrain+.txt and KDDTest+.txt"};
    const fs::path dir(root);
    if (!fs::exists(dir / "KDDTrain+.txt") || !fs::exists(dir / "KDDTest+.txt"))
        return {Status::Skip, "KDDTrain+.txt / KDDTest+.txt not found under " + dir.string()};

    ExperimentConfig c;
    c.dataset.name = DatasetName::NSL_KDD;
    c.dataset.train = {dir / "KDDTrain+.txt"};
    c.dataset.test = {dir / "KDDTest+.txt"};
    c.subsample = SubsampleConfig{20000, 5000, 1};
    c.train.epochs = 30;
    c.train.learning_rate = 1e-3;
    if (const char* lr = std::getenv("KANIDS_ACCEPT_LR")) c.train.learning_rate = std::stod(lr);
    for (ModelKind kind : kAllModelKinds) {
        ModelSpec s;
        s.kind = kind;
        c.models.push_back(s);
    }
    c.output_dir = fixtures::scratch_dir("accept_nsl");
    const LoadedData loaded = load_dataset(c.dataset, c.subsample);
    const auto result = run_experiment(c, loaded.data, thread_count(1), nullptr);

    std::map<std::string, double> acc;
    std::string detail = "lr " + fmt(c.train.learning_rate) + ";";
    for (const auto& r : result.reports) {
        acc[r.model] = r.diverged ? 0.0 : r.metrics.accuracy;
        detail += " " + r.model + " acc " + fmt(100 * acc[r.model], 4) + " params " + std::to_string(r.parameter_count) + ";";
    }
    // Ordering is informational only.
    double kan_best = 0.0, baseline_best = 0.0;
    for (const char* m : {"KANs(2)", "KANs(5)", "ConvKAN"}) kan_best = std::max(kan_best, acc[m]);
    for (const char* m : {"CNN", "LSTM", "MLP(2)", "MLP(5)"}) baseline_best = std::max(baseline_best, acc[m]);
    const double kl = acc["KAN-LSTM"];
    const bool ordered = kl + 0.02 >= kan_best && kan_best + 0.02 >= baseline_best;
    detail += std::string(" ordering KAN-LSTM >= KAN >= baselines (2 pt tolerance): ") + (ordered ? "holds" : "violated");
    return verdict(kl >= 0.90 && !result.any_diverged, detail);
}

Outcome determinism() {
    const fs::path dir = fixtures::scratch_dir("accept_determinism");
    fixtures::write_schema_csv(dir / "nsl.txt", DatasetName::NSL_KDD, 1200, {.header = false, .seed = 9});
    const nlohmann::json config = {{"dataset", {{"name", "NSL_KDD"}, {"train", {"nsl.txt"}}}},
                                   {"models", {"MLP2", "KAN2", "KAN_LSTM"}},
                                   {"train", {{"epochs", 2}, {"learning_rate", 1e-3}}},
                                   {"output_dir", "out"}};
    std::ofstream(dir / "config.json") << config.dump(2);
    const std::string cmd = std::string(KANIDS_CLI_PATH) + " run --config \"" + (dir / "config.json").string() +
                            "\" > \"" + (dir / "log.txt").string() + "\" 2>&1";
    auto snapshot = [&] {
        std::map<std::string, std::string> files;
        for (const auto& e : fs::recursive_directory_iterator(dir / "out")) {
            const std::string rel = fs::relative(e.path(), dir / "out").generic_string();
            if (e.is_regular_file() && rel != "results_table.txt" && rel != "timing.csv")
                files[rel] = fixtures::read_file(e.path());
        }
        return files;
    };
    if (fixtures::run_command(cmd) != 0) return {Status::Fail, "first run failed: " + fixtures::read_file(dir / "log.txt")};
    const auto first = snapshot();
    if (fixtures::run_command(cmd) != 0) return {Status::Fail, "second run failed"};
    const auto second = snapshot();
    std::size_t differing = 0;
    for (const auto& [name, text] : first)
        if (!second.count(name) || second.at(name) != text) ++differing;
    return verdict(differing == 0 && first.size() == second.size() && first.size() >= 8,
                   std::to_string(first.size()) + " numeric files compared, " + std::to_string(differing) + " differ");
}

Outcome tri_ids() {
    const fs::path dir = fixtures::scratch_dir("accept_tri");
    fixtures::write_schema_csv(dir / "bot.csv", DatasetName::BOT_IOT, 2000, {.infinity_rate = 0.002, .seed = 1});
    fixtures::write_schema_csv(dir / "nsl.txt", DatasetName::NSL_KDD, 2000, {.header = false, .seed = 2});
    fixtures::write_schema_csv(dir / "cic.csv", DatasetName::CICIDS2017, 2000,
                               {.missing_rate = 0.002, .infinity_rate = 0.002, .seed = 3});
    auto once = [&] {
        const RawTable t = build_tri_ids(ingest_csv(dir / "bot.csv", schema_for(DatasetName::BOT_IOT)),
                                         ingest_csv(dir / "nsl.txt", schema_for(DatasetName::NSL_KDD)),
                                         ingest_csv(dir / "cic.csv", schema_for(DatasetName::CICIDS2017)), 6000, 42);
        return std::pair{t.columns.size(), preprocess(t, 42, 0.2)};
    };
    const auto [width, a] = once();
    const auto [width_b, b] = once();
    bool in_range = true;
    for (const auto* s : {&a.train, &a.test})
        for (double v : s->features.values()) in_range = in_range && std::isfinite(v) && v >= -1.0 && v <= 1.0;
    auto share = [](const std::vector<std::uint8_t>& l) {
        return static_cast<double>(std::count(l.begin(), l.end(), 1)) / static_cast<double>(l.size());
    };
    const double gap = std::abs(share(a.train.labels) - share(a.test.labels));
    const bool idempotent = a.train.fingerprint == b.train.fingerprint && a.train.features == b.train.features &&
                            a.test.features == b.test.features && width == width_b;
    const bool rows = a.train.rows() + a.test.rows() == 6000;
    return verdict(in_range && gap < 0.01 && idempotent && rows,
                   std::to_string(width) + " merged columns -> " + std::to_string(a.train.dim()) +
                       " features, range/finite " + (in_range ? "ok" : "violated") + ", label gap " + fmt(gap) +
                       ", fingerprint " + a.train.fingerprint + (idempotent ? " stable" : " unstable"));
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"gradient-suite", gradient_suite},
        {"spline-properties", spline_properties},
        {"metrics-oracle", metrics_oracle},
        {"loss-optimizer-oracles", loss_optimizer},
        {"grid-refinement-trend", grid_refinement},
        {"overfit-smoke", overfit_smoke},
        {"desk-scale-nsl-kdd", desk_nsl_kdd},
        {"determinism", determinism},
        {"tri-ids-construction", tri_ids},
    };
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {Status::Fail, std::string("exception: ") + e.what()};
        }
        const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
        failures += o.status == Status::Fail;
        std::cout << tag << "  " << name << "  " << o.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
