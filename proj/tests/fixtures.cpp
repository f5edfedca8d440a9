#include "fixtures.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "kanids/rng.hpp"

namespace fixtures {

using namespace kanids;

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("kanids_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

double cox_de_boor(const std::vector<double>& t, int i, int p, double x) {
    if (p == 0) {
        const bool last = t[static_cast<std::size_t>(i) + 1] == t.back();
        if (last) return (x >= t[i] && x <= t[i + 1]) ? 1.0 : 0.0;
        return (x >= t[i] && x < t[i + 1]) ? 1.0 : 0.0;
    }
    double left = 0.0, right = 0.0;
    const double dl = t[i + p] - t[i];
    const double dr = t[i + p + 1] - t[i + 1];
    if (dl > 0) left = (x - t[i]) / dl * cox_de_boor(t, i, p - 1, x);
    if (dr > 0) right = (t[i + p + 1] - x) / dr * cox_de_boor(t, i + 1, p - 1, x);
    return left + right;
}

namespace {

const std::map<std::string, std::vector<std::string>>& pools() {
    static const std::map<std::string, std::vector<std::string>> p = {
        {"protocol_type", {"tcp", "udp", "icmp"}},
        {"proto", {"tcp", "udp", "icmp"}},
        {"Protocol", {"6", "17", "0"}},
        {"service", {"http", "ftp_data", "private", "smtp", "-"}},
        {"flag", {"SF", "S0", "REJ"}},
        {"state", {"FIN", "INT", "CON", "REQ"}},
        {"flgs", {"e", "e s", "e d"}},
    };
    return p;
}

std::string label_token(DatasetName name, bool attack, Rng& rng) {
    switch (name) {
        case DatasetName::NSL_KDD: {
            static const char* attacks[] = {"neptune", "smurf", "satan", "guess_passwd", "ipsweep"};
            return attack ? attacks[rng.below(5)] : "normal";
        }
        case DatasetName::CICIDS2017: {
            static const char* attacks[] = {"DDoS", "PortScan", "DoS Hulk"};
            return attack ? attacks[rng.below(3)] : "BENIGN";
        }
        default:
            return attack ? "1" : "0";
    }
}

}  // namespace

void write_schema_csv(const fs::path& path, DatasetName name, std::size_t rows, const CsvOptions& options) {
    const DatasetSchema& schema = schema_for(name);
    std::vector<std::string> columns = schema.columns;
    if (name == DatasetName::NSL_KDD) columns.insert(columns.end(), schema.optional_columns.begin(), schema.optional_columns.end());

    Rng rng(options.seed);
    std::ofstream out(path);
    if (options.header) {
        for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
        out << "\n";
    }
    char buf[64];
    for (std::size_t r = 0; r < rows; ++r) {
        const bool attack = rng.uniform() < options.attack_share;
        for (std::size_t c = 0; c < columns.size(); ++c) {
            const std::string& col = columns[c];
            if (c) out << ",";
            if (col == schema.label_column) {
                out << label_token(name, attack, rng);
            } else if (col == "difficulty") {
                out << rng.below(22);
            } else if (schema.is_categorical(col)) {
                const auto it = pools().find(col);
                const std::vector<std::string> fallback = {"a", "b", "c"};
                const auto& pool = it == pools().end() ? fallback : it->second;
                // Attacks favour the first token so categories carry signal too.
                const std::size_t k = attack && rng.uniform() < 0.6 ? 0 : rng.below(pool.size());
                out << pool[k];
            } else if (schema.is_dropped(col)) {
                out << (col == "attack_cat" || col == "category" ? (attack ? "DoS" : "Normal") : "10.0.0." + std::to_string(r % 250));
            } else if (col == "num_outbound_cmds") {
                out << 0;
            } else {
                const double u = rng.uniform();
                if (u < options.missing_rate) continue;
                if (u < options.missing_rate + options.infinity_rate) {
                    out << "Infinity";
                    continue;
                }
                double v = rng.uniform(0.0, 100.0);
                if (c % 2 == 0 && attack) v += 60.0;
                std::snprintf(buf, sizeof buf, "%.4f", v);
                out << buf;
            }
        }
        out << "\n";
    }
}

DatasetSplit separable_split(std::size_t rows, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> w(dim);
    double norm = 0.0;
    for (double& v : w) {
        v = rng.normal();
        norm += v * v;
    }
    norm = std::sqrt(norm);

    DatasetSplit split;
    split.features = Tensor({rows, dim});
    for (std::size_t r = 0; r < rows; ++r) {
        while (true) {
            double dot = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                split.features[r * dim + d] = rng.uniform(-1.0, 1.0);
                dot += w[d] * split.features[r * dim + d];
            }
            if (std::abs(dot) / norm < 0.1) continue;
            split.labels.push_back(dot > 0 ? 1 : 0);
            break;
        }
    }
    for (std::size_t d = 0; d < dim; ++d) {
        split.feature_names.push_back("x" + std::to_string(d));
        split.feature_stats.push_back({-1.0, 1.0});
    }
    split.fingerprint = "separable";
    return split;
}

int run_command(const std::string& command) {
    const int status = std::system(command.c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace fixtures
