#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kanids/data.hpp"
#include "kanids/error.hpp"
#include "kanids/spline.hpp"

namespace fixtures {

namespace fs = std::filesystem;

/// Kind of the kanids::Error thrown by fn, or nullopt if it returns normally.
template <typename Fn>
std::optional<kanids::ErrorKind> error_kind(Fn&& fn) {
    try {
        fn();
    } catch (const kanids::Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

/// Fresh empty directory under the system temp dir.
fs::path scratch_dir(const std::string& name);

/// Textbook recursive Cox-de Boor value of basis i, degree p, over explicit knots
/// (half-open intervals, last interval closed at knots.back()).
double cox_de_boor(const std::vector<double>& knots, int i, int p, double x);

struct CsvOptions {
    bool header = true;
    double missing_rate = 0.0;   // share of numeric cells written empty
    double infinity_rate = 0.0;  // share of numeric cells written as "Infinity"
    double attack_share = 0.4;
    std::uint64_t seed = 1;
};

/// Writes a synthetic CSV that follows the named schema: categorical and label
/// columns use realistic tokens, numeric features are shifted by class so the
/// labels are learnable.
void write_schema_csv(const fs::path& path, kanids::DatasetName name, std::size_t rows, const CsvOptions& options);

/// Linearly separable split: label = [w . x > 0] with a margin, features in [-1, 1].
kanids::DatasetSplit separable_split(std::size_t rows, std::size_t dim, std::uint64_t seed);

/// Runs a shell command and returns its exit status.
int run_command(const std::string& command);

std::string read_file(const fs::path& path);

}  // namespace fixtures
