// Command-line front end: fit, gradcheck, simulate, compare.
#pragma once

#include "ssmgic/models.hpp"
#include "ssmgic/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ssmgic::cli {

enum class Command { fit, gradcheck, simulate, compare };

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kToleranceExceeded = 1,
    kConfigError = 2,
    kNumericalFailure = 3,
};

inline constexpr int kSchemaVersion = 1;

struct RunConfig {
    Command command = Command::fit;
    std::string data_path;
    std::string model = "trend";
    /// Defaults to 1 for the trend model and 2 for the seasonal families.
    std::optional<int> trend_order;
    int period = 12;
    int ar_order = 1;
    /// Initial (fit, gradcheck) or true (simulate) parameters.
    std::vector<double> init;
    /// Interpret `init` as working-scale theta instead of natural-scale values.
    bool init_working = false;
    bool log_data = false;
    double kappa = 1.0e4;
    std::uint64_t seed = 1;
    std::string out;
    double tol = 1e-4;
    double hess_tol = 1e-3;
    std::size_t length = 200;
    /// Standard deviation of the simulated initial state around zero.
    double init_sd = 0.0;
    int max_iters = 200;
    double grad_tol = 1e-8;
    /// compare: model identifiers such as "trend:1", "seasonal", "seasonal-ar:2".
    std::vector<std::string> models;
};

/// Builder for `--model` / `--trend-order` / `--period` / `--ar-order`.
[[nodiscard]] ModelBuilder make_builder(const RunConfig& cfg);

/// Parses identifiers accepted by `compare --models`.
[[nodiscard]] ModelBuilder parse_model_id(const std::string& id, int period);

/// Default multi-start points (working scale) scaled to the data.
[[nodiscard]] std::vector<Vector> default_starts(const ModelBuilder& builder, const TimeSeries& y);

/// Executes one command; the JSON report (or CSV) goes to cfg.out when set,
/// otherwise to `out`. Diagnostics go to `err`. Returns an ExitCode.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// argv entry point used by the ssm-gic binary.
int main_entry(int argc, char** argv);

}  // namespace ssmgic::cli
