#include "ssmgic/cli.hpp"

#include "ssmgic/criteria.hpp"
#include "ssmgic/diff_filter.hpp"
#include "ssmgic/io.hpp"
#include "ssmgic/kalman.hpp"
#include "ssmgic/oracle.hpp"
#include "ssmgic/optimize.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace ssmgic::cli {

namespace {

using json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Reports carry 12 significant digits.
double round12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
}

json num(double v) { return std::isfinite(v) ? json(round12(v)) : json(nullptr); }

json num(const std::optional<double>& v) { return v ? num(*v) : json(nullptr); }

// AIC and GIC are derived from the printed loglik and b so the identities
// hold on the report values themselves.
json printed_aic(double loglik, std::size_t p) {
    return num(-2.0 * round12(loglik) + 2.0 * static_cast<double>(p));
}

json printed_gic(double loglik, const std::optional<double>& b) {
    if (!b || !std::isfinite(*b)) return nullptr;
    return num(-2.0 * round12(loglik) + 2.0 * round12(*b));
}

json vec(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(num(v[i]));
    return out;
}

json mat(const Matrix& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vec(m.row(i).transpose()));
    return out;
}

std::string timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    std::ostringstream os;
    os << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

json header(const char* command) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = command;
    j["generated_at"] = timestamp();
    return j;
}

json model_json(const ModelBuilder& b) {
    const auto o = b.orders();
    json j;
    j["label"] = b.label();
    j["orders"] = {o[0], o[1], o[2]};
    j["state_dim"] = b.state_dim();
    j["param_dim"] = b.param_dim();
    return j;
}

json criteria_json(const CriteriaReport& c) {
    json j;
    j["p"] = c.p;
    j["fisher_information"] = mat(c.I_hat);
    j["j_hat"] = mat(c.J_hat);
    j["j_condition"] = num(c.j_condition);
    j["b_aic"] = c.p;
    j["b_gic"] = num(c.b_gic);
    j["aic"] = printed_aic(c.loglik, c.p);
    j["gic"] = printed_gic(c.loglik, c.b_gic);
    return j;
}

void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
    if (cfg.out.empty()) {
        out << text;
        return;
    }
    std::ofstream f(cfg.out);
    if (!f) throw ConfigError("cannot write " + cfg.out);
    f << text;
}

TimeSeries load_data(const RunConfig& cfg) {
    if (cfg.data_path.empty()) throw ConfigError("--data is required");
    if (!std::filesystem::exists(cfg.data_path)) throw ConfigError("data file not found: " + cfg.data_path);
    try {
        return ingest_csv(cfg.data_path, cfg.log_data);
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
}

FilterInit filter_init(const RunConfig& cfg) {
    if (!(cfg.kappa > 0.0) || !std::isfinite(cfg.kappa)) throw ConfigError("--kappa must be positive");
    FilterInit init;
    init.kappa = cfg.kappa;
    return init;
}

std::optional<Vector> configured_theta(const RunConfig& cfg, const ModelBuilder& b) {
    if (cfg.init.empty()) return std::nullopt;
    if (cfg.init.size() != b.param_dim()) {
        throw ConfigError(b.label() + " takes " + std::to_string(b.param_dim()) + " parameters, --init has " +
                          std::to_string(cfg.init.size()));
    }
    const Vector v = Eigen::Map<const Vector>(cfg.init.data(), static_cast<Eigen::Index>(cfg.init.size()));
    try {
        return cfg.init_working ? b.parameters(v).theta() : b.parameters_from_natural(v).theta();
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
}

OptimizerConfig optimizer_config(const RunConfig& cfg) {
    OptimizerConfig oc;
    oc.max_iters = cfg.max_iters;
    oc.grad_tol = cfg.grad_tol;
    try {
        oc.validate(1);
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
    return oc;
}

double relative_error(double analytic, double reference, double floor) {
    return std::abs(analytic - reference) / std::max(std::abs(reference), floor);
}

int do_fit(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const ModelBuilder builder = make_builder(cfg);
    const TimeSeries y = load_data(cfg);
    const FilterInit init = filter_init(cfg);
    const OptimizerConfig oc = optimizer_config(cfg);
    const auto theta0 = configured_theta(cfg, builder);
    const std::vector<Vector> starts = theta0 ? std::vector<Vector>{*theta0} : default_starts(builder, y);

    const auto results = multi_start_fit(builder, y, starts, oc, init);
    const FitResult& best = results.front();

    json j = header("fit");
    j["model"] = model_json(builder);
    j["data"] = {{"path", cfg.data_path}, {"n_obs", y.size()}, {"log_transform", cfg.log_data}};
    j["kappa"] = num(cfg.kappa);
    j["parameters"] = {{"names", builder.names()},
                       {"theta", vec(best.theta_hat.theta())},
                       {"natural", vec(best.theta_hat.natural_scale())}};
    j["loglik"] = num(best.loglik);
    j["gradient"] = vec(best.gradient);
    if (best.criteria && best.hessian) {
        j["hessian"] = mat(*best.hessian);
        j["neg_hessian"] = mat(-*best.hessian);
        j["criteria"] = criteria_json(*best.criteria);
    }
    j["convergence"] = {{"converged", best.converged},
                        {"iterations", best.iterations},
                        {"gradient_norm", num(best.gradient_norm)},
                        {"grad_tol", num(oc.grad_tol)},
                        {"message", best.message},
                        {"starts", starts.size()}};
    if (const auto idx = builder.ar_indices(); !idx.empty()) {
        std::vector<double> coeffs;
        for (auto i : idx) coeffs.push_back(best.theta_hat.theta()[static_cast<Eigen::Index>(i)]);
        json moduli = json::array();
        for (double m : ar_root_moduli(coeffs)) moduli.push_back(num(m));
        j["ar_root_moduli"] = moduli;
    }
    emit(cfg, j.dump(2) + "\n", out);

    if (!best.criteria || best.criteria->j_singular()) {
        err << "error: Hessian at the estimate is singular; GIC is undefined\n";
        return kNumericalFailure;
    }
    if (!best.converged) err << "warning: optimizer did not converge (" << best.message << ")\n";
    return kOk;
}

int do_gradcheck(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const ModelBuilder builder = make_builder(cfg);
    const TimeSeries y = load_data(cfg);
    const FilterInit init = filter_init(cfg);
    const Vector theta = configured_theta(cfg, builder).value_or(default_starts(builder, y).front());

    const auto eval = hessian_filter(builder(theta), init, y);
    const Vector fd_grad =
        fd_gradient([&](const Vector& t) { return log_likelihood(builder(t), init, y); }, theta);
    const Matrix fd_hess =
        fd_hessian([&](const Vector& t) { return gradient_filter(builder(t), init, y).gradient; }, theta);

    constexpr double kGradFloor = 1e-6;
    constexpr double kHessFloor = 1e-5;
    json rows = json::array();
    double grad_err = 0.0;
    for (std::size_t j = 0; j < builder.param_dim(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const double e = relative_error(eval.gradient[jj], fd_grad[jj], kGradFloor);
        grad_err = std::max(grad_err, e);
        rows.push_back({{"name", builder.names()[j]},
                        {"analytic", num(eval.gradient[jj])},
                        {"finite_difference", num(fd_grad[jj])},
                        {"rel_error", num(e)}});
    }
    double hess_err = 0.0;
    for (Eigen::Index i = 0; i < fd_hess.rows(); ++i) {
        for (Eigen::Index k = 0; k < fd_hess.cols(); ++k) {
            hess_err = std::max(hess_err, relative_error((*eval.hessian)(i, k), fd_hess(i, k), kHessFloor));
        }
    }
    const bool pass = grad_err < cfg.tol && hess_err < cfg.hess_tol;

    json j = header("gradcheck");
    j["model"] = model_json(builder);
    j["data"] = {{"path", cfg.data_path}, {"n_obs", y.size()}, {"log_transform", cfg.log_data}};
    j["theta"] = vec(theta);
    j["loglik"] = num(eval.loglik);
    j["gradient"] = rows;
    j["hessian"] = {{"analytic", mat(*eval.hessian)}, {"finite_difference", mat(fd_hess)}};
    j["max_rel_error_gradient"] = num(grad_err);
    j["max_rel_error_hessian"] = num(hess_err);
    j["tolerance"] = num(cfg.tol);
    j["hessian_tolerance"] = num(cfg.hess_tol);
    j["pass"] = pass;
    emit(cfg, j.dump(2) + "\n", out);
    if (!pass) {
        err << "gradcheck failed: gradient error " << grad_err << ", Hessian error " << hess_err << "\n";
        return kToleranceExceeded;
    }
    return kOk;
}

int do_simulate(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    const ModelBuilder builder = make_builder(cfg);
    const auto theta = configured_theta(cfg, builder);
    if (!theta) throw ConfigError("simulate needs the true parameters via --init");
    if (cfg.length == 0) throw ConfigError("--length must be positive");
    if (!(cfg.init_sd >= 0.0)) throw ConfigError("--init-sd must be nonnegative");

    const auto m = static_cast<Eigen::Index>(builder.state_dim());
    FilterInit init;
    init.V0 = cfg.init_sd * cfg.init_sd * Matrix::Identity(m, m);
    const TimeSeries y = simulate(builder(*theta), init, cfg.length, cfg.seed);
    if (cfg.out.empty()) {
        out << "value\n" << std::setprecision(17);
        for (double v : y.values()) out << v << '\n';
    } else {
        write_csv(cfg.out, y);
    }
    return kOk;
}

std::string comparison_table(const std::vector<ComparisonRow>& rows, const std::vector<ModelBuilder>& builders,
                             const std::vector<std::string>& labels) {
    std::ostringstream os;
    auto fmt = [](const std::optional<double>& v, int prec) {
        std::ostringstream s;
        if (v) {
            s << std::fixed << std::setprecision(prec) << *v;
        } else {
            s << "undef";
        }
        return s.str();
    };
    os << std::left << std::setw(5) << "rank" << std::setw(32) << "model" << std::right << std::setw(4) << "m1"
       << std::setw(4) << "m2" << std::setw(4) << "m3" << std::setw(14) << "log-lik" << std::setw(7) << "b_AIC"
       << std::setw(10) << "b_GIC" << std::setw(14) << "AIC" << std::setw(14) << "GIC" << '\n';
    for (const auto& r : rows) {
        std::array<int, 3> o{0, 0, 0};
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == r.label) o = builders[i].orders();
        }
        os << std::left << std::setw(5) << r.rank << std::setw(32) << r.label << std::right << std::setw(4)
           << o[0] << std::setw(4) << o[1] << std::setw(4) << o[2] << std::setw(14) << fmt(r.loglik, 4)
           << std::setw(7) << r.p << std::setw(10) << fmt(r.b_gic, 4) << std::setw(14) << fmt(r.aic, 4)
           << std::setw(14) << fmt(r.gic, 4) << '\n';
    }
    return os.str();
}

int do_compare(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const TimeSeries y = load_data(cfg);
    const FilterInit init = filter_init(cfg);
    const OptimizerConfig oc = optimizer_config(cfg);
    std::vector<std::string> ids = cfg.models;
    if (ids.empty()) ids = {"trend:1", "trend:2", "seasonal", "seasonal-ar:1", "seasonal-ar:2", "seasonal-ar:3"};

    std::vector<ModelBuilder> builders;
    std::vector<std::string> labels;
    for (const auto& id : ids) {
        builders.push_back(parse_model_id(id, cfg.period));
        labels.push_back(builders.back().label());
    }

    std::vector<std::future<FitResult>> jobs;
    for (const auto& b : builders) {
        jobs.push_back(std::async(std::launch::async, [&b, &y, &oc, &init] {
            return multi_start_fit(b, y, default_starts(b, y), oc, init).front();
        }));
    }

    std::vector<LabeledReport> reports;
    json models = json::array();
    json failures = json::array();
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        try {
            const FitResult r = jobs[i].get();
            json m = model_json(builders[i]);
            m["theta"] = vec(r.theta_hat.theta());
            m["natural"] = vec(r.theta_hat.natural_scale());
            m["loglik"] = num(r.loglik);
            m["converged"] = r.converged;
            m["gradient_norm"] = num(r.gradient_norm);
            if (r.criteria) {
                m["b_gic"] = num(r.criteria->b_gic);
                m["aic"] = printed_aic(r.criteria->loglik, r.criteria->p);
                m["gic"] = printed_gic(r.criteria->loglik, r.criteria->b_gic);
                reports.push_back({labels[i], *r.criteria});
            } else {
                failures.push_back({{"model", labels[i]}, {"error", "Hessian evaluation failed at the estimate"}});
            }
            models.push_back(m);
        } catch (const std::exception& e) {
            failures.push_back({{"model", labels[i]}, {"error", e.what()}});
        }
    }

    const auto rows = compare_models(reports);
    json table = json::array();
    for (const auto& r : rows) {
        table.push_back({{"rank", r.rank},
                         {"model", r.label},
                         {"loglik", num(r.loglik)},
                         {"p", r.p},
                         {"b_aic", r.p},
                         {"b_gic", num(r.b_gic)},
                         {"aic", printed_aic(r.loglik, r.p)},
                         {"gic", printed_gic(r.loglik, r.b_gic)}});
    }

    json j = header("compare");
    j["data"] = {{"path", cfg.data_path}, {"n_obs", y.size()}, {"log_transform", cfg.log_data}};
    j["kappa"] = num(cfg.kappa);
    j["table"] = table;
    j["models"] = models;
    j["failures"] = failures;
    emit(cfg, j.dump(2) + "\n", out);
    (cfg.out.empty() ? err : out) << comparison_table(rows, builders, labels);

    const bool any_gic = std::any_of(rows.begin(), rows.end(), [](const ComparisonRow& r) { return r.gic.has_value(); });
    return any_gic ? kOk : kNumericalFailure;
}

}  // namespace

ModelBuilder make_builder(const RunConfig& cfg) {
    try {
        if (cfg.model == "trend") return ModelBuilder(TrendConfig{cfg.trend_order.value_or(1)});
        const SeasonalConfig seasonal{cfg.trend_order.value_or(2), cfg.period};
        if (cfg.model == "seasonal") return ModelBuilder(seasonal);
        if (cfg.model == "seasonal-ar") return ModelBuilder(SeasonalArConfig{seasonal, cfg.ar_order});
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("unknown model '" + cfg.model + "' (expected trend, seasonal or seasonal-ar)");
}

ModelBuilder parse_model_id(const std::string& id, int period) {
    std::vector<std::string> parts;
    std::stringstream ss(id);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    auto order = [&](std::size_t i, int fallback) {
        if (parts.size() <= i) return fallback;
        try {
            std::size_t used = 0;
            const int v = std::stoi(parts[i], &used);
            if (used != parts[i].size()) throw std::invalid_argument(parts[i]);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("bad order in model id '" + id + "'");
        }
    };
    if (parts.empty() || parts.size() > 3) throw ConfigError("bad model id '" + id + "'");
    RunConfig cfg;
    cfg.model = parts[0];
    cfg.period = period;
    if (cfg.model == "trend") {
        if (parts.size() > 2) throw ConfigError("bad model id '" + id + "'");
        cfg.trend_order = order(1, 1);
    } else if (cfg.model == "seasonal") {
        if (parts.size() > 2) throw ConfigError("bad model id '" + id + "'");
        cfg.trend_order = order(1, 2);
    } else if (cfg.model == "seasonal-ar") {
        cfg.ar_order = order(1, 1);
        cfg.trend_order = order(2, 2);
    }
    return make_builder(cfg);
}

std::vector<Vector> default_starts(const ModelBuilder& builder, const TimeSeries& y) {
    double scale = 0.0;
    if (y.size() > 2) {
        double mean = 0.0;
        for (std::size_t n = 1; n < y.size(); ++n) mean += y[n] - y[n - 1];
        mean /= static_cast<double>(y.size() - 1);
        for (std::size_t n = 1; n < y.size(); ++n) scale += std::pow(y[n] - y[n - 1] - mean, 2);
        scale /= static_cast<double>(y.size() - 2);
    }
    if (!(scale > 0.0) || !std::isfinite(scale)) scale = 1.0;

    // (system-noise multiplier, observation-noise multiplier, first AR coefficient)
    constexpr std::array<std::array<double, 3>, 4> kGrid{{
        {0.5, 0.5, 0.5},
        {0.05, 0.5, 0.9},
        {0.5, 0.05, 0.5},
        {0.005, 0.5, 0.9},
    }};
    const auto& names = builder.names();
    const auto& log_scale = builder.log_scale();
    std::vector<Vector> starts;
    for (const auto& [sys, obs, ar] : kGrid) {
        Vector theta(static_cast<Eigen::Index>(names.size()));
        for (std::size_t j = 0; j < names.size(); ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            if (!log_scale[j]) {
                theta[jj] = names[j] == "a1" ? ar : 0.0;
            } else {
                theta[jj] = std::log((names[j] == "log_sigma2" ? obs : sys) * scale);
            }
        }
        starts.push_back(theta);
    }
    return starts;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        switch (cfg.command) {
            case Command::fit:
                return do_fit(cfg, out, err);
            case Command::gradcheck:
                return do_gradcheck(cfg, out, err);
            case Command::simulate:
                return do_simulate(cfg, out, err);
            case Command::compare:
                return do_compare(cfg, out, err);
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    }
    return kConfigError;
}

int main_entry(int argc, char** argv) {
    CLI::App app{"Maximum likelihood fitting and GIC/TIC evaluation for trend and seasonal state-space models"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::string init_scale = "natural";
    int trend_order = 0;

    auto model_options = [&](CLI::App* sub) {
        sub->add_option("--model", cfg.model, "Model family")
            ->check(CLI::IsMember({"trend", "seasonal", "seasonal-ar"}));
        sub->add_option("--trend-order", trend_order, "Trend order m1 (default 1 for trend, 2 otherwise)")
            ->check(CLI::Range(1, 2));
        sub->add_option("--period", cfg.period, "Seasonal period s")->check(CLI::PositiveNumber);
        sub->add_option("--ar-order", cfg.ar_order, "AR order m3 for seasonal-ar")->check(CLI::PositiveNumber);
        sub->add_option("--init", cfg.init, "Initial parameters, comma separated")->delimiter(',');
        sub->add_option("--init-scale", init_scale, "Scale of --init values")
            ->check(CLI::IsMember({"natural", "working"}));
    };
    auto data_options = [&](CLI::App* sub) {
        sub->add_option("--data", cfg.data_path, "One-column CSV series")->required();
        sub->add_flag("--log-data", cfg.log_data, "Apply a natural-log transform to the data");
        sub->add_option("--kappa", cfg.kappa, "Initial state covariance scale");
    };
    auto optimizer_options = [&](CLI::App* sub) {
        sub->add_option("--max-iters", cfg.max_iters, "Quasi-Newton iteration limit");
        sub->add_option("--grad-tol", cfg.grad_tol, "Convergence threshold on |gradient|_inf");
    };

    auto* fit_cmd = app.add_subcommand("fit", "Maximum likelihood fit with GIC/AIC report");
    model_options(fit_cmd);
    data_options(fit_cmd);
    optimizer_options(fit_cmd);
    fit_cmd->add_option("--out", cfg.out, "JSON report path (stdout if omitted)");

    auto* grad_cmd = app.add_subcommand("gradcheck", "Compare analytic derivatives with finite differences");
    model_options(grad_cmd);
    data_options(grad_cmd);
    grad_cmd->add_option("--tol", cfg.tol, "Maximum relative gradient error");
    grad_cmd->add_option("--hess-tol", cfg.hess_tol, "Maximum relative Hessian error");
    grad_cmd->add_option("--out", cfg.out, "JSON report path (stdout if omitted)");

    auto* sim_cmd = app.add_subcommand("simulate", "Simulate a series from a model");
    model_options(sim_cmd);
    sim_cmd->add_option("--length,-n", cfg.length, "Number of observations")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--seed", cfg.seed, "Random seed");
    sim_cmd->add_option("--init-sd", cfg.init_sd, "Standard deviation of the initial state");
    sim_cmd->add_option("--out", cfg.out, "CSV output path (stdout if omitted)");

    auto* cmp_cmd = app.add_subcommand("compare", "Fit several models and rank them by GIC");
    data_options(cmp_cmd);
    optimizer_options(cmp_cmd);
    cmp_cmd->add_option("--models", cfg.models, "Model ids, e.g. trend:1,seasonal,seasonal-ar:2")->delimiter(',');
    cmp_cmd->add_option("--period", cfg.period, "Seasonal period s")->check(CLI::PositiveNumber);
    cmp_cmd->add_option("--out", cfg.out, "JSON report path (table printed to stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    if (trend_order != 0) cfg.trend_order = trend_order;
    cfg.init_working = init_scale == "working";
    if (fit_cmd->parsed()) cfg.command = Command::fit;
    if (grad_cmd->parsed()) cfg.command = Command::gradcheck;
    if (sim_cmd->parsed()) cfg.command = Command::simulate;
    if (cmp_cmd->parsed()) cfg.command = Command::compare;
    return run(cfg, std::cout, std::cerr);
}

}  // namespace ssmgic::cli
