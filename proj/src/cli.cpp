#include "mickit/cli.hpp"

#include "mickit/bench.hpp"
#include "mickit/csv.hpp"
#include "mickit/density.hpp"
#include "mickit/diagnostics.hpp"
#include "mickit/errors.hpp"
#include "mickit/estimators.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#ifndef MICKIT_VERSION
#define MICKIT_VERSION "0.0.0"
#endif

namespace mickit {
namespace {

using Json = nlohmann::ordered_json;

struct RunConfig {
    std::string command;
    std::string input;
    std::string config;
    std::string statistic = "mic_e";
    double alpha = 0.6;
    double epsilon = 1.0 / 64.0;
    std::size_t s_max = 32;
    std::uint64_t seed = 0;
    std::string out;
    std::string format;
};

std::uint64_t fnv1a(std::string_view text, std::uint64_t h = 0xcbf29ce484222325ULL)
{
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open input file '" + path + "'");
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Hash of the effective configuration and the bytes of every input.
std::string config_hash(const Json& canonical, const std::string& input_bytes)
{
    return hex(fnv1a(input_bytes, fnv1a(canonical.dump())));
}

class Emitter {
public:
    Emitter(const RunConfig& cfg, std::ostream& out) : cfg_{cfg}, out_{out} {}

    void write(const std::string& text)
    {
        if (cfg_.out.empty()) {
            out_ << text;
            out_.flush();
            return;
        }
        std::ofstream file(cfg_.out, std::ios::binary | std::ios::trunc);
        if (!file) {
            throw InputError("cannot open output file '" + cfg_.out + "'");
        }
        file << text;
        if (!file) {
            throw InputError("failed writing output file '" + cfg_.out + "'");
        }
    }

private:
    const RunConfig& cfg_;
    std::ostream& out_;
};

std::string csv_trailer_header()
{
    return "statistic,n,trials,alpha,seed,tool_version,config_hash";
}

std::string csv_trailer(const std::string& statistic, std::size_t n, const std::string& trials, double alpha,
                        std::uint64_t seed, const std::string& hash)
{
    return statistic + "," + std::to_string(n) + "," + trials + "," + num(alpha) + "," + std::to_string(seed) + "," +
           std::string(tool_version()) + "," + hash;
}

void require_format(const RunConfig& cfg)
{
    if (cfg.format != "json" && cfg.format != "csv") {
        throw InputError("format must be json or csv");
    }
}

int cmd_score(const RunConfig& cfg, std::ostream& out, std::ostream& err, bool precision_given)
{
    require_format(cfg);
    if (precision_given && cfg.statistic != "mic_d") {
        throw InputError("--epsilon and --smax apply only to --stat mic_d");
    }
    const std::string bytes = read_file(cfg.input);
    std::istringstream in(bytes);
    auto sample = read_csv_sample(in);
    const std::size_t n = sample.size();
    if (n < 4) {
        throw PreconditionError("score needs at least 4 points, got " + std::to_string(n));
    }

    Json canonical{{"command", "score"}, {"statistic", cfg.statistic}, {"seed", cfg.seed}};
    Json record{{"command", "score"}, {"statistic", cfg.statistic}};
    std::string k_text;
    std::string l_text;
    std::string budget_text;
    double value = 0.0;
    if (cfg.statistic == "mic_e" || cfg.statistic == "mic_approx") {
        BPolicy policy(cfg.alpha, 4);
        auto r = cfg.statistic == "mic_e" ? mic_e(sample, policy) : mic_approx(sample, policy);
        canonical["alpha"] = cfg.alpha;
        value = r.value;
        record["value"] = r.value;
        record["argmax_k"] = r.argmax_k;
        record["argmax_l"] = r.argmax_l;
        record["n"] = n;
        record["B"] = r.budget;
        record["alpha"] = cfg.alpha;
        k_text = std::to_string(r.argmax_k);
        l_text = std::to_string(r.argmax_l);
        budget_text = std::to_string(r.budget);
    } else if (cfg.statistic == "mic_d") {
        PrecisionParams params;
        params.epsilon = cfg.epsilon;
        params.s_max = cfg.s_max;
        canonical["epsilon"] = cfg.epsilon;
        canonical["smax"] = cfg.s_max;
        auto r = mic_d(sample, params);
        value = r.value;
        record["value"] = r.value;
        // A boundary entry fixes the part count on one axis only.
        record["argmax_k"] = r.argmax_axis == Axis::rows ? Json(r.argmax_k) : Json(nullptr);
        record["argmax_l"] = r.argmax_axis == Axis::cols ? Json(r.argmax_k) : Json(nullptr);
        record["n"] = n;
        record["B"] = nullptr;
        record["alpha"] = nullptr;
        record["error_bound"] = r.error_bound;
        record["epsilon"] = cfg.epsilon;
        record["smax"] = cfg.s_max;
        if (r.argmax_axis == Axis::rows) {
            k_text = std::to_string(r.argmax_k);
        } else {
            l_text = std::to_string(r.argmax_k);
        }
    } else {
        throw InputError("unrecognized statistic '" + cfg.statistic + "'; expected mic_e, mic_approx or mic_d");
    }
    const std::string hash = config_hash(canonical, bytes);
    record["seed"] = cfg.seed;
    record["tool_version"] = tool_version();
    record["config_hash"] = hash;

    Emitter emit(cfg, out);
    if (cfg.format == "json") {
        emit.write(record.dump() + "\n");
    } else {
        std::string text = "value,argmax_k,argmax_l,B," + csv_trailer_header() + "\n";
        text += num(value) + "," + k_text + "," + l_text + "," + budget_text + "," +
                csv_trailer(cfg.statistic, n, "", cfg.statistic == "mic_d" ? 0.0 : cfg.alpha, cfg.seed, hash) + "\n";
        emit.write(text);
    }
    err << cfg.statistic << " = " << num(value) << " (n=" << n << ")\n";
    return exit_ok;
}

int cmd_matrix(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    require_format(cfg);
    const std::string bytes = read_file(cfg.input);
    std::istringstream in(bytes);
    auto sample = read_csv_sample(in);
    const std::size_t n = sample.size();
    if (n < 4) {
        throw PreconditionError("matrix needs at least 4 points, got " + std::to_string(n));
    }
    BPolicy policy(cfg.alpha, 4);
    CharMatrix m;
    if (cfg.statistic == "mic_e") {
        m = char_matrix_e(sample, policy);
    } else if (cfg.statistic == "mic_approx") {
        m = char_matrix_approx(sample, policy);
    } else {
        throw InputError("matrix supports --stat mic_e or mic_approx");
    }
    Json canonical{{"command", "matrix"}, {"statistic", cfg.statistic}, {"alpha", cfg.alpha}, {"seed", cfg.seed}};
    const std::string hash = config_hash(canonical, bytes);

    Emitter emit(cfg, out);
    if (cfg.format == "csv") {
        std::string text = "k,l,value," + csv_trailer_header() + "\n";
        const std::string trailer = csv_trailer(cfg.statistic, n, "", cfg.alpha, cfg.seed, hash);
        for (const auto& [key, value] : m.entries) {
            text += std::to_string(key.first) + "," + std::to_string(key.second) + "," + num(value) + "," + trailer +
                    "\n";
        }
        emit.write(text);
    } else {
        Json entries = Json::array();
        for (const auto& [key, value] : m.entries) {
            entries.push_back({{"k", key.first}, {"l", key.second}, {"value", value}});
        }
        Json record{{"command", "matrix"}, {"statistic", cfg.statistic}, {"n", n},
                    {"B", m.budget},       {"alpha", cfg.alpha},        {"entries", entries},
                    {"seed", cfg.seed},    {"tool_version", tool_version()}, {"config_hash", hash}};
        emit.write(record.dump() + "\n");
    }
    err << "characteristic matrix: " << m.entries.size() << " entries (n=" << n << ", B=" << m.budget << ")\n";
    return exit_ok;
}

int cmd_density(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    require_format(cfg);
    const std::string bytes = read_file(cfg.input);
    auto spec = density_spec_from_json(bytes);
    PrecisionParams params;
    params.epsilon = cfg.epsilon;
    params.s_max = cfg.s_max;
    auto grid = discretize(spec, params);
    auto r = mic_star(grid, params);

    Json canonical{{"command", "density"}, {"epsilon", cfg.epsilon}, {"smax", cfg.s_max}, {"seed", cfg.seed}};
    const std::string hash = config_hash(canonical, bytes);
    const char* axis = r.argmax_axis == Axis::rows ? "rows" : "cols";
    Emitter emit(cfg, out);
    if (cfg.format == "json") {
        Json record{{"command", "density"},
                    {"mic_star", r.value},
                    {"error_bound", r.error_bound},
                    {"discretization_term", r.discretization_term},
                    {"quadrature_term", r.quadrature_term},
                    {"integration_error", grid.integration_error},
                    {"s_reached", r.s_reached},
                    {"argmax_k", r.argmax_k},
                    {"argmax_axis", axis},
                    {"epsilon", cfg.epsilon},
                    {"smax", cfg.s_max},
                    {"seed", cfg.seed},
                    {"tool_version", tool_version()},
                    {"config_hash", hash}};
        emit.write(record.dump() + "\n");
    } else {
        std::string text = "mic_star,error_bound,s_reached,argmax_k,argmax_axis,epsilon,smax,seed,tool_version,"
                           "config_hash\n";
        text += num(r.value) + "," + num(r.error_bound) + "," + std::to_string(r.s_reached) + "," +
                std::to_string(r.argmax_k) + "," + axis + "," + num(cfg.epsilon) + "," + std::to_string(cfg.s_max) +
                "," + std::to_string(cfg.seed) + "," + std::string(tool_version()) + "," + hash + "\n";
        emit.write(text);
    }
    err << "MIC* = " << num(r.value) << " +/- " << num(r.error_bound) << " (s=" << r.s_reached << ")\n";
    return exit_ok;
}

struct BenchFile {
    std::string statistic = "mic_e";
    std::string report = "equitability";
    BenchConfig config;
    double alpha = 0.05;
    double phi_step = 0.05;
    double y_step = 0.05;
    double x0 = 0.0;
    double alpha_b = 0.6;
    double epsilon = 1.0 / 64.0;
    std::size_t s_max = 32;
};

BenchFile parse_bench(const std::string& text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("bench config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw InputError("bench config must be a JSON object");
    }
    BenchFile b;
    b.config.functions.clear();
    try {
        for (const auto& [key, v] : doc.items()) {
            if (key == "statistic") {
                b.statistic = v.get<std::string>();
            } else if (key == "report") {
                b.report = v.get<std::string>();
            } else if (key == "functions") {
                for (const auto& f : v) {
                    b.config.functions.push_back(FunctionSpec::parse(f.get<std::string>()));
                }
            } else if (key == "models") {
                b.config.models.clear();
                for (const auto& m : v) {
                    b.config.models.push_back(parse_model(m.get<std::string>()));
                }
            } else if (key == "n") {
                b.config.n = v.get<std::size_t>();
            } else if (key == "trials") {
                b.config.trials = v.get<std::size_t>();
            } else if (key == "seed") {
                b.config.seed = v.get<std::uint64_t>();
            } else if (key == "alpha") {
                b.alpha = v.get<double>();
            } else if (key == "phi_step") {
                b.phi_step = v.get<double>();
            } else if (key == "y_step") {
                b.y_step = v.get<double>();
            } else if (key == "x0") {
                b.x0 = v.get<double>();
            } else if (key == "alpha_B") {
                b.alpha_b = v.get<double>();
            } else if (key == "epsilon") {
                b.epsilon = v.get<double>();
            } else if (key == "s_max") {
                b.s_max = v.get<std::size_t>();
            } else {
                throw InputError("unknown key '" + key + "' in bench config");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bench config has a value of the wrong type: ") + e.what());
    }
    if (b.config.functions.empty()) {
        throw InputError("bench config needs a non-empty functions list");
    }
    if (b.report != "equitability" && b.report != "power") {
        throw InputError("bench report must be equitability or power");
    }
    return b;
}

int cmd_bench(RunConfig cfg, std::ostream& out, std::ostream& err, bool seed_given, bool stat_given)
{
    require_format(cfg);
    const std::string bytes = read_file(cfg.config);
    auto b = parse_bench(bytes);
    if (seed_given) {
        b.config.seed = cfg.seed;
    }
    if (stat_given) {
        b.statistic = cfg.statistic;
    }
    cfg.seed = b.config.seed;

    PrecisionParams params;
    params.epsilon = b.epsilon;
    params.s_max = b.s_max;
    Bench bench(make_statistic(b.statistic, BPolicy(b.alpha_b, 4), params), b.config);

    Json canonical{{"command", "bench"}, {"statistic", b.statistic}, {"report", b.report}, {"seed", b.config.seed}};
    const std::string hash = config_hash(canonical, bytes);
    const std::string trials = std::to_string(b.config.trials);
    const std::string trailer = csv_trailer(b.statistic, b.config.n, trials, b.alpha, b.config.seed, hash);
    Emitter emit(cfg, out);

    if (b.report == "equitability") {
        auto report = bench.equitability_report(b.alpha, b.phi_step, b.y_step);
        if (cfg.format == "csv") {
            std::string text = "y,lo,hi,width,empty," + csv_trailer_header() + "\n";
            for (const auto& row : report.rows) {
                const auto& iv = row.interval;
                text += num(row.y) + "," + (iv.empty ? "" : num(iv.lo)) + "," + (iv.empty ? "" : num(iv.hi)) + "," +
                        num(iv.width()) + "," + (iv.empty ? "1" : "0") + "," + trailer + "\n";
            }
            emit.write(text);
        } else {
            Json rows = Json::array();
            for (const auto& row : report.rows) {
                const auto& iv = row.interval;
                rows.push_back({{"y", row.y},
                                {"lo", iv.empty ? Json(nullptr) : Json(iv.lo)},
                                {"hi", iv.empty ? Json(nullptr) : Json(iv.hi)},
                                {"width", iv.width()},
                                {"empty", iv.empty}});
            }
            Json record{{"command", "bench"},
                        {"report", "equitability"},
                        {"statistic", b.statistic},
                        {"n", b.config.n},
                        {"trials", b.config.trials},
                        {"alpha", b.alpha},
                        {"h", report.h},
                        {"worst_case_width", report.worst_case_width},
                        {"average_case", report.average_case},
                        {"rows", rows},
                        {"seed", b.config.seed},
                        {"tool_version", tool_version()},
                        {"config_hash", hash}};
            emit.write(record.dump() + "\n");
        }
        err << "worst-case width " << num(report.worst_case_width) << ", average-case " << num(report.average_case)
            << "\n";
    } else {
        std::vector<double> xs;
        for (double x : phi_grid(b.phi_step)) {
            if (x >= b.x0 - 1e-12) {
                xs.push_back(x);
            }
        }
        auto curve = bench.power_function(b.x0, xs, b.alpha);
        auto set = uncertain_set(curve);
        if (cfg.format == "csv") {
            std::string text = "x,power,standard_error,critical_value,x0,uncertain," + csv_trailer_header() + "\n";
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const bool uncertain = curve.power[i] < 1.0 - b.alpha;
                text += num(xs[i]) + "," + num(curve.power[i]) + "," + num(curve.standard_error[i]) + "," +
                        num(curve.critical_value) + "," + num(b.x0) + "," + (uncertain ? "1" : "0") + "," + trailer +
                        "\n";
            }
            emit.write(text);
        } else {
            Json points = Json::array();
            for (std::size_t i = 0; i < xs.size(); ++i) {
                points.push_back({{"x", xs[i]}, {"power", curve.power[i]}, {"standard_error", curve.standard_error[i]}});
            }
            Json record{{"command", "bench"},
                        {"report", "power"},
                        {"statistic", b.statistic},
                        {"n", b.config.n},
                        {"trials", b.config.trials},
                        {"alpha", b.alpha},
                        {"x0", b.x0},
                        {"critical_value", curve.critical_value},
                        {"uncertain_set", {{"lo", set.lo}, {"hi", set.hi}, {"diameter", set.diameter}}},
                        {"points", points},
                        {"seed", b.config.seed},
                        {"tool_version", tool_version()},
                        {"config_hash", hash}};
            emit.write(record.dump() + "\n");
        }
        err << "critical value " << num(curve.critical_value) << ", uncertain-set diameter " << num(set.diameter)
            << "\n";
    }
    return exit_ok;
}

} // namespace

std::string_view tool_version() noexcept
{
    return MICKIT_VERSION;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Maximal information coefficient estimators, density MIC*, and equitability benchmarks", "mickit"};
    app.set_version_flag("--version", std::string(tool_version()));
    app.require_subcommand(1);
    RunConfig cfg;

    auto* score = app.add_subcommand("score", "Score a two-column CSV sample");
    score->add_option("--input", cfg.input, "CSV file with two numeric columns")->required();
    score->add_option("--stat", cfg.statistic, "mic_e, mic_approx or mic_d")->capture_default_str();
    score->add_option("--alpha", cfg.alpha, "Grid budget exponent, B(n) = max(4, floor(n^alpha))")
        ->capture_default_str();
    auto* score_eps = score->add_option("--epsilon", cfg.epsilon, "Master grid precision (mic_d only)");
    auto* score_smax = score->add_option("--smax", cfg.s_max, "Largest boundary part count (mic_d only)");
    score->add_option("--seed", cfg.seed, "Echoed in the output")->capture_default_str();
    score->add_option("--out", cfg.out, "Write the result here instead of standard output");
    score->add_option("--format", cfg.format, "json or csv");

    auto* matrix = app.add_subcommand("matrix", "Characteristic matrix entries of a CSV sample");
    matrix->add_option("--input", cfg.input, "CSV file with two numeric columns")->required();
    matrix->add_option("--stat", cfg.statistic, "mic_e or mic_approx")->capture_default_str();
    matrix->add_option("--alpha", cfg.alpha, "Grid budget exponent")->capture_default_str();
    matrix->add_option("--seed", cfg.seed, "Echoed in the output")->capture_default_str();
    matrix->add_option("--out", cfg.out, "Write the result here instead of standard output");
    matrix->add_option("--format", cfg.format, "csv or json");

    auto* density = app.add_subcommand("density", "MIC* of a density spec file");
    density->add_option("--input", cfg.input, "Density spec JSON file")->required();
    density->add_option("--epsilon", cfg.epsilon, "Master grid precision")->capture_default_str();
    density->add_option("--smax", cfg.s_max, "Largest boundary part count")->capture_default_str();
    density->add_option("--seed", cfg.seed, "Echoed in the output")->capture_default_str();
    density->add_option("--out", cfg.out, "Write the result here instead of standard output");
    density->add_option("--format", cfg.format, "json or csv");

    auto* bench = app.add_subcommand("bench", "Equitability or power report from a bench config");
    bench->add_option("--config", cfg.config, "Bench config JSON file")->required();
    auto* bench_stat = bench->add_option("--stat", cfg.statistic, "Overrides the config statistic");
    auto* bench_seed = bench->add_option("--seed", cfg.seed, "Overrides the config seed");
    bench->add_option("--out", cfg.out, "Write the result here instead of standard output");
    bench->add_option("--format", cfg.format, "csv or json");

    struct SinkGuard {
        WarningSink previous;
        ~SinkGuard() { set_warning_sink(std::move(previous)); }
    } guard{set_warning_sink([&err](std::string_view m) { err << "mickit: warning: " << m << "\n"; })};

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_input;
    }

    try {
        if (score->parsed()) {
            cfg.command = "score";
            if (cfg.format.empty()) {
                cfg.format = "json";
            }
            return cmd_score(cfg, out, err, score_eps->count() > 0 || score_smax->count() > 0);
        }
        if (matrix->parsed()) {
            cfg.command = "matrix";
            if (cfg.format.empty()) {
                cfg.format = "csv";
            }
            return cmd_matrix(cfg, out, err);
        }
        if (density->parsed()) {
            cfg.command = "density";
            if (cfg.format.empty()) {
                cfg.format = "json";
            }
            return cmd_density(cfg, out, err);
        }
        cfg.command = "bench";
        if (cfg.format.empty()) {
            cfg.format = "csv";
        }
        return cmd_bench(cfg, out, err, bench_seed->count() > 0, bench_stat->count() > 0);
    } catch (const InputError& e) {
        err << "mickit: input error: " << e.what() << "\n";
        return exit_input;
    } catch (const PreconditionError& e) {
        err << "mickit: precondition violated: " << e.what() << "\n";
        return exit_precondition;
    } catch (const NumericError& e) {
        err << "mickit: numeric failure: " << e.what() << "\n";
        return exit_numeric;
    } catch (const std::exception& e) {
        err << "mickit: internal failure: " << e.what() << "\n";
        return exit_numeric;
    }
}

} // namespace mickit
