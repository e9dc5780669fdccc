#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <unistd.h>

#include <CLI11.hpp>

#include "qmm/integration.hpp"
#include "qmm/json_io.hpp"
#include "qmm/magic.hpp"
#include "qmm/model_file.hpp"
#include "qmm/models.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

bool stderr_is_tty() { return isatty(fileno(stderr)) == 1; }

void emit(const qmm::JsonValue& report, const std::string& out_path) {
    std::string text = report.dump();
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write output file '" + out_path + "'");
    out << text;
}

qmm::JsonValue model_echo_json(const qmm::ParsedModelFile& parsed) {
    qmm::JsonValue echo = qmm::JsonValue::object();
    for (const auto& [key, value] : parsed.echo) echo[key] = value;
    echo["name"] = parsed.model.name;
    echo["coordinate_dim"] = parsed.model.coord_dim;
    echo["block_dim"] = parsed.model.block_dim;
    echo["kind"] = parsed.model.kind == qmm::ModelKind::Magic ? "magic" : "biunitary";
    return echo;
}

void add_backend_fields(qmm::JsonValue& report, const qmm::ModelSpec& model) {
    if (model.is_exact()) {
        report["backend"] = "exact";
        report["M"] = model.point_count();
        report["seed"] = qmm::JsonValue();
    } else {
        const auto& mc = std::get<qmm::MonteCarloBackend>(model.backend);
        report["backend"] = "monte_carlo";
        report["M"] = mc.samples;
        report["seed"] = mc.seed;
    }
}

qmm::JsonValue complex_pair(qmm::Complex value) {
    qmm::JsonValue pair = qmm::JsonValue::array();
    pair.push_back(value.real());
    pair.push_back(value.imag());
    return pair;
}

/// Flags shared by every model-driven subcommand.
struct ModelFlags {
    std::string model_path;
    long long samples = 0;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out;
};

void add_model_flags(CLI::App* cmd, ModelFlags& flags) {
    cmd->add_option("--model", flags.model_path, "model description file (key = value)")
        ->required();
    cmd->add_option("--samples", flags.samples,
                    "override the sample count of a Monte Carlo model");
    cmd->add_option("--seed", flags.seed, "override the seed of a Monte Carlo model");
    cmd->add_option("--threads", flags.threads, "worker cap, 0 = hardware (results unchanged)");
    cmd->add_option("--out", flags.out, "write the JSON report here instead of stdout");
}

qmm::ParsedModelFile load_model(const ModelFlags& flags, bool override_samples,
                                bool override_seed) {
    qmm::ParsedModelFile parsed = qmm::load_model_file(flags.model_path);
    if (!override_samples && !override_seed) return parsed;
    if (parsed.model.is_exact())
        throw std::invalid_argument("--samples/--seed apply only to Monte Carlo models");
    std::string text;
    bool samples_done = false, seed_done = false;
    for (const auto& [key, value] : parsed.echo) {
        std::string replaced = value;
        if (key == "samples" && override_samples) {
            replaced = std::to_string(flags.samples);
            samples_done = true;
        }
        if (key == "seed" && override_seed) {
            replaced = std::to_string(flags.seed);
            seed_done = true;
        }
        text += key + " = " + replaced + "\n";
    }
    if (override_samples && !samples_done)
        text += "samples = " + std::to_string(flags.samples) + "\n";
    if (override_seed && !seed_done) text += "seed = " + std::to_string(flags.seed) + "\n";
    return qmm::parse_model_text(text);
}

void put_common_config(qmm::JsonValue& config, const ModelFlags& flags) {
    config["model"] = flags.model_path;
    config["threads"] = flags.threads;
    config["out"] = flags.out;
}

int cmd_stationarity(const qmm::ParsedModelFile& parsed, const ModelFlags& flags, int p_max,
                     double tol) {
    qmm::TransferOptions options;
    options.threads = flags.threads;
    qmm::StationarityReport result =
        qmm::stationarity_defect(parsed.model, p_max, options, tol);

    qmm::JsonValue report = qmm::JsonValue::object();
    report["version"] = kVersion;
    report["command"] = "stationarity";
    qmm::JsonValue config = qmm::JsonValue::object();
    put_common_config(config, flags);
    config["p_max"] = p_max;
    config["tol"] = tol;
    report["config"] = std::move(config);
    report["model_echo"] = model_echo_json(parsed);
    add_backend_fields(report, parsed.model);
    report["p"] = p_max;

    double worst_defect = 0.0;
    double worst_se = 0.0;
    qmm::JsonValue words = qmm::JsonValue::array();
    for (const auto& word : result.words) {
        qmm::JsonValue entry = qmm::JsonValue::object();
        entry["word"] = word.word.str();
        entry["p"] = word.word.length();
        entry["defect"] = word.defect;
        entry["se"] = word.se_max;
        entry["threshold"] = word.threshold_max;
        entry["pass"] = word.pass;
        words.push_back(std::move(entry));
        worst_defect = std::max(worst_defect, word.defect);
        worst_se = std::max(worst_se, word.se_max);
    }
    report["words"] = std::move(words);
    report["defect"] = worst_defect;
    report["se"] = worst_se;
    report["verdict"] = result.verdict;
    report["pass"] = result.pass;
    emit(report, flags.out);

    if (stderr_is_tty()) {
        std::cerr << parsed.model.name << ": defect " << qmm::json_number(worst_defect)
                  << " at p <= " << p_max << " -> " << (result.pass ? "pass" : "FAIL")
                  << "\n";
    }
    return result.pass ? 0 : 1;
}

int cmd_moments(const qmm::ParsedModelFile& parsed, const ModelFlags& flags, int p_max,
                bool streaming) {
    qmm::TransferOptions options;
    options.threads = flags.threads;
    auto moments = qmm::character_moments(
        parsed.model, p_max,
        streaming ? qmm::MomentMode::Streaming : qmm::MomentMode::Materialized, options);

    qmm::JsonValue report = qmm::JsonValue::object();
    report["version"] = kVersion;
    report["command"] = "moments";
    qmm::JsonValue config = qmm::JsonValue::object();
    put_common_config(config, flags);
    config["p_max"] = p_max;
    config["mode"] = streaming ? "streaming" : "materialized";
    report["config"] = std::move(config);
    report["model_echo"] = model_echo_json(parsed);
    add_backend_fields(report, parsed.model);
    report["p"] = p_max;
    qmm::JsonValue list = qmm::JsonValue::array();
    for (const auto& m : moments) {
        qmm::JsonValue entry = qmm::JsonValue::object();
        entry["p"] = m.p;
        entry["value"] = m.value;
        entry["se"] = m.se;
        entry["imag_residual"] = m.imag_residual;
        list.push_back(std::move(entry));
    }
    report["moments"] = std::move(list);
    emit(report, flags.out);

    if (stderr_is_tty()) {
        std::cerr << parsed.model.name << ": moments";
        for (const auto& m : moments) std::cerr << ' ' << qmm::json_number(m.value);
        std::cerr << "\n";
    }
    return 0;
}

int cmd_latin(int n, const std::string& normalization, bool list, const std::string& out) {
    qmm::LatinMode mode;
    if (normalization == "all")
        mode = qmm::LatinMode::All;
    else if (normalization == "half")
        mode = qmm::LatinMode::Half;
    else if (normalization == "full")
        mode = qmm::LatinMode::Full;
    else
        throw std::invalid_argument("--normalization must be all, half, or full");
    auto squares = qmm::latin_enumerate(n, mode);

    qmm::JsonValue report = qmm::JsonValue::object();
    report["version"] = kVersion;
    report["command"] = "latin";
    qmm::JsonValue config = qmm::JsonValue::object();
    config["n"] = n;
    config["normalization"] = normalization;
    config["list"] = list;
    config["out"] = out;
    report["config"] = std::move(config);
    report["count"] = static_cast<long long>(squares.size());
    if (list) {
        qmm::JsonValue items = qmm::JsonValue::array();
        for (const auto& square : squares) items.push_back(qmm::latin_to_json(square));
        report["squares"] = std::move(items);
    }
    emit(report, out);

    if (stderr_is_tty())
        std::cerr << "latin n=" << n << " " << normalization << ": " << squares.size()
                  << " squares\n";
    return 0;
}

int cmd_cesaro(const qmm::ParsedModelFile& parsed, const ModelFlags& flags, int p, int k,
               long long row, long long col) {
    qmm::TransferOptions options;
    options.threads = flags.threads;
    qmm::TransferMatrix t = qmm::transfer_matrix(parsed.model, qmm::Word::plain(p), options);
    qmm::CesaroResult result = qmm::cesaro(t.values, k, row, col);

    qmm::JsonValue report = qmm::JsonValue::object();
    report["version"] = kVersion;
    report["command"] = "cesaro";
    qmm::JsonValue config = qmm::JsonValue::object();
    put_common_config(config, flags);
    config["p"] = p;
    config["k"] = k;
    config["row"] = row;
    config["col"] = col;
    report["config"] = std::move(config);
    report["model_echo"] = model_echo_json(parsed);
    report["word"] = t.word.str();
    report["p"] = p;
    add_backend_fields(report, parsed.model);
    report["k"] = k;
    report["row"] = row;
    report["col"] = col;
    report["value"] = complex_pair(result.history.back());
    qmm::JsonValue history = qmm::JsonValue::array();
    for (qmm::Complex v : result.history) history.push_back(complex_pair(v));
    report["history"] = std::move(history);
    emit(report, flags.out);

    if (stderr_is_tty())
        std::cerr << parsed.model.name << ": cesaro k=" << k << " entry ("
                  << row << "," << col << ") -> " << qmm::json_number(std::abs(result.history.back()))
                  << "\n";
    return 0;
}

int cmd_validate_input(const std::string& input, double tol, const std::string& out) {
    std::ifstream in(input);
    if (!in) throw std::invalid_argument("cannot open input file '" + input + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    qmm::BlockMatrix evaluation = qmm::block_matrix_from_json(text);
    qmm::MagicValidationReport result = qmm::validate_magic(evaluation, tol);

    qmm::JsonValue report = qmm::JsonValue::object();
    report["version"] = kVersion;
    report["command"] = "validate";
    qmm::JsonValue config = qmm::JsonValue::object();
    config["input"] = input;
    config["tol"] = tol;
    config["out"] = out;
    report["config"] = std::move(config);
    report["validator"] = "magic";
    report["projection_residual"] = result.projection_residual;
    report["row_residual"] = result.row_residual;
    report["column_residual"] = result.column_residual;
    report["tolerance"] = result.tolerance;
    report["flat"] = result.pass && qmm::is_flat(evaluation, tol);
    report["pass"] = result.pass;
    emit(report, out);

    if (stderr_is_tty())
        std::cerr << "validate " << input << ": " << (result.pass ? "pass" : "FAIL") << "\n";
    return result.pass ? 0 : 1;
}

int cmd_validate_model(const qmm::ParsedModelFile& parsed, const ModelFlags& flags,
                       long long point, double tol) {
    const qmm::ModelSpec& model = parsed.model;
    if (point < 0 || (model.is_exact() && point >= model.point_count()))
        throw std::invalid_argument("--point out of range for this model");

    qmm::JsonValue report = qmm::JsonValue::object();
    report["version"] = kVersion;
    report["command"] = "validate";
    qmm::JsonValue config = qmm::JsonValue::object();
    put_common_config(config, flags);
    config["point"] = point;
    config["tol"] = tol;
    report["config"] = std::move(config);
    report["model_echo"] = model_echo_json(parsed);
    report["point"] = point;

    bool pass = false;
    if (model.kind == qmm::ModelKind::Magic) {
        qmm::BlockMatrix evaluation = model.evaluate(point);
        qmm::MagicValidationReport result = qmm::validate_magic(evaluation, tol);
        report["validator"] = "magic";
        report["projection_residual"] = result.projection_residual;
        report["row_residual"] = result.row_residual;
        report["column_residual"] = result.column_residual;
        report["tolerance"] = result.tolerance;
        report["flat"] = result.pass && qmm::is_flat(evaluation, tol);
        pass = result.pass;
    } else {
        double residual = qmm::model_validation_residual(model, point);
        report["validator"] = "biunitary";
        report["residual"] = residual;
        report["tolerance"] = tol;
        pass = residual <= tol;
    }
    report["pass"] = pass;
    emit(report, flags.out);

    if (stderr_is_tty())
        std::cerr << model.name << ": validate point " << point << " -> "
                  << (pass ? "pass" : "FAIL") << "\n";
    return pass ? 0 : 1;
}

int cmd_evaluate(const qmm::ParsedModelFile& parsed, const ModelFlags& flags, long long point) {
    const qmm::ModelSpec& model = parsed.model;
    if (point < 0 || (model.is_exact() && point >= model.point_count()))
        throw std::invalid_argument("--point out of range for this model");
    qmm::BlockMatrix evaluation = model.evaluate(point);

    qmm::JsonValue report = qmm::JsonValue::object();
    report["version"] = kVersion;
    report["command"] = "evaluate";
    qmm::JsonValue config = qmm::JsonValue::object();
    put_common_config(config, flags);
    config["point"] = point;
    report["config"] = std::move(config);
    report["model_echo"] = model_echo_json(parsed);
    report["point"] = point;
    report["evaluation"] = qmm::block_matrix_to_json(
        evaluation,
        model.kind == qmm::ModelKind::Magic ? "magic_unitary" : "coordinate_array");
    emit(report, flags.out);

    if (stderr_is_tty())
        std::cerr << model.name << ": evaluated point " << point << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "matrix models of quantum permutation groups: transfer matrices, stationarity, "
        "character moments, Latin squares, Cesaro recovery"};
    app.require_subcommand(1);

    ModelFlags flags;
    int p_max = 2;
    double tol = -1.0;
    bool streaming = false;
    int latin_n = 0;
    std::string normalization = "half";
    bool list_squares = false;
    std::string latin_out;
    int cesaro_p = 1;
    int cesaro_k = 100;
    long long row = 0, col = 0;
    std::string input;
    long long point = 0;

    CLI::App* stationarity =
        app.add_subcommand("stationarity", "test transfer-matrix idempotence T^2 = T");
    add_model_flags(stationarity, flags);
    stationarity->add_option("--p-max", p_max, "largest word length tested")
        ->check(CLI::PositiveNumber);
    stationarity->add_option("--tol", tol, "exact-backend tolerance (default 1e-9)");

    CLI::App* moments =
        app.add_subcommand("moments", "integrated powers of the main character");
    add_model_flags(moments, flags);
    moments->add_option("--p-max", p_max, "largest moment order")->check(CLI::NonNegativeNumber);
    moments->add_flag("--streaming", streaming,
                      "stream over sample points instead of materializing transfer matrices");

    CLI::App* latin = app.add_subcommand("latin", "enumerate Latin squares");
    latin->add_option("--n", latin_n, "square size")->required()->check(CLI::PositiveNumber);
    latin->add_option("--normalization", normalization, "all, half, or full (default half)");
    latin->add_flag("--list", list_squares, "include the squares, not just the count");
    latin->add_option("--out", latin_out, "write the JSON report here instead of stdout");

    CLI::App* cesaro = app.add_subcommand(
        "cesaro", "running means (1/k) sum of T^r with per-step history of one entry");
    add_model_flags(cesaro, flags);
    cesaro->add_option("--p", cesaro_p, "word length of the transfer matrix")
        ->check(CLI::NonNegativeNumber);
    cesaro->add_option("--cesaro-k", cesaro_k, "number of powers averaged")
        ->check(CLI::PositiveNumber);
    cesaro->add_option("--row", row, "tracked row index");
    cesaro->add_option("--col", col, "tracked column index");

    CLI::App* validate =
        app.add_subcommand("validate", "validate a model evaluation or a serialized one");
    validate->add_option("--input", input, "JSON file holding a serialized evaluation");
    validate->add_option("--model", flags.model_path, "model description file");
    validate->add_option("--point", point, "sample point to validate (with --model)");
    validate->add_option("--tol", tol, "validation tolerance (default 1e-9)");
    validate->add_option("--samples", flags.samples, "override Monte Carlo sample count");
    validate->add_option("--seed", flags.seed, "override Monte Carlo seed");
    validate->add_option("--threads", flags.threads, "worker cap (results unchanged)");
    validate->add_option("--out", flags.out, "write the JSON report here instead of stdout");

    CLI::App* evaluate =
        app.add_subcommand("evaluate", "emit one model evaluation as JSON");
    add_model_flags(evaluate, flags);
    evaluate->add_option("--point", point, "sample point to evaluate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(latin))
            return cmd_latin(latin_n, normalization, list_squares, latin_out);

        if (app.got_subcommand(validate) && !input.empty()) {
            if (!flags.model_path.empty())
                throw std::invalid_argument("validate takes --input or --model, not both");
            return cmd_validate_input(input, tol > 0 ? tol : 1e-9, flags.out);
        }

        CLI::App* active = app.get_subcommands().front();
        if (flags.model_path.empty())
            throw std::invalid_argument("validate needs --input or --model");
        qmm::ParsedModelFile parsed =
            load_model(flags, active->count("--samples") > 0, active->count("--seed") > 0);
        double effective_tol =
            tol > 0 ? tol : (parsed.has_tolerance() ? parsed.tolerance : 1e-9);

        if (app.got_subcommand(stationarity))
            return cmd_stationarity(parsed, flags, p_max, effective_tol);
        if (app.got_subcommand(moments))
            return cmd_moments(parsed, flags, p_max, streaming);
        if (app.got_subcommand(cesaro))
            return cmd_cesaro(parsed, flags, cesaro_p, cesaro_k, row, col);
        if (app.got_subcommand(validate))
            return cmd_validate_model(parsed, flags, point, effective_tol);
        if (app.got_subcommand(evaluate))
            return cmd_evaluate(parsed, flags, point);
        throw std::invalid_argument("no subcommand selected");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
