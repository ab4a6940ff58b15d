// qhl.cpp — command-line front end: POVM validation, synthetic data
// generation, expression ingestion, training, evaluation, continuous export,
// and (N_t, N_c) scaling studies.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
// Every file-writing run leaves a resolved_config.json next to its outputs;
// timestamps live only in run.log so reruns are byte-identical elsewhere.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qhl/data.hpp"
#include "qhl/errors.hpp"
#include "qhl/format.hpp"
#include "qhl/harness.hpp"
#include "qhl/learn.hpp"
#include "qhl/model.hpp"
#include "qhl/povm.hpp"

namespace {

using namespace qhl;
namespace fs = std::filesystem;

// ------------------------------ run logging --------------------------------

std::string timestamp_utc() {
    const std::time_t now =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Timestamped append-only log; the only output file allowed to differ
// between identical reruns.
class RunLog {
  public:
    RunLog(const fs::path& dir, std::string command)
        : path_(dir / "run.log"),
          command_(std::move(command)),
          start_(std::chrono::steady_clock::now()) {
        append("start " + command_);
    }

    void append(const std::string& text) const {
        std::ofstream out(path_, std::ios::app);
        out << timestamp_utc() << " " << text << "\n";
    }

    void finish() const {
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        char buf[96];
        std::snprintf(buf, sizeof buf, "done %s (wall %.3f s)", command_.c_str(), wall);
        append(buf);
    }

  private:
    fs::path path_;
    std::string command_;
    std::chrono::steady_clock::time_point start_;
};

// ------------------------------ small helpers ------------------------------

std::uint64_t parse_seed_text(const std::string& text, const std::string& source) {
    try {
        std::size_t used = 0;
        const unsigned long long value = std::stoull(text, &used);
        if (used != text.size()) throw std::invalid_argument("trailing characters");
        return value;
    } catch (const std::exception&) {
        throw UsageError("cannot parse " + source + " as a seed: '" + text + "'");
    }
}

// Precedence: --seed flag, then QHL_SEED, then the config file value.
std::uint64_t resolve_seed(bool flag_given, std::uint64_t flag_value,
                           std::uint64_t config_value) {
    if (flag_given) return flag_value;
    if (const char* env = std::getenv("QHL_SEED")) return parse_seed_text(env, "QHL_SEED");
    return config_value;
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    try {
        nlohmann::json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": invalid JSON: " + e.what());
    }
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
    SynthConfig cfg;
    cfg.n = j.value("n", cfg.n);
    cfg.N_t = j.value("N_t", cfg.N_t);
    cfg.N_c = j.value("N_c", cfg.N_c);
    cfg.t_max = j.value("t_max", cfg.t_max);
    cfg.w_max = j.value("w_max", cfg.w_max);
    cfg.seed = j.value("seed", cfg.seed);
    return cfg;
}

nlohmann::json synth_config_to_json(const SynthConfig& cfg) {
    return {{"n", cfg.n},         {"N_t", cfg.N_t},     {"N_c", cfg.N_c},
            {"t_max", cfg.t_max}, {"w_max", cfg.w_max}, {"seed", cfg.seed}};
}

fs::path prepare_out_dir(const std::string& out) {
    const fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

void write_json_file(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out << j.dump(2) << "\n";
}

nlohmann::json metrics_to_json(const Metrics& m) {
    return {{"max_abs_w_err", m.max_abs_w_err},   {"recovery_rate", m.recovery_rate},
            {"rel_err_w", m.rel_err_w},           {"rel_err_theta", m.rel_err_theta},
            {"rel_err_phi", m.rel_err_phi},       {"state_fidelity", m.state_fidelity}};
}

void print_metrics_table(const Metrics& m) {
    const std::pair<const char*, double> rows[] = {
        {"max_abs_w_err", m.max_abs_w_err},   {"recovery_rate", m.recovery_rate},
        {"rel_err_w", m.rel_err_w},           {"rel_err_theta", m.rel_err_theta},
        {"rel_err_phi", m.rel_err_phi},       {"state_fidelity", m.state_fidelity}};
    for (const auto& [name, value] : rows)
        std::printf("%-16s %s\n", name, format_double(value).c_str());
}

// ----------------------------- POVM selection ------------------------------

struct PovmArgs {
    bool sic = false;
    std::vector<double> angles;  // empty or exactly four polar angles
    double rotation = 0.0;
    bool swap_inner_y = false;
};

SingleQubitPOVM build_povm_from_args(const PovmArgs& args) {
    if (args.sic && !args.angles.empty())
        throw UsageError("--sic and --angles are mutually exclusive");
    if (args.sic) return build_sic_povm();
    TransverseChoice xy;
    xy.rotation = args.rotation;
    xy.swap_inner_y = args.swap_inner_y;
    if (!args.angles.empty()) {
        std::array<double, 4> alphas;
        std::copy(args.angles.begin(), args.angles.end(), alphas.begin());
        return build_icpovm_from_angles(alphas, xy);
    }
    if (xy.rotation != 0.0 || xy.swap_inner_y)
        return build_icpovm_from_angles(
            {M_PI / 6.0, 2.0 * M_PI / 6.0, 4.0 * M_PI / 6.0, 5.0 * M_PI / 6.0}, xy);
    return build_default_icpovm();
}

// ------------------------------- subcommands -------------------------------

void cmd_validate_povm(const PovmArgs& args, bool json_out) {
    const SingleQubitPOVM povm = build_povm_from_args(args);
    const PovmValidation v = validate_povm(povm);
    if (json_out) {
        nlohmann::json j;
        j["completeness_residual"] = v.completeness_residual;
        j["min_eigenvalues"] = v.min_eigenvalues;
        j["bloch_norms"] = v.bloch_norms;
        j["bloch_sum_norm"] = v.bloch_sum_norm;
        j["smallest_singular_value"] = v.smallest_singular_value;
        j["scores"] = v.scores;
        std::cout << j.dump(2) << "\n";
        return;
    }
    auto print_array = [](const char* name, const std::array<double, 4>& a) {
        std::printf("%-26s", name);
        for (double x : a) std::printf(" %s", format_double(x).c_str());
        std::printf("\n");
    };
    std::printf("%-26s %s\n", "completeness_residual",
                format_double(v.completeness_residual).c_str());
    print_array("min_eigenvalues", v.min_eigenvalues);
    print_array("bloch_norms", v.bloch_norms);
    std::printf("%-26s %s\n", "bloch_sum_norm", format_double(v.bloch_sum_norm).c_str());
    std::printf("%-26s %s\n", "smallest_singular_value",
                format_double(v.smallest_singular_value).c_str());
    print_array("expression_scores", v.scores);
}

struct GenArgs {
    std::string config, out;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::optional<int> n, N_t, N_c;
    std::optional<double> t_max, w_max;
};

void cmd_gen(const GenArgs& args, bool verbose) {
    SynthConfig cfg =
        args.config.empty() ? SynthConfig{} : synth_config_from_json(load_json_file(args.config));
    if (args.n) cfg.n = *args.n;
    if (args.N_t) cfg.N_t = *args.N_t;
    if (args.N_c) cfg.N_c = *args.N_c;
    if (args.t_max) cfg.t_max = *args.t_max;
    if (args.w_max) cfg.w_max = *args.w_max;
    cfg.seed = resolve_seed(args.seed_given, args.seed, cfg.seed);

    const fs::path out = prepare_out_dir(args.out);
    const RunLog log(out, "gen");
    write_json_file(out / "resolved_config.json",
                    {{"command", "gen"}, {"synth", synth_config_to_json(cfg)}});

    const SingleQubitPOVM povm = build_default_icpovm();
    const auto [data, truth] = generate_synthetic(cfg, povm);
    write_dataset(data, out.string());
    write_model_params_json(truth, (out / "truth.json").string());
    log.finish();
    if (verbose)
        std::fprintf(stderr, "gen: wrote dataset (n=%d, N_t=%d, N_c=%d) and truth to %s\n",
                     cfg.n, cfg.N_t, cfg.N_c, out.string().c_str());
}

void cmd_discretize(const std::string& in, const std::string& out_dir, bool verbose) {
    const ExpressionTable table = read_expression_csv(in, /*require_pseudotime=*/false);
    const DiscretizationBins bins = make_bins(build_default_icpovm().scores);

    ExpressionTable labels = table;
    for (Eigen::Index r = 0; r < labels.values.rows(); ++r)
        for (Eigen::Index c = 0; c < labels.values.cols(); ++c)
            labels.values(r, c) = static_cast<double>(discretize(table.values(r, c), bins));

    const fs::path out = prepare_out_dir(out_dir);
    const RunLog log(out, "discretize");
    write_json_file(out / "resolved_config.json",
                    {{"command", "discretize"}, {"input", in}});
    write_expression_csv(labels, (out / "discretized.csv").string());
    log.finish();
    if (verbose)
        std::fprintf(stderr, "discretize: wrote %lld rows to %s\n",
                     static_cast<long long>(labels.values.rows()), out.string().c_str());
}

void cmd_ingest(const std::string& in, int N_t, const std::string& out_dir, bool verbose) {
    const SingleQubitPOVM povm = build_default_icpovm();
    const Dataset data = ingest_expression(in, povm, N_t);

    const fs::path out = prepare_out_dir(out_dir);
    const RunLog log(out, "ingest");
    write_json_file(out / "resolved_config.json",
                    {{"command", "ingest"}, {"input", in}, {"N_t", N_t}});
    write_dataset(data, out.string());
    log.finish();
    if (verbose)
        std::fprintf(stderr, "ingest: wrote dataset (n=%d, N_t=%d, N_c=%d) to %s\n", data.n,
                     data.num_times(), data.num_cells(), out.string().c_str());
}

struct TrainArgs {
    std::string data, config, truth, out;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::optional<int> epochs, batch;
    std::optional<double> base_lr, w_max, p_floor;
    std::string schedule;  // empty = keep config
    bool fix_initial_state = false;
};

void cmd_train(const TrainArgs& args, bool verbose) {
    TrainConfig cfg =
        args.config.empty() ? TrainConfig{} : train_config_from_json_file(args.config);
    if (args.epochs) cfg.epochs = *args.epochs;
    if (args.batch) cfg.batch = *args.batch;
    if (args.base_lr) cfg.base_lr = *args.base_lr;
    if (args.w_max) cfg.w_max = *args.w_max;
    if (args.p_floor) cfg.p_floor = *args.p_floor;
    if (!args.schedule.empty())
        cfg.schedule = args.schedule == "constant" ? TrainConfig::Schedule::constant
                                                   : TrainConfig::Schedule::adaptive;
    if (args.fix_initial_state) cfg.learn_initial_state = false;
    cfg.seed = resolve_seed(args.seed_given, args.seed, cfg.seed);

    const Dataset data = read_dataset(args.data);
    std::optional<ModelParams> truth;
    if (!args.truth.empty()) truth = read_model_params_json(args.truth);

    const fs::path out = prepare_out_dir(args.out);
    const RunLog log(out, "train");
    write_json_file(out / "resolved_config.json",
                    {{"command", "train"},
                     {"data", args.data},
                     {"truth", args.truth.empty() ? nlohmann::json() : nlohmann::json(args.truth)},
                     {"train", nlohmann::json::parse(train_config_to_json(cfg))}});

    const SingleQubitPOVM povm = build_default_icpovm();
    const TrainReport report =
        train_vqnet(data, cfg, povm, truth ? &*truth : nullptr);

    // Per-epoch history; metric columns only when a ground truth is given.
    {
        std::ofstream csv(out / "epochs.csv");
        if (!csv) throw DataError("cannot open for writing: " + (out / "epochs.csv").string());
        csv << "epoch,loss,lr";
        if (truth)
            csv << ",max_abs_w_err,recovery_rate,rel_err_w,rel_err_theta,rel_err_phi,"
                   "state_fidelity";
        csv << "\n";
        for (int e = 0; e < report.epochs; ++e) {
            csv << e << "," << format_double(report.loss[e]) << ","
                << format_double(report.lr[e]);
            if (truth)
                csv << "," << format_double(report.max_abs_w_err[e]) << ","
                    << format_double(report.recovery_rate[e]) << ","
                    << format_double(report.rel_err_w[e]) << ","
                    << format_double(report.rel_err_theta[e]) << ","
                    << format_double(report.rel_err_phi[e]) << ","
                    << format_double(report.state_fidelity[e]);
            csv << "\n";
        }
        if (!csv) throw DataError("failed while writing epochs.csv");
    }

    nlohmann::json summary;
    summary["format_version"] = 1;
    summary["epochs"] = report.epochs;
    summary["final_loss"] =
        report.loss.empty() ? nlohmann::json() : nlohmann::json(report.loss.back());
    summary["final_lr"] =
        report.lr.empty() ? nlohmann::json() : nlohmann::json(report.lr.back());
    if (truth) {
        const Metrics final = compute_metrics(report.final_params, *truth);
        summary["final_metrics"] = metrics_to_json(final);
    }
    write_json_file(out / "report.json", summary);

    write_model_params_json(report.final_params, (out / "params.json").string());
    write_weights_json(report.final_params.weights, (out / "weights.json").string());
    write_weights_csv(report.final_params.weights, (out / "weights.csv").string());

    char wall[64];
    std::snprintf(wall, sizeof wall, "training wall %.3f s", report.wall_seconds);
    log.append(wall);
    log.finish();
    if (verbose)
        std::fprintf(stderr, "train: %d epochs, final loss %s, outputs in %s\n", report.epochs,
                     report.loss.empty() ? "n/a" : format_double(report.loss.back()).c_str(),
                     out.string().c_str());
}

struct EvalArgs {
    std::string fit, params, truth, out;
};

void cmd_eval(const EvalArgs& args, bool json_out) {
    if (args.fit.empty() == args.params.empty())
        throw UsageError("eval needs exactly one of --fit or --params");
    const std::string params_path =
        args.params.empty() ? (fs::path(args.fit) / "params.json").string() : args.params;
    const ModelParams learned = read_model_params_json(params_path);
    const ModelParams truth = read_model_params_json(args.truth);
    const Metrics m = compute_metrics(learned, truth);

    if (json_out)
        std::cout << metrics_to_json(m).dump(2) << "\n";
    else
        print_metrics_table(m);

    if (!args.out.empty()) {
        const fs::path out = prepare_out_dir(args.out);
        const RunLog log(out, "eval");
        write_json_file(out / "resolved_config.json",
                        {{"command", "eval"}, {"params", params_path}, {"truth", args.truth}});
        write_json_file(out / "metrics.json", metrics_to_json(m));
        log.finish();
    }
}

void cmd_export_continuous(const std::string& data_dir, const std::string& out_dir,
                           bool seed_given, std::uint64_t seed_flag, bool verbose) {
    const Dataset data = read_dataset(data_dir);
    const std::uint64_t seed = resolve_seed(seed_given, seed_flag, 0);

    const fs::path out = prepare_out_dir(out_dir);
    const RunLog log(out, "export-continuous");
    write_json_file(out / "resolved_config.json",
                    {{"command", "export-continuous"}, {"data", data_dir}, {"seed", seed}});

    const SingleQubitPOVM povm = build_default_icpovm();
    Rng rng(seed);
    const ExpressionTable table = dequantize_dataset(data, povm, rng);
    write_expression_csv(table, (out / "continuous.csv").string());
    log.finish();
    if (verbose)
        std::fprintf(stderr, "export-continuous: wrote %lld rows to %s\n",
                     static_cast<long long>(table.values.rows()), out.string().c_str());
}

struct StudyArgs {
    std::string config, out;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::optional<int> threads;
};

void cmd_study(const StudyArgs& args, bool verbose) {
    StudyConfig cfg = study_config_from_json_file(args.config);
    const bool config_has_threads = load_json_file(args.config).contains("threads");
    if (args.threads)
        cfg.threads = *args.threads;
    else if (!config_has_threads)
        cfg.threads = std::max(1u, std::thread::hardware_concurrency());
    cfg.master_seed = resolve_seed(args.seed_given, args.seed, cfg.master_seed);

    const fs::path out = prepare_out_dir(args.out);
    const RunLog log(out, "study");
    write_json_file(out / "resolved_config.json",
                    {{"command", "study"},
                     {"study", nlohmann::json::parse(study_config_to_json(cfg))}});

    const StudyResult result = run_scaling_study(cfg);
    write_study_runs_csv(result, (out / "runs.csv").string());
    write_study_cells_csv(result, (out / "agg.csv").string());

    int failures = 0;
    for (const StudyRun& run : result.runs)
        if (!run.ok) ++failures;
    if (failures > 0) {
        std::fprintf(stderr, "study: %d of %zu runs failed (see runs.csv)\n", failures,
                     result.runs.size());
        log.append(std::to_string(failures) + " runs failed");
    }
    log.finish();
    if (verbose)
        std::fprintf(stderr, "study: %zu runs over %zu cells, outputs in %s\n",
                     result.runs.size(), result.cells.size(), out.string().c_str());
}

// ------------------------------ error mapping ------------------------------

int report_failure(bool json_out, const std::string& command, const char* type, int code,
                   const std::string& message) {
    if (json_out) {
        nlohmann::json j;
        j["error"] = {{"command", command},
                      {"type", type},
                      {"message", message},
                      {"exit_code", code}};
        std::cerr << j.dump() << "\n";
    } else {
        std::cerr << "qhl " << command << ": " << type << ": " << message << "\n";
    }
    return code;
}

int run_guarded(bool json_out, const std::string& command, const std::function<void()>& fn) {
    try {
        fn();
        return exit_ok;
    } catch (const UsageError& e) {
        return report_failure(json_out, command, "usage", exit_usage, e.what());
    } catch (const DataError& e) {
        return report_failure(json_out, command, "data", exit_data, e.what());
    } catch (const NumericalError& e) {
        return report_failure(json_out, command, "numerical", exit_numerical, e.what());
    } catch (const std::exception& e) {
        return report_failure(json_out, command, "data", exit_data, e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qhl — simulate and learn the qubit regulatory Hamiltonian model"};
    app.require_subcommand(1);

    bool json_out = false;
    bool verbose = false;
    app.add_flag("--json", json_out, "machine-readable stdout/stderr where applicable");
    app.add_flag("-v,--verbose", verbose, "progress summaries on stderr");

    // validate-povm
    PovmArgs povm_args;
    auto* vp = app.add_subcommand("validate-povm", "Print a POVM validation report");
    vp->add_flag("--json", json_out, "print the report as JSON");
    vp->add_flag("--sic", povm_args.sic, "validate the tetrahedral SIC-POVM");
    vp->add_option("--angles", povm_args.angles, "four polar angles in [0, pi]")
        ->expected(4);
    vp->add_option("--rotation", povm_args.rotation,
                   "z-rotation of the transverse components (angle construction)");
    vp->add_flag("--swap-inner-y", povm_args.swap_inner_y,
                 "swap the inner pair's y signs (angle construction)");

    // gen
    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset plus ground truth");
    gen->add_option("--config", gen_args.config, "synthesis config JSON");
    gen->add_option("--out", gen_args.out, "output directory")->required();
    auto* gen_seed = gen->add_option("--seed", gen_args.seed, "seed override");
    gen->add_flag("-v,--verbose", verbose, "progress summaries on stderr");
    int gen_n = 0, gen_nt = 0, gen_nc = 0;
    double gen_tmax = 0.0, gen_wmax = 0.0;
    auto* gen_n_opt = gen->add_option("--n", gen_n, "number of genes");
    auto* gen_nt_opt = gen->add_option("--n-times", gen_nt, "number of time bins N_t");
    auto* gen_nc_opt = gen->add_option("--n-cells", gen_nc, "cells per time bin N_c");
    auto* gen_tmax_opt = gen->add_option("--t-max", gen_tmax, "largest measurement time");
    auto* gen_wmax_opt = gen->add_option("--w-max", gen_wmax, "weight box bound");

    // discretize
    std::string disc_in, disc_out;
    auto* disc = app.add_subcommand(
        "discretize", "Replace expression values in a CSV with labels 0-3");
    disc->add_option("--in", disc_in, "expression CSV (gene_1..gene_n[, pseudotime])")
        ->required();
    disc->add_option("--out", disc_out, "output directory")->required();
    disc->add_flag("-v,--verbose", verbose, "progress summaries on stderr");

    // ingest
    std::string ing_in, ing_out;
    int ing_nt = 0;
    auto* ing = app.add_subcommand(
        "ingest", "Build a dataset from an expression CSV with pseudotime");
    ing->add_option("--in", ing_in, "expression CSV (pseudotime column required)")->required();
    ing->add_option("--n-times", ing_nt, "number of pseudotime bins N_t")->required();
    ing->add_option("--out", ing_out, "output directory")->required();
    ing->add_flag("-v,--verbose", verbose, "progress summaries on stderr");

    // train
    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "Fit model parameters to a dataset");
    train->add_option("--data", train_args.data, "dataset directory")->required();
    train->add_option("--config", train_args.config, "training config JSON");
    train->add_option("--truth", train_args.truth,
                      "ground-truth parameter JSON (enables metric history)");
    train->add_option("--out", train_args.out, "output directory")->required();
    auto* train_seed = train->add_option("--seed", train_args.seed, "seed override");
    train->add_flag("-v,--verbose", verbose, "progress summaries on stderr");
    int tr_epochs = 0, tr_batch = 0;
    double tr_lr = 0.0, tr_wmax = 0.0, tr_pfloor = 0.0;
    auto* tr_epochs_opt = train->add_option("--epochs", tr_epochs, "training epochs");
    auto* tr_batch_opt = train->add_option("--batch", tr_batch, "cells per bin per step");
    auto* tr_lr_opt = train->add_option("--lr", tr_lr, "base learning rate");
    auto* tr_wmax_opt = train->add_option("--w-max", tr_wmax, "weight box bound");
    auto* tr_pfloor_opt = train->add_option("--p-floor", tr_pfloor, "likelihood clamp floor");
    train->add_option("--schedule", train_args.schedule, "adaptive | constant")
        ->check(CLI::IsMember({"adaptive", "constant"}));
    train->add_flag("--fix-initial-state", train_args.fix_initial_state,
                    "do not learn theta/phi (fixed at theta=pi/2, phi=0)");

    // eval
    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "Compare learned parameters against a truth file");
    eval->add_option("--fit", eval_args.fit, "train output directory (uses params.json)");
    eval->add_option("--params", eval_args.params, "learned parameter JSON");
    eval->add_option("--truth", eval_args.truth, "ground-truth parameter JSON")->required();
    eval->add_option("--out", eval_args.out, "optional output directory for metrics.json");
    eval->add_flag("--json", json_out, "print metrics as JSON");

    // export-continuous
    std::string exp_data, exp_out;
    std::uint64_t exp_seed = 0;
    auto* expc = app.add_subcommand(
        "export-continuous", "Dequantize a dataset back to continuous expression values");
    expc->add_option("--data", exp_data, "dataset directory")->required();
    expc->add_option("--out", exp_out, "output directory")->required();
    auto* exp_seed_opt = expc->add_option("--seed", exp_seed, "seed override");
    expc->add_flag("-v,--verbose", verbose, "progress summaries on stderr");

    // study
    StudyArgs study_args;
    auto* study = app.add_subcommand("study", "Run an (N_t, N_c) scaling study");
    study->add_option("--config", study_args.config, "study config JSON")->required();
    study->add_option("--out", study_args.out, "output directory")->required();
    auto* study_seed = study->add_option("--seed", study_args.seed, "master seed override");
    int study_threads = 0;
    auto* study_threads_opt = study->add_option(
        "--threads", study_threads, "worker threads (default: machine parallelism; 1 = bit-deterministic)");
    study->add_flag("-v,--verbose", verbose, "progress summaries on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    if (vp->parsed())
        return run_guarded(json_out, "validate-povm",
                           [&] { cmd_validate_povm(povm_args, json_out); });
    if (gen->parsed()) {
        gen_args.seed_given = gen_seed->count() > 0;
        if (gen_n_opt->count()) gen_args.n = gen_n;
        if (gen_nt_opt->count()) gen_args.N_t = gen_nt;
        if (gen_nc_opt->count()) gen_args.N_c = gen_nc;
        if (gen_tmax_opt->count()) gen_args.t_max = gen_tmax;
        if (gen_wmax_opt->count()) gen_args.w_max = gen_wmax;
        return run_guarded(json_out, "gen", [&] { cmd_gen(gen_args, verbose); });
    }
    if (disc->parsed())
        return run_guarded(json_out, "discretize",
                           [&] { cmd_discretize(disc_in, disc_out, verbose); });
    if (ing->parsed())
        return run_guarded(json_out, "ingest",
                           [&] { cmd_ingest(ing_in, ing_nt, ing_out, verbose); });
    if (train->parsed()) {
        train_args.seed_given = train_seed->count() > 0;
        if (tr_epochs_opt->count()) train_args.epochs = tr_epochs;
        if (tr_batch_opt->count()) train_args.batch = tr_batch;
        if (tr_lr_opt->count()) train_args.base_lr = tr_lr;
        if (tr_wmax_opt->count()) train_args.w_max = tr_wmax;
        if (tr_pfloor_opt->count()) train_args.p_floor = tr_pfloor;
        return run_guarded(json_out, "train", [&] { cmd_train(train_args, verbose); });
    }
    if (eval->parsed())
        return run_guarded(json_out, "eval", [&] { cmd_eval(eval_args, json_out); });
    if (expc->parsed())
        return run_guarded(json_out, "export-continuous", [&] {
            cmd_export_continuous(exp_data, exp_out, exp_seed_opt->count() > 0, exp_seed,
                                  verbose);
        });
    if (study->parsed()) {
        study_args.seed_given = study_seed->count() > 0;
        if (study_threads_opt->count()) study_args.threads = study_threads;
        return run_guarded(json_out, "study", [&] { cmd_study(study_args, verbose); });
    }
    return exit_usage;  // unreachable: require_subcommand(1)
}
