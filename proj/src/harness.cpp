// harness.cpp — recovery metrics, scaling studies, convexity probe, aggregation.

#include "qhl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include "json.hpp"

#include "qhl/errors.hpp"
#include "qhl/format.hpp"

namespace qhl {

// ------------------------------ recovery metrics ----------------------------

namespace {

double relative_error(const RealVector& learned, const RealVector& truth) {
    const double denom = truth.norm();
    const double num = (learned - truth).norm();
    if (denom == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / denom;
}

}  // namespace

Metrics compute_metrics(const ModelParams& learned, const ModelParams& truth) {
    const int n = truth.weights.n;
    if (learned.weights.n != n || learned.thetas.size() != n || truth.thetas.size() != n ||
        learned.phis.size() != n || truth.phis.size() != n)
        throw UsageError("compute_metrics: parameter shapes do not match");

    const RealVector w_hat = flatten(learned.weights);
    const RealVector w_star = flatten(truth.weights);
    const RealVector diff = w_hat - w_star;

    Metrics m;
    m.max_abs_w_err = diff.cwiseAbs().maxCoeff();
    m.recovery_rate =
        static_cast<double>((diff.cwiseAbs().array() <= recovery_tolerance).count()) /
        static_cast<double>(diff.size());
    m.rel_err_w = relative_error(w_hat, w_star);
    m.rel_err_theta = relative_error(learned.thetas, truth.thetas);
    m.rel_err_phi = relative_error(learned.phis, truth.phis);

    const QuantumState a = prepare_initial_state(learned.thetas, learned.phis);
    const QuantumState b = prepare_initial_state(truth.thetas, truth.phis);
    m.state_fidelity = std::norm(a.amplitudes.dot(b.amplitudes));
    return m;
}

// ------------------------------- aggregation -------------------------------

double quantile(std::vector<double> values, double p) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    if (!(p >= 0.0 && p <= 1.0)) throw UsageError("quantile probability outside [0,1]");
    std::sort(values.begin(), values.end());
    const double h = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double median(const std::vector<double>& values) { return quantile(values, 0.5); }

double interquartile_range(const std::vector<double>& values) {
    return quantile(values, 0.75) - quantile(values, 0.25);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw UsageError("loglog_slope needs at least two matched points");
    const int k = static_cast<int>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < k; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw UsageError("loglog_slope needs positive inputs");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = k * sxx - sx * sx;
    if (denom == 0.0) throw UsageError("loglog_slope: degenerate abscissae");
    return (k * sxy - sx * sy) / denom;
}

RealMatrix coefficient_of_variation(const std::vector<RealMatrix>& runs) {
    if (runs.size() < 2) throw UsageError("coefficient_of_variation needs at least two runs");
    const auto rows = runs[0].rows(), cols = runs[0].cols();
    for (const auto& w : runs)
        if (w.rows() != rows || w.cols() != cols)
            throw UsageError("coefficient_of_variation: shape mismatch across runs");
    RealMatrix mean = RealMatrix::Zero(rows, cols);
    for (const auto& w : runs) mean += w;
    mean /= static_cast<double>(runs.size());
    RealMatrix ss = RealMatrix::Zero(rows, cols);
    for (const auto& w : runs) ss += (w - mean).cwiseAbs2();
    const RealMatrix sd = (ss / static_cast<double>(runs.size() - 1)).cwiseSqrt();
    RealMatrix cv(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            cv(i, j) = sd(i, j) == 0.0 ? 0.0 : sd(i, j) / std::abs(mean(i, j));
    return cv;
}

// ----------------------------- convexity probe -----------------------------

ConvexityReport convexity_probe(const Dataset& data, const ModelParams& params,
                                const SingleQubitPOVM& povm) {
    const HessianResult hess = empirical_hessian(params, data, povm);
    Eigen::SelfAdjointEigenSolver<RealMatrix> solver(hess.matrix, Eigen::EigenvaluesOnly);
    ConvexityReport report;
    report.min_eigenvalue = solver.eigenvalues().minCoeff();
    report.asymmetry = hess.asymmetry;
    report.hessian_norm = hess.norm;
    report.N_t = data.num_times();
    report.N_c = data.num_cells();
    return report;
}

// ------------------------------ scaling study ------------------------------

namespace {

void run_study_job(const StudyConfig& cfg, const SingleQubitPOVM& povm, StudyRun& run) {
    try {
        SynthConfig synth = cfg.synth;
        synth.N_t = run.N_t;
        synth.N_c = run.N_c;
        synth.seed = run.gen_seed;
        const auto [data, truth] = generate_synthetic(synth, povm);

        TrainConfig train = cfg.train;
        train.seed = run.train_seed;
        train.w_max = synth.w_max;
        TrainReport report = train_vqnet(data, train, povm, &truth);

        // Multi-start: rerun from fresh inits and keep the candidate with the
        // lowest full-dataset NLL — the training objective itself, so the
        // selection needs no ground truth. Restart 0 reuses train_seed
        // unchanged, keeping restarts = 1 identical to plain training.
        if (cfg.restarts > 1) {
            double best = nll_full(report.final_params, data, povm, train.p_floor);
            for (int r = 1; r < cfg.restarts; ++r) {
                train.seed = split_seed(run.train_seed, static_cast<std::uint64_t>(r));
                TrainReport candidate = train_vqnet(data, train, povm, &truth);
                const double loss = nll_full(candidate.final_params, data, povm, train.p_floor);
                if (loss < best) {
                    best = loss;
                    report = std::move(candidate);
                }
            }
        }

        run.metrics = compute_metrics(report.final_params, truth);
        run.final_loss = report.loss.empty() ? std::numeric_limits<double>::quiet_NaN()
                                             : report.loss.back();
        run.w_l2_err = (flatten(report.final_params.weights) - flatten(truth.weights)).norm();
        run.ok = true;
    } catch (const std::exception& e) {
        run.ok = false;
        run.error = e.what();
    }
}

StudyCell aggregate_cell(const StudyResult& result, std::size_t begin, std::size_t end) {
    StudyCell cell;
    cell.N_t = result.runs[begin].N_t;
    cell.N_c = result.runs[begin].N_c;
    std::vector<double> fields[7];
    for (std::size_t r = begin; r < end; ++r) {
        const StudyRun& run = result.runs[r];
        if (!run.ok) continue;
        ++cell.completed;
        fields[0].push_back(run.metrics.max_abs_w_err);
        fields[1].push_back(run.metrics.recovery_rate);
        fields[2].push_back(run.metrics.rel_err_w);
        fields[3].push_back(run.metrics.rel_err_theta);
        fields[4].push_back(run.metrics.rel_err_phi);
        fields[5].push_back(run.metrics.state_fidelity);
        fields[6].push_back(run.w_l2_err);
    }
    double* med[6] = {&cell.median.max_abs_w_err, &cell.median.recovery_rate,
                      &cell.median.rel_err_w,     &cell.median.rel_err_theta,
                      &cell.median.rel_err_phi,   &cell.median.state_fidelity};
    double* spread[6] = {&cell.iqr.max_abs_w_err, &cell.iqr.recovery_rate,
                         &cell.iqr.rel_err_w,     &cell.iqr.rel_err_theta,
                         &cell.iqr.rel_err_phi,   &cell.iqr.state_fidelity};
    for (int f = 0; f < 6; ++f) {
        *med[f] = median(fields[f]);
        *spread[f] = interquartile_range(fields[f]);
    }
    cell.median_w_l2_err = median(fields[6]);
    return cell;
}

}  // namespace

StudyResult run_scaling_study(const StudyConfig& cfg) {
    if (cfg.N_t_values.empty() || cfg.N_c_values.empty())
        throw UsageError("scaling study needs non-empty N_t and N_c axes");
    if (cfg.seeds_per_cell < 1) throw UsageError("seeds_per_cell must be positive");
    if (cfg.restarts < 1) throw UsageError("restarts must be positive");
    if (cfg.threads < 1) throw UsageError("threads must be positive");

    const SingleQubitPOVM povm = build_default_icpovm();
    StudyResult result;
    const std::size_t cells = cfg.N_t_values.size() * cfg.N_c_values.size();
    result.runs.resize(cells * static_cast<std::size_t>(cfg.seeds_per_cell));
    std::size_t cell_index = 0;
    for (int N_t : cfg.N_t_values)
        for (int N_c : cfg.N_c_values) {
            for (int s = 0; s < cfg.seeds_per_cell; ++s) {
                StudyRun& run = result.runs[cell_index * cfg.seeds_per_cell + s];
                run.N_t = N_t;
                run.N_c = N_c;
                run.seed_index = s;
                run.gen_seed = split_seed(cfg.master_seed, 2 * static_cast<std::uint64_t>(s));
                run.train_seed =
                    split_seed(cfg.master_seed, 2 * static_cast<std::uint64_t>(s) + 1);
            }
            ++cell_index;
        }

    const std::size_t jobs = result.runs.size();
    const int workers =
        static_cast<int>(std::min(static_cast<std::size_t>(cfg.threads), jobs));
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t j = next.fetch_add(1); j < jobs; j = next.fetch_add(1))
            run_study_job(cfg, povm, result.runs[j]);
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    result.cells.reserve(cells);
    for (std::size_t c = 0; c < cells; ++c)
        result.cells.push_back(aggregate_cell(result, c * cfg.seeds_per_cell,
                                              (c + 1) * cfg.seeds_per_cell));
    return result;
}

// ------------------------------ study config I/O ---------------------------

StudyConfig study_config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": invalid JSON: " + e.what());
    }
    StudyConfig cfg;
    cfg.N_t_values = j.value("N_t_values", cfg.N_t_values);
    cfg.N_c_values = j.value("N_c_values", cfg.N_c_values);
    cfg.seeds_per_cell = j.value("seeds_per_cell", cfg.seeds_per_cell);
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    cfg.restarts = j.value("restarts", cfg.restarts);
    cfg.threads = j.value("threads", cfg.threads);
    if (j.contains("synth")) {
        const auto& s = j.at("synth");
        cfg.synth.n = s.value("n", cfg.synth.n);
        cfg.synth.t_max = s.value("t_max", cfg.synth.t_max);
        cfg.synth.w_max = s.value("w_max", cfg.synth.w_max);
    }
    if (j.contains("train")) cfg.train = train_config_from_json_text(j.at("train").dump());
    return cfg;
}

std::string study_config_to_json(const StudyConfig& cfg) {
    nlohmann::json j;
    j["N_t_values"] = cfg.N_t_values;
    j["N_c_values"] = cfg.N_c_values;
    j["seeds_per_cell"] = cfg.seeds_per_cell;
    j["master_seed"] = cfg.master_seed;
    j["restarts"] = cfg.restarts;
    j["threads"] = cfg.threads;
    j["synth"] = {{"n", cfg.synth.n}, {"t_max", cfg.synth.t_max}, {"w_max", cfg.synth.w_max}};
    j["train"] = nlohmann::json::parse(train_config_to_json(cfg.train));
    return j.dump(2);
}

// -------------------------------- CSV output -------------------------------

namespace {

std::string sanitize_csv(std::string text) {
    for (char& c : text)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return text;
}

}  // namespace

void write_study_runs_csv(const StudyResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "N_t,N_c,seed_index,gen_seed,train_seed,status,max_abs_w_err,recovery_rate,"
           "rel_err_w,rel_err_theta,rel_err_phi,state_fidelity,final_loss,w_l2_err,error\n";
    for (const StudyRun& run : result.runs) {
        out << run.N_t << "," << run.N_c << "," << run.seed_index << "," << run.gen_seed
            << "," << run.train_seed << "," << (run.ok ? "ok" : "error") << ","
            << format_double(run.metrics.max_abs_w_err) << ","
            << format_double(run.metrics.recovery_rate) << ","
            << format_double(run.metrics.rel_err_w) << ","
            << format_double(run.metrics.rel_err_theta) << ","
            << format_double(run.metrics.rel_err_phi) << ","
            << format_double(run.metrics.state_fidelity) << ","
            << format_double(run.final_loss) << "," << format_double(run.w_l2_err) << ","
            << sanitize_csv(run.error) << "\n";
    }
    if (!out) throw DataError("failed while writing: " + path);
}

void write_study_cells_csv(const StudyResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "N_t,N_c,completed";
    const char* names[6] = {"max_abs_w_err", "recovery_rate",  "rel_err_w",
                            "rel_err_theta", "rel_err_phi",    "state_fidelity"};
    for (const char* name : names) out << ",median_" << name << ",iqr_" << name;
    out << ",median_w_l2_err\n";
    for (const StudyCell& cell : result.cells) {
        out << cell.N_t << "," << cell.N_c << "," << cell.completed;
        const double med[6] = {cell.median.max_abs_w_err, cell.median.recovery_rate,
                               cell.median.rel_err_w,     cell.median.rel_err_theta,
                               cell.median.rel_err_phi,   cell.median.state_fidelity};
        const double iqr[6] = {cell.iqr.max_abs_w_err, cell.iqr.recovery_rate,
                               cell.iqr.rel_err_w,     cell.iqr.rel_err_theta,
                               cell.iqr.rel_err_phi,   cell.iqr.state_fidelity};
        for (int f = 0; f < 6; ++f)
            out << "," << format_double(med[f]) << "," << format_double(iqr[f]);
        out << "," << format_double(cell.median_w_l2_err) << "\n";
    }
    if (!out) throw DataError("failed while writing: " + path);
}

}  // namespace qhl
