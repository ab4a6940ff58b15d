// acceptance.cpp — the acceptance gate: every release-blocking property of
// the simulator/learner checked end to end, one PASS/FAIL line per
// criterion, with frozen tolerances and fixed seeds.
//
// Usage: qhl_acceptance [--only K ...]
// Criteria 1-6 and 8-10 run by default. Criterion 7 (the sample-complexity
// rate probe) is the long nightly job and runs only when selected.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qhl/data.hpp"
#include "qhl/harness.hpp"
#include "qhl/learn.hpp"
#include "qhl/model.hpp"
#include "qhl/povm.hpp"

#include "oracles.hpp"

namespace {

using namespace qhl;
namespace fs = std::filesystem;

// ------------------------------ infrastructure -----------------------------

template <class... Args>
std::string fmt(const char* format, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

// Collects failure details; a criterion passes iff none were recorded.
class Checker {
  public:
    void expect(bool ok, const std::string& detail) {
        if (!ok) details_.push_back(detail);
    }
    bool passed() const { return details_.empty(); }
    const std::vector<std::string>& details() const { return details_; }

  private:
    std::vector<std::string> details_;
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(QHL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Missing files yield a path-specific sentinel so two failed runs can never
// compare equal.
std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "<unreadable: " + path.string() + ">";
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// --------------------------- criterion 1: POVM ------------------------------

void criterion_1(Checker& c) {
    const PovmValidation v = validate_povm(build_default_icpovm());
    c.expect(v.completeness_residual <= 1e-12,
             fmt("completeness residual %.3e > 1e-12", v.completeness_residual));
    c.expect(v.bloch_sum_norm <= 1e-12, fmt("Bloch sum norm %.3e > 1e-12", v.bloch_sum_norm));
    c.expect(v.smallest_singular_value > 1e-6,
             fmt("frame matrix near rank-deficient: smallest singular value %.3e",
                 v.smallest_singular_value));
    const double expected_scores[4] = {0.0670, 0.25, 0.75, 0.9330};
    for (int m = 0; m < 4; ++m) {
        c.expect(v.min_eigenvalues[m] >= -1e-12,
                 fmt("element %d not PSD: min eigenvalue %.3e", m, v.min_eigenvalues[m]));
        c.expect(std::abs(v.bloch_norms[m] - 1.0) <= 1e-12,
                 fmt("element %d Bloch norm %.17g not unit", m, v.bloch_norms[m]));
        c.expect(std::abs(v.scores[m] - expected_scores[m]) <= 1e-4,
                 fmt("score %d = %.6f off the reference %.4f by > 1e-4", m, v.scores[m],
                     expected_scores[m]));
    }
}

// ----------------------- criterion 2: SIC + infeasible ----------------------

void criterion_2(Checker& c) {
    const SingleQubitPOVM sic = build_sic_povm();
    const double expected[4] = {0.0, 2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0};
    for (int m = 0; m < 4; ++m)
        c.expect(std::abs(sic.scores[m] - expected[m]) <= 1e-10,
                 fmt("SIC score %d = %.12f differs from %.12f by > 1e-10", m, sic.scores[m],
                     expected[m]));

    bool raised = false;
    try {
        build_icpovm_from_angles({0.0, M_PI / 3.0, 2.0 * M_PI / 3.0, M_PI});
        c.expect(false, "angle set {0, pi/3, 2pi/3, pi} built a POVM instead of raising");
        raised = true;  // suppress the generic message below
    } catch (const ConstructionInfeasible&) {
        raised = true;
    } catch (const std::exception& e) {
        c.expect(false, std::string("wrong exception type for the infeasible angles: ") +
                            e.what());
        raised = true;
    }
    c.expect(raised, "infeasible angle set raised nothing");
}

// ------------------------ criterion 3: gradient oracle ----------------------

void criterion_3(Checker& c) {
    const SingleQubitPOVM povm = build_default_icpovm();
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst = 0.0;
    int worst_instance = -1;

    for (int k = 0; k < 50; ++k) {
        const int n = 2 + (k % 2);
        const int terms = n * (n - 1);
        const ModelParams params = oracle::random_params(n, rng);
        const double t = 1.0 - unif(rng);  // (0, 1]
        const std::vector<int> m = oracle::random_outcome(n, rng);

        const GradLikelihood g = grad_likelihood(params, t, m, povm);
        RealVector analytic(terms + 2 * n);
        analytic << g.dw, g.dtheta, g.dphi;

        RealVector x0(terms + 2 * n);
        x0 << flatten(params.weights), params.thetas, params.phis;
        // w_max = 2 keeps the box validation away from the FD perturbations.
        auto f = [&](const RealVector& x) {
            ModelParams p;
            p.weights = unflatten(x.head(terms), n, 2.0);
            p.thetas = x.segment(terms, n);
            p.phis = x.tail(n);
            return likelihood(p, t, m, povm);
        };
        const double rel = oracle::max_rel_deviation(analytic, oracle::fd_gradient(f, x0));
        if (rel > worst) {
            worst = rel;
            worst_instance = k;
        }
    }
    c.expect(worst < 1e-6,
             fmt("max relative gradient error %.3e (instance %d) >= 1e-6", worst,
                 worst_instance));
}

// -------------------- criterion 4: normalization + sampler ------------------

void criterion_4(Checker& c) {
    const SingleQubitPOVM povm = build_default_icpovm();

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst = 0.0;
    for (int n = 1; n <= 4; ++n)
        for (int rep = 0; rep < 3; ++rep) {
            const ModelParams params = oracle::random_params(n, rng);
            const double sum = full_distribution(params, 1.0 - unif(rng), povm).sum();
            worst = std::max(worst, std::abs(sum - 1.0));
        }
    c.expect(worst <= 1e-10, fmt("normalization residual %.3e > 1e-10", worst));

    // Frozen n=2 instance shared with the unit-level cross-language checks.
    ModelParams inst;
    inst.weights = unflatten((RealVector(2) << 0.7, -0.4).finished(), 2);
    inst.thetas = (RealVector(2) << 0.3, 1.1).finished();
    inst.phis = (RealVector(2) << 0.9, 5.0).finished();
    const double t = 0.8;
    const RealVector p = full_distribution(inst, t, povm);

    constexpr long total = 200000;
    Rng sample_rng(7);
    const auto samples = sample_outcomes(inst, t, total, povm, sample_rng);
    std::vector<long> counts(16, 0);
    for (const auto& m : samples) ++counts[encode_base4(m)];
    RealVector empirical(16);
    for (int i = 0; i < 16; ++i) empirical(i) = static_cast<double>(counts[i]) / total;

    const double tv = oracle::tv_distance(empirical, p);
    c.expect(tv < 0.015, fmt("TV distance %.5f >= 0.015", tv));
    const double stat = oracle::chi_square_stat(counts, p, total);
    c.expect(stat < oracle::chi2_crit_dof15,
             fmt("chi-square statistic %.3f >= critical %.3f (dof 15, significance 1e-3)",
                 stat, oracle::chi2_crit_dof15));
}

// ----------------- criteria 5/6: recovery and identifiability ---------------

struct RecoveryOutcome {
    Metrics metrics;
    double nll_gap = 0.0;  // |full-dataset NLL at the fit − oracle loss at truth|
};

RecoveryOutcome run_recovery(int n, int N_t, int N_c, std::uint64_t gen_seed,
                             std::uint64_t train_seed, double base_lr) {
    const SingleQubitPOVM povm = build_default_icpovm();
    SynthConfig synth;
    synth.n = n;
    synth.N_t = N_t;
    synth.N_c = N_c;
    synth.seed = gen_seed;
    const auto [data, truth] = generate_synthetic(synth, povm);

    TrainConfig cfg;  // defaults: 2500 epochs, batch 20, adaptive lr schedule
    cfg.seed = train_seed;
    cfg.base_lr = base_lr;
    const TrainReport report = train_vqnet(data, cfg, povm);

    RecoveryOutcome out;
    out.metrics = compute_metrics(report.final_params, truth);
    out.nll_gap = std::abs(nll_full(report.final_params, data, povm) -
                           oracle_loss(truth, data.times, povm));
    return out;
}

void criterion_5(Checker& c) {
    // The gate runs the synthetic profile exactly as pinned (base lr 0.85).
    // Known limitation: at that step scale, Adam's early sign-steps random-walk
    // the latent weights past |w̃| ≈ 6, where sech²(w̃) suppresses their
    // gradients below Adam's ε and the affected coordinates freeze at the
    // wrong tanh wall — so recovery does not materialize (this also happens
    // when training is initialized at the ground truth). The informational
    // rerun below shows the identical protocol at the expression-data profile
    // (base lr 0.085) meeting every tolerance, isolating the failure to the
    // profile constant rather than the estimator or the gradient engine.
    int successes = 0;
    for (int s = 0; s < 5; ++s) {
        const RecoveryOutcome r = run_recovery(4, 30, 2000, 1000 + s, 2000 + s, 0.85);
        const bool ok = r.metrics.max_abs_w_err < 0.1 && r.metrics.recovery_rate == 1.0 &&
                        r.nll_gap < 0.02;
        successes += ok ? 1 : 0;
        std::fprintf(stderr,
                     "  [criterion 5] seed %d (lr 0.85): max_abs_w_err %.4f, recovery %.3f, "
                     "nll_gap %.4f -> %s\n",
                     s, r.metrics.max_abs_w_err, r.metrics.recovery_rate, r.nll_gap,
                     ok ? "ok" : "MISS");
    }
    for (int s = 0; s < 5; ++s) {
        const RecoveryOutcome r = run_recovery(4, 30, 2000, 1000 + s, 2000 + s, 0.085);
        const bool ok = r.metrics.max_abs_w_err < 0.1 && r.metrics.recovery_rate == 1.0 &&
                        r.nll_gap < 0.02;
        std::fprintf(stderr,
                     "  [criterion 5] seed %d (informational, lr 0.085): max_abs_w_err %.4f, "
                     "recovery %.3f, nll_gap %.4f -> %s\n",
                     s, r.metrics.max_abs_w_err, r.metrics.recovery_rate, r.nll_gap,
                     ok ? "ok" : "MISS");
    }
    c.expect(successes >= 4, fmt("only %d of 5 seeds recovered (need >= 4)", successes));
}

void criterion_6(Checker& c) {
    int not_identified = 0;
    std::vector<double> fids, recs;
    for (int s = 0; s < 5; ++s) {
        // Same seeds as criterion 5 → identical ground truth instances; only
        // the (N_t, N_c) design changes. The expression-data profile (0.085)
        // is used so training converges: the identifiability failure asserted
        // here must be a property of the design, not of a diverging optimizer.
        const RecoveryOutcome r = run_recovery(4, 2, 50000, 1000 + s, 3000 + s, 0.085);
        not_identified += r.metrics.recovery_rate < 1.0 ? 1 : 0;
        fids.push_back(r.metrics.state_fidelity);
        recs.push_back(r.metrics.recovery_rate);
        std::fprintf(stderr, "  [criterion 6] seed %d: recovery %.3f, state_fidelity %.4f\n", s,
                     r.metrics.recovery_rate, r.metrics.state_fidelity);
    }
    // Aggregation follows the project's median-over-seeds reporting convention.
    const double med_fid = median(fids);
    const double med_rec = median(recs);
    c.expect(not_identified >= 4,
             fmt("%d of 5 seeds reached full weight recovery (need >= 4 failures)",
                 5 - not_identified));
    c.expect(med_fid > med_rec,
             fmt("median state fidelity %.4f does not exceed median weight recovery %.4f",
                 med_fid, med_rec));
    std::fprintf(stderr,
                 "  [criterion 6] median state_fidelity %.4f vs median recovery_rate %.4f\n",
                 med_fid, med_rec);
}

// ------------------------- criterion 7: rate probe --------------------------

void criterion_7(Checker& c) {
    StudyConfig cfg;
    cfg.N_t_values = {30};
    cfg.N_c_values = {250, 1000, 4000};
    cfg.seeds_per_cell = 5;
    cfg.master_seed = 777;
    cfg.synth.n = 4;
    cfg.threads = 1;
    // Rate probe of the estimator: the optimizer must converge for the
    // statistical error to be visible, so use the expression-data profile.
    cfg.train.base_lr = 0.085;
    const StudyResult result = run_scaling_study(cfg);

    int failed = 0;
    for (const StudyRun& run : result.runs)
        if (!run.ok) ++failed;
    c.expect(failed == 0, fmt("%d of %zu study runs failed", failed, result.runs.size()));
    if (failed > 0) return;

    std::vector<double> x, y;
    for (const StudyCell& cell : result.cells) {
        x.push_back(static_cast<double>(cell.N_c));
        y.push_back(cell.median_w_l2_err);
        std::fprintf(stderr, "  [criterion 7] N_c %d: median ||w - w*||_2 = %.5f\n", cell.N_c,
                     cell.median_w_l2_err);
    }
    const double slope = loglog_slope(x, y);
    c.expect(std::abs(slope + 0.5) <= 0.15,
             fmt("log-log slope %.4f outside -0.5 +/- 0.15", slope));
}

// ----------------------- criterion 8: convexity probe -----------------------

void criterion_8(Checker& c) {
    const SingleQubitPOVM povm = build_default_icpovm();
    SynthConfig synth;
    synth.n = 2;
    synth.N_t = 50;
    synth.N_c = 5000;
    synth.seed = 88;
    const auto [data, truth] = generate_synthetic(synth, povm);
    const ConvexityReport report = convexity_probe(data, truth, povm);
    c.expect(report.asymmetry < 1e-5 * report.hessian_norm,
             fmt("Hessian asymmetry %.3e >= 1e-5 * norm %.3e", report.asymmetry,
                 report.hessian_norm));
    c.expect(report.min_eigenvalue > 0.0,
             fmt("min Hessian eigenvalue %.3e <= 0", report.min_eigenvalue));
}

// ------------------------ criterion 9: data pipeline ------------------------

void criterion_9(Checker& c) {
    const SingleQubitPOVM povm = build_default_icpovm();
    const DiscretizationBins bins = make_bins(povm.scores);
    const double expected_edges[3] = {0.158494, 0.5, 0.841506};
    for (int i = 1; i <= 3; ++i)
        c.expect(std::abs(bins.edges[i] - expected_edges[i - 1]) <= 1e-6,
                 fmt("edge %d = %.8f off %.6f by > 1e-6", i, bins.edges[i],
                     expected_edges[i - 1]));

    for (int i = 0; i < 4; ++i)
        c.expect(discretize(povm.scores[i], bins) == i,
                 fmt("discretize(score_%d) != %d", i, i));

    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> label(0, 3);
    bool roundtrip = true;
    for (int k = 0; k < 1000 && roundtrip; ++k) {
        std::vector<int> m(12);
        for (int& v : m) v = label(rng);
        roundtrip = decode_base4(encode_base4(m), 12) == m;
    }
    c.expect(roundtrip, "base-4 encode/decode failed on a random n=12 vector");

    const BetaBinModel model = make_beta_models(povm.scores, bins);
    Rng deq_rng(19);
    for (int lab = 0; lab < 4; ++lab) {
        bool inside = true;
        for (int k = 0; k < 1000 && inside; ++k)
            inside = discretize(dequantize(lab, bins, model, deq_rng), bins) == lab;
        c.expect(inside, fmt("a dequantized sample escaped bin %d", lab));
    }

    for (int i = 0; i < 4; ++i) {
        const double a = model.alpha[i], b = model.beta[i];
        // Independent quadrature for the 0.99 central-mass condition.
        const double mass = oracle::simpson_beta_mass(a, b, 0.025, 0.975);
        c.expect(std::abs(mass - 0.99) <= 1e-6,
                 fmt("level %d central mass %.8f off 0.99 by > 1e-6", i, mass));
        const double mode =
            bins.edges[i] + (a - 1.0) / (a + b - 2.0) * (bins.edges[i + 1] - bins.edges[i]);
        c.expect(std::abs(mode - povm.scores[i]) <= 1e-6,
                 fmt("level %d Beta mode %.8f off the score %.8f by > 1e-6", i, mode,
                     povm.scores[i]));
    }
}

// ------------------------ criterion 10: determinism -------------------------

void criterion_10(Checker& c) {
    const fs::path root = fs::temp_directory_path() / "qhl_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);

    // Convergence is criterion 5's business; determinism only needs the full
    // pipeline exercised at the same scale, so the rerun trains fewer epochs.
    const std::string gen_flags = "gen --n 4 --n-times 30 --n-cells 2000 --seed 42 --out ";
    const std::string train_flags = " --epochs 150 --batch 20 --lr 0.85 --seed 43 --out ";
    for (const char* tag : {"a", "b"}) {
        const fs::path gen_dir = root / (std::string("gen_") + tag);
        const fs::path fit_dir = root / (std::string("fit_") + tag);
        c.expect(run_cli(gen_flags + gen_dir.string()) == 0, fmt("gen run %s failed", tag));
        c.expect(run_cli("train --data " + gen_dir.string() + " --truth " +
                         (gen_dir / "truth.json").string() + train_flags + fit_dir.string()) ==
                     0,
                 fmt("train run %s failed", tag));
    }

    for (const char* name : {"dataset.json", "dataset.csv", "truth.json"})
        c.expect(read_file(root / "gen_a" / name) == read_file(root / "gen_b" / name),
                 fmt("gen output %s differs between identical reruns", name));
    for (const char* name :
         {"report.json", "epochs.csv", "params.json", "weights.json", "weights.csv"})
        c.expect(read_file(root / "fit_a" / name) == read_file(root / "fit_b" / name),
                 fmt("train output %s differs between identical reruns", name));
    fs::remove_all(root);
}

// ---------------------------------- runner ----------------------------------

struct CriterionSpec {
    int id;
    const char* name;
    double budget_seconds;
    void (*run)(Checker&);
};

constexpr CriterionSpec kCriteria[] = {
    {1, "default IC-POVM: identity, PSD, frame rank, expression scores", 1.0, criterion_1},
    {2, "SIC score degeneracy and infeasible angle set", 1.0, criterion_2},
    {3, "analytic gradient vs central finite differences, 50 instances", 120.0, criterion_3},
    {4, "distribution normalization and 200k-sample sampler agreement", 180.0, criterion_4},
    {5, "desk-scale recovery over 5 seeds (n=4, N_t=30, N_c=2000)", 1800.0, criterion_5},
    {6, "identifiability failure at N_t=2 with robust state recovery", 1200.0, criterion_6},
    {7, "sample-complexity rate probe: slope -1/2 over N_c", 5400.0, criterion_7},
    {8, "empirical Hessian symmetric and positive definite at truth", 120.0, criterion_8},
    {9, "data pipeline: edges, labels, base-4, dequantizer, Beta solver", 60.0, criterion_9},
    {10, "gen + train rerun determinism (byte-identical artifacts)", 1800.0, criterion_10},
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--only") continue;
        std::size_t used = 0;
        int id = 0;
        try {
            id = std::stoi(arg, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != arg.size() || id < 1 || id > 10) {
            std::fprintf(stderr,
                         "usage: qhl_acceptance [--only K ...]   (criteria 1-10; default: all "
                         "but 7)\n");
            return 2;
        }
        selected.push_back(id);
    }
    const auto enabled = [&](int id) {
        if (selected.empty()) return id != 7;
        return std::find(selected.begin(), selected.end(), id) != selected.end();
    };

    int ran = 0, failed = 0;
    for (const CriterionSpec& spec : kCriteria) {
        if (!enabled(spec.id)) continue;
        ++ran;
        std::fprintf(stderr, "running criterion %d: %s\n", spec.id, spec.name);
        Checker checker;
        const auto start = std::chrono::steady_clock::now();
        try {
            spec.run(checker);
        } catch (const std::exception& e) {
            checker.expect(false, std::string("unexpected exception: ") + e.what());
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        checker.expect(secs < spec.budget_seconds,
                       fmt("runtime %.2f s exceeded the %.0f s budget", secs,
                           spec.budget_seconds));

        std::printf("%s criterion %2d: %s (%.2f s)\n", checker.passed() ? "PASS" : "FAIL",
                    spec.id, spec.name, secs);
        for (const std::string& detail : checker.details())
            std::printf("      - %s\n", detail.c_str());
        std::fflush(stdout);
        failed += checker.passed() ? 0 : 1;
    }
    std::printf("acceptance: %d of %d criteria passed\n", ran - failed, ran);
    return failed == 0 ? 0 : 1;
}
