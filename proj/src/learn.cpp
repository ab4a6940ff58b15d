// learn.cpp — likelihood gradients, empirical Hessian, Adam, training loop.

#include "qhl/learn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace qhl {

namespace {

constexpr double degenerate_gap = 1e-10;  // |λ_a − λ_b|·t below this → Φ_ab = t

// Φ_ab = (e^{i(λ_a−λ_b)t} − 1)/(i(λ_a−λ_b)); Φ_ab → t for degenerate pairs.
Matrix phase_integral(const RealVector& lambda, double t) {
    const Eigen::Index dim = lambda.size();
    Matrix phi(dim, dim);
    const Complex im(0.0, 1.0);
    for (Eigen::Index a = 0; a < dim; ++a) {
        for (Eigen::Index b = 0; b < dim; ++b) {
            const double gap = lambda(a) - lambda(b);
            if (std::abs(gap) * std::abs(t) < degenerate_gap)
                phi(a, b) = t;
            else
                phi(a, b) = (std::exp(im * gap * t) - 1.0) / (im * gap);
        }
    }
    return phi;
}

// Everything fixed across time bins for one parameter point.
struct ForwardContext {
    int n = 0;
    Eigen::Index dim = 0;
    EigenDecomposition eig;
    Vector psi0;
    Vector y;  // V† ψ0
    std::vector<Vector> dtheta_states, dphi_states;  // ∂ψ0/∂θ_i, ∂ψ0/∂φ_i
};

ForwardContext make_context(const TermList& terms, const RealVector& w, const RealVector& theta,
                            const RealVector& phi, bool want_state_grads) {
    ForwardContext ctx;
    ctx.n = static_cast<int>(theta.size());
    ctx.dim = terms.dim;
    ctx.eig = eig_hermitian(assemble(terms, w));

    std::vector<Eigen::Vector2cd> factors(ctx.n);
    for (int i = 0; i < ctx.n; ++i) factors[i] = qubit_state(theta(i), phi(i));
    ctx.psi0 = kron_chain(factors);
    ctx.y = ctx.eig.eigenvectors.adjoint() * ctx.psi0;

    if (want_state_grads) {
        ctx.dtheta_states.resize(ctx.n);
        ctx.dphi_states.resize(ctx.n);
        for (int i = 0; i < ctx.n; ++i) {
            std::vector<Eigen::Vector2cd> df = factors;
            df[i] = qubit_state_dtheta(theta(i), phi(i));
            ctx.dtheta_states[i] = kron_chain(df);
            df[i] = qubit_state_dphi(theta(i), phi(i));
            ctx.dphi_states[i] = kron_chain(df);
        }
    }
    return ctx;
}

// Σ_pq (H_k)_pq G_pq for each sparse term.
Complex contract_term(const SparseComplex& term, const Matrix& g) {
    Complex sum(0.0, 0.0);
    for (Eigen::Index col = 0; col < term.outerSize(); ++col)
        for (SparseComplex::InnerIterator it(term, col); it; ++it)
            sum += it.value() * g(it.row(), it.col());
    return sum;
}

// NLL (and optionally its natural-coordinate gradient) over a batch.
// One eigendecomposition; per-bin O(dim³) regardless of batch size via the
// weighted accumulator z = Σ_cells (a/φ) u over each bin's samples.
NllGradient eval_batch(const TermList& terms, const Rank1Factor& factor, const RealVector& w,
                       const RealVector& theta, const RealVector& phi, const Dataset& data,
                       const BatchSelection& batch, double p_floor, bool want_grad) {
    if (batch.size() != static_cast<std::size_t>(data.num_times()))
        throw DataError("batch selection must list cells for every time bin");
    const int c = terms.count();
    const int n = data.n;

    const ForwardContext ctx = make_context(terms, w, theta, phi, want_grad);
    const Matrix& v_mat = ctx.eig.eigenvectors;

    NllGradient out;
    if (want_grad) {
        out.dw = RealVector::Zero(c);
        out.dtheta = RealVector::Zero(n);
        out.dphi = RealVector::Zero(n);
    }

    const double inv_joint_weight = std::ldexp(1.0, -n);  // 2^{−n}
    long total = 0;
    std::vector<Eigen::Vector2cd> mv(n);

    for (int bin = 0; bin < data.num_times(); ++bin) {
        if (batch[bin].empty()) continue;
        const double t = data.times(bin);
        const Vector phases = evolution_phases(ctx.eig, t);
        const Vector psi_t = v_mat * phases.cwiseProduct(ctx.y);

        Vector z = Vector::Zero(ctx.dim);  // Σ (a/φ)·u with u = e^{itΛ} V† v_m
        bool z_used = false;

        for (int cell : batch[bin]) {
            ++total;
            for (int q = 0; q < n; ++q) mv[q] = factor.vectors[data.outcomes[bin](cell, q)];
            const Vector v_m = kron_chain(mv);
            const Complex a = v_m.dot(psi_t);
            const double prob = std::norm(a) * inv_joint_weight;
            if (prob < p_floor) {
                out.loss -= std::log(p_floor);  // clamped: contributes no gradient
                continue;
            }
            out.loss -= std::log(prob);
            if (want_grad) {
                const Vector u = phases.conjugate().cwiseProduct(v_mat.adjoint() * v_m);
                z += (a / prob) * u;
                z_used = true;
            }
        }

        if (want_grad && z_used) {
            const Matrix phi_int = phase_integral(ctx.eig.eigenvalues, t);
            // Weight gradient: Σ_cells ∇φ/φ = (2/2^n)·Re[−i ⟨H_k, G⟩],
            // G = V̄ [(z̄ yᵀ) ∘ Φ] Vᵀ.
            const Matrix w_acc = (z.conjugate() * ctx.y.transpose()).cwiseProduct(phi_int);
            const Matrix g = v_mat.conjugate() * w_acc * v_mat.transpose();
            for (int k = 0; k < c; ++k)
                out.dw(k) += inv_joint_weight * 2.0 * std::imag(contract_term(terms.terms[k], g));
            // Initial-state gradient: Re[(V z)† ∂ψ0/∂θ_i] etc.
            const Vector q_vec = v_mat * z;
            for (int i = 0; i < n; ++i) {
                out.dtheta(i) += inv_joint_weight * 2.0 * std::real(q_vec.dot(ctx.dtheta_states[i]));
                out.dphi(i) += inv_joint_weight * 2.0 * std::real(q_vec.dot(ctx.dphi_states[i]));
            }
        }
    }

    if (total == 0) throw DataError("empty batch");
    const double scale = 1.0 / static_cast<double>(total);
    out.loss *= scale;
    if (want_grad) {
        out.dw *= -scale;  // NLL = −mean log φ
        out.dtheta *= -scale;
        out.dphi *= -scale;
    }
    return out;
}

double entropy_nats(const RealVector& p) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p(i) > 0.0) h -= p(i) * std::log(p(i));
    return h;
}

}  // namespace

BatchSelection full_batch(const Dataset& data) {
    BatchSelection batch(data.num_times());
    for (int bin = 0; bin < data.num_times(); ++bin) {
        batch[bin].resize(data.outcomes[bin].rows());
        for (int k = 0; k < static_cast<int>(batch[bin].size()); ++k) batch[bin][k] = k;
    }
    return batch;
}

ModelParams to_model_params(const LatentParams& latent, int n, double w_max) {
    ModelParams params;
    params.weights = unflatten(w_max * latent.w_tilde.array().tanh().matrix(), n, w_max);
    params.thetas = latent.theta;
    params.phis = latent.phi;
    return params;
}

LatentParams to_latent_params(const ModelParams& params, double w_max) {
    const RealVector w = flatten(params.weights);
    if ((w.array().abs() >= w_max).any())
        throw UsageError("to_latent_params: weights must lie strictly inside (-w_max, w_max)");
    LatentParams latent;
    latent.w_tilde = (w / w_max).array().atanh().matrix();
    latent.theta = params.thetas;
    latent.phi = params.phis;
    return latent;
}

double nll_batch(const ModelParams& params, const Dataset& data, const BatchSelection& batch,
                 const SingleQubitPOVM& povm, double p_floor) {
    const TermList terms = grn_term_list(data.n);
    return eval_batch(terms, rank1_factor(povm), flatten(params.weights), params.thetas,
                      params.phis, data, batch, p_floor, /*want_grad=*/false)
        .loss;
}

double nll_full(const ModelParams& params, const Dataset& data, const SingleQubitPOVM& povm,
                double p_floor) {
    return nll_batch(params, data, full_batch(data), povm, p_floor);
}

GradLikelihood grad_likelihood(const ModelParams& params, double t, const std::vector<int>& m,
                               const SingleQubitPOVM& povm) {
    const int n = params.weights.n;
    const TermList terms = grn_term_list(n);
    const Rank1Factor factor = rank1_factor(povm);
    const ForwardContext ctx =
        make_context(terms, flatten(params.weights), params.thetas, params.phis, true);

    const Vector phases = evolution_phases(ctx.eig, t);
    const Vector psi_t = ctx.eig.eigenvectors * phases.cwiseProduct(ctx.y);
    const Vector v_m = outcome_vector(factor, m);
    const Complex a = v_m.dot(psi_t);
    const double inv_joint_weight = std::ldexp(1.0, -n);

    GradLikelihood grad;
    grad.value = std::norm(a) * inv_joint_weight;
    grad.dw = RealVector(terms.count());
    grad.dtheta = RealVector(n);
    grad.dphi = RealVector(n);

    const Vector u = phases.conjugate().cwiseProduct(ctx.eig.eigenvectors.adjoint() * v_m);
    const Matrix phi_int = phase_integral(ctx.eig.eigenvalues, t);
    const Matrix w_mat = (u.conjugate() * ctx.y.transpose()).cwiseProduct(phi_int);
    const Matrix g =
        ctx.eig.eigenvectors.conjugate() * w_mat * ctx.eig.eigenvectors.transpose();
    // dφ/dw_k = (2/2^n) Re[ā·(−i)⟨H_k, G⟩] = (2/2^n) Im[ā·⟨H_k, G⟩].
    for (int k = 0; k < terms.count(); ++k)
        grad.dw(k) =
            inv_joint_weight * 2.0 * std::imag(std::conj(a) * contract_term(terms.terms[k], g));
    const Vector q_vec = ctx.eig.eigenvectors * u;
    for (int i = 0; i < n; ++i) {
        grad.dtheta(i) =
            inv_joint_weight * 2.0 * std::real(std::conj(a) * q_vec.dot(ctx.dtheta_states[i]));
        grad.dphi(i) =
            inv_joint_weight * 2.0 * std::real(std::conj(a) * q_vec.dot(ctx.dphi_states[i]));
    }
    return grad;
}

NllGradient grad_nll_natural(const ModelParams& params, const Dataset& data,
                             const BatchSelection& batch, const SingleQubitPOVM& povm,
                             double p_floor) {
    const TermList terms = grn_term_list(data.n);
    return eval_batch(terms, rank1_factor(povm), flatten(params.weights), params.thetas,
                      params.phis, data, batch, p_floor, /*want_grad=*/true);
}

NllGradient grad_nll_batch(const LatentParams& latent, const Dataset& data,
                           const BatchSelection& batch, const SingleQubitPOVM& povm, double w_max,
                           double p_floor) {
    const TermList terms = grn_term_list(data.n);
    const RealVector w = w_max * latent.w_tilde.array().tanh().matrix();
    NllGradient grad = eval_batch(terms, rank1_factor(povm), w, latent.theta, latent.phi, data,
                                  batch, p_floor, /*want_grad=*/true);
    // dw/dw̃ = w_max (1 − tanh²(w̃)).
    const RealVector chain =
        (w_max * (1.0 - latent.w_tilde.array().tanh().square())).matrix();
    grad.dw = grad.dw.cwiseProduct(chain);
    return grad;
}

HessianResult empirical_hessian(const ModelParams& params, const Dataset& data,
                                const SingleQubitPOVM& povm, double p_floor) {
    const int n = data.n;
    const TermList terms = grn_term_list(n);
    const int c = terms.count();
    if (c > 30) throw UsageError("empirical_hessian: c > 30 exceeds the desk-scale guard");

    const Rank1Factor factor = rank1_factor(povm);
    const BatchSelection batch = full_batch(data);
    const RealVector w0 = flatten(params.weights);

    RealMatrix hess(c, c);
    for (int k = 0; k < c; ++k) {
        const double h = 1e-4 * (1.0 + std::abs(w0(k)));
        RealVector wp = w0, wm = w0;
        wp(k) += h;
        wm(k) -= h;
        const NllGradient gp =
            eval_batch(terms, factor, wp, params.thetas, params.phis, data, batch, p_floor, true);
        const NllGradient gm =
            eval_batch(terms, factor, wm, params.thetas, params.phis, data, batch, p_floor, true);
        hess.col(k) = (gp.dw - gm.dw) / (2.0 * h);
    }

    HessianResult result;
    result.asymmetry = (hess - hess.transpose()).cwiseAbs().maxCoeff();
    result.norm = hess.cwiseAbs().maxCoeff();
    result.matrix = 0.5 * (hess + hess.transpose());
    return result;
}

void adam_step(AdamState& state, RealVector& params, const RealVector& grad, double lr) {
    if (state.step == 0) {
        state.m = RealVector::Zero(grad.size());
        state.v = RealVector::Zero(grad.size());
    }
    if (grad.size() != state.m.size() || grad.size() != params.size())
        throw DataError("adam_step: dimension mismatch");
    ++state.step;
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    params -=
        (lr / bc1) * state.m.cwiseQuotient(((state.v / bc2).cwiseSqrt().array() + state.eps).matrix());
}

double lr_schedule(int epoch, double base) {
    return base / std::sqrt(epoch / 4.0 + 1.0);
}

TrainReport train_vqnet(const Dataset& data, const TrainConfig& cfg, const SingleQubitPOVM& povm,
                        const ModelParams* truth, const LatentParams* init) {
    const auto start = std::chrono::steady_clock::now();
    const int n = data.n;
    const int num_bins = data.num_times();
    const int num_cells = data.num_cells();
    if (num_bins < 1 || num_cells < 1) throw DataError("train_vqnet: empty dataset");
    if (cfg.batch < 1 || cfg.batch > num_cells)
        throw UsageError("train_vqnet: batch size must satisfy 1 <= B <= N_c");
    if (cfg.p_floor <= 0.0 || cfg.p_floor > 1e-3)
        throw UsageError("train_vqnet: p_floor must lie in (0, 1e-3]");

    const TermList terms = grn_term_list(n);
    const int c = terms.count();
    rank1_factor(povm);  // reject POVMs without a rank-1 form before training

    Rng rng(cfg.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto draw = [&](double lo, double hi) { return lo + (hi - lo) * unif(rng); };

    LatentParams latent;
    latent.w_tilde = RealVector(c);
    for (int k = 0; k < c; ++k) latent.w_tilde(k) = draw(cfg.w_init_lo, cfg.w_init_hi);
    latent.theta = RealVector::Constant(n, cfg.theta_fixed);
    latent.phi = RealVector::Constant(n, cfg.phi_fixed);
    if (cfg.learn_initial_state) {
        for (int i = 0; i < n; ++i) latent.theta(i) = draw(cfg.theta_init_lo, cfg.theta_init_hi);
        for (int i = 0; i < n; ++i) latent.phi(i) = draw(cfg.phi_init_lo, cfg.phi_init_hi);
    }
    if (init != nullptr) {
        if (init->w_tilde.size() != c || init->theta.size() != n || init->phi.size() != n)
            throw UsageError("train_vqnet: init override has wrong dimensions");
        latent = *init;
    }

    // Per-bin batch schedule: a without-replacement permutation first (full
    // coverage), uniform sampling once the bin is exhausted.
    struct BinSchedule {
        std::vector<int> order;
        std::size_t cursor = 0;
        bool covered = false;
    };
    std::vector<BinSchedule> schedule(num_bins);
    for (auto& s : schedule) {
        s.order.resize(num_cells);
        for (int k = 0; k < num_cells; ++k) s.order[k] = k;
        std::shuffle(s.order.begin(), s.order.end(), rng);
    }
    std::uniform_int_distribution<int> cell_dist(0, num_cells - 1);

    // Single Adam instance over the concatenated latent vector.
    const int state_dims = cfg.learn_initial_state ? 2 * n : 0;
    RealVector opt_vec(c + state_dims);
    AdamState adam;

    TrainReport report;
    report.loss.reserve(cfg.epochs);
    report.lr.reserve(cfg.epochs);

    BatchSelection batch(num_bins);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (int bin = 0; bin < num_bins; ++bin) {
            auto& sched = schedule[bin];
            auto& cells = batch[bin];
            cells.clear();
            while (!sched.covered && static_cast<int>(cells.size()) < cfg.batch) {
                cells.push_back(sched.order[sched.cursor++]);
                if (sched.cursor == sched.order.size()) sched.covered = true;
            }
            while (static_cast<int>(cells.size()) < cfg.batch) cells.push_back(cell_dist(rng));
        }

        const double lr = cfg.schedule == TrainConfig::Schedule::adaptive
                              ? lr_schedule(epoch, cfg.base_lr)
                              : cfg.base_lr;
        const NllGradient grad =
            grad_nll_batch(latent, data, batch, povm, cfg.w_max, cfg.p_floor);

        opt_vec.head(c) = latent.w_tilde;
        RealVector grad_vec(c + state_dims);
        grad_vec.head(c) = grad.dw;
        if (cfg.learn_initial_state) {
            opt_vec.segment(c, n) = latent.theta;
            opt_vec.tail(n) = latent.phi;
            grad_vec.segment(c, n) = grad.dtheta;
            grad_vec.tail(n) = grad.dphi;
        }
        adam_step(adam, opt_vec, grad_vec, lr);
        latent.w_tilde = opt_vec.head(c);
        if (cfg.learn_initial_state) {
            latent.theta = opt_vec.segment(c, n);
            latent.phi = opt_vec.tail(n);
        }

        report.loss.push_back(grad.loss);
        report.lr.push_back(lr);
        if (truth != nullptr) {
            const Metrics metrics = compute_metrics(to_model_params(latent, n, cfg.w_max), *truth);
            report.max_abs_w_err.push_back(metrics.max_abs_w_err);
            report.recovery_rate.push_back(metrics.recovery_rate);
            report.rel_err_w.push_back(metrics.rel_err_w);
            report.rel_err_theta.push_back(metrics.rel_err_theta);
            report.rel_err_phi.push_back(metrics.rel_err_phi);
            report.state_fidelity.push_back(metrics.state_fidelity);
        }
    }

    report.epochs = cfg.epochs;
    report.final_params = to_model_params(latent, n, cfg.w_max);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

double oracle_loss(const ModelParams& params, const RealVector& times,
                   const SingleQubitPOVM& povm, int n_enum) {
    if (times.size() == 0) throw DataError("oracle_loss: no times");
    double total = 0.0;
    for (Eigen::Index i = 0; i < times.size(); ++i)
        total += entropy_nats(full_distribution(params, times(i), povm, n_enum));
    return total / static_cast<double>(times.size());
}

double oracle_loss_mc(const ModelParams& params, const RealVector& times,
                      const SingleQubitPOVM& povm, long samples, std::uint64_t seed) {
    if (times.size() == 0) throw DataError("oracle_loss_mc: no times");
    if (samples < 1) throw UsageError("oracle_loss_mc: sample count must be positive");
    const Rank1Factor factor = rank1_factor(povm);
    const QuantumState psi0 = prepare_initial_state(params.thetas, params.phis);
    const EigenDecomposition eig = eig_hermitian(build_hamiltonian(params.weights));
    const double inv_joint_weight = std::ldexp(1.0, -params.weights.n);

    double total = 0.0;
    for (Eigen::Index i = 0; i < times.size(); ++i) {
        const Vector psi_t = evolve_vector(eig, times(i), psi0.amplitudes);
        Rng rng(split_seed(seed, static_cast<std::uint64_t>(i)));
        double bin_total = 0.0;
        for (long k = 0; k < samples; ++k) {
            const std::vector<int> m = sample_outcome(psi_t, factor, rng);
            std::vector<Eigen::Vector2cd> mv(m.size());
            for (std::size_t q = 0; q < m.size(); ++q) mv[q] = factor.vectors[m[q]];
            const double prob = std::norm(kron_chain(mv).dot(psi_t)) * inv_joint_weight;
            bin_total -= std::log(prob);
        }
        total += bin_total / static_cast<double>(samples);
    }
    return total / static_cast<double>(times.size());
}

namespace {

TrainConfig train_config_from_json(const nlohmann::json& j, const std::string& where) {
    TrainConfig cfg;
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch = j.value("batch", cfg.batch);
    cfg.base_lr = j.value("base_lr", cfg.base_lr);
    const std::string schedule = j.value("schedule", std::string("adaptive"));
    if (schedule == "adaptive")
        cfg.schedule = TrainConfig::Schedule::adaptive;
    else if (schedule == "constant")
        cfg.schedule = TrainConfig::Schedule::constant;
    else
        throw DataError(where + ": schedule must be 'adaptive' or 'constant'");
    cfg.w_max = j.value("w_max", cfg.w_max);
    cfg.p_floor = j.value("p_floor", cfg.p_floor);
    cfg.learn_initial_state = j.value("learn_initial_state", cfg.learn_initial_state);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.w_init_lo = j.value("w_init_lo", cfg.w_init_lo);
    cfg.w_init_hi = j.value("w_init_hi", cfg.w_init_hi);
    cfg.theta_init_lo = j.value("theta_init_lo", cfg.theta_init_lo);
    cfg.theta_init_hi = j.value("theta_init_hi", cfg.theta_init_hi);
    cfg.phi_init_lo = j.value("phi_init_lo", cfg.phi_init_lo);
    cfg.phi_init_hi = j.value("phi_init_hi", cfg.phi_init_hi);
    cfg.theta_fixed = j.value("theta_fixed", cfg.theta_fixed);
    cfg.phi_fixed = j.value("phi_fixed", cfg.phi_fixed);
    return cfg;
}

}  // namespace

TrainConfig train_config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": invalid JSON: " + e.what());
    }
    return train_config_from_json(j, path);
}

TrainConfig train_config_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("train config: invalid JSON: ") + e.what());
    }
    return train_config_from_json(j, "train config");
}

std::string train_config_to_json(const TrainConfig& cfg) {
    nlohmann::json j;
    j["epochs"] = cfg.epochs;
    j["batch"] = cfg.batch;
    j["base_lr"] = cfg.base_lr;
    j["schedule"] = cfg.schedule == TrainConfig::Schedule::adaptive ? "adaptive" : "constant";
    j["w_max"] = cfg.w_max;
    j["p_floor"] = cfg.p_floor;
    j["learn_initial_state"] = cfg.learn_initial_state;
    j["seed"] = cfg.seed;
    j["w_init_lo"] = cfg.w_init_lo;
    j["w_init_hi"] = cfg.w_init_hi;
    j["theta_init_lo"] = cfg.theta_init_lo;
    j["theta_init_hi"] = cfg.theta_init_hi;
    j["phi_init_lo"] = cfg.phi_init_lo;
    j["phi_init_hi"] = cfg.phi_init_hi;
    j["theta_fixed"] = cfg.theta_fixed;
    j["phi_fixed"] = cfg.phi_fixed;
    return j.dump(2);
}

}  // namespace qhl
