// data.cpp — discretization, pseudotime binning, Beta dequantizer, dataset I/O.

#include "qhl/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "qhl/errors.hpp"
#include "qhl/format.hpp"
#include "qhl/povm.hpp"

namespace qhl {

// --------------------------- bins & discretization -------------------------

DiscretizationBins make_bins(const std::array<double, 4>& scores) {
    for (int i = 0; i < 4; ++i) {
        if (!(scores[i] >= 0.0 && scores[i] <= 1.0))
            throw DataError("expression scores must lie in [0,1]");
        if (i > 0 && !(scores[i] > scores[i - 1]))
            throw DataError("expression scores must be strictly increasing");
    }
    DiscretizationBins bins;
    bins.edges[0] = 0.0;
    for (int i = 1; i <= 3; ++i) bins.edges[i] = 0.5 * (scores[i - 1] + scores[i]);
    bins.edges[4] = 1.0;
    for (int i = 0; i < 4; ++i)
        if (!(bins.edges[i] < bins.edges[i + 1]))
            throw DataError("discretization bin edges are not strictly increasing");
    return bins;
}

int discretize(double value, const DiscretizationBins& bins) {
    if (!(value >= 0.0 && value <= 1.0))
        throw DataError("expression value outside [0,1]: " + format_double(value));
    if (value >= bins.edges[4]) return 3;  // closure: 1.0 belongs to the top bin
    for (int i = 3; i >= 1; --i)
        if (value >= bins.edges[i]) return i;
    return 0;
}

// ----------------------------- pseudotime bins ------------------------------

PseudotimeBinning bin_pseudotime(const std::vector<double>& pseudotimes, int N_t) {
    const int cells = static_cast<int>(pseudotimes.size());
    if (N_t < 1) throw UsageError("N_t must be positive");
    if (cells < N_t) throw DataError("fewer cells than pseudotime bins");
    for (double t : pseudotimes)
        if (!std::isfinite(t)) throw DataError("non-finite pseudotime");

    std::vector<int> order(cells);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return pseudotimes[a] < pseudotimes[b]; });

    PseudotimeBinning binning;
    binning.N_t = N_t;
    binning.assignment.assign(cells, -1);
    binning.bin_cells.resize(N_t);
    binning.representative.resize(N_t);

    // Near-equal contiguous groups; the first (cells mod N_t) bins take the
    // extra cell.
    const int base = cells / N_t;
    const int remainder = cells % N_t;
    int pos = 0;
    for (int b = 0; b < N_t; ++b) {
        const int size = base + (b < remainder ? 1 : 0);
        auto& members = binning.bin_cells[b];
        members.assign(order.begin() + pos, order.begin() + pos + size);
        for (int cell : members) binning.assignment[cell] = b;
        const int mid = size / 2;
        binning.representative(b) =
            (size % 2 == 1)
                ? pseudotimes[members[mid]]
                : 0.5 * (pseudotimes[members[mid - 1]] + pseudotimes[members[mid]]);
        pos += size;
    }
    return binning;
}

// ------------------------------ base-4 encoding -----------------------------

std::uint64_t encode_base4(const std::vector<int>& m) {
    const int n = static_cast<int>(m.size());
    if (n < 1 || n > 31) throw UsageError("base-4 encoding supports 1..31 genes");
    std::uint64_t M = 0;
    for (int i = n - 1; i >= 0; --i) {
        if (m[i] < 0 || m[i] > 3) throw DataError("outcome label outside {0..3}");
        M = (M << 2) | static_cast<std::uint64_t>(m[i]);
    }
    return M;
}

std::vector<int> decode_base4(std::uint64_t M, int n) {
    if (n < 1 || n > 31) throw UsageError("base-4 encoding supports 1..31 genes");
    if (M >> (2 * n)) throw DataError("encoded outcome exceeds 4^n - 1");
    std::vector<int> m(n);
    for (int i = 0; i < n; ++i) {
        m[i] = static_cast<int>(M & 3u);
        M >>= 2;
    }
    return m;
}

// --------------------------- incomplete Beta (Lentz) ------------------------

namespace {

// Continued fraction for the regularized incomplete Beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int max_iter = 500;
    constexpr double eps = 3e-16;
    constexpr double fpmin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double coef = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + coef * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + coef / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        coef = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + coef * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + coef / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < eps) return h;
    }
    throw NumericalError("incomplete Beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw UsageError("Beta shape parameters must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double beta_mass(double a, double b, double lo, double hi) {
    return incomplete_beta(a, b, hi) - incomplete_beta(a, b, lo);
}

// ------------------------- Beta concentration solver ------------------------

namespace {

double central_mass(double gamma, double c) {
    return beta_mass(1.0 + gamma * (c - 2.0), 1.0 + (1.0 - gamma) * (c - 2.0), 0.025, 0.975);
}

}  // namespace

double solve_beta_concentration(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw UsageError("gamma must lie in (0,1)");
    constexpr double target = 0.99;
    double lo = 2.0, hi = 1e6;
    // Bracketing: at c = 2 the distribution is uniform (mass 0.95 < target);
    // mass is increasing in c and tends to 1.
    if (!(central_mass(gamma, lo) < target))
        throw NumericalError("Beta concentration bracket failed at c = 2");
    if (!(central_mass(gamma, hi) > target))
        throw NumericalError("Beta concentration bracket failed at c = 1e6");
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double mass = central_mass(gamma, mid);
        if (std::abs(mass - target) <= 1e-8) return mid;
        (mass < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

BetaBinModel make_beta_models(const std::array<double, 4>& scores,
                              const DiscretizationBins& bins) {
    BetaBinModel model;
    for (int i = 0; i < 4; ++i) {
        const double lo = bins.edges[i], hi = bins.edges[i + 1];
        const double gamma = (scores[i] - lo) / (hi - lo);
        if (!(gamma > 0.0 && gamma < 1.0))
            throw DataError("expression score does not lie strictly inside its bin");
        const double c = solve_beta_concentration(gamma);
        model.gamma[i] = gamma;
        model.concentration[i] = c;
        model.alpha[i] = 1.0 + gamma * (c - 2.0);
        model.beta[i] = 1.0 + (1.0 - gamma) * (c - 2.0);
    }
    return model;
}

double dequantize(int label, const DiscretizationBins& bins, const BetaBinModel& model,
                  Rng& rng) {
    if (label < 0 || label > 3) throw DataError("outcome label outside {0..3}");
    const double lo = bins.edges[label], hi = bins.edges[label + 1];
    std::gamma_distribution<double> gx(model.alpha[label], 1.0);
    std::gamma_distribution<double> gy(model.beta[label], 1.0);
    const double x = gx(rng), y = gy(rng);
    const double z = (x + y > 0.0) ? x / (x + y) : 0.5;
    double value = lo + z * (hi - lo);
    // Keep the sample strictly inside the half-open bin so re-discretization
    // is exact (the top bin is closed at 1).
    if (value >= hi && label < 3) value = std::nextafter(hi, lo);
    if (value < lo) value = lo;
    return value;
}

// --------------------------------- file I/O --------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream stream(line);
    while (std::getline(stream, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
            field.pop_back();
        while (!field.empty() && field.front() == ' ') field.erase(field.begin());
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double_field(const std::string& field, const std::string& what) {
    try {
        std::size_t used = 0;
        const double value = std::stod(field, &used);
        if (used != field.size()) throw DataError("trailing characters in " + what);
        return value;
    } catch (const DataError&) {
        throw;
    } catch (const std::exception&) {
        throw DataError("cannot parse " + what + ": '" + field + "'");
    }
}

long parse_int_field(const std::string& field, const std::string& what) {
    try {
        std::size_t used = 0;
        const long value = std::stol(field, &used);
        if (used != field.size()) throw DataError("trailing characters in " + what);
        return value;
    } catch (const DataError&) {
        throw;
    } catch (const std::exception&) {
        throw DataError("cannot parse " + what + ": '" + field + "'");
    }
}

const nlohmann::json& require_field(const nlohmann::json& j, const char* name,
                                    const char* where) {
    if (!j.contains(name))
        throw DataError(std::string(where) + " missing field '" + name + "'");
    return j.at(name);
}

}  // namespace

void write_dataset(const Dataset& data, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const int N_t = data.num_times();
    const int N_c = data.num_cells();

    nlohmann::json manifest;
    manifest["format_version"] = 1;
    manifest["n"] = data.n;
    manifest["N_t"] = N_t;
    manifest["N_c"] = N_c;
    manifest["times"] = std::vector<double>(data.times.data(), data.times.data() + N_t);
    std::ofstream mout(fs::path(dir) / "dataset.json");
    if (!mout) throw DataError("cannot open dataset manifest for writing in " + dir);
    mout << manifest.dump(2) << "\n";

    std::ofstream bout(fs::path(dir) / "dataset.csv");
    if (!bout) throw DataError("cannot open dataset body for writing in " + dir);
    bout << "time_index,cell_index";
    for (int i = 1; i <= data.n; ++i) bout << ",m_" << i;
    bout << "\n";
    for (int t = 0; t < N_t; ++t)
        for (int c = 0; c < N_c; ++c) {
            bout << t << "," << c;
            for (int i = 0; i < data.n; ++i)
                bout << "," << static_cast<int>(data.outcomes[t](c, i));
            bout << "\n";
        }
    if (!bout) throw DataError("failed while writing dataset body in " + dir);
}

Dataset read_dataset(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream min(fs::path(dir) / "dataset.json");
    if (!min) throw DataError("cannot open dataset manifest in " + dir);
    nlohmann::json manifest;
    try {
        min >> manifest;
    } catch (const std::exception& e) {
        throw DataError(std::string("malformed dataset manifest: ") + e.what());
    }
    const char* where = "dataset manifest";
    const int version = require_field(manifest, "format_version", where).get<int>();
    if (version != 1) throw DataError("unsupported dataset format_version");
    const int n = require_field(manifest, "n", where).get<int>();
    const int N_t = require_field(manifest, "N_t", where).get<int>();
    const int N_c = require_field(manifest, "N_c", where).get<int>();
    const auto times = require_field(manifest, "times", where).get<std::vector<double>>();
    if (n < 1) throw DataError("dataset manifest has non-positive n");
    if (N_t < 1 || N_c < 1) throw DataError("dataset manifest has empty dimensions");
    if (static_cast<int>(times.size()) != N_t)
        throw DataError("dataset manifest times length does not match N_t");

    Dataset data;
    data.n = n;
    data.times = Eigen::Map<const RealVector>(times.data(), N_t);
    data.outcomes.assign(
        N_t, Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>::Constant(N_c, n, 255));

    std::ifstream bin(fs::path(dir) / "dataset.csv");
    if (!bin) throw DataError("cannot open dataset body in " + dir);
    std::string line;
    if (!std::getline(bin, line)) throw DataError("dataset body is empty");
    long rows = 0;
    while (std::getline(bin, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != 2 + n)
            throw DataError("dataset row has wrong column count");
        const long t = parse_int_field(fields[0], "time_index");
        const long c = parse_int_field(fields[1], "cell_index");
        if (t < 0 || t >= N_t) throw DataError("time_index out of range");
        if (c < 0 || c >= N_c) throw DataError("cell_index out of range");
        for (int i = 0; i < n; ++i) {
            const long label = parse_int_field(fields[2 + i], "outcome label");
            if (label < 0 || label > 3) throw DataError("outcome label outside {0..3}");
            data.outcomes[t](c, i) = static_cast<std::uint8_t>(label);
        }
        ++rows;
    }
    if (rows != static_cast<long>(N_t) * N_c)
        throw DataError("dataset row count does not match N_t * N_c");
    for (const auto& block : data.outcomes)
        if ((block.array() == 255).any())
            throw DataError("dataset body has duplicate or missing (time, cell) rows");
    return data;
}

void write_model_params_json(const ModelParams& params, const std::string& path) {
    const int n = params.weights.n;
    nlohmann::json j;
    j["n"] = n;
    j["w_max"] = params.weights.w_max;
    std::vector<std::vector<double>> rows(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) rows[i][k] = params.weights.w(i, k);
    j["weights"] = rows;
    j["theta"] = std::vector<double>(params.thetas.data(), params.thetas.data() + n);
    j["phi"] = std::vector<double>(params.phis.data(), params.phis.data() + n);
    std::ofstream out(path);
    if (!out) throw DataError("cannot open parameter file for writing: " + path);
    out << j.dump(2) << "\n";
}

ModelParams read_model_params_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open parameter file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw DataError(std::string("malformed parameter file: ") + e.what());
    }
    const char* where = "parameter file";
    const int n = require_field(j, "n", where).get<int>();
    if (n < 1) throw DataError("parameter file has non-positive n");
    ModelParams params;
    params.weights.n = n;
    params.weights.w_max = require_field(j, "w_max", where).get<double>();
    const auto rows = require_field(j, "weights", where).get<std::vector<std::vector<double>>>();
    if (static_cast<int>(rows.size()) != n) throw DataError("weights row count mismatch");
    params.weights.w.resize(n, n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[i].size()) != n)
            throw DataError("weights column count mismatch");
        for (int k = 0; k < n; ++k) params.weights.w(i, k) = rows[i][k];
    }
    const auto theta = require_field(j, "theta", where).get<std::vector<double>>();
    const auto phi = require_field(j, "phi", where).get<std::vector<double>>();
    if (static_cast<int>(theta.size()) != n || static_cast<int>(phi.size()) != n)
        throw DataError("theta/phi length mismatch");
    params.thetas = Eigen::Map<const RealVector>(theta.data(), n);
    params.phis = Eigen::Map<const RealVector>(phi.data(), n);
    check_weights(params.weights);
    return params;
}

ExpressionTable read_expression_csv(const std::string& path, bool require_pseudotime) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open expression file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("expression file is empty");
    const auto header = split_csv_line(line);

    int n = 0;
    while (n < static_cast<int>(header.size()) &&
           header[n] == "gene_" + std::to_string(n + 1))
        ++n;
    if (n == 0) throw DataError("expression header must start with gene_1");
    bool has_pseudotime = false;
    if (n < static_cast<int>(header.size())) {
        if (header[n] != "pseudotime" || n + 1 != static_cast<int>(header.size()))
            throw DataError("expression header must be gene_1..gene_n[, pseudotime]");
        has_pseudotime = true;
    }
    if (require_pseudotime && !has_pseudotime)
        throw DataError("expression file is missing the pseudotime column");

    std::vector<std::vector<double>> rows;
    std::vector<double> pseudotime;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw DataError("expression row has wrong column count");
        std::vector<double> row(n);
        for (int i = 0; i < n; ++i) row[i] = parse_double_field(fields[i], "expression value");
        rows.push_back(std::move(row));
        if (has_pseudotime)
            pseudotime.push_back(parse_double_field(fields[n], "pseudotime"));
    }
    if (rows.empty()) throw DataError("expression file has no data rows");

    ExpressionTable table;
    table.values.resize(static_cast<int>(rows.size()), n);
    for (int r = 0; r < static_cast<int>(rows.size()); ++r)
        for (int i = 0; i < n; ++i) table.values(r, i) = rows[r][i];
    table.pseudotime = std::move(pseudotime);
    return table;
}

void write_expression_csv(const ExpressionTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open expression file for writing: " + path);
    const int cells = static_cast<int>(table.values.rows());
    const int n = static_cast<int>(table.values.cols());
    const bool has_pseudotime = !table.pseudotime.empty();
    if (has_pseudotime && static_cast<int>(table.pseudotime.size()) != cells)
        throw DataError("pseudotime length does not match cell count");
    for (int i = 1; i <= n; ++i) out << (i > 1 ? "," : "") << "gene_" << i;
    if (has_pseudotime) out << ",pseudotime";
    out << "\n";
    for (int r = 0; r < cells; ++r) {
        for (int i = 0; i < n; ++i)
            out << (i > 0 ? "," : "") << format_double(table.values(r, i));
        if (has_pseudotime) out << "," << format_double(table.pseudotime[r]);
        out << "\n";
    }
    if (!out) throw DataError("failed while writing expression file: " + path);
}

Dataset ingest_expression(const std::string& path, const SingleQubitPOVM& povm, int N_t) {
    const ExpressionTable table = read_expression_csv(path, /*require_pseudotime=*/true);
    const int n = static_cast<int>(table.values.cols());
    const DiscretizationBins bins = make_bins(povm.scores);
    const PseudotimeBinning binning = bin_pseudotime(table.pseudotime, N_t);

    int N_c = static_cast<int>(binning.bin_cells[0].size());
    for (const auto& members : binning.bin_cells)
        N_c = std::min(N_c, static_cast<int>(members.size()));
    if (N_c < 1) throw DataError("a pseudotime bin is empty");

    Dataset data;
    data.n = n;
    data.times = binning.representative;
    data.outcomes.assign(
        N_t, Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>(N_c, n));
    // Larger bins are truncated to the common population; the earliest cells
    // in pseudotime order are kept so the choice is deterministic.
    for (int t = 0; t < N_t; ++t)
        for (int c = 0; c < N_c; ++c) {
            const int cell = binning.bin_cells[t][c];
            for (int i = 0; i < n; ++i)
                data.outcomes[t](c, i) =
                    static_cast<std::uint8_t>(discretize(table.values(cell, i), bins));
        }
    return data;
}

ExpressionTable dequantize_dataset(const Dataset& data, const SingleQubitPOVM& povm,
                                   Rng& rng) {
    const DiscretizationBins bins = make_bins(povm.scores);
    const BetaBinModel model = make_beta_models(povm.scores, bins);
    const int N_t = data.num_times();
    const int N_c = data.num_cells();
    ExpressionTable table;
    table.values.resize(N_t * N_c, data.n);
    table.pseudotime.resize(static_cast<std::size_t>(N_t) * N_c);
    for (int t = 0; t < N_t; ++t)
        for (int c = 0; c < N_c; ++c) {
            const int row = t * N_c + c;
            for (int i = 0; i < data.n; ++i)
                table.values(row, i) = dequantize(data.outcomes[t](c, i), bins, model, rng);
            table.pseudotime[row] = data.times(t);
        }
    return table;
}

}  // namespace qhl
