#include "rescrb/mc_harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "rescrb/bounds.hpp"
#include "rescrb/errors.hpp"
#include "rescrb/matcalc.hpp"
#include "rescrb/special.hpp"

namespace rescrb::mc {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// A scatter estimator in the sweep; an empty weight means the CSCM.
struct ScatterSlot {
    std::string column;
    std::optional<estimators::WeightSpec> weight;
};

struct Accumulator {
    MatrixXd mean_sum;
    std::size_t mean_count = 0;
    std::vector<MatrixXd> scatter_sums;
    std::vector<std::size_t> scatter_counts;
    std::vector<std::size_t> scatter_failures;

    Accumulator(std::size_t n, std::size_t slots)
        : mean_sum(MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))),
          scatter_sums(slots, MatrixXd::Zero(static_cast<Eigen::Index>(matcalc::vecs_size(n)),
                                             static_cast<Eigen::Index>(matcalc::vecs_size(n)))),
          scatter_counts(slots, 0),
          scatter_failures(slots, 0) {}

    void merge(const Accumulator& other) {
        mean_sum += other.mean_sum;
        mean_count += other.mean_count;
        for (std::size_t k = 0; k < scatter_sums.size(); ++k) {
            scatter_sums[k] += other.scatter_sums[k];
            scatter_counts[k] += other.scatter_counts[k];
            scatter_failures[k] += other.scatter_failures[k];
        }
    }
};

std::string huber_column(double u) { return "eps_hub_" + format_number(u); }

std::vector<ScatterSlot> scatter_slots(const ExperimentConfig& config) {
    std::vector<ScatterSlot> slots;
    if (config.estimators.cscm) slots.push_back({"eps_cscm", std::nullopt});
    if (config.estimators.tyler) slots.push_back({"eps_tyler", estimators::WeightSpec::tyler()});
    for (double u : config.estimators.huber_u) {
        slots.push_back({huber_column(u), estimators::WeightSpec::huber(config.n, u)});
    }
    return slots;
}

struct TrialContext {
    const ExperimentConfig& config;
    const Truth& truth;
    MatrixXd sigma_sqrt;
    VectorXd vecs_truth;
    std::vector<ScatterSlot> slots;
    std::size_t shape_index;
};

void run_block(const TrialContext& ctx, std::size_t block, Accumulator& acc) {
    const auto& cfg = ctx.config;
    const std::size_t first = block * kTrialBlock;
    const std::size_t last = std::min(cfg.runs, first + kTrialBlock);
    for (std::size_t trial = first; trial < last; ++trial) {
        special::RngStream rng(cfg.seed, special::mix_stream_id(ctx.shape_index, trial));
        const MatrixXd x = sample_res(ctx.truth.params.mu, ctx.sigma_sqrt, ctx.truth.generator,
                                      cfg.m, rng);
        const VectorXd mu_hat = estimators::sample_mean(x);
        if (cfg.estimators.sample_mean) {
            const VectorXd err = mu_hat - ctx.truth.params.mu;
            acc.mean_sum.noalias() += err * err.transpose();
            ++acc.mean_count;
        }
        for (std::size_t k = 0; k < ctx.slots.size(); ++k) {
            try {
                const MatrixXd est =
                    ctx.slots[k].weight
                        ? estimators::m_estimate(x, mu_hat, *ctx.slots[k].weight, cfg.fixed_point)
                        : estimators::cscm(x, mu_hat);
                const VectorXd err = matcalc::vecs(est) - ctx.vecs_truth;
                acc.scatter_sums[k].noalias() += err * err.transpose();
                ++acc.scatter_counts[k];
            } catch (const NumericalError&) {
                ++acc.scatter_failures[k];
            }
        }
    }
}

double mse_index(const MatrixXd& sum, std::size_t count) {
    if (count == 0) return std::numeric_limits<double>::quiet_NaN();
    return matcalc::frobenius_norm(sum / static_cast<double>(count));
}

Accumulator run_trials(const TrialContext& ctx, const ExecutionOptions& exec) {
    const std::size_t blocks = (ctx.config.runs + kTrialBlock - 1) / kTrialBlock;
    std::vector<std::size_t> order(blocks);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (exec.schedule_seed != 0) {
        special::RngStream shuffle(exec.schedule_seed, ctx.shape_index);
        for (std::size_t i = blocks; i > 1; --i) {
            std::swap(order[i - 1], order[shuffle.next_u64() % i]);
        }
    }

    const std::size_t n = ctx.config.n;
    Accumulator total(n, ctx.slots.size());
    std::map<std::size_t, Accumulator> pending;
    std::size_t next_to_merge = 0;
    std::atomic<std::size_t> cursor{0};
    std::mutex mutex;
    std::exception_ptr failure;

    // Finished blocks wait in `pending` and are merged strictly in index order.
    auto worker = [&] {
        for (;;) {
            const std::size_t slot = cursor.fetch_add(1);
            if (slot >= blocks) return;
            Accumulator acc(n, ctx.slots.size());
            try {
                run_block(ctx, order[slot], acc);
            } catch (...) {
                std::lock_guard lock(mutex);
                if (!failure) failure = std::current_exception();
                cursor.store(blocks);
                return;
            }
            std::lock_guard lock(mutex);
            pending.emplace(order[slot], std::move(acc));
            for (auto it = pending.find(next_to_merge); it != pending.end();
                 it = pending.find(next_to_merge)) {
                total.merge(it->second);
                pending.erase(it);
                ++next_to_merge;
            }
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(exec.threads,
                                                             static_cast<unsigned>(blocks)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return total;
}

}  // namespace

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& msg) { throw InvalidInput("config: " + msg); };
    if (n < 2) fail("n must be at least 2");
    if (m <= n) fail("m must exceed n");
    if (runs < 1) fail("runs must be at least 1");
    if (!(rho > -1.0 && rho < 1.0)) fail("rho must lie in (-1, 1)");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) fail("power must be positive");
    if (!std::isfinite(mu_fill)) fail("mu_fill must be finite");
    if (shapes.empty()) fail("shape grid is empty");
    for (double s : shapes) {
        if (family == Family::StudentT && !(s > 2.0 && std::isfinite(s))) {
            fail("t shape values must exceed 2");
        }
        if (family == Family::GeneralizedGaussian && !(s > 0.0 && std::isfinite(s))) {
            fail("GG shape values must be positive");
        }
    }
    for (double u : estimators.huber_u) {
        if (!(u > 0.0 && u <= 1.0)) fail("huber_u values must lie in (0, 1]");
    }
    if (!estimators.sample_mean && !estimators.any_scatter()) fail("no estimator selected");
    fixed_point.validate();
}

std::vector<double> default_shapes(Family family) {
    if (family == Family::StudentT) return {2.1, 3.0, 5.0, 10.0, 20.0, 50.0, 100.0};
    std::vector<double> grid;
    for (int k = 1; k <= 10; ++k) grid.push_back(0.2 * k);
    return grid;
}

ExperimentConfig figure_config(int figure) {
    if (figure < 1 || figure > 4) throw InvalidInput("figure must be 1, 2, 3 or 4");
    ExperimentConfig cfg;
    cfg.family = figure <= 2 ? Family::StudentT : Family::GeneralizedGaussian;
    cfg.shapes = default_shapes(cfg.family);
    const bool mean_figure = figure == 1 || figure == 3;
    cfg.estimators.sample_mean = mean_figure;
    cfg.estimators.cscm = !mean_figure;
    cfg.estimators.tyler = !mean_figure;
    if (mean_figure) cfg.estimators.huber_u.clear();
    return cfg;
}

Truth build_truth(const ExperimentConfig& config, double shape) {
    if (!(config.rho > -1.0 && config.rho < 1.0)) throw InvalidInput("rho must lie in (-1, 1)");
    RESParams params{VectorXd::Constant(static_cast<Eigen::Index>(config.n), config.mu_fill),
                     matcalc::toeplitz(config.rho, config.n), true};
    params.validate();
    return {std::move(params), calibrate_scale(config.family, shape, config.sigma2, config.n)};
}

MatrixXd mse_matrix(const std::vector<VectorXd>& estimates, const VectorXd& truth) {
    if (estimates.empty()) throw InvalidInput("mse_matrix: no estimates");
    MatrixXd sum = MatrixXd::Zero(truth.size(), truth.size());
    for (const auto& e : estimates) {
        if (e.size() != truth.size()) throw InvalidInput("mse_matrix: dimension mismatch");
        const VectorXd err = e - truth;
        sum.noalias() += err * err.transpose();
    }
    return sum / static_cast<double>(estimates.size());
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config, const ExecutionOptions& exec) {
    config.validate();
    std::vector<ResultRow> rows;
    rows.reserve(config.shapes.size());
    for (std::size_t idx = 0; idx < config.shapes.size(); ++idx) {
        const auto start = std::chrono::steady_clock::now();
        const double shape = config.shapes[idx];
        const Truth truth = build_truth(config, shape);
        const auto report = bounds::compute_bounds(truth.params, truth.generator, config.m);

        const TrialContext ctx{config, truth, matcalc::sym_sqrt(truth.params.sigma),
                               matcalc::vecs(truth.params.sigma), scatter_slots(config), idx};
        const Accumulator acc = run_trials(ctx, exec);

        ResultRow row;
        row.shape = shape;
        row.trials = config.runs;
        if (config.estimators.sample_mean) {
            row.estimators.push_back(
                {"eps_mu_sample_mean", mse_index(acc.mean_sum, acc.mean_count), 0});
        }
        const double allowed = 1e-3 * static_cast<double>(config.runs);
        for (std::size_t k = 0; k < ctx.slots.size(); ++k) {
            row.estimators.push_back({ctx.slots[k].column,
                                      mse_index(acc.scatter_sums[k], acc.scatter_counts[k]),
                                      acc.scatter_failures[k]});
            row.failures += acc.scatter_failures[k];
            if (static_cast<double>(acc.scatter_failures[k]) > allowed) row.failed = true;
        }
        row.eps_ccrb_sigma = report.eps_ccrb_sigma;
        row.eps_cscrb_mu = report.eps_cscrb_mu;
        row.eps_cscrb_sigma = report.eps_cscrb_sigma;
        row.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string format_number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", value);
    return buf;
}

std::string format_csv(const std::vector<ResultRow>& rows) {
    if (rows.empty()) throw InvalidInput("write_csv: no rows");
    std::ostringstream os;
    os << "shape";
    for (const auto& e : rows.front().estimators) os << ',' << e.column;
    os << ",eps_ccrb_sigma,eps_cscrb_mu,eps_cscrb_sigma,trials,failures\n";
    for (const auto& row : rows) {
        os << format_number(row.shape);
        for (const auto& e : row.estimators) os << ',' << format_number(e.eps);
        os << ',' << format_number(row.eps_ccrb_sigma) << ',' << format_number(row.eps_cscrb_mu)
           << ',' << format_number(row.eps_cscrb_sigma) << ',' << row.trials << ','
           << row.failures << '\n';
    }
    return os.str();
}

std::string format_json(const ExperimentConfig& config, const std::vector<ResultRow>& rows) {
    // Values are rounded through format_number, matching the CSV.
    auto rounded = [](double v) -> nlohmann::ordered_json {
        if (!std::isfinite(v)) return nullptr;
        return std::stod(format_number(v));
    };
    nlohmann::ordered_json doc;
    auto& cfg = doc["config"];
    cfg["family"] = family_name(config.family);
    cfg["n"] = config.n;
    cfg["m"] = config.m;
    cfg["rho"] = config.rho;
    cfg["power"] = config.sigma2;
    cfg["mu_fill"] = config.mu_fill;
    cfg["runs"] = config.runs;
    cfg["seed"] = config.seed;
    auto& out = doc["rows"];
    out = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json r;
        r["shape"] = rounded(row.shape);
        for (const auto& e : row.estimators) r[e.column] = rounded(e.eps);
        r["eps_ccrb_sigma"] = rounded(row.eps_ccrb_sigma);
        r["eps_cscrb_mu"] = rounded(row.eps_cscrb_mu);
        r["eps_cscrb_sigma"] = rounded(row.eps_cscrb_sigma);
        r["trials"] = row.trials;
        r["failures"] = row.failures;
        out.push_back(std::move(r));
    }
    return doc.dump(2) + "\n";
}

namespace {

void write_text(const std::string& text, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace

void write_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
    write_text(format_csv(rows), path);
}

void write_json(const ExperimentConfig& config, const std::vector<ResultRow>& rows,
                const std::filesystem::path& path) {
    write_text(format_json(config, rows), path);
}

}  // namespace rescrb::mc
