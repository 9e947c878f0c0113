// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit when any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "rescrb/bounds.hpp"
#include "rescrb/cli.hpp"
#include "rescrb/estimators.hpp"
#include "rescrb/matcalc.hpp"
#include "rescrb/mc_harness.hpp"
#include "rescrb/res_model.hpp"
#include "support/oracles.hpp"

using namespace rescrb;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Outcome {
    bool ok;
    std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

mc::ExperimentConfig base_config(Family family, double shape) {
    mc::ExperimentConfig cfg;
    cfg.family = family;
    cfg.shapes = {shape};
    cfg.n = 8;
    cfg.m = 24;
    cfg.rho = 0.8;
    cfg.sigma2 = 4.0;
    cfg.runs = 10000;
    cfg.seed = 2024;
    return cfg;
}

// 1. Analytic scores against central differences of res_logpdf.
Outcome scores_vs_finite_differences() {
    const std::size_t n = 8;
    const std::vector<std::pair<Family, double>> families{{Family::StudentT, 5.0},
                                                          {Family::GeneralizedGaussian, 0.7},
                                                          {Family::GeneralizedGaussian, 1.0},
                                                          {Family::GeneralizedGaussian, 2.0}};
    double worst = 0.0;
    special::RngStream rng(101, 0);
    for (const auto& [family, shape] : families) {
        const auto gen = calibrate_scale(family, shape, 4.0, n);
        for (int point = 0; point < 100; ++point) {
            RESParams p{VectorXd::Zero(8), oracle::random_trace_normalized_spd(n, rng), true};
            for (auto& v : p.mu) v = special::sample_standard_normal(rng);
            const VectorXd x = sample_res(p, gen, 1, rng).row(0).transpose();

            VectorXd fd_mu(8);
            for (Eigen::Index i = 0; i < 8; ++i) {
                const double h = 1e-6 * std::max(1.0, std::abs(p.mu(i)));
                fd_mu(i) = oracle::central_difference(
                    [&](double v) {
                        RESParams q = p;
                        q.mu(i) = v;
                        return res_logpdf(q, gen, x);
                    },
                    p.mu(i), h);
            }
            const VectorXd base = matcalc::vecs(p.sigma);
            VectorXd fd_sigma(base.size());
            for (Eigen::Index i = 0; i < base.size(); ++i) {
                const double h = 1e-6 * std::max(1.0, std::abs(base(i)));
                fd_sigma(i) = oracle::central_difference(
                    [&](double v) {
                        VectorXd s = base;
                        s(i) = v;
                        return res_logpdf({p.mu, matcalc::unvecs(s, n), false}, gen, x);
                    },
                    base(i), h);
            }
            worst = std::max(worst, (bounds::score_mu(p, gen, x) - fd_mu).norm() / fd_mu.norm());
            worst = std::max(worst,
                             (bounds::score_sigma(p, gen, x) - fd_sigma).norm() / fd_sigma.norm());
        }
    }
    return {worst <= 1e-5, fmt("max relative error %.2e over 400 points (limit 1e-5)", worst)};
}

// 2. Closed-form moments against quadrature of q_pdf.
Outcome moments_vs_quadrature() {
    double worst = 0.0;
    const std::vector<DensityGenerator> gens{
        DensityGenerator::student_t(3.0, 0.8), DensityGenerator::student_t(5.0, 5.0 / 12.0),
        DensityGenerator::student_t(30.0, 1.5), DensityGenerator::generalized_gaussian(0.3, 1.0),
        DensityGenerator::generalized_gaussian(0.7, 0.6), DensityGenerator::generalized_gaussian(1.0, 1.0),
        DensityGenerator::generalized_gaussian(2.0, 2.5)};
    for (const auto& gen : gens) {
        for (std::size_t n : {2u, 4u, 8u}) {
            const auto mm = moments(gen, n);
            auto expect = [&](const std::function<double(double)>& h) {
                return oracle::integrate_half_line(
                    [&](double q) { return h(q) * q_pdf(gen, n, q); });
            };
            const double refs[4] = {
                expect([&](double q) { return q * psi(gen, n, q); }),
                expect([&](double q) { return q * std::pow(psi(gen, n, q), 2); }),
                expect([&](double q) { return q * q * std::pow(psi(gen, n, q), 2); }),
                expect([](double q) { return q; })};
            const double vals[4] = {mm.eQpsi, mm.eQpsi2, mm.eQ2psi2, mm.eQ};
            for (int k = 0; k < 4; ++k) {
                worst = std::max(worst, std::abs(vals[k] - refs[k]) / std::abs(refs[k]));
            }
        }
    }
    return {worst <= 1e-8,
            fmt("max relative error %.2e over 7 generators x N in {2,4,8} (limit 1e-8)", worst)};
}

// 3. Information blocks against sample averages of outer products of scores.
Outcome information_monte_carlo() {
    const auto cfg = base_config(Family::StudentT, 5.0);
    const auto truth = mc::build_truth(cfg, 5.0);
    const auto& p = truth.params;
    const auto mm = moments(truth.generator, 8);
    const auto fim = bounds::fim_blocks(p.sigma, mm);
    const MatrixXd sfim = bounds::sfim_sigma_block(p.sigma, mm);

    const int draws = 100000;
    special::RngStream rng(303, 0);
    const MatrixXd x = sample_res(p, truth.generator, draws, rng);
    MatrixXd c_mu = MatrixXd::Zero(8, 8), c_sigma = MatrixXd::Zero(36, 36),
             c_eff = MatrixXd::Zero(36, 36);
    for (int k = 0; k < draws; ++k) {
        const VectorXd xi = x.row(k).transpose();
        const VectorXd sm = bounds::score_mu(p, truth.generator, xi);
        const VectorXd ss = bounds::score_sigma(p, truth.generator, xi);
        const VectorXd se = bounds::efficient_score_sigma(p, truth.generator, xi);
        c_mu.noalias() += sm * sm.transpose();
        c_sigma.noalias() += ss * ss.transpose();
        c_eff.noalias() += se * se.transpose();
    }
    const double e_mu = oracle::rel_frobenius(c_mu / draws, fim.c_mu);
    const double e_sigma = oracle::rel_frobenius(c_sigma / draws, fim.c_sigma);
    const double e_eff = oracle::rel_frobenius(c_eff / draws, sfim);
    const bool ok = e_mu <= 0.02 && e_sigma <= 0.02 && e_eff <= 0.02;
    return {ok, fmt("relative Frobenius gaps FIM_mu %.4f, FIM_sigma %.4f, SFIM %.4f (limit 0.02)",
                    e_mu, e_sigma, e_eff)};
}

// 4. Exact structural identities.
Outcome structural_identities() {
    double worst_null = 0.0, worst_gap = 0.0, worst_rot = 0.0;
    special::RngStream rng(404, 0);
    for (const auto& [family, shape] : std::vector<std::pair<Family, double>>{
             {Family::StudentT, 5.0}, {Family::StudentT, 2.5}, {Family::GeneralizedGaussian, 0.4},
             {Family::GeneralizedGaussian, 1.6}}) {
        const auto truth = mc::build_truth(base_config(family, shape), shape);
        const auto& p = truth.params;
        const auto mm = moments(truth.generator, 8);
        const MatrixXd sfim = bounds::sfim_sigma_block(p.sigma, mm);
        const VectorXd vs = matcalc::vecs(p.sigma);
        worst_null = std::max(worst_null, (sfim * vs).norm() / (sfim.norm() * vs.norm()));

        const auto [a1, a2] = bounds::a_coefficients(mm, 8);
        const VectorXd dv =
            matcalc::duplication_matrix(8).transpose() * matcalc::vec(matcalc::spd_inverse(p.sigma));
        const MatrixXd expected = (a1 + a2 / 8.0) * dv * dv.transpose();
        worst_gap = std::max(worst_gap, oracle::rel_frobenius(
                                            bounds::fim_blocks(p.sigma, mm).c_sigma - sfim, expected));

        const MatrixXd u = bounds::trace_constraint_basis(8);
        const MatrixXd rotated = u * oracle::random_orthogonal(static_cast<std::size_t>(u.cols()), rng);
        worst_rot = std::max(worst_rot, oracle::rel_frobenius(bounds::ccrb(p, mm, 24, rotated).ccrb_sigma,
                                                              bounds::ccrb(p, mm, 24, u).ccrb_sigma));
        worst_rot = std::max(worst_rot,
                             oracle::rel_frobenius(bounds::cscrb(p, mm, 24, rotated).cscrb_sigma,
                                                   bounds::cscrb(p, mm, 24, u).cscrb_sigma));
    }
    const bool ok = worst_null <= 1e-10 && worst_gap <= 1e-10 && worst_rot <= 1e-10;
    return {ok, fmt("SFIM vecs(Sigma) %.1e, rank-one gap %.1e, basis rotation %.1e (limit 1e-10)",
                    worst_null, worst_gap, worst_rot)};
}

// 5 and 6 share one Gaussian sweep.
const std::vector<mc::ResultRow>& gaussian_rows() {
    static const std::vector<mc::ResultRow> rows = [] {
        auto cfg = base_config(Family::GeneralizedGaussian, 1.0);
        cfg.estimators = {true, true, false, {}};
        return mc::run_experiment(cfg);
    }();
    return rows;
}

double column(const mc::ResultRow& row, const std::string& name) {
    for (const auto& e : row.estimators) {
        if (e.column == name) return e.eps;
    }
    return std::nan("");
}

Outcome gaussian_mean_efficiency() {
    const auto& row = gaussian_rows().front();
    const double eps = column(row, "eps_mu_sample_mean");
    const double rel = std::abs(eps - row.eps_cscrb_mu) / row.eps_cscrb_mu;
    return {rel <= 0.05, fmt("eps_mu %.5f vs eps_CSCRB,mu %.5f, relative gap %.4f (limit 0.05)", eps,
                             row.eps_cscrb_mu, rel)};
}

Outcome gaussian_cscm_efficiency() {
    const auto& row = gaussian_rows().front();
    const double eps = column(row, "eps_cscm");
    const double rel = std::abs(eps - row.eps_cscrb_sigma) / row.eps_cscrb_sigma;
    return {rel <= 0.15, fmt("eps_CSCM %.5f vs eps_CSCRB,Sigma %.5f, relative gap %.4f (limit 0.15)",
                             eps, row.eps_cscrb_sigma, rel)};
}

// 7. Bounds only.
Outcome bound_gap_monotonicity() {
    auto ratio = [](Family family, double shape, double* cscrb, double* ccrb) {
        const auto truth = mc::build_truth(base_config(family, shape), shape);
        const auto r = bounds::compute_bounds(truth.params, truth.generator, 24);
        *cscrb = r.eps_cscrb_sigma;
        *ccrb = r.eps_ccrb_sigma;
        return r.eps_cscrb_sigma / r.eps_ccrb_sigma;
    };
    double s = 0.0, c = 0.0;
    const double r3 = ratio(Family::StudentT, 3.0, &s, &c);
    const double r10 = ratio(Family::StudentT, 10.0, &s, &c);
    const double r30 = ratio(Family::StudentT, 30.0, &s, &c);
    bool dominated = true;
    double min_margin = 1e300;
    for (Family family : {Family::StudentT, Family::GeneralizedGaussian}) {
        for (double shape : mc::default_shapes(family)) {
            ratio(family, shape, &s, &c);
            min_margin = std::min(min_margin, (s - c) / c);
            dominated = dominated && s >= c;
        }
    }
    const bool ok = r3 < r10 && r10 < r30 && dominated;
    return {ok, fmt("ratios %.5f < %.5f < %.5f", r3, r10, r30) +
                    fmt("; min relative margin CSCRB-CCRB over both grids %.3e", min_margin)};
}

// 8. One fixed Gaussian dataset.
Outcome huber_interpolation() {
    const RESParams p{VectorXd::Zero(8), matcalc::toeplitz(0.8, 8), true};
    special::RngStream rng(808, 0);
    const MatrixXd x = sample_res(p, DensityGenerator::generalized_gaussian(1.0, 1.0), 100, rng);
    const VectorXd mu = estimators::sample_mean(x);
    const MatrixXd s_cscm = estimators::cscm(x, mu);
    const MatrixXd s_tyler = estimators::m_estimate(x, mu, estimators::WeightSpec::tyler());
    const double near_one = oracle::rel_frobenius(
        estimators::m_estimate(x, mu, estimators::WeightSpec::huber(8, 0.999)), s_cscm);
    const double near_zero = oracle::rel_frobenius(
        estimators::m_estimate(x, mu, estimators::WeightSpec::huber(8, 1e-3)), s_tyler);
    return {near_one <= 0.02 && near_zero <= 0.01,
            fmt("Hub(0.999) vs CSCM %.2e (limit 0.02), Hub(0.001) vs Tyler %.2e (limit 0.01)",
                near_one, near_zero)};
}

// 9. Huber ordering at lambda = 20, with paired delta-method standard errors.
Outcome huber_ordering() {
    auto cfg = base_config(Family::StudentT, 20.0);
    cfg.estimators = {false, false, false, {0.9, 0.5, 0.1}};
    const auto truth = mc::build_truth(cfg, 20.0);
    const MatrixXd root = matcalc::sym_sqrt(truth.params.sigma);
    const VectorXd v0 = matcalc::vecs(truth.params.sigma);
    std::vector<estimators::WeightSpec> specs;
    for (double u : cfg.estimators.huber_u) specs.push_back(estimators::WeightSpec::huber(8, u));

    const std::size_t runs = cfg.runs;
    std::vector<MatrixXd> errors(3, MatrixXd(36, static_cast<Eigen::Index>(runs)));
    for (std::size_t r = 0; r < runs; ++r) {
        special::RngStream rng(cfg.seed, special::mix_stream_id(0, r));
        const MatrixXd x = sample_res(truth.params.mu, root, truth.generator, cfg.m, rng);
        const VectorXd mu = estimators::sample_mean(x);
        for (std::size_t k = 0; k < 3; ++k) {
            errors[k].col(static_cast<Eigen::Index>(r)) =
                matcalc::vecs(estimators::m_estimate(x, mu, specs[k], cfg.fixed_point)) - v0;
        }
    }
    std::vector<MatrixXd> mse(3);
    std::vector<double> eps(3);
    std::vector<VectorXd> lin(3);
    for (std::size_t k = 0; k < 3; ++k) {
        mse[k] = errors[k] * errors[k].transpose() / static_cast<double>(runs);
        eps[k] = mse[k].norm();
        // Linearization of ||mean(e e^T)||_F per trial: e^T MSE e / eps.
        lin[k] = (errors[k].transpose() * mse[k]).cwiseProduct(errors[k].transpose()).rowwise().sum() /
                 eps[k];
    }
    auto se_diff = [&](std::size_t a, std::size_t b) {
        const VectorXd d = lin[a] - lin[b];
        const double mean = d.mean();
        return std::sqrt((d.array() - mean).square().sum() / static_cast<double>(runs - 1) /
                         static_cast<double>(runs));
    };
    const double se01 = se_diff(0, 1), se12 = se_diff(1, 2);

    // Cross-check against the harness on the same streams.
    const auto row = mc::run_experiment(cfg).front();
    double harness_gap = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        harness_gap = std::max(harness_gap, std::abs(row.estimators[k].eps - eps[k]) / eps[k]);
    }
    const bool ok = eps[0] <= eps[1] + 3.0 * se01 && eps[1] <= eps[2] + 3.0 * se12 &&
                    harness_gap <= 1e-9;
    return {ok, fmt("Hub(0.9) %.5f, Hub(0.5) %.5f, Hub(0.1) %.5f", eps[0], eps[1], eps[2]) +
                    fmt("; paired SE %.5f and %.5f; harness agreement %.1e", se01, se12,
                        harness_gap)};
}

// 10. Byte-identical reproduce output.
Outcome reproducibility() {
    const auto root = std::filesystem::temp_directory_path() / "rescrb_acceptance";
    std::filesystem::remove_all(root);
    std::vector<std::string> files;
    for (const char* run : {"a", "b"}) {
        std::ostringstream out, err;
        const int code = cli::dispatch({"reproduce", "--figure", "2", "--runs", "1000", "--seed", "7",
                                        "--out-dir", (root / run).string()},
                                       out, err);
        if (code != 0) return {false, "reproduce exited with code " + std::to_string(code)};
        std::ifstream in(root / run / "fig2.csv", std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        files.push_back(buf.str());
    }
    std::filesystem::remove_all(root);
    const bool ok = !files[0].empty() && files[0] == files[1];
    return {ok, "fig2.csv " + std::string(ok ? "identical" : "differs") + " across two runs (" +
                    std::to_string(files[0].size()) + " bytes)"};
}

struct Criterion {
    int id;
    const char* name;
    double time_limit;
    Outcome (*check)();
};

}  // namespace

int main() {
    const Criterion criteria[] = {
        {1, "score correctness", 1.0, scores_vs_finite_differences},
        {2, "closed-form moments vs quadrature", 5.0, moments_vs_quadrature},
        {3, "FIM/SFIM Monte Carlo oracle", 30.0, information_monte_carlo},
        {4, "structural identities", 1.0, structural_identities},
        {5, "Gaussian sample-mean efficiency", 60.0, gaussian_mean_efficiency},
        {6, "CSCM near-efficiency at Gaussianity", 120.0, gaussian_cscm_efficiency},
        {7, "bound-gap monotonicity", 10.0, bound_gap_monotonicity},
        {8, "Huber interpolation", 1.0, huber_interpolation},
        {9, "Huber ordering on t data", 300.0, huber_ordering},
        {10, "reproducibility", 120.0, reproducibility},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome{false, ""};
        try {
            outcome = c.check();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs < c.time_limit;
        const bool ok = outcome.ok && in_time;
        if (!ok) ++failed;
        std::printf("[%s] criterion %d: %s: %s; %.2f s (limit %.0f s)\n", ok ? "PASS" : "FAIL", c.id,
                    c.name, outcome.detail.c_str(), secs, c.time_limit);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed,
                std::size(criteria));
    return failed == 0 ? 0 : 1;
}
