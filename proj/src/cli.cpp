#include "rescrb/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <ostream>

#include <CLI11.hpp>

#include "rescrb/bounds.hpp"
#include "rescrb/dataset.hpp"
#include "rescrb/errors.hpp"
#include "rescrb/estimators.hpp"
#include "rescrb/matcalc.hpp"
#include "rescrb/mc_harness.hpp"
#include "rescrb/res_model.hpp"

namespace rescrb::cli {

namespace {

struct ModelArgs {
    std::string family;
    double shape = 0.0;
    std::size_t n = 8;
    std::size_t m = 24;
    double rho = 0.8;
    double power = 4.0;
    double mu = 1.0;
};

void add_model_options(CLI::App* cmd, ModelArgs& a) {
    cmd->add_option("--family", a.family, "Density generator family: t or gg")
        ->required()
        ->check(CLI::IsMember({"t", "gg"}));
    cmd->add_option("--shape", a.shape, "Shape parameter (t: lambda > 2, gg: s > 0)")->required();
    cmd->add_option("--n", a.n, "Dimension N")->capture_default_str();
    cmd->add_option("--m", a.m, "Number of observations M")->capture_default_str();
    cmd->add_option("--rho", a.rho, "Toeplitz correlation of the true scatter")
        ->capture_default_str();
    cmd->add_option("--power", a.power, "Data power E{Q}/N")->capture_default_str();
}

mc::Truth truth_from(const ModelArgs& a) {
    mc::ExperimentConfig cfg;
    cfg.family = parse_family(a.family);
    cfg.n = a.n;
    cfg.rho = a.rho;
    cfg.sigma2 = a.power;
    cfg.mu_fill = a.mu;
    if (a.n < 1) throw InvalidInput("--n must be at least 1");
    return mc::build_truth(cfg, a.shape);
}

void print_matrix(std::ostream& out, const Eigen::MatrixXd& a) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out << (j ? " " : "") << mc::format_number(a(i, j));
        }
        out << '\n';
    }
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Constrained (semiparametric) CRBs and robust scatter estimation for RES data",
                 "rescrb"};
    app.require_subcommand(1);
    app.fallthrough(false);

    // bounds
    ModelArgs bounds_args;
    bool full = false;
    auto* bounds_cmd = app.add_subcommand("bounds", "Compute CCRB and CSCRB and their indices");
    add_model_options(bounds_cmd, bounds_args);
    bounds_cmd->add_flag("--full", full, "Also print the full bound matrices");

    // sample
    ModelArgs sample_args;
    std::uint64_t sample_seed = 0;
    std::string sample_out;
    auto* sample_cmd = app.add_subcommand("sample", "Draw an RES dataset and write it as CSV");
    add_model_options(sample_cmd, sample_args);
    sample_cmd->add_option("--mu", sample_args.mu, "Value filling the mean vector")
        ->capture_default_str();
    sample_cmd->add_option("--seed", sample_seed, "Random seed")->capture_default_str();
    sample_cmd->add_option("--out", sample_out, "Output CSV path")->required();

    // estimate
    std::string estimate_in;
    std::string estimator_name;
    double huber_u = 0.9;
    estimators::FixedPointOptions fp;
    auto* estimate_cmd = app.add_subcommand("estimate", "Run an estimator on a CSV dataset");
    estimate_cmd->add_option("--in", estimate_in, "Dataset CSV (one observation per row)")
        ->required();
    estimate_cmd->add_option("--estimator", estimator_name, "sample_mean, cscm, tyler or huber")
        ->required()
        ->check(CLI::IsMember({"sample_mean", "cscm", "tyler", "huber"}));
    estimate_cmd->add_option("--u", huber_u, "Huber tuning parameter in (0, 1]")
        ->capture_default_str();
    estimate_cmd->add_option("--tol", fp.tolerance, "Fixed-point relative tolerance")
        ->capture_default_str();
    estimate_cmd->add_option("--max-iter", fp.max_iterations, "Fixed-point iteration cap")
        ->capture_default_str();

    // simulate
    std::string config_path;
    std::string simulate_out = "results.csv";
    std::string simulate_json;
    unsigned threads = 1;
    auto* simulate_cmd = app.add_subcommand("simulate", "Run a Monte Carlo sweep from a config");
    simulate_cmd->add_option("--config", config_path, "key = value experiment file")->required();
    simulate_cmd->add_option("--out", simulate_out, "Output CSV path")->capture_default_str();
    simulate_cmd->add_option("--json", simulate_json, "Optional JSON mirror of the CSV");
    simulate_cmd->add_option("--threads", threads, "Worker threads")->capture_default_str();

    // reproduce
    int figure = 0;
    std::size_t runs = 10000;
    std::uint64_t reproduce_seed = 0;
    std::string out_dir = ".";
    bool reproduce_json = false;
    auto* reproduce_cmd = app.add_subcommand("reproduce", "Run a preset efficiency sweep");
    reproduce_cmd->add_option("--figure", figure, "Preset 1-4 (1,3: mean; 2,4: scatter)")
        ->required()
        ->check(CLI::Range(1, 4));
    reproduce_cmd->add_option("--runs", runs, "Monte Carlo runs per grid point")
        ->capture_default_str();
    reproduce_cmd->add_option("--seed", reproduce_seed, "Base seed")->capture_default_str();
    reproduce_cmd->add_option("--out-dir", out_dir, "Directory for fig{K}.csv")
        ->capture_default_str();
    reproduce_cmd->add_flag("--json", reproduce_json, "Also write fig{K}.json");
    reproduce_cmd->add_option("--threads", threads, "Worker threads")->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*bounds_cmd) {
            const auto truth = truth_from(bounds_args);
            const auto report =
                bounds::compute_bounds(truth.params, truth.generator, bounds_args.m);
            out << "eps_ccrb_sigma = " << mc::format_number(report.eps_ccrb_sigma) << '\n'
                << "eps_cscrb_mu = " << mc::format_number(report.eps_cscrb_mu) << '\n'
                << "eps_cscrb_sigma = " << mc::format_number(report.eps_cscrb_sigma) << '\n';
            if (full) {
                out << "ccrb_mu:\n";
                print_matrix(out, report.ccrb_mu);
                out << "ccrb_sigma:\n";
                print_matrix(out, report.ccrb_sigma);
                out << "cscrb_mu:\n";
                print_matrix(out, report.cscrb_mu);
                out << "cscrb_sigma:\n";
                print_matrix(out, report.cscrb_sigma);
            }
        } else if (*sample_cmd) {
            const auto truth = truth_from(sample_args);
            special::RngStream rng(sample_seed, 0);
            const auto x = sample_res(truth.params, truth.generator, sample_args.m, rng);
            write_dataset(x, sample_out);
            out << "wrote " << x.rows() << " x " << x.cols() << " samples to " << sample_out
                << '\n';
        } else if (*estimate_cmd) {
            const auto x = read_dataset(estimate_in);
            const auto mu_hat = estimators::sample_mean(x);
            if (estimator_name == "sample_mean") {
                print_matrix(out, mu_hat.transpose());
            } else if (estimator_name == "cscm") {
                print_matrix(out, estimators::cscm(x, mu_hat));
            } else {
                const auto n = static_cast<std::size_t>(x.cols());
                const auto spec = estimator_name == "tyler" ? estimators::WeightSpec::tyler()
                                                            : estimators::WeightSpec::huber(n, huber_u);
                print_matrix(out, estimators::m_estimate(x, mu_hat, spec, fp));
            }
        } else if (*simulate_cmd) {
            const auto cfg = mc::load_config(config_path);
            const auto rows = mc::run_experiment(cfg, {threads, 0});
            mc::write_csv(rows, simulate_out);
            if (!simulate_json.empty()) mc::write_json(cfg, rows, simulate_json);
            out << "wrote " << rows.size() << " rows to " << simulate_out << '\n';
            if (std::any_of(rows.begin(), rows.end(), [](const auto& r) { return r.failed; })) {
                err << "error: estimator failure rate above 0.1% on at least one row\n";
                return kExitNumerical;
            }
        } else if (*reproduce_cmd) {
            auto cfg = mc::figure_config(figure);
            cfg.runs = runs;
            cfg.seed = reproduce_seed;
            const auto rows = mc::run_experiment(cfg, {threads, 0});
            const std::filesystem::path dir(out_dir);
            std::filesystem::create_directories(dir);
            const auto stem = "fig" + std::to_string(figure);
            mc::write_csv(rows, dir / (stem + ".csv"));
            if (reproduce_json) mc::write_json(cfg, rows, dir / (stem + ".json"));
            out << "wrote " << (dir / (stem + ".csv")).string() << '\n';
            if (std::any_of(rows.begin(), rows.end(), [](const auto& r) { return r.failed; })) {
                err << "error: estimator failure rate above 0.1% on at least one row\n";
                return kExitNumerical;
            }
        }
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitOk;
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return dispatch(args, out, err);
}

}  // namespace rescrb::cli
