#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rescrb/estimators.hpp"
#include "rescrb/res_model.hpp"

namespace rescrb::mc {

struct EstimatorSet {
    bool sample_mean = true;
    bool cscm = true;
    bool tyler = true;
    std::vector<double> huber_u{0.9, 0.5, 0.1};

    bool any_scatter() const noexcept { return cscm || tyler || !huber_u.empty(); }
};

struct ExperimentConfig {
    Family family = Family::StudentT;
    std::vector<double> shapes{2.1, 3.0, 5.0, 10.0, 20.0, 50.0, 100.0};
    std::size_t n = 8;
    std::size_t m = 24;
    double rho = 0.8;
    double sigma2 = 4.0;
    double mu_fill = 1.0;
    EstimatorSet estimators;
    std::size_t runs = 10000;
    std::uint64_t seed = 0;
    estimators::FixedPointOptions fixed_point;

    /// Throws InvalidInput on any violated field constraint.
    void validate() const;
};

/// Default shape grid for a family: lambda in {2.1, 3, 5, 10, 20, 50, 100},
/// s in {0.2, 0.4, ..., 2.0}.
std::vector<double> default_shapes(Family family);

/// Preset sweeps behind `reproduce --figure K`:
/// 1 and 3 run the sample mean on t and GG data, 2 and 4 run the scatter
/// estimators on t and GG data.
ExperimentConfig figure_config(int figure);

struct Truth {
    RESParams params;
    DensityGenerator generator;
};

/// Toeplitz scatter rho^{|i-j|}, mean filled with mu_fill, generator
/// calibrated to the configured data power.
Truth build_truth(const ExperimentConfig& config, double shape);

/// R^{-1} sum_r (v_r - v0)(v_r - v0)^T.
Eigen::MatrixXd mse_matrix(const std::vector<Eigen::VectorXd>& estimates,
                           const Eigen::VectorXd& truth);

struct EstimatorResult {
    std::string column;  // CSV column name, e.g. "eps_tyler"
    double eps = 0.0;
    std::size_t failures = 0;
};

struct ResultRow {
    double shape = 0.0;
    std::vector<EstimatorResult> estimators;
    double eps_ccrb_sigma = 0.0;
    double eps_cscrb_mu = 0.0;
    double eps_cscrb_sigma = 0.0;
    std::size_t trials = 0;
    std::size_t failures = 0;
    double wall_seconds = 0.0;
    /// More than 0.1% of the trials failed for at least one estimator.
    bool failed = false;
};

struct ExecutionOptions {
    unsigned threads = 1;
    /// When nonzero, trial blocks are dispatched in a shuffled order. Output
    /// does not depend on it.
    std::uint64_t schedule_seed = 0;
};

/// Trials are grouped in fixed blocks of this many consecutive indices.
inline constexpr std::size_t kTrialBlock = 256;

std::vector<ResultRow> run_experiment(const ExperimentConfig& config,
                                      const ExecutionOptions& exec = {});

/// `%.10g` rendering used by every text output.
std::string format_number(double value);

std::string format_csv(const std::vector<ResultRow>& rows);
std::string format_json(const ExperimentConfig& config, const std::vector<ResultRow>& rows);

void write_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path);
void write_json(const ExperimentConfig& config, const std::vector<ResultRow>& rows,
                const std::filesystem::path& path);

/// Flat `key = value` document; '#' starts a comment. Unknown keys are
/// rejected. Keys: family, shapes, n, m, rho, power, mu_fill, estimators,
/// huber_u, runs, seed, tolerance, max_iterations.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace rescrb::mc
