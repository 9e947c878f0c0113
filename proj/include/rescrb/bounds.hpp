#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "rescrb/res_model.hpp"

namespace rescrb::bounds {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Constrained bounds for a data set of M i.i.d. observations, with their
/// Frobenius-norm summaries.
struct BoundReport {
    Matrix ccrb_mu;
    Matrix ccrb_sigma;
    Matrix cscrb_mu;
    Matrix cscrb_sigma;
    double eps_ccrb_mu = 0.0;
    double eps_ccrb_sigma = 0.0;
    double eps_cscrb_mu = 0.0;
    double eps_cscrb_sigma = 0.0;
    std::size_t samples = 1;
};

struct ACoefficients {
    double a1;
    double a2;
};

struct FimBlocks {
    Matrix c_mu;     // N x N
    Matrix c_sigma;  // N(N+1)/2 square
};

/// Gradient of res_logpdf with respect to mu.
Vector score_mu(const RESParams& params, const DensityGenerator& gen, const Vector& x);

/// Gradient of res_logpdf with respect to vecs(Sigma).
Vector score_sigma(const RESParams& params, const DensityGenerator& gen, const Vector& x);

/// Projection of score_sigma onto the nuisance tangent space:
/// -D^T (1/2 + Q psi(Q) / N) vec(Sigma^{-1}).
Vector nuisance_projection_sigma(const RESParams& params, const DensityGenerator& gen,
                                 const Vector& x);

/// Semiparametric efficient score for vecs(Sigma), evaluated through the
/// whitened direction u = Sigma^{-1/2}(x - mu)/sqrt(Q).
Vector efficient_score_sigma(const RESParams& params, const DensityGenerator& gen, const Vector& x);

ACoefficients a_coefficients(const ModelMoments& mm, std::size_t n);

/// Per-observation Fisher information blocks (the mu/Sigma cross block is 0).
FimBlocks fim_blocks(const Matrix& sigma, const ModelMoments& mm);

/// Per-observation semiparametric information for vecs(Sigma).
Matrix sfim_sigma_block(const Matrix& sigma, const ModelMoments& mm);

/// Orthonormal basis of the tangent space of {tr(Sigma) = N} in vecs coordinates.
Matrix trace_constraint_basis(std::size_t n);

/// U (U^T info U)^{-1} U^T with the inverse taken through the symmetric
/// eigendecomposition (condition threshold 1e12).
Matrix constrained_inverse(const Matrix& info, const Matrix& basis);

/// Constrained classical CRB for M observations. `basis` overrides the
/// null-space basis (any orthonormal basis of the same subspace gives the
/// same bound).
BoundReport ccrb(const RESParams& params, const ModelMoments& mm, std::size_t m,
                 const std::optional<Matrix>& basis = std::nullopt);

/// Constrained semiparametric CRB for M observations.
BoundReport cscrb(const RESParams& params, const ModelMoments& mm, std::size_t m,
                  const std::optional<Matrix>& basis = std::nullopt);

/// Both bounds in one report, indices filled in.
BoundReport compute_bounds(const RESParams& params, const DensityGenerator& gen, std::size_t m);

/// Fills the eps_* fields with Frobenius norms of the populated blocks.
void bound_indices(BoundReport& report);

}  // namespace rescrb::bounds
