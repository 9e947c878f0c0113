#include "rescrb/matcalc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "rescrb/errors.hpp"

namespace rescrb::matcalc {

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> eigen_of_spd(const Matrix& s) {
    require_symmetric(s);
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    if (es.info() != Eigen::Success) {
        throw NumericalError("symmetric eigendecomposition failed");
    }
    if (es.eigenvalues()(0) <= 0.0) {
        std::ostringstream os;
        os << "matrix is not positive-definite (smallest eigenvalue " << es.eigenvalues()(0)
           << ")";
        throw NotPositiveDefinite(os.str());
    }
    return es;
}

}  // namespace

double asymmetry(const Matrix& a) {
    const double norm = a.norm();
    if (norm == 0.0) return 0.0;
    return (a - a.transpose()).norm() / norm;
}

void require_symmetric(const Matrix& a, double tol) {
    if (a.rows() != a.cols()) {
        throw InvalidInput("matrix is not square");
    }
    const double asym = asymmetry(a);
    if (!(asym <= tol)) {
        std::ostringstream os;
        os << "matrix is not symmetric (relative asymmetry " << asym << ")";
        throw InvalidInput(os.str());
    }
}

void require_spd(const Matrix& a) { (void)eigen_of_spd(a); }

Vector vecs(const Matrix& a) {
    require_symmetric(a);
    const auto n = static_cast<std::size_t>(a.rows());
    Vector v(static_cast<Eigen::Index>(vecs_size(n)));
    Eigen::Index k = 0;
    for (std::size_t col = 0; col < n; ++col) {
        for (std::size_t row = col; row < n; ++row) {
            v(k++) = a(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
        }
    }
    return v;
}

Matrix unvecs(const Vector& v, std::size_t n) {
    if (static_cast<std::size_t>(v.size()) != vecs_size(n)) {
        std::ostringstream os;
        os << "vecs length " << v.size() << " does not match N=" << n;
        throw InvalidInput(os.str());
    }
    const auto dim = static_cast<Eigen::Index>(n);
    Matrix a(dim, dim);
    Eigen::Index k = 0;
    for (Eigen::Index col = 0; col < dim; ++col) {
        for (Eigen::Index row = col; row < dim; ++row) {
            a(row, col) = v(k);
            a(col, row) = v(k);
            ++k;
        }
    }
    return a;
}

Vector vec(const Matrix& a) { return a.reshaped(); }

Matrix duplication_matrix(std::size_t n) {
    const auto dim = static_cast<Eigen::Index>(n);
    Matrix d = Matrix::Zero(dim * dim, static_cast<Eigen::Index>(vecs_size(n)));
    for (std::size_t col = 0; col < n; ++col) {
        for (std::size_t row = 0; row < n; ++row) {
            const auto hi = std::max(row, col);
            const auto lo = std::min(row, col);
            d(static_cast<Eigen::Index>(col * n + row),
              static_cast<Eigen::Index>(vecs_index(n, hi, lo))) = 1.0;
        }
    }
    return d;
}

Matrix sym_sqrt(const Matrix& s) {
    const auto es = eigen_of_spd(s);
    const Matrix r = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
                     es.eigenvectors().transpose();
    return 0.5 * (r + r.transpose());
}

Matrix sym_inv_sqrt(const Matrix& s) {
    const auto es = eigen_of_spd(s);
    const Matrix r = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                     es.eigenvectors().transpose();
    return 0.5 * (r + r.transpose());
}

Matrix spd_inverse(const Matrix& s, double max_condition) {
    const auto es = eigen_of_spd(s);
    const auto& ev = es.eigenvalues();
    const double cond = ev(ev.size() - 1) / ev(0);
    if (!(cond <= max_condition)) {
        std::ostringstream os;
        os << "matrix condition number " << cond << " exceeds " << max_condition;
        throw NumericalRankError(os.str());
    }
    const Matrix inv =
        es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    return 0.5 * (inv + inv.transpose());
}

Vector diag_indicator(std::size_t n) {
    Vector ind = Vector::Zero(static_cast<Eigen::Index>(vecs_size(n)));
    for (std::size_t j = 0; j < n; ++j) {
        ind(static_cast<Eigen::Index>(vecs_index(n, j, j))) = 1.0;
    }
    return ind;
}

std::vector<std::size_t> diag_positions(std::size_t n) {
    std::vector<std::size_t> pos;
    pos.reserve(n);
    const auto dim = static_cast<long long>(n);
    for (long long j = 1; j <= dim; ++j) {
        pos.push_back(static_cast<std::size_t>(1 + dim * (j - 1) - (j - 1) * (j - 2) / 2));
    }
    return pos;
}

Matrix nullspace_basis(const Eigen::RowVectorXd& j, std::size_t null_dim) {
    const auto len = static_cast<std::size_t>(j.size());
    if (len == 0 || j.cwiseAbs().maxCoeff() == 0.0) {
        throw InvalidInput("constraint gradient is zero");
    }
    if (null_dim + 1 != len) {
        throw InvalidInput("null-space dimension must equal len(J) - 1 for a single constraint");
    }
    Eigen::JacobiSVD<Matrix> svd(Matrix(j), Eigen::ComputeFullV);
    return svd.matrixV().rightCols(static_cast<Eigen::Index>(null_dim));
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return k;
}

double frobenius_norm(const Matrix& a) { return a.norm(); }

Matrix toeplitz(double rho, std::size_t n) {
    const auto dim = static_cast<Eigen::Index>(n);
    Matrix t(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index k = 0; k < dim; ++k) {
            t(i, k) = std::pow(rho, static_cast<double>(std::abs(i - k)));
        }
    }
    return t;
}

}  // namespace rescrb::matcalc
