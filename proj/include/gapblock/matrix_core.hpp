#pragma once

#include <gapblock/error.hpp>

#include <Eigen/Dense>

#include <complex>
#include <functional>

namespace gapblock {

using Complex       = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector    = Eigen::VectorXd;

/// Spectral decomposition A = V diag(eigenvalues) V* of a Hermitian matrix.
/// Eigenvalues are ascending, V is unitary.
struct HermitianEigensystem
{
    RealVector eigenvalues;
    ComplexMatrix eigenvectors;
};

/// Complementary projections Q+ + Q- = I splitting the spectrum of an
/// operator into its right (Q+) and left (Q-) half-plane parts.
struct ProjectionPair
{
    ComplexMatrix q_plus;
    ComplexMatrix q_minus;  // always I - q_plus
    double idempotency_residual = 0.0;
    double commutation_residual = 0.0;
};

inline constexpr double kHermitianTol = 1e-12;

bool all_finite(const ComplexMatrix& a);

/// (A + A*)/2
ComplexMatrix hermitian_part(const ComplexMatrix& a);

/// ||A - A*|| / (1 + ||A||), in the operator norm.
double hermiticity_defect(const ComplexMatrix& a);

bool is_hermitian(const ComplexMatrix& a, double tol = kHermitianTol);

/// Largest singular value.
double operator_norm(const ComplexMatrix& a);

/// Smallest singular value of a square or tall matrix.
double min_singular_value(const ComplexMatrix& a);

HermitianEigensystem eigh(const ComplexMatrix& a);

/// V f(Lambda) V* for Hermitian A. Throws when f is not finite at an
/// eigenvalue.
ComplexMatrix matrix_function(const ComplexMatrix& a, const std::function<double(double)>& f);
ComplexMatrix matrix_function(const HermitianEigensystem& eig, const std::function<double(double)>& f);

/// Orthogonal spectral projection of a Hermitian operator onto the span of
/// eigenvectors with positive (sign > 0) or negative (sign < 0) eigenvalues.
ComplexMatrix spectral_projection(const HermitianEigensystem& eig, int sign);

/// Orthonormal basis (columns) of the range of A. Singular values below
/// rel_cutoff * ||A|| are treated as zero.
ComplexMatrix orthonormal_range(const ComplexMatrix& a, double rel_cutoff = 1e-10);

/// Orthogonal projection onto the column span of a full-column-rank B.
ComplexMatrix orthogonal_projector(const ComplexMatrix& basis);

/// Builds a ProjectionPair from Q+ and records its residuals against h.
ProjectionPair make_projection_pair(const ComplexMatrix& q_plus, const ComplexMatrix& h);

/// Ground-truth spectral splitting by ordered complex Schur form: eigenvalues
/// with positive real part are moved to the leading block, and the coupling
/// block is removed with one triangular Sylvester solve.
ProjectionPair schur_split(const ComplexMatrix& h);

/// Solves T11 Y - Y T22 = C for upper-triangular T11, T22 with disjoint spectra.
ComplexMatrix solve_triangular_sylvester(const ComplexMatrix& t11, const ComplexMatrix& t22, const ComplexMatrix& c);

/// Eigenvalues of a general complex matrix.
ComplexVector eigenvalues(const ComplexMatrix& a);

}  // namespace gapblock
