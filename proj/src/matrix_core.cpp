#include <gapblock/matrix_core.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace gapblock {

namespace {

constexpr const char* kModule = "matrix_core";

void require_finite(const ComplexMatrix& a, const char* what)
{
    if (!all_finite(a)) throw Error(kModule, "finite entries", std::string(what) + " contains NaN or Inf");
}

void require_square(const ComplexMatrix& a, const char* what)
{
    if (a.rows() != a.cols()) throw Error(kModule, "square input", std::string(what) + " is not square");
}

// Swaps the adjacent diagonal entries k, k+1 of the upper-triangular t by a
// unitary plane rotation, accumulating the rotation into u.
void swap_schur_entries(ComplexMatrix& t, ComplexMatrix& u, Eigen::Index k)
{
    const Complex a = t(k, k);
    const Complex b = t(k + 1, k + 1);
    const Complex c = t(k, k + 1);

    // (c, b - a) is the eigenvector of [[a, c], [0, b]] for eigenvalue b.
    Eigen::Vector2cd x(c, b - a);
    x.normalize();
    Eigen::Matrix2cd g;
    g << x(0), -std::conj(x(1)), x(1), std::conj(x(0));

    t.middleRows(k, 2) = (g.adjoint() * t.middleRows(k, 2)).eval();
    t.middleCols(k, 2) = (t.middleCols(k, 2) * g).eval();
    u.middleCols(k, 2) = (u.middleCols(k, 2) * g).eval();
    t(k + 1, k) = Complex(0.0, 0.0);
}

}  // namespace

bool all_finite(const ComplexMatrix& a)
{
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            if (!std::isfinite(a(i, j).real()) || !std::isfinite(a(i, j).imag())) return false;
    return true;
}

ComplexMatrix hermitian_part(const ComplexMatrix& a) { return 0.5 * (a + a.adjoint()); }

double hermiticity_defect(const ComplexMatrix& a)
{
    return operator_norm(a - a.adjoint()) / (1.0 + operator_norm(a));
}

bool is_hermitian(const ComplexMatrix& a, double tol)
{
    return a.rows() == a.cols() && hermiticity_defect(a) <= tol;
}

double operator_norm(const ComplexMatrix& a)
{
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<ComplexMatrix> svd(a);
    return svd.singularValues()(0);
}

double min_singular_value(const ComplexMatrix& a)
{
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<ComplexMatrix> svd(a);
    return svd.singularValues()(svd.singularValues().size() - 1);
}

HermitianEigensystem eigh(const ComplexMatrix& a)
{
    require_square(a, "eigh input");
    require_finite(a, "eigh input");
    if (hermiticity_defect(a) > kHermitianTol)
        throw Error(kModule, "hermitian input", "eigh called on a non-Hermitian matrix");

    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(a));
    if (solver.info() != Eigen::Success) throw Error(kModule, "eigensolver convergence", "eigh failed to converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

ComplexMatrix matrix_function(const HermitianEigensystem& eig, const std::function<double(double)>& f)
{
    const Eigen::Index n = eig.eigenvalues.size();
    RealVector values(n);
    for (Eigen::Index k = 0; k < n; ++k)
    {
        values(k) = f(eig.eigenvalues(k));
        if (!std::isfinite(values(k)))
            throw Error(kModule, "function defined on spectrum",
                        "f is not finite at eigenvalue " + std::to_string(eig.eigenvalues(k)));
    }
    return eig.eigenvectors * values.cast<Complex>().asDiagonal() * eig.eigenvectors.adjoint();
}

ComplexMatrix matrix_function(const ComplexMatrix& a, const std::function<double(double)>& f)
{
    return matrix_function(eigh(a), f);
}

ComplexMatrix spectral_projection(const HermitianEigensystem& eig, int sign)
{
    return matrix_function(eig, [sign](double x) { return (sign > 0 ? x > 0.0 : x < 0.0) ? 1.0 : 0.0; });
}

ComplexMatrix orthonormal_range(const ComplexMatrix& a, double rel_cutoff)
{
    Eigen::JacobiSVD<ComplexMatrix> svd(a, Eigen::ComputeThinU);
    const RealVector& s = svd.singularValues();
    Eigen::Index rank = 0;
    const double cutoff = rel_cutoff * (s.size() > 0 ? s(0) : 0.0);
    while (rank < s.size() && s(rank) > cutoff) ++rank;
    return svd.matrixU().leftCols(rank);
}

ComplexMatrix orthogonal_projector(const ComplexMatrix& basis)
{
    const ComplexMatrix gram = basis.adjoint() * basis;
    return basis * gram.ldlt().solve(basis.adjoint());
}

ProjectionPair make_projection_pair(const ComplexMatrix& q_plus, const ComplexMatrix& h)
{
    ProjectionPair pair;
    pair.q_plus  = q_plus;
    pair.q_minus = ComplexMatrix::Identity(q_plus.rows(), q_plus.cols()) - q_plus;
    pair.idempotency_residual = operator_norm(q_plus * q_plus - q_plus);
    pair.commutation_residual = operator_norm(h * q_plus - q_plus * h);
    return pair;
}

ComplexVector eigenvalues(const ComplexMatrix& a)
{
    require_square(a, "eigenvalue input");
    Eigen::ComplexEigenSolver<ComplexMatrix> solver(a, false);
    if (solver.info() != Eigen::Success) throw Error(kModule, "eigensolver convergence", "eigenvalues failed to converge");
    return solver.eigenvalues();
}

ComplexMatrix solve_triangular_sylvester(const ComplexMatrix& t11, const ComplexMatrix& t22, const ComplexMatrix& c)
{
    const Eigen::Index m = t11.rows();
    const Eigen::Index n = t22.rows();
    ComplexMatrix y(m, n);
    for (Eigen::Index j = 0; j < n; ++j)
    {
        ComplexVector rhs = c.col(j);
        for (Eigen::Index i = 0; i < j; ++i) rhs += t22(i, j) * y.col(i);
        ComplexMatrix shifted = t11;
        shifted.diagonal().array() -= t22(j, j);
        y.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
    }
    return y;
}

ProjectionPair schur_split(const ComplexMatrix& h)
{
    require_square(h, "schur_split input");
    require_finite(h, "schur_split input");
    const Eigen::Index n = h.rows();
    const double norm_h = operator_norm(h);

    Eigen::ComplexSchur<ComplexMatrix> schur(h);
    if (schur.info() != Eigen::Success) throw Error(kModule, "schur convergence", "complex Schur form failed");
    ComplexMatrix t = schur.matrixT();
    ComplexMatrix u = schur.matrixU();

    for (Eigen::Index k = 0; k < n; ++k)
    {
        if (std::abs(t(k, k).real()) < 1e-8 * norm_h)
            throw Error(kModule, "spectrum off the imaginary axis",
                        "eigenvalue with real part " + std::to_string(t(k, k).real()) + " too close to iR");
    }

    // Bubble eigenvalues with positive real part to the front; relative order
    // inside each group is preserved.
    bool moved = true;
    while (moved)
    {
        moved = false;
        for (Eigen::Index k = 0; k + 1 < n; ++k)
        {
            if (t(k, k).real() < 0.0 && t(k + 1, k + 1).real() > 0.0)
            {
                swap_schur_entries(t, u, k);
                moved = true;
            }
        }
    }

    Eigen::Index k_plus = 0;
    while (k_plus < n && t(k_plus, k_plus).real() > 0.0) ++k_plus;
    const Eigen::Index k_minus = n - k_plus;

    ComplexMatrix block = ComplexMatrix::Zero(n, n);
    block.topLeftCorner(k_plus, k_plus).setIdentity();
    if (k_plus > 0 && k_minus > 0)
    {
        const ComplexMatrix t11 = t.topLeftCorner(k_plus, k_plus).triangularView<Eigen::Upper>();
        const ComplexMatrix t22 = t.bottomRightCorner(k_minus, k_minus).triangularView<Eigen::Upper>();
        block.topRightCorner(k_plus, k_minus) = solve_triangular_sylvester(t11, t22, t.topRightCorner(k_plus, k_minus));
    }
    return make_projection_pair(u * block * u.adjoint(), h);
}

}  // namespace gapblock
