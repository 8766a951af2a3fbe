#include <gapblock/instances.hpp>

#include <Eigen/QR>

#include <cmath>

namespace gapblock {

namespace {

constexpr int kMaxAttempts = 1000;

ComplexMatrix exp_i_hermitian(const ComplexMatrix& k, double eps)
{
    const HermitianEigensystem eig = eigh(k);
    ComplexVector phases(eig.eigenvalues.size());
    for (Eigen::Index j = 0; j < phases.size(); ++j) phases(j) = std::polar(1.0, eps * eig.eigenvalues(j));
    return eig.eigenvectors * phases.asDiagonal() * eig.eigenvectors.adjoint();
}

double spectral_margin(const ComplexMatrix& h) { return eigenvalues(h).real().cwiseAbs().minCoeff(); }

}  // namespace

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

ComplexMatrix random_complex(Rng& rng, Eigen::Index rows, Eigen::Index cols)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    ComplexMatrix a(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
        {
            const double re = normal(rng);
            const double im = normal(rng);
            a(i, j) = Complex(re, im);
        }
    return a;
}

ComplexMatrix random_hermitian(Rng& rng, Eigen::Index n) { return hermitian_part(random_complex(rng, n, n)); }

ComplexMatrix random_unitary(Rng& rng, Eigen::Index n)
{
    const ComplexMatrix z = random_complex(rng, n, n);
    Eigen::HouseholderQR<ComplexMatrix> qr(z);
    ComplexMatrix q = qr.householderQ();
    const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j)
    {
        const double mag = std::abs(r(j, j));
        if (mag > 0.0) q.col(j) *= r(j, j) / mag;
    }
    return q;
}

ComplexMatrix random_subspace(Rng& rng, Eigen::Index n, Eigen::Index k) { return random_unitary(rng, n).leftCols(k); }

GappedOperator random_gapped(Rng& rng, Eigen::Index n)
{
    if (n < 2) throw Error("instances", "dimension >= 2", "a gapped instance needs both signs");
    std::uniform_int_distribution<Eigen::Index> split(1, n - 1);
    const Eigen::Index n_plus = split(rng);
    RealVector lambda(n);
    for (Eigen::Index k = 0; k < n; ++k)
    {
        const double mag = uniform(rng, 1.0, 4.0);
        lambda(k) = k < n_plus ? mag : -mag;
    }
    const ComplexMatrix u = random_unitary(rng, n);
    return GappedOperator::from_matrix(u * lambda.cast<Complex>().asDiagonal() * u.adjoint());
}

ComplexMatrix random_perturbation(Rng& rng, const GappedOperator& base, bool symmetric, double rho_half)
{
    const Eigen::Index n = base.dim();
    const ComplexMatrix v = symmetric ? random_hermitian(rng, n) : random_complex(rng, n, n);
    const double current = compute_rho(base, v).half;
    return v * (rho_half / current);
}

ComplexMatrix perturbed_projection(Rng& rng, const ComplexMatrix& p_plus, double eps, bool oblique)
{
    const Eigen::Index n = p_plus.rows();
    if (oblique)
    {
        const ComplexMatrix e = random_complex(rng, n, n);
        const ComplexMatrix s = ComplexMatrix::Identity(n, n) + (eps / operator_norm(e)) * e;
        return s * p_plus * s.inverse();
    }
    const ComplexMatrix k = random_hermitian(rng, n);
    const ComplexMatrix u = exp_i_hermitian(k / operator_norm(k), eps);
    return hermitian_part(u * p_plus * u.adjoint());
}

OracleInstance random_oracle_instance(Rng& rng)
{
    std::uniform_int_distribution<Eigen::Index> dim(4, 32);
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt)
    {
        const Eigen::Index n = dim(rng);
        GappedOperator base = random_gapped(rng, n);
        const bool symmetric = uniform(rng, 0.0, 1.0) < 0.5;
        const bool complex_gamma = uniform(rng, 0.0, 1.0) < 0.5;

        ComplexMatrix v = symmetric ? random_hermitian(rng, n) : random_complex(rng, n, n);
        v *= uniform(rng, 0.05, 0.5) / operator_norm(v);
        const double mag = uniform(rng, 0.1, 1.0);
        const Complex gamma = complex_gamma ? std::polar(mag, uniform(rng, 0.0, 2.0 * std::acos(-1.0)))
                                            : Complex(uniform(rng, 0.0, 1.0) < 0.5 ? -mag : mag, 0.0);

        const ComplexMatrix h = base.h0() + gamma * v;
        const double margin = spectral_margin(h);
        if (margin < 0.1) continue;
        FormPerturbation pert = make_perturbation(base, v);
        return {std::move(base), std::move(pert), gamma, h, margin};
    }
    throw Error("instances", "instance generation", "no admissible oracle instance found");
}

NormInstance random_norm_instance(Rng& rng, bool symmetric)
{
    std::uniform_int_distribution<Eigen::Index> dim(4, 16);
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt)
    {
        const Eigen::Index n = dim(rng);
        GappedOperator base = random_gapped(rng, n);
        const double rho = symmetric ? uniform(rng, 0.01, 0.98) : uniform(rng, 0.01, 0.5);
        const ComplexMatrix v = random_perturbation(rng, base, symmetric, rho);
        FormPerturbation pert = make_perturbation(base, v);
        if (!symmetric && pert.rho_full >= 1.0) continue;
        if (pert.rho_half >= (symmetric ? 1.0 : 0.5)) continue;

        const bool oblique = uniform(rng, 0.0, 1.0) < 0.5;
        const double eps = uniform(rng, 0.0, 0.3);
        const ComplexMatrix p_tilde = perturbed_projection(rng, base.p_plus(), eps, oblique);
        ReferenceProjections ref;
        try
        {
            ref = make_reference(p_tilde, base.p_plus());
            angular_norm_bound(pert.rho_half, ref.nu, symmetric);
        }
        catch (const Error&)
        {
            continue;
        }

        const ComplexMatrix h = base.h0() + v;
        if (spectral_margin(h) < 1e-6 * operator_norm(h)) continue;
        return {std::move(base), std::move(pert), h, std::move(ref), symmetric, oblique};
    }
    throw Error("instances", "instance generation", "no admissible norm-bound instance found");
}

}  // namespace gapblock
