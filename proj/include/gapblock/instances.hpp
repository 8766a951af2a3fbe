#pragma once

#include <gapblock/angular.hpp>
#include <gapblock/form_perturbation.hpp>
#include <gapblock/matrix_core.hpp>

#include <cstdint>
#include <random>

namespace gapblock {

/// Seeded generators for the property sweeps. Every generator draws only from
/// the engine it is given, so a fixed seed reproduces the same instance stream.
using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);
ComplexMatrix random_complex(Rng& rng, Eigen::Index rows, Eigen::Index cols);
ComplexMatrix random_hermitian(Rng& rng, Eigen::Index n);
/// Haar-distributed unitary (QR of a complex Gaussian matrix, phases fixed).
ComplexMatrix random_unitary(Rng& rng, Eigen::Index n);
/// Orthonormal basis of a random k-dimensional subspace of C^n.
ComplexMatrix random_subspace(Rng& rng, Eigen::Index n, Eigen::Index k);

/// Hermitian H0 with |eigenvalues| in [1, 4] (so delta >= 1) and both signs present.
GappedOperator random_gapped(Rng& rng, Eigen::Index n);

/// Random V (Hermitian when symmetric) scaled so that rho_half equals the target.
ComplexMatrix random_perturbation(Rng& rng, const GappedOperator& base, bool symmetric, double rho_half);

/// P~+ close to P+: S P+ S^{-1} with S = I + eps E (oblique), or U P+ U* for a
/// unitary U = exp(i eps K) (orthogonal).
ComplexMatrix perturbed_projection(Rng& rng, const ComplexMatrix& p_plus, double eps, bool oblique);

struct OracleInstance
{
    GappedOperator base;
    FormPerturbation pert;
    Complex gamma;
    ComplexMatrix h;
    double margin = 0.0;  // smallest |Re lambda(h)|
};

/// Dimension 4..32, symmetric or general V with ||V|| <= 0.5, |gamma| <= 1 real
/// or complex; resampled until the spectral margin of h is at least 0.1.
OracleInstance random_oracle_instance(Rng& rng);

struct NormInstance
{
    GappedOperator base;
    FormPerturbation pert;
    ComplexMatrix h;
    ReferenceProjections ref;
    bool symmetric = false;
    bool oblique = false;
};

/// rho_half in (0, 1/2) (general V, with rho_full < 1 as well) or in (0, 0.98)
/// (Hermitian V), and a perturbed reference pair satisfying the angle precondition.
NormInstance random_norm_instance(Rng& rng, bool symmetric);

}  // namespace gapblock
