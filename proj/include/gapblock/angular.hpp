#pragma once

#include <gapblock/matrix_core.hpp>

#include <json.hpp>

#include <utility>

namespace gapblock {

/// Complementary reference projections P~+- (possibly oblique) together with
/// their distance nu = ||P+ - P~+|| from the unperturbed orthogonal pair.
struct ReferenceProjections
{
    ComplexMatrix p_tilde_plus;
    ComplexMatrix p_tilde_minus;
    double nu = 0.0;
};

/// Stores P~- = I - P~+ and measures nu against p_plus. Throws if nu >= 1.
ReferenceProjections make_reference(const ComplexMatrix& p_tilde_plus, const ComplexMatrix& p_plus);

/// Angular operators of Q+-H over P~+-H.
///
/// x_plus maps P~+H coordinates (in basis_plus) to P~-H coordinates (in
/// basis_minus); x_minus goes the other way. Both bases are orthonormal, so
/// ||x_plus|| is the Hilbert-space norm of X+. The *_op members are the same
/// maps as full-space operators, X+ P~+ and X- P~-.
struct AngularPair
{
    ComplexMatrix x_plus;
    ComplexMatrix x_minus;
    ComplexMatrix basis_plus;
    ComplexMatrix basis_minus;
    ComplexMatrix x_plus_op;
    ComplexMatrix x_minus_op;
    double reconstruction_residual = 0.0;
    double min_singular_value = 0.0;  // of the restricted maps P~+-|Q+-H, the smaller one

    /// [basis_plus basis_minus]
    ComplexMatrix frame() const;
};

AngularPair angular_from_projections(const ProjectionPair& q, const ReferenceProjections& ref);

/// W = [[I, x-], [x+, I]] in frame coordinates and its inverse
/// [[S^{-1}, -S^{-1} x-], [-x+ S^{-1}, I + x+ S^{-1} x-]], S = I - x- x+.
struct CouplingInverse
{
    ComplexMatrix w;
    ComplexMatrix w_inverse;
    double condition = 0.0;  // condition number of S
    double residual = 0.0;   // ||W W^{-1} - I||
};

CouplingInverse coupling_inverse(const AngularPair& x);

struct BlockDiagonalization
{
    ComplexMatrix z_plus;
    ComplexMatrix z_minus;
    double offdiag_residual = 0.0;
    double eigenvalue_mismatch = 0.0;
};

/// W^{-1} F^{-1} h F W with F the reference frame. Throws when the off-diagonal
/// blocks exceed 1e-8 ||h||.
BlockDiagonalization block_diagonalize(const ComplexMatrix& h, const AngularPair& x);

/// Largest distance between two eigenvalue multisets under an optimal-ish
/// greedy matching. Sizes must agree.
double multiset_distance(const ComplexVector& a, const ComplexVector& b);

/// k = d / sqrt(1 - d^2), the norm of the angular operator of a subspace at
/// gap distance d from the reference subspace.
double norm_from_distance(double d);
double distance_from_norm(double k);

/// arcsin ||P_L - P_M|| for orthogonal projections.
double angular_metric(const ComplexMatrix& p_l, const ComplexMatrix& p_m);

struct DirectRotation
{
    ComplexMatrix u;
    double unitarity_residual = 0.0;
    double mapping_residual = 0.0;     // max over signs of ||U P+- U* - Q+-||
    double omega_form_distance = 0.0;  // distance to the frame-assembled rotation
};

/// U = [I - (Q+ - P+)^2]^{-1/2} (Q+ P+ + Q- P-) for orthogonal pairs, which
/// carries P+-H onto Q+-H. Throws if ||Q+ - P+|| >= 1 or a check fails.
DirectRotation direct_rotation(const ProjectionPair& q, const ProjectionPair& p);

/// (I - x- x+)^{-1/2} and (I - x+ x-)^{-1/2} by the binomial series.
struct OmegaPair
{
    ComplexMatrix omega_plus;
    ComplexMatrix omega_minus;
    int terms = 0;
    double residual = 0.0;  // max ||Omega^2 (I - X X) - I||
};

OmegaPair omega_series(const AngularPair& x, double tol = 1e-13);

/// Binomial series for (I - s)^{-1/2}. Throws if the spectral radius of s is >= 1.
ComplexMatrix inverse_sqrt_series(const ComplexMatrix& s, double tol, int* terms = nullptr);

struct NormBoundReport
{
    double norm_x_plus = 0.0;
    double norm_x_minus = 0.0;
    double bound = 0.0;
    bool pass = false;
    double nu = 0.0;
    double rho_half = 0.0;
    bool symmetric = false;
    /// Symmetric case with orthogonal P~: ||P~+- - Q^+-|| and its bound; negative when not checked.
    double projection_distance = -1.0;
    double distance_bound = -1.0;
};

/// tan(arctan sqrt(rho/(2 - 3 rho)) + arcsin nu), or with 2 - rho in the
/// symmetric case. Throws if the precondition on rho or the angle fails.
double angular_norm_bound(double rho_half, double nu, bool symmetric);

NormBoundReport verify_norm_bound(double rho_half, const ReferenceProjections& ref, bool symmetric,
                                  const AngularPair& x);

nlohmann::json to_json(const NormBoundReport& r);

struct AccretivityReport
{
    double mu_plus = 0.0;
    double mu_minus = 0.0;
    double min_eigenvalue = 0.0;  // of (WH + (WH)*)/2
    bool accretive = false;
    double bound_plus = 0.0;  // sqrt(mu+/mu-)
    double bound_minus = 0.0;
    double norm_x_plus = 0.0;
    double norm_x_minus = 0.0;
    bool bounds_hold = false;
    bool pass = false;
};

/// W = mu+ P+ - mu- P-; x must be the angular pair of the spectral split of h
/// over the same orthogonal P+-.
AccretivityReport w_accretivity(const ComplexMatrix& h, double mu_plus, double mu_minus, const ProjectionPair& p,
                                const AngularPair& x);

/// Q+ rebuilt as F W diag(I, 0) W^{-1} F^{-1}.
ComplexMatrix q_plus_from_angular(const AngularPair& x);

}  // namespace gapblock
