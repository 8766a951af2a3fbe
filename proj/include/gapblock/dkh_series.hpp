#pragma once

#include <gapblock/angular.hpp>
#include <gapblock/form_perturbation.hpp>
#include <gapblock/matrix_core.hpp>

#include <functional>
#include <string>
#include <vector>

namespace gapblock {

/// Everything the exact block-diagonalization produces at one coupling value.
/// W and U are full-space operators; h_diag = W^{-1} h W and
/// h_hat_diag = U^{-1} h U are block diagonal with respect to P+- of H0.
struct FamilySample
{
    Complex gamma;
    ComplexMatrix h;
    ProjectionPair q;
    AngularPair x;
    ComplexMatrix w;
    ComplexMatrix u;
    ComplexMatrix omega_plus;   // in basis_plus coordinates
    ComplexMatrix omega_minus;  // in basis_minus coordinates
    ComplexMatrix h_diag;
    ComplexMatrix h_hat_diag;
    double offdiag_residual = 0.0;  // max over h_diag and h_hat_diag
    int node_count = 0;             // quadrature nodes used by the spectral split
};

/// Throws when iR meets the spectrum of h0 + gamma v.
FamilySample family_eval(const GappedOperator& base, const FormPerturbation& pert, Complex gamma);

using MatrixFamily = std::function<ComplexMatrix(Complex)>;

struct TaylorModel
{
    std::vector<ComplexMatrix> coefficients;  // c_0 .. c_N
    double sample_radius = 0.0;
    int node_count = 0;
    double tail_estimate = 0.0;      // max over the circle of ||f - sum c_n gamma^n||
    double aliasing_estimate = 0.0;  // max_n r^n ||c_n(M) - c_n(2M)||
    double max_sample_norm = 0.0;

    /// sum_{n <= order} gamma^n c_n; order defaults to all stored terms.
    ComplexMatrix evaluate(Complex gamma, int order = -1) const;
};

/// Discrete Cauchy integrals on |gamma| = r with M equispaced nodes, checked
/// against a second pass with 2M nodes. Throws if the two passes disagree by
/// more than 1e-7 max ||f||.
TaylorModel taylor_coefficients(const MatrixFamily& f, double r, int order, int node_count);

/// M = max(64, 8 (N + 1))
int default_node_count(int order);

/// Smallest |gamma| at which some eigenvalue of h0 + gamma v reaches iR,
/// to about rel_tol relative accuracy. Infinity if none is found below
/// 1e3 delta / ||v||.
double estimate_gamma_max(const GappedOperator& base, const FormPerturbation& pert, double rel_tol = 1e-4);

/// min over the circle |gamma| = t of the smallest |Re lambda| of h0 + gamma v.
double imaginary_axis_margin(const GappedOperator& base, const FormPerturbation& pert, double t);

/// Taylor data of H_diag (general) or T = |H0|^{-1/2} Ĥ_diag |H0|^{-1/2}
/// (symmetric) around gamma = 0, built once and truncated at any N <= order.
struct DkhExpansion
{
    GappedOperator base;
    FormPerturbation pert;
    bool symmetric = false;
    double gamma_max = 0.0;
    TaylorModel taylor;

    /// H_diag^N(gamma) or Ĥ_diag^N(gamma).
    ComplexMatrix truncation(Complex gamma, int order) const;
    /// The exact H_diag(gamma) or Ĥ_diag(gamma).
    ComplexMatrix exact(Complex gamma) const;
};

DkhExpansion build_dkh_expansion(const GappedOperator& base, const FormPerturbation& pert, int order,
                                 bool symmetric, double gamma_max = 0.0);

struct DkhTruncation
{
    ComplexMatrix matrix;
    double resolvent_error = 0.0;       // at eta = 1
    double inverse_error = 0.0;         // at eta = 0, NaN if H^N is singular
    bool invertible = true;
    double hermiticity_defect = 0.0;    // of the truncation
    double b_n = 0.0;                   // ||(H^N - H)(H - i)^{-1}||
};

DkhTruncation evaluate_truncation(const DkhExpansion& expansion, Complex gamma, int order);

DkhTruncation dkh_truncate(const GappedOperator& base, const FormPerturbation& pert, Complex gamma, int order);

/// Requires symmetric V, real gamma and ||V H0^{-1}|| < 1.
DkhTruncation dkh_symmetric_truncate(const GappedOperator& base, const FormPerturbation& pert, double gamma,
                                     int order);

struct ConvergenceRow
{
    double gamma = 0.0;
    int order = 0;
    double resolvent_error = 0.0;
    double ratio_estimate = 0.0;  // NaN when fewer than two usable points
};

struct ConvergenceTable
{
    std::vector<ConvergenceRow> rows;
    double gamma_max = 0.0;
    bool monotone = true;          // e_{N+2} < e_N for every N >= 2 above the noise floor
    std::vector<std::string> violations;
};

inline constexpr double kErrorFloor = 1e-12;

ConvergenceTable convergence_report(const GappedOperator& base, const FormPerturbation& pert,
                                    const std::vector<double>& gammas, int max_order, bool symmetric = false);

/// exp of the least-squares slope of log e_k over 2 <= k <= last with e_k above the floor.
double geometric_ratio(const std::vector<double>& errors, int last);

/// Header gamma,N,resolvent_error,ratio_estimate; '\n' line endings.
std::string to_csv(const ConvergenceTable& table);

}  // namespace gapblock
