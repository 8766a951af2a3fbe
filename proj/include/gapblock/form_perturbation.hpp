#pragma once

#include <gapblock/matrix_core.hpp>

#include <json.hpp>

#include <optional>
#include <string>
#include <utility>

namespace gapblock {

/// Hermitian H0 with 0 in its resolvent set. The gap half-width delta is
/// recomputed from the spectrum (min |lambda|), never taken from input.
class GappedOperator
{
 public:
    /// Throws if h0 is not Hermitian or has an eigenvalue within 1e-12 * (1 + ||h0||) of 0.
    static GappedOperator from_matrix(const ComplexMatrix& h0);

    const ComplexMatrix& h0() const { return h0_; }
    double delta() const { return delta_; }
    Eigen::Index dim() const { return h0_.rows(); }
    const HermitianEigensystem& eigensystem() const { return eig_; }

    /// Orthogonal spectral projections of h0 onto its positive/negative spectral subspaces.
    const ComplexMatrix& p_plus() const { return p_plus_; }
    const ComplexMatrix& p_minus() const { return p_minus_; }

    /// |H0|^s
    ComplexMatrix abs_power(double s) const;

    /// H_ab = a I + b |H0|, raised to the power s.
    ComplexMatrix form_weight(double a, double b, double s) const;

    double norm_inverse() const { return 1.0 / delta_; }

 private:
    ComplexMatrix h0_;
    double delta_ = 0.0;
    HermitianEigensystem eig_;
    ComplexMatrix p_plus_;
    ComplexMatrix p_minus_;
};

struct FormBound
{
    double a = 0.0;
    double b = 0.0;
};

struct RhoPair
{
    double full = 0.0;
    double half = 0.0;
};

/// Perturbation V together with its relative form-bound data.
struct FormPerturbation
{
    ComplexMatrix v;
    bool symmetric = false;
    double a = 0.0;
    double b = 0.0;
    ComplexMatrix c_ab;
    double rho_full = 0.0;
    double rho_half = 0.0;

    /// (a, b) if usable as H_ab weights, otherwise (0, 1). Only V = 0 has a = b = 0.
    FormBound weights() const;
};

struct PerturbedOperator
{
    GappedOperator base;
    FormPerturbation pert;
    Complex gamma;
    ComplexMatrix h;
    double factorization_residual = 0.0;
};

struct StripResult
{
    std::optional<std::pair<double, double>> interval;
    bool eigenvalues_outside = false;
    std::string diagnostic;
};

/// H_ab^{-1/2} V H_ab^{-1/2} with H_ab = a I + b |H0|.
ComplexMatrix compute_c_ab(const GappedOperator& base, const ComplexMatrix& v, double a, double b);

/// rho_full = || |H0|^{-1/2} V |H0|^{-1/2} ||; rho_half = max of its four P+-/P- block norms.
RhoPair compute_rho(const GappedOperator& base, const ComplexMatrix& v);

/// Default bound (a, b) = (0, rho_full).
FormPerturbation make_perturbation(const GappedOperator& base, const ComplexMatrix& v);
FormPerturbation make_perturbation(const GappedOperator& base, const ComplexMatrix& v, FormBound bound);

/// Ĉ_ab(z) = (H0 - z) H_ab^{-1} + gamma C_ab
ComplexMatrix c_hat(const GappedOperator& base, const FormPerturbation& pert, Complex gamma, Complex z);

/// h = h0 + gamma v, verified against H_ab^{1/2} Ĉ_ab(i) H_ab^{1/2} = h - i.
PerturbedOperator construct_h(const GappedOperator& base, const FormPerturbation& pert, Complex gamma);

/// Residual of the factorization identity at an arbitrary z.
double factorization_residual(const GappedOperator& base, const FormPerturbation& pert, Complex gamma, Complex z);

/// Strip (-delta + |gamma|(a + b delta), delta - |gamma|(a + b delta)) + iR, which must
/// contain no eigenvalue of h. Empty result when |gamma|(a + b delta) >= delta.
StripResult spectral_strip(const GappedOperator& base, const FormPerturbation& pert, double gamma);

/// First (a, b) on a grid over a with minimal b such that a + b delta < omega delta and
/// ||C_ab|| <= 1, or nullopt.
std::optional<FormBound> ab_from_omega(const GappedOperator& base, const ComplexMatrix& v, double omega,
                                       int grid_points = 64);

/// {a, b, rho_full, rho_half, norm_c_ab}
nlohmann::json summary_json(const FormPerturbation& pert);

}  // namespace gapblock
