#pragma once

#include <gapblock/form_perturbation.hpp>
#include <gapblock/matrix_core.hpp>

#include <json.hpp>

#include <vector>

namespace gapblock {

/// Quadrature for the principal-value integral over iR. The substitution
/// eta = radius * tan(theta) maps theta in (0, pi/2) onto eta > 0; every node
/// is used together with its mirror -eta, so node_count counts both halves.
struct QuadratureScheme
{
    double radius = 1.0;
    int node_count = 32;
    int max_node_count = 1 << 16;
    /// Refinement stops once two successive doublings agree to tol * (1 + ||D||).
    double tol = 1e-10;
};

struct GaussLegendreRule
{
    std::vector<double> nodes;  // ascending, in (-1, 1)
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1]. Rules are cached per n.
const GaussLegendreRule& gauss_legendre(int n);

/// Scheme adapted to h: radius sqrt(min |Re lambda| * max |lambda|).
QuadratureScheme default_scheme(const ComplexMatrix& h);

/// (1/(pi i)) PV int_{iR} (h - z)^{-1} dz at a fixed node count. Summation
/// runs over ascending |eta| with mirrored nodes paired, so the result is
/// bitwise reproducible for a fixed scheme.
ComplexMatrix sign_integral(const ComplexMatrix& h, double radius, int node_count);

struct RieszResult
{
    ProjectionPair pair;
    int node_count = 0;
    double refinement_change = 0.0;
};

/// Q+- = (I +- D)/2 with D the resolvent integral, refined by node doubling.
/// Throws if an eigenvalue lies within 1e-6 ||h|| of iR or refinement exceeds
/// max_node_count.
RieszResult riesz_split(const ComplexMatrix& h, const QuadratureScheme& scheme);
RieszResult riesz_split(const ComplexMatrix& h);

/// {idempotency_residual, commutation_residual, oracle_distance, node_count}
nlohmann::json riesz_report(const ComplexMatrix& h, const RieszResult& result);

/// sup over real t of (a + b|t|)/sqrt(t^2 + eta^2), which is sqrt(a^2 + b^2 eta^2)/|eta|.
double supremum_bound(double a, double b, double eta);

/// (1 - b_tilde)^{-1} (a/2 ||H0^{-1}|| + b)
double decay_bound(double a, double b, double norm_h0_inverse, double b_tilde);

struct SeriesResult
{
    ComplexMatrix sum;
    double b_tilde = 0.0;     // |gamma| ||C_ab|| ||(H0 - i eta)^{-1} H_ab||
    double tail_bound = 0.0;  // bound on ||exact difference - sum||
};

/// Partial sum through `order` of the Neumann series for
/// (H - i eta)^{-1} - (H0 - i eta)^{-1} with H = H0 + gamma V.
SeriesResult resolvent_difference_series(const GappedOperator& base, const FormPerturbation& pert, Complex gamma,
                                         double eta, int order);

/// (h - i eta)^{-1} - (h0 - i eta)^{-1} computed by direct inversion.
ComplexMatrix resolvent_difference(const GappedOperator& base, const ComplexMatrix& h, double eta);

struct DecayPoint
{
    double eta = 0.0;
    double scaled_difference = 0.0;  // |eta| ||resolvent difference||
    double bound = 0.0;
    double b_tilde = 0.0;
    double ratio = 0.0;
};

struct DecayReport
{
    std::vector<DecayPoint> points;
    double max_ratio = 0.0;
    bool pass = true;
};

DecayReport verify_decay(const GappedOperator& base, const FormPerturbation& pert, double gamma,
                         const std::vector<double>& eta_grid);

}  // namespace gapblock
