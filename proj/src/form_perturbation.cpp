#include <gapblock/form_perturbation.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace gapblock {

namespace {
constexpr const char* kModule = "form_perturbation";

void require_same_dim(const GappedOperator& base, const ComplexMatrix& v)
{
    if (v.rows() != base.dim() || v.cols() != base.dim())
        throw Error(kModule, "matching dimensions", "perturbation does not match h0");
    if (!all_finite(v)) throw Error(kModule, "finite entries", "perturbation contains NaN or Inf");
}

// Minimal b with ||C_{a,b}|| <= 1 for fixed a. Feasibility is monotone in b
// because H_ab grows in the Loewner order.
double minimal_b(const GappedOperator& base, const ComplexMatrix& v, double a, double b_hi)
{
    auto feasible = [&](double b) { return a + b > 0.0 && operator_norm(compute_c_ab(base, v, a, b)) <= 1.0 + 1e-12; };
    if (!feasible(b_hi)) return std::numeric_limits<double>::infinity();
    if (feasible(0.0)) return 0.0;
    double lo = 0.0;
    double hi = b_hi;
    for (int it = 0; it < 60 && hi - lo > 1e-14 * (1.0 + hi); ++it)
    {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? hi : lo) = mid;
    }
    return hi;
}
}  // namespace

GappedOperator GappedOperator::from_matrix(const ComplexMatrix& h0)
{
    if (h0.rows() != h0.cols() || h0.rows() == 0) throw Error(kModule, "square input", "h0 must be square and nonempty");
    if (!all_finite(h0)) throw Error(kModule, "finite entries", "h0 contains NaN or Inf");
    if (hermiticity_defect(h0) > kHermitianTol) throw Error(kModule, "hermitian h0", "h0 is not Hermitian");

    GappedOperator g;
    g.h0_  = hermitian_part(h0);
    g.eig_ = eigh(g.h0_);
    g.delta_ = g.eig_.eigenvalues.cwiseAbs().minCoeff();
    if (g.delta_ <= 1e-12 * (1.0 + g.eig_.eigenvalues.cwiseAbs().maxCoeff()))
        throw Error(kModule, "spectral gap", "0 is (numerically) an eigenvalue of h0");
    g.p_plus_  = spectral_projection(g.eig_, +1);
    g.p_minus_ = spectral_projection(g.eig_, -1);
    return g;
}

ComplexMatrix GappedOperator::abs_power(double s) const
{
    return matrix_function(eig_, [s](double x) { return std::pow(std::abs(x), s); });
}

ComplexMatrix GappedOperator::form_weight(double a, double b, double s) const
{
    if (a < 0.0 || b < 0.0) throw Error(kModule, "nonnegative form bound", "a and b must be nonnegative");
    if (a + b <= 0.0) throw Error(kModule, "invertible H_ab", "a = b = 0 makes H_ab singular");
    return matrix_function(eig_, [a, b, s](double x) { return std::pow(a + b * std::abs(x), s); });
}

FormBound FormPerturbation::weights() const
{
    if (a + b > 0.0) return {a, b};
    return {0.0, 1.0};
}

ComplexMatrix compute_c_ab(const GappedOperator& base, const ComplexMatrix& v, double a, double b)
{
    require_same_dim(base, v);
    const ComplexMatrix w = base.form_weight(a, b, -0.5);
    return w * v * w;
}

RhoPair compute_rho(const GappedOperator& base, const ComplexMatrix& v)
{
    require_same_dim(base, v);
    const ComplexMatrix s  = base.abs_power(-0.5);
    const ComplexMatrix c0 = s * v * s;
    const ComplexMatrix* proj[2] = {&base.p_plus(), &base.p_minus()};
    RhoPair rho;
    rho.full = operator_norm(c0);
    for (const auto* pi : proj)
        for (const auto* pj : proj) rho.half = std::max(rho.half, operator_norm((*pi) * c0 * (*pj)));
    return rho;
}

FormPerturbation make_perturbation(const GappedOperator& base, const ComplexMatrix& v)
{
    const RhoPair rho = compute_rho(base, v);
    return make_perturbation(base, v, FormBound{0.0, rho.full});
}

FormPerturbation make_perturbation(const GappedOperator& base, const ComplexMatrix& v, FormBound bound)
{
    require_same_dim(base, v);
    if (bound.a < 0.0 || bound.b < 0.0) throw Error(kModule, "nonnegative form bound", "a and b must be nonnegative");

    FormPerturbation p;
    p.v         = v;
    p.symmetric = hermiticity_defect(v) <= kHermitianTol;
    p.a         = bound.a;
    p.b         = bound.b;
    const RhoPair rho = compute_rho(base, v);
    p.rho_full = rho.full;
    p.rho_half = rho.half;
    if (bound.a + bound.b > 0.0)
        p.c_ab = compute_c_ab(base, v, bound.a, bound.b);
    else if (rho.full == 0.0)
        p.c_ab = ComplexMatrix::Zero(v.rows(), v.cols());
    else
        throw Error(kModule, "invertible H_ab", "a = b = 0 is only admissible for V = 0");
    return p;
}

ComplexMatrix c_hat(const GappedOperator& base, const FormPerturbation& pert, Complex gamma, Complex z)
{
    const FormBound w = pert.weights();
    const ComplexMatrix shifted = base.h0() - z * ComplexMatrix::Identity(base.dim(), base.dim());
    return shifted * base.form_weight(w.a, w.b, -1.0) + gamma * compute_c_ab(base, pert.v, w.a, w.b);
}

double factorization_residual(const GappedOperator& base, const FormPerturbation& pert, Complex gamma, Complex z)
{
    const FormBound w = pert.weights();
    const ComplexMatrix half = base.form_weight(w.a, w.b, 0.5);
    const ComplexMatrix h    = base.h0() + gamma * pert.v;
    const ComplexMatrix lhs  = h - z * ComplexMatrix::Identity(base.dim(), base.dim());
    return operator_norm(lhs - half * c_hat(base, pert, gamma, z) * half);
}

PerturbedOperator construct_h(const GappedOperator& base, const FormPerturbation& pert, Complex gamma)
{
    require_same_dim(base, pert.v);
    PerturbedOperator op{base, pert, gamma, base.h0() + gamma * pert.v, 0.0};
    op.factorization_residual = factorization_residual(base, pert, gamma, Complex(0.0, 1.0));
    if (op.factorization_residual > 1e-9 * (1.0 + operator_norm(op.h)))
        throw Error(kModule, "form factorization", "H - z != H_ab^{1/2} C_hat(z) H_ab^{1/2} at z = i");
    return op;
}

StripResult spectral_strip(const GappedOperator& base, const FormPerturbation& pert, double gamma)
{
    StripResult result;
    const double delta  = base.delta();
    const double shrink = std::abs(gamma) * (pert.a + pert.b * delta);
    if (shrink >= delta)
    {
        result.diagnostic = "precondition violated: |gamma|(a + b delta) = " + std::to_string(shrink) +
                            " >= delta = " + std::to_string(delta);
        return result;
    }
    const double half_width = delta - shrink;
    result.interval = std::make_pair(-half_width, half_width);

    const ComplexVector ev = eigenvalues(base.h0() + gamma * pert.v);
    const double slack = 1e-12 * (1.0 + ev.cwiseAbs().maxCoeff());
    result.eigenvalues_outside = true;
    for (Eigen::Index k = 0; k < ev.size(); ++k)
    {
        if (std::abs(ev(k).real()) < half_width - slack)
        {
            result.eigenvalues_outside = false;
            result.diagnostic = "eigenvalue " + std::to_string(ev(k).real()) + "+" + std::to_string(ev(k).imag()) +
                                "i lies inside the strip";
            break;
        }
    }
    return result;
}

std::optional<FormBound> ab_from_omega(const GappedOperator& base, const ComplexMatrix& v, double omega,
                                       int grid_points)
{
    if (!(omega > 0.0)) throw Error(kModule, "positive omega", "omega must be positive");
    require_same_dim(base, v);
    const double delta = base.delta();
    const double limit = omega * delta;

    if (operator_norm(v) == 0.0) return FormBound{0.0, 0.0};

    for (int i = 0; i < grid_points; ++i)
    {
        const double a = limit * static_cast<double>(i) / grid_points;
        const double b_cap = (limit - a) / delta;
        const double b = minimal_b(base, v, a, b_cap);
        if (std::isfinite(b) && a + b * delta < limit) return FormBound{a, b};
    }
    return std::nullopt;
}

nlohmann::json summary_json(const FormPerturbation& pert)
{
    return {{"a", pert.a},
            {"b", pert.b},
            {"rho_full", pert.rho_full},
            {"rho_half", pert.rho_half},
            {"norm_c_ab", operator_norm(pert.c_ab)}};
}

}  // namespace gapblock
