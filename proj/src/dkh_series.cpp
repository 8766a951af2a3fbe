#include <gapblock/dkh_series.hpp>
#include <gapblock/riesz_projector.hpp>

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace gapblock {

namespace {

constexpr const char* kModule = "dkh_series";

ComplexMatrix identity(Eigen::Index n) { return ComplexMatrix::Identity(n, n); }

// b^{-1} a b for square a, b.
ComplexMatrix conjugate_by(const ComplexMatrix& a, const ComplexMatrix& b)
{
    return Eigen::PartialPivLU<ComplexMatrix>(b).solve(a * b);
}

double offdiag_norm(const ComplexMatrix& a, const GappedOperator& base)
{
    return std::max(operator_norm(base.p_plus() * a * base.p_minus()), operator_norm(base.p_minus() * a * base.p_plus()));
}

// Eigenvalues of h0 + t e^{i phi} v: smallest |Re lambda| and the number with Re lambda > 0.
std::pair<double, Eigen::Index> axis_data(const ComplexMatrix& h0, const ComplexMatrix& v, double t, double phi)
{
    const ComplexVector ev = eigenvalues(h0 + std::polar(t, phi) * v);
    Eigen::Index positive = 0;
    for (Eigen::Index k = 0; k < ev.size(); ++k)
        if (ev(k).real() > 0.0) ++positive;
    return {ev.real().cwiseAbs().minCoeff(), positive};
}

// Spectral radius of (h0 - iy)^{-1} v, evaluated in the eigenbasis of h0 where
// the resolvent is diagonal.
double axis_radius(const RealVector& lambda, const ComplexMatrix& v_eig, double y)
{
    ComplexMatrix k = v_eig;
    for (Eigen::Index r = 0; r < k.rows(); ++r) k.row(r) /= Complex(lambda(r), -y);
    return eigenvalues(k).cwiseAbs().maxCoeff();
}

}  // namespace

FamilySample family_eval(const GappedOperator& base, const FormPerturbation& pert, Complex gamma)
{
    FamilySample s;
    s.gamma = gamma;
    s.h = base.h0() + gamma * pert.v;

    RieszResult split;
    try
    {
        QuadratureScheme scheme = default_scheme(s.h);
        scheme.tol = 1e-12;
        split = riesz_split(s.h, scheme);
    }
    catch (const Error& e)
    {
        throw Error(kModule, "iR in resolvent set", std::string("at this gamma: ") + e.what());
    }
    s.q = split.pair;
    s.node_count = split.node_count;

    const ReferenceProjections ref = make_reference(base.p_plus(), base.p_plus());
    s.x = angular_from_projections(s.q, ref);

    const Eigen::Index n = base.dim();
    s.w = identity(n) + s.x.x_plus_op + s.x.x_minus_op;
    s.h_diag = conjugate_by(s.h, s.w);

    const OmegaPair omega = omega_series(s.x);
    s.omega_plus  = omega.omega_plus;
    s.omega_minus = omega.omega_minus;
    const ComplexMatrix omega_op = s.x.basis_plus * s.omega_plus * s.x.basis_plus.adjoint() +
                                   s.x.basis_minus * s.omega_minus * s.x.basis_minus.adjoint();
    s.u = s.w * omega_op;
    s.h_hat_diag = conjugate_by(s.h, s.u);

    s.offdiag_residual = std::max(offdiag_norm(s.h_diag, base), offdiag_norm(s.h_hat_diag, base));
    if (s.offdiag_residual > 1e-8 * operator_norm(s.h))
        throw Error(kModule, "block-diagonal H_diag", "off-diagonal residual " + std::to_string(s.offdiag_residual));
    return s;
}

ComplexMatrix TaylorModel::evaluate(Complex gamma, int order) const
{
    const int last = order < 0 ? static_cast<int>(coefficients.size()) - 1 : order;
    if (last >= static_cast<int>(coefficients.size()))
        throw Error(kModule, "order within model", "requested order " + std::to_string(last) + " exceeds the model");
    // Horner scheme from the highest retained coefficient.
    ComplexMatrix acc = coefficients[last];
    for (int k = last - 1; k >= 0; --k) acc = (gamma * acc + coefficients[k]).eval();
    return acc;
}

int default_node_count(int order) { return std::max(64, 8 * (order + 1)); }

TaylorModel taylor_coefficients(const MatrixFamily& f, double r, int order, int node_count)
{
    if (!(r > 0.0)) throw Error(kModule, "positive radius", "sample radius must be positive");
    if (order < 0) throw Error(kModule, "nonnegative order", "order must be >= 0");
    if (node_count < 4 * (order + 1))
        throw Error(kModule, "node count >= 4 (N + 1)", "got " + std::to_string(node_count));

    const int fine = 2 * node_count;
    std::vector<ComplexMatrix> samples(fine);
    for (int k = 0; k < fine; ++k) samples[k] = f(std::polar(r, 2.0 * std::numbers::pi * k / fine));

    auto coefficients = [&](int stride) {
        const int m = fine / stride;
        std::vector<ComplexMatrix> c(order + 1);
        for (int n = 0; n <= order; ++n)
        {
            ComplexMatrix acc = ComplexMatrix::Zero(samples[0].rows(), samples[0].cols());
            for (int k = 0; k < m; ++k)
            {
                // n k mod m keeps the phase argument small and exact.
                const double phase = -2.0 * std::numbers::pi * static_cast<double>((static_cast<long long>(n) * k) % m) / m;
                acc += samples[k * stride] * std::polar(1.0, phase);
            }
            c[n] = acc / (m * std::pow(r, n));
        }
        return c;
    };

    TaylorModel model;
    model.sample_radius = r;
    model.node_count = node_count;
    model.coefficients = coefficients(2);
    const std::vector<ComplexMatrix> refined = coefficients(1);

    for (const auto& s : samples) model.max_sample_norm = std::max(model.max_sample_norm, operator_norm(s));
    for (int n = 0; n <= order; ++n)
        model.aliasing_estimate =
            std::max(model.aliasing_estimate, std::pow(r, n) * operator_norm(refined[n] - model.coefficients[n]));
    if (model.aliasing_estimate > 1e-7 * model.max_sample_norm)
        throw Error(kModule, "holomorphy on the sample circle",
                    "aliasing estimate " + std::to_string(model.aliasing_estimate) + " exceeds 1e-7 max ||f||");

    for (int k = 0; k < node_count; ++k)
    {
        const Complex g = std::polar(r, 2.0 * std::numbers::pi * k / node_count);
        model.tail_estimate = std::max(model.tail_estimate, operator_norm(samples[2 * k] - model.evaluate(g)));
    }
    return model;
}

double imaginary_axis_margin(const GappedOperator& base, const FormPerturbation& pert, double t)
{
    constexpr int kGrid = 512;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < kGrid; ++j)
        best = std::min(best, axis_data(base.h0(), pert.v, t, 2.0 * std::numbers::pi * j / kGrid).first);
    return best;
}

double estimate_gamma_max(const GappedOperator& base, const FormPerturbation& pert, double rel_tol)
{
    const double norm_v = operator_norm(pert.v);
    if (norm_v == 0.0) return std::numeric_limits<double>::infinity();

    // iy is an eigenvalue of h0 + gamma v exactly when 1/gamma is an eigenvalue of
    // -(h0 - iy)^{-1} v, so gamma_max = 1 / sup_y of that spectral radius.
    const HermitianEigensystem& eig = base.eigensystem();
    const ComplexMatrix v_eig = eig.eigenvectors.adjoint() * pert.v * eig.eigenvectors;
    const double scale = std::sqrt(base.delta() * eig.eigenvalues.cwiseAbs().maxCoeff());
    const auto f = [&](double theta) { return axis_radius(eig.eigenvalues, v_eig, scale * std::tan(theta)); };

    constexpr int kGrid = 512;
    constexpr int kRefine = 8;
    const double step = std::numbers::pi / kGrid;
    std::vector<std::pair<double, int>> samples(kGrid);
    for (int j = 0; j < kGrid; ++j) samples[j] = {-f(-0.5 * std::numbers::pi + (j + 0.5) * step), j};
    std::partial_sort(samples.begin(), samples.begin() + kRefine, samples.end());

    double best = -samples[0].first;
    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int s = 0; s < kRefine; ++s)
    {
        const double centre = -0.5 * std::numbers::pi + (samples[s].second + 0.5) * step;
        double lo = std::max(centre - step, -0.5 * std::numbers::pi);
        double hi = std::min(centre + step, 0.5 * std::numbers::pi);
        double x1 = hi - golden * (hi - lo);
        double x2 = lo + golden * (hi - lo);
        double f1 = f(x1);
        double f2 = f(x2);
        while (hi - lo > 1e-4 * rel_tol * step)
        {
            if (f1 > f2)
            {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - golden * (hi - lo);
                f1 = f(x1);
            }
            else
            {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + golden * (hi - lo);
                f2 = f(x2);
            }
        }
        best = std::max({best, f1, f2});
    }

    const double limit = 1e3 * base.delta() / norm_v;
    if (!(best > 0.0) || 1.0 / best > limit) return std::numeric_limits<double>::infinity();
    return 1.0 / best;
}

ComplexMatrix DkhExpansion::truncation(Complex gamma, int order) const
{
    const ComplexMatrix t = taylor.evaluate(gamma, order);
    if (!symmetric) return t;
    const ComplexMatrix half = base.abs_power(0.5);
    return half * t * half;
}

ComplexMatrix DkhExpansion::exact(Complex gamma) const
{
    const FamilySample s = family_eval(base, pert, gamma);
    return symmetric ? s.h_hat_diag : s.h_diag;
}

DkhExpansion build_dkh_expansion(const GappedOperator& base, const FormPerturbation& pert, int order, bool symmetric,
                                 double gamma_max)
{
    DkhExpansion e{base, pert, symmetric, gamma_max, {}};
    if (symmetric)
    {
        if (!pert.symmetric) throw Error(kModule, "symmetric V", "symmetric expansion needs a Hermitian perturbation");
        const double rel = operator_norm(pert.v * base.abs_power(-1.0));
        if (rel >= 1.0) throw Error(kModule, "||V H0^{-1}|| < 1", "got " + std::to_string(rel));
    }
    if (!(e.gamma_max > 0.0)) e.gamma_max = estimate_gamma_max(base, pert);

    // V = 0 has no singularity; any radius works.
    const double radius = std::isfinite(e.gamma_max) ? 0.5 * e.gamma_max : 1.0;
    const ComplexMatrix inv_half = base.abs_power(-0.5);
    MatrixFamily f;
    if (symmetric)
        f = [&](Complex g) { return ComplexMatrix(inv_half * family_eval(base, pert, g).h_hat_diag * inv_half); };
    else
        f = [&](Complex g) { return family_eval(base, pert, g).h_diag; };
    e.taylor = taylor_coefficients(f, radius, order, default_node_count(order));
    return e;
}

DkhTruncation evaluate_truncation(const DkhExpansion& expansion, Complex gamma, int order)
{
    DkhTruncation out;
    out.matrix = expansion.truncation(gamma, order);
    out.hermiticity_defect = hermiticity_defect(out.matrix);

    const ComplexMatrix exact = expansion.exact(gamma);
    const Eigen::Index n = exact.rows();
    const Complex i(0.0, 1.0);
    const ComplexMatrix r_exact = Eigen::PartialPivLU<ComplexMatrix>(exact - i * identity(n)).solve(identity(n));
    const ComplexMatrix shifted = out.matrix - i * identity(n);
    if (min_singular_value(shifted) <= 1e-14 * (1.0 + operator_norm(shifted)))
    {
        out.resolvent_error = std::numeric_limits<double>::infinity();
    }
    else
    {
        const ComplexMatrix r_trunc = Eigen::PartialPivLU<ComplexMatrix>(shifted).solve(identity(n));
        out.resolvent_error = operator_norm(r_exact - r_trunc);
    }
    out.b_n = operator_norm((out.matrix - exact) * r_exact);

    const double smin = min_singular_value(out.matrix);
    out.invertible = smin > 1e-14 * (1.0 + operator_norm(out.matrix));
    if (out.invertible)
    {
        const ComplexMatrix inv_exact = Eigen::PartialPivLU<ComplexMatrix>(exact).solve(identity(n));
        const ComplexMatrix inv_trunc = Eigen::PartialPivLU<ComplexMatrix>(out.matrix).solve(identity(n));
        out.inverse_error = operator_norm(inv_exact - inv_trunc);
    }
    else
    {
        out.inverse_error = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

DkhTruncation dkh_truncate(const GappedOperator& base, const FormPerturbation& pert, Complex gamma, int order)
{
    if (order < 0) throw Error(kModule, "nonnegative order", "N must be >= 0");
    const DkhExpansion e = build_dkh_expansion(base, pert, order, false);
    return evaluate_truncation(e, gamma, order);
}

DkhTruncation dkh_symmetric_truncate(const GappedOperator& base, const FormPerturbation& pert, double gamma, int order)
{
    if (order < 0) throw Error(kModule, "nonnegative order", "N must be >= 0");
    const DkhExpansion e = build_dkh_expansion(base, pert, order, true);
    DkhTruncation t = evaluate_truncation(e, gamma, order);
    if (t.hermiticity_defect > 1e-9)
        throw Error(kModule, "Hermitian truncation", "defect " + std::to_string(t.hermiticity_defect));
    return t;
}

double geometric_ratio(const std::vector<double>& errors, int last)
{
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int count = 0;
    for (int k = 2; k <= last && k < static_cast<int>(errors.size()); ++k)
    {
        if (!(errors[k] > kErrorFloor) || !std::isfinite(errors[k])) continue;
        const double y = std::log(errors[k]);
        sx += k;
        sy += y;
        sxx += static_cast<double>(k) * k;
        sxy += k * y;
        ++count;
    }
    if (count < 2) return std::numeric_limits<double>::quiet_NaN();
    const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    return std::exp(slope);
}

ConvergenceTable convergence_report(const GappedOperator& base, const FormPerturbation& pert,
                                    const std::vector<double>& gammas, int max_order, bool symmetric)
{
    if (max_order < 0) throw Error(kModule, "nonnegative order", "N_max must be >= 0");
    ConvergenceTable table;
    const DkhExpansion e = build_dkh_expansion(base, pert, max_order, symmetric);
    table.gamma_max = e.gamma_max;

    for (double g : gammas)
    {
        std::vector<double> errors(max_order + 1);
        for (int n = 0; n <= max_order; ++n) errors[n] = evaluate_truncation(e, g, n).resolvent_error;
        for (int n = 0; n <= max_order; ++n)
            table.rows.push_back({g, n, errors[n], geometric_ratio(errors, n)});
        for (int n = 2; n + 2 <= max_order; ++n)
        {
            if (errors[n + 2] <= kErrorFloor || errors[n] <= kErrorFloor) continue;
            if (!(errors[n + 2] < errors[n]))
            {
                table.monotone = false;
                char buf[160];
                std::snprintf(buf, sizeof buf, "gamma=%.6g: e_%d = %.3e >= e_%d = %.3e", g, n + 2, errors[n + 2], n,
                              errors[n]);
                table.violations.emplace_back(buf);
            }
        }
    }
    return table;
}

std::string to_csv(const ConvergenceTable& table)
{
    std::string out = "gamma,N,resolvent_error,ratio_estimate\n";
    char buf[128];
    for (const auto& row : table.rows)
    {
        std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g\n", row.gamma, row.order, row.resolvent_error,
                      row.ratio_estimate);
        out += buf;
    }
    return out;
}

}  // namespace gapblock
