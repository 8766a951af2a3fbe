#include <gapblock/riesz_projector.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

namespace gapblock {

namespace {

constexpr const char* kModule = "riesz_projector";

GaussLegendreRule build_rule(int n)
{
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i)
    {
        // Newton iteration on P_n from the Chebyshev-like initial guess.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it)
        {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k)
            {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double step = p1 / dp;
            x -= step;
            if (std::abs(step) < 1e-16) break;
        }
        // Recompute the derivative at the converged node.
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k)
        {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i]         = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i]         = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

ComplexMatrix identity_like(const ComplexMatrix& h) { return ComplexMatrix::Identity(h.rows(), h.cols()); }

// (T - shift)^{-1} for upper Hessenberg T: Gaussian elimination with pivoting
// between adjacent rows, then one triangular solve.
ComplexMatrix hessenberg_shifted_inverse(const ComplexMatrix& t, Complex shift)
{
    const Eigen::Index n = t.rows();
    ComplexMatrix a = t;
    a.diagonal().array() -= shift;
    ComplexMatrix x = identity_like(t);
    for (Eigen::Index k = 0; k + 1 < n; ++k)
    {
        if (std::abs(a(k + 1, k)) > std::abs(a(k, k)))
        {
            a.row(k).tail(n - k).swap(a.row(k + 1).tail(n - k));
            x.row(k).swap(x.row(k + 1));
        }
        if (a(k + 1, k) == Complex(0.0, 0.0)) continue;
        const Complex m = a(k + 1, k) / a(k, k);
        a.row(k + 1).tail(n - k) -= m * a.row(k).tail(n - k);
        x.row(k + 1) -= m * x.row(k);
    }
    return a.triangularView<Eigen::Upper>().solve(x);
}

}  // namespace

const GaussLegendreRule& gauss_legendre(int n)
{
    if (n < 1) throw Error(kModule, "positive node count", "Gauss-Legendre rule needs n >= 1");
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<GaussLegendreRule>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<GaussLegendreRule>(build_rule(n));
    return *slot;
}

QuadratureScheme default_scheme(const ComplexMatrix& h)
{
    QuadratureScheme scheme;
    const ComplexVector ev = eigenvalues(h);
    const double min_re = ev.real().cwiseAbs().minCoeff();
    const double max_abs = ev.cwiseAbs().maxCoeff();
    if (min_re > 0.0) scheme.radius = std::sqrt(min_re * max_abs);
    return scheme;
}

ComplexMatrix sign_integral(const ComplexMatrix& h, double radius, int node_count)
{
    if (!(radius > 0.0)) throw Error(kModule, "positive radius", "quadrature radius must be positive");
    if (node_count < 8 || node_count % 2 != 0)
        throw Error(kModule, "even node count >= 8", "got node_count = " + std::to_string(node_count));

    // h = Q T Q* with T upper Hessenberg; every shifted solve then costs one
    // triangular back substitution.
    const Eigen::HessenbergDecomposition<ComplexMatrix> hess(h);
    const ComplexMatrix t = hess.matrixH();

    const int half = node_count / 2;
    const GaussLegendreRule& rule = gauss_legendre(half);
    const double quarter_pi = 0.25 * std::numbers::pi;

    ComplexMatrix d = ComplexMatrix::Zero(h.rows(), h.cols());
    for (int k = 0; k < half; ++k)
    {
        const double theta = quarter_pi * (rule.nodes[k] + 1.0);
        const double sec = 1.0 / std::cos(theta);
        const double eta = radius * std::tan(theta);
        const double weight = quarter_pi * rule.weights[k] * radius * sec * sec / std::numbers::pi;

        const Complex ieta(0.0, eta);
        d += weight * (hessenberg_shifted_inverse(t, ieta) + hessenberg_shifted_inverse(t, -ieta));
    }
    const ComplexMatrix q = hess.matrixQ();
    return q * d * q.adjoint();
}

RieszResult riesz_split(const ComplexMatrix& h)
{
    return riesz_split(h, default_scheme(h));
}

RieszResult riesz_split(const ComplexMatrix& h, const QuadratureScheme& scheme)
{
    if (h.rows() != h.cols() || h.rows() == 0) throw Error(kModule, "square input", "h must be square and nonempty");
    if (!all_finite(h)) throw Error(kModule, "finite entries", "h contains NaN or Inf");

    const double norm_h = operator_norm(h);
    const ComplexVector ev = eigenvalues(h);
    const double margin = ev.real().cwiseAbs().minCoeff();
    if (margin < 1e-6 * norm_h)
        throw Error(kModule, "iR in resolvent set",
                    "eigenvalue within " + std::to_string(margin) + " of the imaginary axis");

    int nodes = std::max(8, scheme.node_count + scheme.node_count % 2);
    ComplexMatrix previous = sign_integral(h, scheme.radius, nodes);
    const ComplexMatrix id = identity_like(h);

    while (true)
    {
        const int next = 2 * nodes;
        if (next > scheme.max_node_count)
            throw Error(kModule, "quadrature convergence",
                        "no convergence within " + std::to_string(scheme.max_node_count) + " nodes");
        const ComplexMatrix current = sign_integral(h, scheme.radius, next);
        const double change = operator_norm(current - previous);
        nodes = next;

        const ComplexMatrix q_plus = 0.5 * (id + current);
        const double norm_q = operator_norm(q_plus);
        const double idem = operator_norm(q_plus * q_plus - q_plus);
        if (change <= scheme.tol * (1.0 + operator_norm(current)) && idem <= 1e-7 * (1.0 + norm_q * norm_q))
        {
            RieszResult result;
            result.pair = make_projection_pair(q_plus, h);
            result.node_count = nodes;
            result.refinement_change = change;
            return result;
        }
        previous = current;
    }
}

nlohmann::json riesz_report(const ComplexMatrix& h, const RieszResult& result)
{
    const ProjectionPair oracle = schur_split(h);
    return {{"idempotency_residual", result.pair.idempotency_residual},
            {"commutation_residual", result.pair.commutation_residual},
            {"oracle_distance", operator_norm(result.pair.q_plus - oracle.q_plus)},
            {"node_count", result.node_count}};
}

double supremum_bound(double a, double b, double eta)
{
    if (eta == 0.0) throw Error(kModule, "nonzero eta", "supremum is unbounded at eta = 0");
    return std::sqrt(a * a + b * b * eta * eta) / std::abs(eta);
}

double decay_bound(double a, double b, double norm_h0_inverse, double b_tilde)
{
    if (b_tilde >= 1.0) return std::numeric_limits<double>::infinity();
    return (0.5 * a * norm_h0_inverse + b) / (1.0 - b_tilde);
}

ComplexMatrix resolvent_difference(const GappedOperator& base, const ComplexMatrix& h, double eta)
{
    const ComplexMatrix id = ComplexMatrix::Identity(base.dim(), base.dim());
    const Complex ieta(0.0, eta);
    const ComplexMatrix r  = Eigen::PartialPivLU<ComplexMatrix>(h - ieta * id).solve(id);
    const ComplexMatrix r0 = Eigen::PartialPivLU<ComplexMatrix>(base.h0() - ieta * id).solve(id);
    return r - r0;
}

SeriesResult resolvent_difference_series(const GappedOperator& base, const FormPerturbation& pert, Complex gamma,
                                         double eta, int order)
{
    if (order < 0) throw Error(kModule, "nonnegative order", "series order must be >= 0");
    const FormBound w = pert.weights();
    const HermitianEigensystem& eig = base.eigensystem();
    const Complex ieta(0.0, eta);

    // (H0 - i eta)^{-1} H_ab^s is diagonal in the eigenbasis of H0.
    auto resolvent_weight = [&](double s) {
        ComplexVector d(eig.eigenvalues.size());
        for (Eigen::Index k = 0; k < d.size(); ++k)
        {
            const double lambda = eig.eigenvalues(k);
            d(k) = std::pow(w.a + w.b * std::abs(lambda), s) / (lambda - ieta);
        }
        return ComplexMatrix(eig.eigenvectors * d.asDiagonal() * eig.eigenvectors.adjoint());
    };

    const ComplexMatrix& c = pert.c_ab.size() ? pert.c_ab : compute_c_ab(base, pert.v, w.a, w.b);
    const ComplexMatrix g    = resolvent_weight(0.5);
    const ComplexMatrix full = resolvent_weight(1.0);
    const double norm_c = operator_norm(c);

    SeriesResult result;
    result.b_tilde = std::abs(gamma) * norm_c * operator_norm(full);
    if (result.b_tilde >= 1.0)
        throw Error(kModule, "series contraction",
                    "b_tilde = " + std::to_string(result.b_tilde) + " >= 1 at eta = " + std::to_string(eta));

    // Term n is G (-gamma C R0 H_ab)^{n-1} (-gamma C) G.
    const ComplexMatrix step  = -gamma * c * full;
    const ComplexMatrix first = -gamma * c * g;
    ComplexMatrix chain = first;
    ComplexMatrix sum   = ComplexMatrix::Zero(base.dim(), base.dim());
    for (int n = 1; n <= order; ++n)
    {
        sum += chain;
        chain = (step * chain).eval();
    }
    result.sum = g * sum;

    const double norm_g = operator_norm(g);
    result.tail_bound = norm_g * norm_g * std::abs(gamma) * norm_c * std::pow(result.b_tilde, order) /
                        (1.0 - result.b_tilde);
    return result;
}

DecayReport verify_decay(const GappedOperator& base, const FormPerturbation& pert, double gamma,
                         const std::vector<double>& eta_grid)
{
    DecayReport report;
    const FormBound w = pert.weights();
    const ComplexMatrix& c = pert.c_ab.size() ? pert.c_ab : compute_c_ab(base, pert.v, w.a, w.b);
    const double norm_c = operator_norm(c);
    const ComplexMatrix h = base.h0() + gamma * pert.v;
    const HermitianEigensystem& eig = base.eigensystem();

    for (double eta : eta_grid)
    {
        DecayPoint pt;
        pt.eta = eta;
        pt.scaled_difference = std::abs(eta) * operator_norm(resolvent_difference(base, h, eta));

        // ||(H0 - i eta)^{-1} H_ab|| is a maximum over the spectrum of H0.
        double weight_norm = 0.0;
        for (Eigen::Index k = 0; k < eig.eigenvalues.size(); ++k)
        {
            const double lambda = eig.eigenvalues(k);
            weight_norm = std::max(weight_norm, (w.a + w.b * std::abs(lambda)) / std::hypot(lambda, eta));
        }
        pt.b_tilde = std::abs(gamma) * norm_c * weight_norm;
        pt.bound = decay_bound(pert.a, pert.b, base.norm_inverse(), pt.b_tilde);
        if (pt.scaled_difference == 0.0)
            pt.ratio = 0.0;
        else
            pt.ratio = std::isfinite(pt.bound) && pt.bound > 0.0 ? pt.scaled_difference / pt.bound
                                                                  : std::numeric_limits<double>::infinity();
        report.max_ratio = std::max(report.max_ratio, pt.ratio);
        report.points.push_back(pt);
    }
    report.pass = report.max_ratio <= 1.0;
    return report;
}

}  // namespace gapblock
