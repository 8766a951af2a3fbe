#include <gapblock/angular.hpp>

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace gapblock {

namespace {

constexpr const char* kModule = "angular";

ComplexMatrix identity(Eigen::Index n) { return ComplexMatrix::Identity(n, n); }

ComplexMatrix inverse(const ComplexMatrix& a) { return Eigen::PartialPivLU<ComplexMatrix>(a).solve(identity(a.rows())); }

double condition_number(const ComplexMatrix& a)
{
    if (a.size() == 0) return 1.0;
    const double smin = min_singular_value(a);
    return smin > 0.0 ? operator_norm(a) / smin : std::numeric_limits<double>::infinity();
}

// Coordinates of Q restricted to the reference pair: returns x = B_other* P~_other C M^{-1}
// with M = B* P~ C.
ComplexMatrix graph_coordinates(const ComplexMatrix& basis, const ComplexMatrix& p_tilde,
                                const ComplexMatrix& basis_other, const ComplexMatrix& p_tilde_other,
                                const ComplexMatrix& c, double& smin)
{
    const ComplexMatrix m = basis.adjoint() * p_tilde * c;
    smin = std::min(smin, m.size() ? min_singular_value(m) : std::numeric_limits<double>::infinity());
    if (m.size() == 0) return ComplexMatrix::Zero(basis_other.cols(), basis.cols());
    const ComplexMatrix rhs = basis_other.adjoint() * p_tilde_other * c;
    // x M = rhs  <=>  M^T x^T = rhs^T
    return Eigen::PartialPivLU<ComplexMatrix>(m.transpose()).solve(rhs.transpose()).transpose();
}

}  // namespace

ReferenceProjections make_reference(const ComplexMatrix& p_tilde_plus, const ComplexMatrix& p_plus)
{
    if (p_tilde_plus.rows() != p_plus.rows() || p_tilde_plus.cols() != p_plus.cols())
        throw Error(kModule, "matching dimensions", "reference projection does not match P+");
    ReferenceProjections ref;
    ref.p_tilde_plus  = p_tilde_plus;
    ref.p_tilde_minus = identity(p_plus.rows()) - p_tilde_plus;
    ref.nu = operator_norm(p_plus - p_tilde_plus);
    if (ref.nu >= 1.0) throw Error(kModule, "nu < 1", "||P+ - P~+|| = " + std::to_string(ref.nu));
    return ref;
}

ComplexMatrix AngularPair::frame() const
{
    ComplexMatrix f(basis_plus.rows(), basis_plus.cols() + basis_minus.cols());
    f << basis_plus, basis_minus;
    return f;
}

AngularPair angular_from_projections(const ProjectionPair& q, const ReferenceProjections& ref)
{
    AngularPair x;
    x.basis_plus  = orthonormal_range(ref.p_tilde_plus);
    x.basis_minus = orthonormal_range(ref.p_tilde_minus);
    const ComplexMatrix c_plus  = orthonormal_range(q.q_plus);
    const ComplexMatrix c_minus = orthonormal_range(q.q_minus);

    if (x.basis_plus.cols() != c_plus.cols() || x.basis_minus.cols() != c_minus.cols())
        throw Error(kModule, "rank match",
                    "rank Q+ = " + std::to_string(c_plus.cols()) + ", rank P~+ = " + std::to_string(x.basis_plus.cols()));
    if (x.basis_plus.cols() + x.basis_minus.cols() != q.q_plus.rows())
        throw Error(kModule, "complementary reference", "ranks of P~+ and P~- do not add up to the dimension");

    double smin = std::numeric_limits<double>::infinity();
    x.x_plus  = graph_coordinates(x.basis_plus, ref.p_tilde_plus, x.basis_minus, ref.p_tilde_minus, c_plus, smin);
    x.x_minus = graph_coordinates(x.basis_minus, ref.p_tilde_minus, x.basis_plus, ref.p_tilde_plus, c_minus, smin);
    x.min_singular_value = smin;
    if (smin < 1e-8)
        throw Error(kModule, "graph position",
                    "P~ restricted to Q H is numerically singular (sigma_min = " + std::to_string(smin) + ")");

    x.x_plus_op  = x.basis_minus * x.x_plus * x.basis_plus.adjoint() * ref.p_tilde_plus;
    x.x_minus_op = x.basis_plus * x.x_minus * x.basis_minus.adjoint() * ref.p_tilde_minus;

    const double res_plus  = c_plus.size() ? operator_norm(ref.p_tilde_minus * c_plus - x.x_plus_op * c_plus) : 0.0;
    const double res_minus = c_minus.size() ? operator_norm(ref.p_tilde_plus * c_minus - x.x_minus_op * c_minus) : 0.0;
    x.reconstruction_residual = std::max(res_plus, res_minus);
    return x;
}

CouplingInverse coupling_inverse(const AngularPair& x)
{
    const Eigen::Index kp = x.x_minus.rows();
    const Eigen::Index km = x.x_plus.rows();
    const Eigen::Index n  = kp + km;

    CouplingInverse out;
    out.w = identity(n);
    out.w.topRightCorner(kp, km)   = x.x_minus;
    out.w.bottomLeftCorner(km, kp) = x.x_plus;

    const ComplexMatrix s = identity(kp) - x.x_minus * x.x_plus;
    out.condition = condition_number(s);
    if (!std::isfinite(out.condition) || out.condition > 1e12)
        throw Error(kModule, "complementary subspaces",
                    "I - X- X+ is singular (condition " + std::to_string(out.condition) + ")");
    const ComplexMatrix s_inv = inverse(s);

    out.w_inverse = ComplexMatrix(n, n);
    out.w_inverse.topLeftCorner(kp, kp)     = s_inv;
    out.w_inverse.topRightCorner(kp, km)    = -s_inv * x.x_minus;
    out.w_inverse.bottomLeftCorner(km, kp)  = -x.x_plus * s_inv;
    out.w_inverse.bottomRightCorner(km, km) = identity(km) + x.x_plus * s_inv * x.x_minus;

    out.residual = operator_norm(out.w * out.w_inverse - identity(n));
    if (out.residual > 1e-10 * std::max(1.0, out.condition))
        throw Error(kModule, "W W^{-1} = I", "residual " + std::to_string(out.residual));
    return out;
}

double multiset_distance(const ComplexVector& a, const ComplexVector& b)
{
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    std::vector<bool> used(b.size(), false);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
    {
        Eigen::Index best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < b.size(); ++j)
        {
            if (used[j]) continue;
            const double d = std::abs(a(i) - b(j));
            if (d < best_d)
            {
                best_d = d;
                best = j;
            }
        }
        used[best] = true;
        worst = std::max(worst, best_d);
    }
    return worst;
}

BlockDiagonalization block_diagonalize(const ComplexMatrix& h, const AngularPair& x)
{
    const CouplingInverse c = coupling_inverse(x);
    const ComplexMatrix f = x.frame();
    const ComplexMatrix h_blk = Eigen::PartialPivLU<ComplexMatrix>(f).solve(h * f);
    const ComplexMatrix z = c.w_inverse * h_blk * c.w;

    const Eigen::Index kp = x.basis_plus.cols();
    const Eigen::Index km = x.basis_minus.cols();
    BlockDiagonalization out;
    out.z_plus  = z.topLeftCorner(kp, kp);
    out.z_minus = z.bottomRightCorner(km, km);
    const double upper = (kp && km) ? operator_norm(z.topRightCorner(kp, km)) : 0.0;
    const double lower = (kp && km) ? operator_norm(z.bottomLeftCorner(km, kp)) : 0.0;
    out.offdiag_residual = std::max(upper, lower);

    const double norm_h = operator_norm(h);
    if (out.offdiag_residual > 1e-8 * norm_h)
        throw Error(kModule, "block-diagonal W^{-1} H W",
                    "off-diagonal blocks of norm " + std::to_string(out.offdiag_residual));

    const ComplexVector ev = eigenvalues(h);
    std::vector<Complex> pos;
    std::vector<Complex> neg;
    for (Eigen::Index k = 0; k < ev.size(); ++k) (ev(k).real() > 0.0 ? pos : neg).push_back(ev(k));
    const auto as_vector = [](const std::vector<Complex>& v) {
        return ComplexVector(Eigen::Map<const ComplexVector>(v.data(), static_cast<Eigen::Index>(v.size())));
    };
    const ComplexVector ev_plus  = kp ? eigenvalues(out.z_plus) : ComplexVector();
    const ComplexVector ev_minus = km ? eigenvalues(out.z_minus) : ComplexVector();
    out.eigenvalue_mismatch = std::max(multiset_distance(ev_plus, as_vector(pos)),
                                       multiset_distance(ev_minus, as_vector(neg)));
    return out;
}

double norm_from_distance(double d)
{
    if (!(d >= 0.0 && d < 1.0)) throw Error(kModule, "distance in [0, 1)", "got d = " + std::to_string(d));
    return d / std::sqrt(1.0 - d * d);
}

double distance_from_norm(double k)
{
    if (!(k >= 0.0)) throw Error(kModule, "nonnegative norm", "got k = " + std::to_string(k));
    if (std::isinf(k)) return 1.0;
    return k / std::sqrt(1.0 + k * k);
}

double angular_metric(const ComplexMatrix& p_l, const ComplexMatrix& p_m)
{
    return std::asin(std::min(1.0, operator_norm(p_l - p_m)));
}

DirectRotation direct_rotation(const ProjectionPair& q, const ProjectionPair& p)
{
    const Eigen::Index n = q.q_plus.rows();
    const ComplexMatrix d = q.q_plus - p.q_plus;
    const double dist = operator_norm(d);
    if (dist >= 1.0) throw Error(kModule, "||Q+ - P+|| < 1", "distance " + std::to_string(dist));

    const ComplexMatrix inv_sqrt =
        matrix_function(hermitian_part(identity(n) - d * d), [](double t) { return 1.0 / std::sqrt(t); });

    DirectRotation out;
    out.u = inv_sqrt * (q.q_plus * p.q_plus + q.q_minus * p.q_minus);
    out.unitarity_residual = operator_norm(out.u.adjoint() * out.u - identity(n));
    out.mapping_residual = std::max(operator_norm(out.u * p.q_plus * out.u.adjoint() - q.q_plus),
                                    operator_norm(out.u * p.q_minus * out.u.adjoint() - q.q_minus));

    // Same rotation assembled from the angular operators of Q over P.
    const AngularPair x = angular_from_projections(q, make_reference(p.q_plus, p.q_plus));
    const Eigen::Index kp = x.basis_plus.cols();
    const Eigen::Index km = x.basis_minus.cols();
    const auto inv_sqrt_of = [](const ComplexMatrix& m) {
        if (m.size() == 0) return m;
        return matrix_function(hermitian_part(m), [](double t) { return 1.0 / std::sqrt(t); });
    };
    const ComplexMatrix omega_plus  = inv_sqrt_of(identity(kp) - x.x_minus * x.x_plus);
    const ComplexMatrix omega_minus = inv_sqrt_of(identity(km) - x.x_plus * x.x_minus);
    ComplexMatrix blk(n, n);
    blk.topLeftCorner(kp, kp)     = omega_plus;
    blk.topRightCorner(kp, km)    = x.x_minus * omega_minus;
    blk.bottomLeftCorner(km, kp)  = x.x_plus * omega_plus;
    blk.bottomRightCorner(km, km) = omega_minus;
    const ComplexMatrix f = x.frame();
    out.omega_form_distance = operator_norm(f * blk * f.adjoint() - out.u);

    if (out.unitarity_residual > 1e-10)
        throw Error(kModule, "U unitary", "||U*U - I|| = " + std::to_string(out.unitarity_residual));
    if (out.mapping_residual > 1e-9)
        throw Error(kModule, "U P U* = Q", "residual " + std::to_string(out.mapping_residual));
    if (out.omega_form_distance > 1e-9)
        throw Error(kModule, "two assemblies of U agree", "distance " + std::to_string(out.omega_form_distance));
    return out;
}

ComplexMatrix inverse_sqrt_series(const ComplexMatrix& s, double tol, int* terms)
{
    const Eigen::Index n = s.rows();
    if (n == 0)
    {
        if (terms) *terms = 0;
        return s;
    }
    const double radius = eigenvalues(s).cwiseAbs().maxCoeff();
    if (radius >= 1.0)
        throw Error(kModule, "series convergence", "spectral radius " + std::to_string(radius) + " >= 1");

    // Coefficients of (1 - t)^{-1/2} are binom(2k, k) / 4^k.
    ComplexMatrix sum  = identity(n);
    ComplexMatrix term = identity(n);
    double coef = 1.0;
    const double stop = tol * std::max(1.0 - radius, 1e-3);
    int k = 0;
    constexpr int kMaxTerms = 1000000;
    while (true)
    {
        ++k;
        coef *= (2.0 * k - 1.0) / (2.0 * k);
        term = (term * s).eval();
        const ComplexMatrix add = coef * term;
        sum += add;
        if (operator_norm(add) <= stop) break;
        if (k >= kMaxTerms) throw Error(kModule, "series convergence", "too many terms");
    }
    if (terms) *terms = k;
    return sum;
}

OmegaPair omega_series(const AngularPair& x, double tol)
{
    const ComplexMatrix s_plus  = x.x_minus * x.x_plus;
    const ComplexMatrix s_minus = x.x_plus * x.x_minus;
    OmegaPair out;
    int tp = 0;
    int tm = 0;
    out.omega_plus  = inverse_sqrt_series(s_plus, tol, &tp);
    out.omega_minus = inverse_sqrt_series(s_minus, tol, &tm);
    out.terms = std::max(tp, tm);

    const auto check = [](const ComplexMatrix& omega, const ComplexMatrix& s) {
        if (s.size() == 0) return 0.0;
        return operator_norm(omega * omega * (identity(s.rows()) - s) - identity(s.rows()));
    };
    out.residual = std::max(check(out.omega_plus, s_plus), check(out.omega_minus, s_minus));
    const double scale = 1.0 + std::max(operator_norm(out.omega_plus), operator_norm(out.omega_minus));
    if (out.residual > std::max(10.0 * tol, 1e-12) * scale * scale)
        throw Error(kModule, "Omega^2 (I - X X) = I", "residual " + std::to_string(out.residual));
    return out;
}

double angular_norm_bound(double rho_half, double nu, bool symmetric)
{
    if (rho_half < 0.0 || !(nu >= 0.0 && nu < 1.0))
        throw Error(kModule, "bound precondition", "need rho >= 0 and 0 <= nu < 1");
    const double limit = symmetric ? 1.0 : 0.5;
    if (rho_half >= limit)
        throw Error(kModule, "bound precondition",
                    "rho_half = " + std::to_string(rho_half) + " >= " + (symmetric ? "1" : "1/2"));
    const double denom = symmetric ? 2.0 - rho_half : 2.0 - 3.0 * rho_half;
    const double angle = std::atan(std::sqrt(rho_half / denom)) + std::asin(nu);
    if (angle >= 0.5 * std::numbers::pi)
        throw Error(kModule, "bound precondition", "angle " + std::to_string(angle) + " >= pi/2");
    return std::tan(angle);
}

NormBoundReport verify_norm_bound(double rho_half, const ReferenceProjections& ref, bool symmetric,
                                  const AngularPair& x)
{
    NormBoundReport r;
    r.rho_half  = rho_half;
    r.nu        = ref.nu;
    r.symmetric = symmetric;
    r.bound     = angular_norm_bound(rho_half, ref.nu, symmetric);
    r.norm_x_plus  = operator_norm(x.x_plus);
    r.norm_x_minus = operator_norm(x.x_minus);
    const double slack = 1e-10 * (1.0 + r.bound);
    r.pass = r.norm_x_plus <= r.bound + slack && r.norm_x_minus <= r.bound + slack;

    const bool orthogonal_ref = hermiticity_defect(ref.p_tilde_plus) <= 1e-12;
    if (symmetric && orthogonal_ref)
    {
        const ComplexMatrix graph_plus  = x.basis_plus + x.basis_minus * x.x_plus;
        const ComplexMatrix graph_minus = x.basis_minus + x.basis_plus * x.x_minus;
        r.projection_distance = std::max(operator_norm(ref.p_tilde_plus - orthogonal_projector(graph_plus)),
                                         operator_norm(ref.p_tilde_minus - orthogonal_projector(graph_minus)));
        r.distance_bound = std::sin(std::asin(std::sqrt(rho_half / 2.0)) + std::asin(ref.nu));
        r.pass = r.pass && r.projection_distance <= r.distance_bound + 1e-10;
    }
    return r;
}

nlohmann::json to_json(const NormBoundReport& r)
{
    nlohmann::json j = {{"norm_x_plus", r.norm_x_plus}, {"norm_x_minus", r.norm_x_minus},
                        {"bound", r.bound},             {"pass", r.pass},
                        {"nu", r.nu},                   {"rho_half", r.rho_half},
                        {"symmetric", r.symmetric}};
    if (r.projection_distance >= 0.0)
    {
        j["projection_distance"] = r.projection_distance;
        j["distance_bound"]      = r.distance_bound;
    }
    return j;
}

AccretivityReport w_accretivity(const ComplexMatrix& h, double mu_plus, double mu_minus, const ProjectionPair& p,
                                const AngularPair& x)
{
    if (!(mu_plus > 0.0 && mu_minus > 0.0))
        throw Error(kModule, "invertible W", "mu_plus and mu_minus must be positive");
    AccretivityReport r;
    r.mu_plus  = mu_plus;
    r.mu_minus = mu_minus;

    const ComplexMatrix w  = mu_plus * p.q_plus - mu_minus * p.q_minus;
    const ComplexMatrix wh = w * h;
    r.min_eigenvalue = eigh(hermitian_part(wh)).eigenvalues(0);
    r.accretive = r.min_eigenvalue >= -1e-9 * operator_norm(wh);

    r.bound_plus   = std::sqrt(mu_plus / mu_minus);
    r.bound_minus  = std::sqrt(mu_minus / mu_plus);
    r.norm_x_plus  = operator_norm(x.x_plus);
    r.norm_x_minus = operator_norm(x.x_minus);
    r.bounds_hold = r.norm_x_plus <= r.bound_plus * (1.0 + 1e-9) + 1e-9 &&
                    r.norm_x_minus <= r.bound_minus * (1.0 + 1e-9) + 1e-9;
    r.pass = r.accretive && r.bounds_hold;
    return r;
}

ComplexMatrix q_plus_from_angular(const AngularPair& x)
{
    const CouplingInverse c = coupling_inverse(x);
    const Eigen::Index kp = x.basis_plus.cols();
    const Eigen::Index n  = c.w.rows();
    ComplexMatrix e = ComplexMatrix::Zero(n, n);
    e.topLeftCorner(kp, kp).setIdentity();
    const ComplexMatrix f = x.frame();
    return f * c.w * e * c.w_inverse * inverse(f);
}

}  // namespace gapblock
