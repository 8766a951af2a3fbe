#include <gapblock/dirac.hpp>

#include <algorithm>
#include <cmath>

namespace gapblock::dirac {

namespace {

constexpr const char* kModule = "dirac";

ComplexMatrix blocks(const ComplexMatrix& a, const ComplexMatrix& b, const ComplexMatrix& c, const ComplexMatrix& d)
{
    ComplexMatrix m(4, 4);
    m << a, b, c, d;
    return m;
}

void require_finite(const Momentum& p)
{
    if (!p.allFinite()) throw Error(kModule, "finite momentum", "momentum has NaN or Inf components");
}

// Largest integer Z >= 0 with Z * unit < limit - guard.
int largest_below(double unit, double limit)
{
    constexpr double kGuard = 1e-12;
    const double target = limit - kGuard;
    int z = static_cast<int>(std::floor(target / unit));
    z = std::max(z, 0);
    while (z > 0 && z * unit >= target) --z;
    while ((z + 1) * unit < target) ++z;
    return z;
}

}  // namespace

Kinematics kinematics(const Momentum& p)
{
    require_finite(p);
    const double e = std::sqrt(1.0 + p.squaredNorm());
    return {e, std::sqrt(2.0 * e * (1.0 + e))};
}

ComplexMatrix pauli(int k)
{
    ComplexMatrix s(2, 2);
    const Complex i(0.0, 1.0);
    switch (k)
    {
        case 0: s << 0.0, 1.0, 1.0, 0.0; break;
        case 1: s << 0.0, -i, i, 0.0; break;
        case 2: s << 1.0, 0.0, 0.0, -1.0; break;
        default: throw Error(kModule, "pauli index", "index must be 0, 1 or 2");
    }
    return s;
}

ComplexMatrix sigma_dot(const Momentum& p)
{
    require_finite(p);
    return p(0) * pauli(0) + p(1) * pauli(1) + p(2) * pauli(2);
}

ComplexMatrix free_symbol(const Momentum& p)
{
    const ComplexMatrix sp = sigma_dot(p);
    const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
    return blocks(id, sp, sp, -id);
}

ComplexMatrix fw_symbol(const Momentum& p)
{
    const Kinematics k = kinematics(p);
    const ComplexMatrix sp = sigma_dot(p);
    const ComplexMatrix diag = (1.0 + k.energy) * ComplexMatrix::Identity(2, 2);
    return blocks(diag, sp, -sp, diag) / k.norm;
}

std::pair<ComplexMatrix, ComplexMatrix> lambda_pm(const Momentum& p)
{
    const Kinematics k = kinematics(p);
    const ComplexMatrix sp = sigma_dot(p);
    const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
    const double scale = 1.0 / (2.0 * k.energy);
    ComplexMatrix plus  = scale * blocks((1.0 + k.energy) * id, sp, sp, (k.energy - 1.0) * id);
    ComplexMatrix minus = scale * blocks((k.energy - 1.0) * id, -sp, -sp, (1.0 + k.energy) * id);
    return {plus, minus};
}

ComplexMatrix angular_symbol(const Momentum& p)
{
    return sigma_dot(p) / (1.0 + kinematics(p).energy);
}

ComplexMatrix upper_projection()
{
    ComplexMatrix pu = ComplexMatrix::Zero(4, 4);
    pu(0, 0) = 1.0;
    pu(1, 1) = 1.0;
    return pu;
}

DistanceReport upper_lower_distance(std::vector<Momentum> grid)
{
    if (grid.empty()) throw Error(kModule, "nonempty grid", "momentum grid is empty");
    std::stable_sort(grid.begin(), grid.end(),
                     [](const Momentum& a, const Momentum& b) { return a.squaredNorm() < b.squaredNorm(); });

    DistanceReport r;
    const ComplexMatrix pu = upper_projection();
    const double limit = 1.0 / std::sqrt(2.0);
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        const double d = operator_norm(pu - lambda_pm(grid[i]).first);
        const double k = operator_norm(angular_symbol(grid[i]));
        r.max_identity_defect = std::max(r.max_identity_defect, std::abs(d - k / std::sqrt(1.0 + k * k)));
        if (!r.distances.empty() && grid[i].norm() > grid[i - 1].norm() && !(d > r.distances.back()))
            r.strictly_increasing = false;
        if (!(d < limit)) r.below_limit = false;
        r.supremum = std::max(r.supremum, d);
        r.distances.push_back(d);
    }
    return r;
}

int z_threshold(ThresholdMode mode, const CoulombConstants& c)
{
    if (!(c.alpha > 0.0)) throw Error(kModule, "positive alpha", "alpha must be positive");
    return largest_below(c.alpha * c.tix, mode == ThresholdMode::exact ? 1.0 : 0.5);
}

int magnetic_threshold(double delta_b, const CoulombConstants& c)
{
    if (!(c.alpha > 0.0)) throw Error(kModule, "positive alpha", "alpha must be positive");
    if (!(delta_b > 0.0 && delta_b <= 1.0)) throw Error(kModule, "delta_b in (0, 1]", "got " + std::to_string(delta_b));
    return largest_below(c.alpha * c.kato / delta_b, 1.0);
}

std::string threshold_inequality(ThresholdMode mode)
{
    return mode == ThresholdMode::exact ? "Z * alpha * (pi/2 + 2/pi)/2 < 1" : "Z * alpha * (pi/2 + 2/pi)/2 < 1/2";
}

std::string magnetic_inequality() { return "Z * alpha * (pi/2) / delta_b < 1"; }

namespace {

ComplexMatrix free_sum(const std::vector<Momentum>& grid)
{
    if (grid.empty()) throw Error(kModule, "nonempty grid", "momentum grid is empty");
    const Eigen::Index n = 4 * static_cast<Eigen::Index>(grid.size());
    ComplexMatrix h0 = ComplexMatrix::Zero(n, n);
    for (std::size_t k = 0; k < grid.size(); ++k) h0.block(4 * k, 4 * k, 4, 4) = free_symbol(grid[k]);
    return h0;
}

}  // namespace

DemoOperator build_demo_operator(const std::vector<Momentum>& grid, const std::vector<ComplexMatrix>& v_blocks)
{
    if (v_blocks.size() != grid.size())
        throw Error(kModule, "one block per point", "expected " + std::to_string(grid.size()) + " blocks");
    const Eigen::Index n = 4 * static_cast<Eigen::Index>(grid.size());
    ComplexMatrix v = ComplexMatrix::Zero(n, n);
    for (std::size_t k = 0; k < grid.size(); ++k)
    {
        if (v_blocks[k].rows() != 4 || v_blocks[k].cols() != 4)
            throw Error(kModule, "4x4 blocks", "potential block has the wrong shape");
        v.block(4 * k, 4 * k, 4, 4) = v_blocks[k];
    }
    return build_demo_operator(grid, v);
}

DemoOperator build_demo_operator(const std::vector<Momentum>& grid, const ComplexMatrix& coupling)
{
    const ComplexMatrix h0 = free_sum(grid);
    if (coupling.rows() != h0.rows() || coupling.cols() != h0.cols())
        throw Error(kModule, "matching dimensions", "coupling must be 4n x 4n");
    if (!is_hermitian(coupling)) throw Error(kModule, "hermitian potential", "demo potential must be Hermitian");
    GappedOperator base = GappedOperator::from_matrix(h0);
    FormPerturbation pert = make_perturbation(base, coupling);
    return {std::move(base), std::move(pert)};
}

}  // namespace gapblock::dirac
