#include <gapblock/angular.hpp>
#include <gapblock/dirac.hpp>
#include <gapblock/instances.hpp>
#include <gapblock/riesz_projector.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace gapblock;
using namespace gapblock::dirac;

namespace {

ProjectionPair pair_from(const ComplexMatrix& q_plus)
{
    ProjectionPair p;
    p.q_plus  = q_plus;
    p.q_minus = ComplexMatrix::Identity(q_plus.rows(), q_plus.cols()) - q_plus;
    return p;
}

ComplexMatrix energy_diag(double e)
{
    Eigen::Vector4d d(e, e, -e, -e);
    return d.cast<Complex>().asDiagonal();
}

std::vector<Momentum> radial_grid(int count, double p_max)
{
    std::vector<Momentum> grid;
    const Momentum dir = Momentum(1.0, -2.0, 0.5).normalized();
    for (int k = 0; k < count; ++k) grid.push_back(dir * (p_max * k / (count - 1)));
    return grid;
}

ComplexMatrix random_coupling(Rng& rng, Eigen::Index n, double norm)
{
    ComplexMatrix v = random_hermitian(rng, n);
    return v * (norm / operator_norm(v));
}

}  // namespace

TEST(Kinematics, EnergyAndNormalization)
{
    const Kinematics rest = kinematics(Momentum::Zero());
    EXPECT_EQ(rest.energy, 1.0);
    EXPECT_EQ(rest.norm, 2.0);
    const Momentum p(3.0, 0.0, 4.0);
    const Kinematics k = kinematics(p);
    EXPECT_NEAR(k.energy, std::sqrt(26.0), 1e-14);
    EXPECT_NEAR(k.norm * k.norm, (1.0 + k.energy) * (1.0 + k.energy) + 25.0, 1e-12);
}

TEST(Symbols, PauliAlgebra)
{
    for (int a = 0; a < 3; ++a)
    {
        EXPECT_LE(operator_norm(pauli(a) * pauli(a) - ComplexMatrix::Identity(2, 2)), 1e-15);
        for (int b = a + 1; b < 3; ++b) EXPECT_LE(operator_norm(pauli(a) * pauli(b) + pauli(b) * pauli(a)), 1e-15);
    }
    const Momentum p(0.3, -1.2, 2.0);
    EXPECT_LE(operator_norm(sigma_dot(p) * sigma_dot(p) - p.squaredNorm() * ComplexMatrix::Identity(2, 2)), 1e-14);
    EXPECT_THROW(pauli(3), Error);
}

TEST(Symbols, FreeSymbolSpectrum)
{
    const Momentum p(0.5, 1.0, -0.7);
    const RealVector ev = eigh(free_symbol(p)).eigenvalues;
    const double e = kinematics(p).energy;
    EXPECT_NEAR(ev(0), -e, 1e-14);
    EXPECT_NEAR(ev(1), -e, 1e-14);
    EXPECT_NEAR(ev(2), e, 1e-14);
    EXPECT_NEAR(ev(3), e, 1e-14);
}

TEST(Symbols, FoldyWouthuysenDiagonalizes)
{
    Rng rng(61);
    for (int trial = 0; trial < 20; ++trial)
    {
        const Momentum p(uniform(rng, -50.0, 50.0), uniform(rng, -50.0, 50.0), uniform(rng, -50.0, 50.0));
        const ComplexMatrix u = fw_symbol(p);
        const double e = kinematics(p).energy;
        EXPECT_LE(operator_norm(u * u.adjoint() - ComplexMatrix::Identity(4, 4)), 1e-13);
        EXPECT_LE(operator_norm(u * free_symbol(p) * u.adjoint() - energy_diag(e)), 1e-12 * e);
    }
}

TEST(Symbols, ProjectionsMatchEigensystem)
{
    const Momentum p(1.0, 2.0, 2.0);
    const auto [plus, minus] = lambda_pm(p);
    const HermitianEigensystem eig = eigh(free_symbol(p));
    EXPECT_LE(operator_norm(plus - spectral_projection(eig, 1)), 1e-14);
    EXPECT_LE(operator_norm(minus - spectral_projection(eig, -1)), 1e-14);
    EXPECT_LE(operator_norm(plus + minus - ComplexMatrix::Identity(4, 4)), 1e-15);
    EXPECT_LE(operator_norm(plus * minus), 1e-15);
}

TEST(AngularSymbol, GraphOfPositiveSubspace)
{
    for (double magnitude : {0.0, 0.1, 1.0, 1e3})
    {
        const Momentum p = Momentum(0.6, 0.0, 0.8) * magnitude;
        const ComplexMatrix x = angular_symbol(p);
        const double e = kinematics(p).energy;
        EXPECT_NEAR(operator_norm(x), magnitude / (1.0 + e), 1e-14);
        ComplexMatrix graph(4, 2);
        graph << ComplexMatrix::Identity(2, 2), x;
        EXPECT_LE(operator_norm(lambda_pm(p).first * graph - graph), 1e-13);
    }
    EXPECT_LT(operator_norm(angular_symbol(Momentum(0.0, 0.0, 1e3))), 1.0);
}

TEST(AngularSymbol, AgreesWithGenericAngularOperators)
{
    const Momentum p(0.4, -0.3, 1.1);
    const ComplexMatrix pu = upper_projection();
    const AngularPair x = angular_from_projections(pair_from(lambda_pm(p).first), make_reference(pu, pu));
    EXPECT_LE(operator_norm(x.x_plus_op.bottomLeftCorner(2, 2) - angular_symbol(p)), 1e-12);
    EXPECT_LE(operator_norm(x.x_minus_op.topRightCorner(2, 2) + angular_symbol(p)), 1e-12);
}

TEST(AngularSymbol, BlockDiagonalizationGivesEnergies)
{
    const Momentum p(2.0, -1.0, 0.5);
    const ComplexMatrix pu = upper_projection();
    const AngularPair x = angular_from_projections(pair_from(lambda_pm(p).first), make_reference(pu, pu));
    const BlockDiagonalization b = block_diagonalize(free_symbol(p), x);
    const double e = kinematics(p).energy;
    EXPECT_LE(operator_norm(b.z_plus - e * ComplexMatrix::Identity(2, 2)), 1e-12 * e);
    EXPECT_LE(operator_norm(b.z_minus + e * ComplexMatrix::Identity(2, 2)), 1e-12 * e);
}

TEST(AngularSymbol, DirectRotationIsFoldyWouthuysenAdjoint)
{
    for (const Momentum& p : {Momentum(0.1, 0.0, 0.0), Momentum(1.0, 2.0, -3.0), Momentum(30.0, 10.0, 5.0)})
    {
        const DirectRotation r = direct_rotation(pair_from(lambda_pm(p).first), pair_from(upper_projection()));
        EXPECT_LE(operator_norm(r.u - fw_symbol(p).adjoint()), 1e-12);
    }
}

TEST(Distance, IncreasingAndBelowLimit)
{
    const DistanceReport r = upper_lower_distance(radial_grid(100, 1e3));
    ASSERT_EQ(r.distances.size(), 100u);
    EXPECT_EQ(r.distances.front(), 0.0);
    EXPECT_TRUE(r.strictly_increasing);
    EXPECT_TRUE(r.below_limit);
    EXPECT_LT(r.supremum, 1.0 / std::sqrt(2.0));
    EXPECT_GT(r.supremum, 0.7);
    EXPECT_LE(r.max_identity_defect, 1e-12);
}

TEST(Distance, SortsGridByMagnitude)
{
    std::vector<Momentum> grid = radial_grid(10, 5.0);
    std::reverse(grid.begin(), grid.end());
    const DistanceReport r = upper_lower_distance(grid);
    EXPECT_TRUE(r.strictly_increasing);
    EXPECT_EQ(r.distances.front(), 0.0);
}

TEST(Distance, RandomMomenta)
{
    Rng rng(62);
    std::vector<Momentum> grid;
    for (int k = 0; k < 1000; ++k)
        grid.push_back(Momentum(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)) * 600.0);
    const DistanceReport r = upper_lower_distance(grid);
    EXPECT_TRUE(r.below_limit);
    EXPECT_LE(r.max_identity_defect, 1e-12);
    for (double d : r.distances) EXPECT_LT(d, 1.0 / std::sqrt(2.0));
}

TEST(Thresholds, Values)
{
    EXPECT_EQ(z_threshold(ThresholdMode::exact), 124);
    EXPECT_EQ(z_threshold(ThresholdMode::dkh), 62);
    EXPECT_EQ(magnetic_threshold(1.0), 87);
    EXPECT_EQ(magnetic_threshold(0.5), 43);
    CoulombConstants unit;
    unit.alpha = 1.0;
    EXPECT_EQ(z_threshold(ThresholdMode::exact, unit), 0);
    EXPECT_EQ(z_threshold(ThresholdMode::dkh, unit), 0);
    EXPECT_EQ(magnetic_threshold(1e-6), 0);
    EXPECT_THROW(magnetic_threshold(0.0), Error);
    EXPECT_THROW(magnetic_threshold(1.5), Error);
}

TEST(Thresholds, InequalitiesHold)
{
    const CoulombConstants c;
    const int exact = z_threshold(ThresholdMode::exact);
    EXPECT_LT(exact * c.alpha * c.tix, 1.0);
    EXPECT_GE((exact + 1) * c.alpha * c.tix, 1.0);
    const int dkh = z_threshold(ThresholdMode::dkh);
    EXPECT_LT(dkh * c.alpha * c.tix, 0.5);
    EXPECT_GE((dkh + 1) * c.alpha * c.tix, 0.5);
    EXPECT_FALSE(threshold_inequality(ThresholdMode::exact).empty());
    EXPECT_NE(threshold_inequality(ThresholdMode::exact), threshold_inequality(ThresholdMode::dkh));
    EXPECT_FALSE(magnetic_inequality().empty());
}

TEST(Thresholds, MonotoneInFieldGap)
{
    int previous = 0;
    for (int k = 1; k <= 20; ++k)
    {
        const int z = magnetic_threshold(0.05 * k);
        EXPECT_GE(z, previous);
        previous = z;
    }
}

TEST(DemoOperator, SinglePoint)
{
    const Momentum p(0.0, 0.0, 1.0);
    const DemoOperator d = build_demo_operator({p}, std::vector<ComplexMatrix>{ComplexMatrix::Zero(4, 4)});
    EXPECT_LE(operator_norm(d.base.h0() - free_symbol(p)), 1e-15);
    EXPECT_NEAR(d.base.delta(), std::sqrt(2.0), 1e-14);
    EXPECT_EQ(d.pert.rho_full, 0.0);
}

TEST(DemoOperator, RejectsBadInput)
{
    const std::vector<Momentum> grid = radial_grid(2, 1.0);
    ComplexMatrix v = ComplexMatrix::Zero(4, 4);
    v(0, 1) = 1.0;
    EXPECT_THROW(build_demo_operator(grid, std::vector<ComplexMatrix>{v, v}), Error);
    EXPECT_THROW(build_demo_operator(grid, std::vector<ComplexMatrix>{ComplexMatrix::Zero(4, 4)}), Error);
    EXPECT_THROW(build_demo_operator(grid, ComplexMatrix::Zero(4, 4)), Error);
}

TEST(DemoOperator, RelativeBoundFromNorm)
{
    Rng rng(63);
    const std::vector<Momentum> grid = radial_grid(16, 10.0);
    const DemoOperator d = build_demo_operator(grid, random_coupling(rng, 64, 0.4));
    EXPECT_LE(d.pert.rho_full, 0.4 + 1e-12);
    EXPECT_LE(d.pert.rho_half, d.pert.rho_full + 1e-12);
    EXPECT_TRUE(d.pert.symmetric);
}

TEST(DemoOperator, FullPipeline)
{
    Rng rng(64);
    const std::vector<Momentum> grid = radial_grid(16, 10.0);
    const DemoOperator d = build_demo_operator(grid, random_coupling(rng, 64, 0.4));
    const ComplexMatrix h = d.base.h0() + d.pert.v;
    const RieszResult split = riesz_split(h);
    EXPECT_LE(operator_norm(split.pair.q_plus - schur_split(h).q_plus), 1e-7);

    const ReferenceProjections ref = make_reference(d.base.p_plus(), d.base.p_plus());
    const AngularPair x = angular_from_projections(split.pair, ref);
    const NormBoundReport bound = verify_norm_bound(d.pert.rho_half, ref, true, x);
    EXPECT_TRUE(bound.pass) << to_json(bound).dump();

    const DirectRotation r = direct_rotation(split.pair, pair_from(d.base.p_plus()));
    EXPECT_LE(r.unitarity_residual, 1e-10);
    EXPECT_LE(r.mapping_residual, 1e-9);
}
