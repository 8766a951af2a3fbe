#include <gapblock/instances.hpp>
#include <gapblock/riesz_projector.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace gapblock;

namespace {

ComplexMatrix diag(std::initializer_list<double> values)
{
    RealVector d(static_cast<Eigen::Index>(values.size()));
    Eigen::Index k = 0;
    for (double v : values) d(k++) = v;
    return d.cast<Complex>().asDiagonal();
}

GappedOperator sigma_z() { return GappedOperator::from_matrix(diag({1.0, -1.0})); }

}  // namespace

TEST(GaussLegendre, IntegratesPolynomialsExactly)
{
    const GaussLegendreRule& rule = gauss_legendre(6);
    // Exact through degree 11.
    for (int p = 0; p <= 11; ++p)
    {
        double sum = 0.0;
        for (int k = 0; k < 6; ++k) sum += rule.weights[k] * std::pow(rule.nodes[k], p);
        const double exact = p % 2 == 0 ? 2.0 / (p + 1) : 0.0;
        EXPECT_NEAR(sum, exact, 1e-14) << "degree " << p;
    }
    for (int k = 1; k < 6; ++k) EXPECT_LT(rule.nodes[k - 1], rule.nodes[k]);
    EXPECT_EQ(&gauss_legendre(6), &rule);
}

TEST(RieszSplit, DiagonalExamples)
{
    EXPECT_LE(operator_norm(riesz_split(diag({1.0, -1.0})).pair.q_plus - diag({1.0, 0.0})), 1e-8);
    EXPECT_LE(operator_norm(riesz_split(diag({3.0, 2.0, -1.0, -5.0})).pair.q_plus - diag({1.0, 1.0, 0.0, 0.0})), 1e-8);
}

TEST(RieszSplit, MatchesSchurForImaginaryCoupling)
{
    Rng rng(17);
    const GappedOperator base = random_gapped(rng, 10);
    ComplexMatrix v = random_hermitian(rng, 10);
    v *= 0.5 / operator_norm(v);
    const ComplexMatrix h = base.h0() + Complex(0.0, 0.4) * v;
    const RieszResult r = riesz_split(h);
    EXPECT_LE(operator_norm(r.pair.q_plus - schur_split(h).q_plus), 1e-7);
    const double nq = operator_norm(r.pair.q_plus);
    EXPECT_LE(r.pair.idempotency_residual, 1e-7 * (1.0 + nq * nq));
    EXPECT_LE(r.pair.commutation_residual, 1e-7 * operator_norm(h) * nq);
    EXPECT_EQ(r.node_count % 2, 0);
    EXPECT_GE(r.node_count, 8);
}

TEST(RieszSplit, SpectrumSeparation)
{
    Rng rng(18);
    const GappedOperator base = random_gapped(rng, 8);
    const ComplexMatrix h = base.h0() + 0.3 * random_complex(rng, 8, 8) / 2.0;
    const ProjectionPair p = riesz_split(h).pair;
    const ComplexMatrix basis = orthonormal_range(p.q_plus);
    // Restriction of h to ran Q+ in the basis: basis^+ h basis.
    const ComplexMatrix restricted = basis.adjoint() * h * basis;
    const ComplexVector ev = eigenvalues(restricted);
    for (Eigen::Index k = 0; k < ev.size(); ++k) EXPECT_GT(ev(k).real(), 0.0);
}

TEST(RieszSplit, BitwiseDeterministic)
{
    Rng rng(19);
    const GappedOperator base = random_gapped(rng, 7);
    const ComplexMatrix h = base.h0() + Complex(0.2, 0.1) * random_complex(rng, 7, 7) / 3.0;
    const RieszResult a = riesz_split(h);
    const RieszResult b = riesz_split(h);
    EXPECT_EQ(a.pair.q_plus, b.pair.q_plus);
    EXPECT_EQ(a.node_count, b.node_count);
}

TEST(RieszSplit, RejectsEigenvalueNearAxis)
{
    ComplexMatrix h = diag({1.0, -1.0});
    h(1, 1) = Complex(1e-9, 1.0);
    EXPECT_THROW(riesz_split(h), Error);
}

TEST(RieszSplit, RefinementCapThrows)
{
    // A nearly imaginary eigenvalue far from the quadrature scale needs many nodes.
    ComplexMatrix h = diag({1.0, -1.0});
    h(0, 0) = Complex(1e-4, 50.0);
    QuadratureScheme s;
    s.radius = 1.0;
    s.max_node_count = 64;
    EXPECT_THROW(riesz_split(h, s), Error);
}

TEST(RieszReport, Fields)
{
    const ComplexMatrix h = diag({2.0, -1.0});
    const auto j = riesz_report(h, riesz_split(h));
    EXPECT_LE(j["oracle_distance"].get<double>(), 1e-8);
    EXPECT_TRUE(j.contains("idempotency_residual"));
    EXPECT_TRUE(j.contains("commutation_residual"));
    EXPECT_GE(j["node_count"].get<int>(), 8);
}

TEST(ResolventSeries, ZeroCouplingIsZero)
{
    const GappedOperator base = sigma_z();
    const FormPerturbation pert = make_perturbation(base, ComplexMatrix::Identity(2, 2));
    for (int order : {0, 1, 5})
        EXPECT_EQ(resolvent_difference_series(base, pert, 0.0, 1.0, order).sum, ComplexMatrix::Zero(2, 2));
}

TEST(ResolventSeries, FirstTermIsSecondResolventIdentity)
{
    const GappedOperator base = sigma_z();
    const ComplexMatrix v = 0.5 * ComplexMatrix::Identity(2, 2);
    const FormPerturbation pert = make_perturbation(base, v);
    const SeriesResult s = resolvent_difference_series(base, pert, 1.0, 1.0, 1);
    const ComplexMatrix r0 = (base.h0() - Complex(0.0, 1.0) * ComplexMatrix::Identity(2, 2)).inverse();
    EXPECT_LE(operator_norm(s.sum + r0 * v * r0), 1e-14);
    const ComplexMatrix exact = resolvent_difference(base, base.h0() + v, 1.0);
    EXPECT_LE(operator_norm(exact - s.sum), s.tail_bound);
}

TEST(ResolventSeries, ConvergesGeometricallyWithinTailBound)
{
    Rng rng(23);
    const GappedOperator base = random_gapped(rng, 9);
    ComplexMatrix v = random_complex(rng, 9, 9);
    v *= 0.4 / operator_norm(v);
    const FormPerturbation pert = make_perturbation(base, v);
    const Complex gamma(0.6, 0.3);
    const double eta = 2.0;
    const ComplexMatrix exact = resolvent_difference(base, base.h0() + gamma * v, eta);
    double previous = operator_norm(exact);
    for (int order = 1; order <= 30; ++order)
    {
        const SeriesResult s = resolvent_difference_series(base, pert, gamma, eta, order);
        const double err = operator_norm(exact - s.sum);
        EXPECT_LE(err, s.tail_bound * (1.0 + 1e-9) + 1e-15) << "order " << order;
        if (previous > 1e-13) EXPECT_LE(err, (s.b_tilde + 1e-3) * previous + 1e-15) << "order " << order;
        previous = err;
    }
}

TEST(ResolventSeries, RejectsNonContractiveCoupling)
{
    const GappedOperator base = sigma_z();
    const FormPerturbation pert = make_perturbation(base, ComplexMatrix::Identity(2, 2));
    EXPECT_THROW(resolvent_difference_series(base, pert, 2.0, 1.0, 3), Error);
}

TEST(DecayBound, ArithmeticExample)
{
    EXPECT_NEAR(supremum_bound(0.0, 0.3, 10.0), 0.3, 1e-15);
    EXPECT_NEAR(decay_bound(0.0, 0.3, 1.0, 0.09), 0.3 / 0.91, 1e-15);
    EXPECT_NEAR(decay_bound(0.0, 0.3, 1.0, 0.09), 0.32967, 1e-5);
    EXPECT_NEAR(supremum_bound(0.3, 0.4, 1.0), 0.5, 1e-15);
}

TEST(VerifyDecay, ZeroCouplingGivesZeroDifference)
{
    const GappedOperator base = sigma_z();
    const FormPerturbation pert = make_perturbation(base, ComplexMatrix::Identity(2, 2));
    const DecayReport r = verify_decay(base, pert, 0.0, {1.0, 10.0});
    for (const auto& p : r.points) EXPECT_EQ(p.scaled_difference, 0.0);
    EXPECT_TRUE(r.pass);
}

TEST(VerifyDecay, OffDiagonalExample)
{
    const GappedOperator base = sigma_z();
    ComplexMatrix v(2, 2);
    v << 0.0, 0.3, 0.3, 0.0;
    const FormPerturbation pert = make_perturbation(base, v, FormBound{0.0, 0.3});
    const DecayReport r = verify_decay(base, pert, 1.0, {1.0, 10.0, 100.0});
    ASSERT_EQ(r.points.size(), 3u);
    for (const auto& p : r.points) EXPECT_LE(p.ratio, 1.0);
    EXPECT_TRUE(r.pass);
}
