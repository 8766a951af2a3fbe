#pragma once

#include <gapblock/form_perturbation.hpp>
#include <gapblock/matrix_core.hpp>

#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace gapblock::dirac {

/// Momentum in natural units (hbar = c = m = 1).
using Momentum = Eigen::Vector3d;

struct Kinematics
{
    double energy = 1.0;  // E = sqrt(1 + p^2)
    double norm = 2.0;    // N = sqrt(2E(1 + E))
};

Kinematics kinematics(const Momentum& p);

/// sigma_k for k = 0, 1, 2 (x, y, z).
ComplexMatrix pauli(int k);

/// sigma . p
ComplexMatrix sigma_dot(const Momentum& p);

/// [[I, sigma.p], [sigma.p, -I]]
ComplexMatrix free_symbol(const Momentum& p);

/// (1/N) [[(1+E) I, sigma.p], [-sigma.p, (1+E) I]], unitary, u h0 u* = diag(E, E, -E, -E).
ComplexMatrix fw_symbol(const Momentum& p);

/// Orthogonal projections onto the positive and negative spectral subspaces of h0(p).
std::pair<ComplexMatrix, ComplexMatrix> lambda_pm(const Momentum& p);

/// sigma.p / (1 + E), the angular operator of the positive subspace over the upper spinors.
ComplexMatrix angular_symbol(const Momentum& p);

/// diag(1, 1, 0, 0)
ComplexMatrix upper_projection();

struct DistanceReport
{
    std::vector<double> distances;   // ||P_u - Lambda+(p)|| in the order of increasing |p|
    double supremum = 0.0;
    double max_identity_defect = 0.0;  // |d - k/sqrt(1+k^2)|, k = ||x+(p)||
    bool strictly_increasing = true;
    bool below_limit = true;           // every d < 1/sqrt(2)
};

/// Sorts the grid by |p| before evaluating.
DistanceReport upper_lower_distance(std::vector<Momentum> grid);

struct CoulombConstants
{
    double hardy = 2.0;
    double kato  = std::numbers::pi / 2.0;
    double tix   = (std::numbers::pi / 2.0 + 2.0 / std::numbers::pi) / 2.0;
    double alpha = 1.0 / 137.035999;
};

enum class ThresholdMode { exact, dkh };

/// Largest integer Z with Z alpha tix < 1 (exact) or < 1/2 (dkh).
int z_threshold(ThresholdMode mode, const CoulombConstants& constants = {});

/// Largest integer Z with Z alpha (pi/2) / delta_b < 1.
int magnetic_threshold(double delta_b, const CoulombConstants& constants = {});

/// Human-readable form of the inequality each threshold enforces.
std::string threshold_inequality(ThresholdMode mode);
std::string magnetic_inequality();

struct DemoOperator
{
    GappedOperator base;
    FormPerturbation pert;
};

/// H0 = direct sum of h0(p_k); V block diagonal from one 4x4 Hermitian block per point.
DemoOperator build_demo_operator(const std::vector<Momentum>& grid, const std::vector<ComplexMatrix>& v_blocks);

/// Same H0 with an arbitrary Hermitian 4n x 4n coupling matrix.
DemoOperator build_demo_operator(const std::vector<Momentum>& grid, const ComplexMatrix& coupling);

}  // namespace gapblock::dirac
