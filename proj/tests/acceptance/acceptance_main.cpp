// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <gapblock/angular.hpp>
#include <gapblock/dirac.hpp>
#include <gapblock/dkh_series.hpp>
#include <gapblock/instances.hpp>
#include <gapblock/matrix_json.hpp>
#include <gapblock/riesz_projector.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace gapblock;

namespace {

struct Outcome
{
    bool pass = false;
    std::string detail;
};

struct Criterion
{
    int id;
    std::string title;
    double time_limit;  // seconds; 0 means no limit
    std::function<Outcome()> body;
};

std::string fmt(const char* pattern, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

ProjectionPair orthogonal_pair(const ComplexMatrix& q_plus)
{
    ProjectionPair p;
    p.q_plus  = q_plus;
    p.q_minus = ComplexMatrix::Identity(q_plus.rows(), q_plus.cols()) - q_plus;
    return p;
}

// Shared between the oracle criterion and the decay criterion.
std::vector<OracleInstance>& oracle_instances()
{
    static std::vector<OracleInstance> instances = [] {
        Rng rng(20240501);
        std::vector<OracleInstance> out;
        for (int k = 0; k < 200; ++k) out.push_back(random_oracle_instance(rng));
        return out;
    }();
    return instances;
}

std::vector<NormInstance>& norm_instances()
{
    static std::vector<NormInstance> instances = [] {
        Rng rng(20240502);
        std::vector<NormInstance> out;
        for (int k = 0; k < 500; ++k) out.push_back(random_norm_instance(rng, k % 2 == 0));
        return out;
    }();
    return instances;
}

Outcome thresholds()
{
    const int exact = dirac::z_threshold(dirac::ThresholdMode::exact);
    const int dkh = dirac::z_threshold(dirac::ThresholdMode::dkh);
    const int magnetic = dirac::magnetic_threshold(1.0);
    return {exact == 124 && dkh == 62 && magnetic == 87,
            fmt("exact=%d dkh=%d magnetic(1)=%d", exact, dkh, magnetic)};
}

Outcome oracle_equivalence()
{
    double worst = 0.0;
    int symmetric = 0;
    int complex_gamma = 0;
    Eigen::Index min_dim = 1000;
    Eigen::Index max_dim = 0;
    for (const OracleInstance& inst : oracle_instances())
    {
        const double d = operator_norm(riesz_split(inst.h).pair.q_plus - schur_split(inst.h).q_plus);
        worst = std::max(worst, d);
        symmetric += inst.pert.symmetric;
        complex_gamma += inst.gamma.imag() != 0.0;
        min_dim = std::min(min_dim, inst.base.dim());
        max_dim = std::max(max_dim, inst.base.dim());
    }
    return {worst <= 1e-6, fmt("200 instances (dim %ld-%ld, %d symmetric V, %d complex gamma), max distance %.2e",
                               static_cast<long>(min_dim), static_cast<long>(max_dim), symmetric, complex_gamma, worst)};
}

Outcome norm_bound_suite()
{
    int violations = 0;
    int oblique = 0;
    double worst_ratio = 0.0;
    for (const NormInstance& inst : norm_instances())
    {
        const AngularPair x = angular_from_projections(riesz_split(inst.h).pair, inst.ref);
        const NormBoundReport r = verify_norm_bound(inst.pert.rho_half, inst.ref, inst.symmetric, x);
        violations += !r.pass;
        oblique += inst.oblique;
        worst_ratio = std::max(worst_ratio, std::max(r.norm_x_plus, r.norm_x_minus) / r.bound);
    }
    return {violations == 0, fmt("500 instances (%d oblique references), %d violations, max ||X||/bound %.4f",
                                 oblique, violations, worst_ratio)};
}

Outcome accretivity_witnesses()
{
    int failures = 0;
    int checks = 0;
    double min_slack = 1e300;
    for (const NormInstance& inst : norm_instances())
    {
        const double rho = inst.pert.rho_half;
        const ProjectionPair p = orthogonal_pair(inst.base.p_plus());
        const AngularPair x = angular_from_projections(schur_split(inst.h), make_reference(p.q_plus, p.q_plus));
        std::vector<double> ratios;
        if (inst.symmetric) ratios.push_back(rho / (2.0 - rho));
        if (rho < 0.5) ratios.push_back(rho / (2.0 - 3.0 * rho));
        for (double mu : ratios)
        {
            for (const auto& [mu_plus, mu_minus] : {std::pair{mu, 1.0}, std::pair{1.0, mu}})
            {
                const AccretivityReport r = w_accretivity(inst.h, mu_plus, mu_minus, p, x);
                ++checks;
                failures += !r.pass;
                min_slack = std::min(min_slack, r.min_eigenvalue);
            }
        }
    }
    return {failures == 0, fmt("%d witness checks on 500 instances, %d failures, min eigenvalue of Re(WH) %.3e", checks,
                               failures, min_slack)};
}

Outcome angular_duality()
{
    Rng rng(20240505);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial)
    {
        const Eigen::Index n = std::uniform_int_distribution<Eigen::Index>(2, 16)(rng);
        const Eigen::Index k = std::uniform_int_distribution<Eigen::Index>(1, n - 1)(rng);
        const ComplexMatrix frame = random_unitary(rng, n);
        const ComplexMatrix base = frame.leftCols(k);
        const ComplexMatrix complement = frame.rightCols(n - k);
        ComplexMatrix kmat = random_complex(rng, n - k, k);
        kmat *= uniform(rng, 0.01, 3.0) / operator_norm(kmat);
        const ComplexMatrix p = orthogonal_projector(base);
        const ComplexMatrix graph = base + complement * kmat;
        const ComplexMatrix q = orthogonal_projector(orthonormal_range(graph));

        const AngularPair x = angular_from_projections(orthogonal_pair(q), make_reference(p, p));
        const double d = operator_norm(p - q);
        const double norm_x = operator_norm(x.x_plus);
        worst = std::max({worst, std::abs(norm_x - norm_from_distance(d)), std::abs(norm_x - operator_norm(kmat)),
                          std::abs(distance_from_norm(norm_x) - d)});
    }
    return {worst <= 1e-10, fmt("100 graph subspaces, max | ||X|| - d/sqrt(1-d^2) | %.2e", worst)};
}

Outcome dirac_identities()
{
    using namespace dirac;
    Rng rng(20240506);
    double fw = 0.0;
    double lambda = 0.0;
    for (int trial = 0; trial < 1000; ++trial)
    {
        const Momentum p(uniform(rng, -10.0, 10.0), uniform(rng, -10.0, 10.0), uniform(rng, -10.0, 10.0));
        const ComplexMatrix u = fw_symbol(p);
        const double e = kinematics(p).energy;
        Eigen::Vector4d d(e, e, -e, -e);
        const ComplexMatrix diag = d.cast<Complex>().asDiagonal();
        fw = std::max({fw, operator_norm(u * u.adjoint() - ComplexMatrix::Identity(4, 4)),
                       operator_norm(u * free_symbol(p) * u.adjoint() - diag)});
        const HermitianEigensystem eig = eigh(free_symbol(p));
        const auto [plus, minus] = lambda_pm(p);
        lambda = std::max({lambda, operator_norm(plus - spectral_projection(eig, 1)),
                           operator_norm(minus - spectral_projection(eig, -1))});
    }

    const Momentum dir = Momentum(0.3, -0.5, 0.81).normalized();
    std::vector<Momentum> grid;
    for (int k = 0; k <= 2000; ++k) grid.push_back(dir * (1e3 * k / 2000.0));
    const DistanceReport dist = upper_lower_distance(grid);
    const double limit = 1.0 / std::sqrt(2.0);

    double rotation = 0.0;
    for (int k = 0; k < 100; ++k)
    {
        const Momentum p = Momentum(std::cos(0.7 * k), std::sin(0.7 * k), std::cos(1.3 * k)).normalized() * (10.0 * k);
        const DirectRotation r = direct_rotation(orthogonal_pair(lambda_pm(p).first), orthogonal_pair(upper_projection()));
        rotation = std::max(rotation, operator_norm(r.u - fw_symbol(p).adjoint()));
    }

    const bool pass = fw <= 1e-12 && lambda <= 1e-12 && dist.supremum <= limit && limit - dist.supremum <= 1e-3 &&
                      dist.below_limit && rotation <= 1e-10;
    return {pass, fmt("u(p) defect %.1e, Lambda defect %.1e, sup distance %.6f (1/sqrt2 - sup = %.1e), "
                      "rotation vs u* %.1e",
                      fw, lambda, dist.supremum, limit - dist.supremum, rotation)};
}

Outcome dkh_convergence()
{
    const auto j = read_json_file(std::string(GAPBLOCK_DATA_DIR) + "/reference_8x8.json");
    const GappedOperator base = GappedOperator::from_matrix(matrix_from_json(j.at("h0")));
    const FormPerturbation pert = make_perturbation(base, matrix_from_json(j.at("v")));
    constexpr int kMaxOrder = 40;

    std::ostringstream detail;
    bool pass = true;
    for (bool symmetric : {false, true})
    {
        const DkhExpansion e = build_dkh_expansion(base, pert, kMaxOrder, symmetric);
        const double gm = e.gamma_max;
        const std::vector<double> gammas = {0.1 * gm, 0.3 * gm, 0.5 * gm};
        const ConvergenceTable table = convergence_report(base, pert, gammas, kMaxOrder, symmetric);
        pass = pass && table.monotone;
        detail << (symmetric ? " symmetric:" : "general: gamma_max=" + fmt("%.5f", gm) + ";");
        for (double g : gammas)
        {
            std::vector<double> errors(kMaxOrder + 1);
            for (const auto& row : table.rows)
                if (row.gamma == g) errors[row.order] = row.resolvent_error;
            const double ratio = geometric_ratio(errors, kMaxOrder);
            const double target = g / gm;
            pass = pass && std::abs(ratio - target) <= 0.2 * target;
            detail << fmt(" %.1f->%.3f", target, ratio);

            if (symmetric)
                for (int n = 0; n <= kMaxOrder; n += 4)
                {
                    const DkhTruncation t = evaluate_truncation(e, g, n);
                    pass = pass && t.hermiticity_defect <= 1e-9;
                }
        }
        if (!table.monotone) detail << " (not monotone: " << table.violations.front() << ")";
        if (!symmetric)
        {
            const ComplexMatrix diag_v = base.p_plus() * pert.v * base.p_plus() + base.p_minus() * pert.v * base.p_minus();
            const double c1 = operator_norm(e.taylor.coefficients[1] - diag_v);
            pass = pass && c1 <= 1e-9;
            detail << fmt("; c1 defect %.1e;", c1);
        }
    }
    return {pass, detail.str()};
}

Outcome resolvent_decay()
{
    int checked = 0;
    int violations = 0;
    double worst = 0.0;
    for (const OracleInstance& inst : oracle_instances())
    {
        if (inst.gamma.imag() != 0.0) continue;
        const DecayReport r = verify_decay(inst.base, inst.pert, inst.gamma.real(), {1.0, 10.0, 100.0});
        ++checked;
        violations += !r.pass;
        worst = std::max(worst, r.max_ratio);
    }
    return {violations == 0, fmt("%d real-gamma instances x 3 eta, %d violations, max ratio to bound %.4f", checked,
                                 violations, worst)};
}

Outcome triangle_inequality()
{
    Rng rng(20240509);
    int violations = 0;
    double worst = -1e300;
    for (int trial = 0; trial < 1000; ++trial)
    {
        const Eigen::Index n = std::uniform_int_distribution<Eigen::Index>(2, 12)(rng);
        const Eigen::Index k = std::uniform_int_distribution<Eigen::Index>(1, n - 1)(rng);
        const ComplexMatrix a = orthogonal_projector(random_subspace(rng, n, k));
        const ComplexMatrix b = orthogonal_projector(random_subspace(rng, n, k));
        const ComplexMatrix c = orthogonal_projector(random_subspace(rng, n, k));
        const double excess = angular_metric(a, c) - angular_metric(a, b) - angular_metric(b, c);
        worst = std::max(worst, excess);
        violations += excess > 1e-10;
    }
    return {violations == 0, fmt("1000 triples, %d violations, max excess %.2e", violations, worst)};
}

Outcome cli_determinism()
{
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "gapblock_acceptance";
    fs::create_directories(dir);
    const std::string cli = GAPBLOCK_CLI_PATH;
    const std::string model = std::string(GAPBLOCK_DATA_DIR) + "/reference_8x8.json";
    const std::vector<std::string> commands = {
        "verify --seed 11",
        "demo --seed 5 --nmax 2",
        "dkh --input " + model + " --gamma 0.3 --nmax 6",
        "angular --input " + model + " --gamma 0.4",
    };

    const auto slurp = [](const fs::path& path) {
        std::ifstream in(path, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    };

    int identical = 0;
    std::string failure;
    for (std::size_t c = 0; c < commands.size(); ++c)
    {
        std::string reports[2];
        for (int run = 0; run < 2; ++run)
        {
            const fs::path out = dir / ("report_" + std::to_string(c) + "_" + std::to_string(run));
            const std::string line = "\"" + cli + "\" " + commands[c] + " --output \"" + out.string() + "\" 2>/dev/null";
            const int status = std::system(line.c_str());
            if (status != 0 && failure.empty()) failure = commands[c] + " exited with status " + std::to_string(status);
            reports[run] = slurp(out);
        }
        if (!reports[0].empty() && reports[0] == reports[1]) ++identical;
        else if (failure.empty()) failure = commands[c] + " produced differing reports";
    }
    fs::remove_all(dir);
    const bool pass = identical == static_cast<int>(commands.size()) && failure.empty();
    return {pass, fmt("%d/%zu commands byte-identical across two runs", identical, commands.size()) +
                      (failure.empty() ? "" : "; " + failure)};
}

}  // namespace

int main()
{
    const std::vector<Criterion> criteria = {
        {1, "Coulomb Z thresholds", 1.0, thresholds},
        {2, "quadrature split matches ordered Schur", 60.0, oracle_equivalence},
        {3, "angular norm bounds", 120.0, norm_bound_suite},
        {4, "accretivity witnesses and Krein bound", 0.0, accretivity_witnesses},
        {5, "angular norm and distance duality", 0.0, angular_duality},
        {6, "free Dirac identities", 0.0, dirac_identities},
        {7, "DKH convergence on the reference instance", 120.0, dkh_convergence},
        {8, "resolvent decay bound", 0.0, resolvent_decay},
        {9, "angular metric triangle inequality", 0.0, triangle_inequality},
        {10, "CLI determinism", 0.0, cli_determinism},
    };

    int failed = 0;
    for (const Criterion& c : criteria)
    {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = c.body();
        }
        catch (const std::exception& e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.time_limit > 0.0 && seconds >= c.time_limit)
        {
            o.pass = false;
            o.detail += fmt("; exceeded %.0f s", c.time_limit);
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.title << " | " << o.detail
                  << fmt(" | %.2f s", seconds) << std::endl;
    }
    std::cout << (failed == 0 ? "all acceptance criteria passed" : fmt("%d criteria failed", failed)) << std::endl;
    return failed == 0 ? 0 : 1;
}
