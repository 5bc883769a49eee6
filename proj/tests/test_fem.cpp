#include "doctest.h"

#include "bandrec/fem.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

using namespace bandrec;

namespace {

// Plane-wave oracle for the homogeneous medium (epsilon = 1, a = 1):
// lambda = |k + 2 pi g|^2 over integer g, sorted.
std::vector<double> plane_wave_spectrum(WaveVector k, int count) {
    std::vector<double> vals;
    for (int g1 = -4; g1 <= 4; ++g1)
        for (int g2 = -4; g2 <= 4; ++g2) {
            const WaveVector q{k.k1 + 2.0 * M_PI * g1, k.k2 + 2.0 * M_PI * g2};
            vals.push_back(dot(q, q));
        }
    std::sort(vals.begin(), vals.end());
    vals.resize(static_cast<std::size_t>(count));
    return vals;
}

UnitCellConfig homogeneous(int n) {
    UnitCellConfig cfg;
    cfg.epsilon = 1.0;
    cfg.inclusionRadiusRatio = 0.2;
    cfg.cellMeshN = n;
    return cfg;
}

} // namespace

TEST_CASE("periodic identification: dof count excludes boundary duplicates") {
    // (n+1)^2 grid vertices collapse to n^2 dofs
    CHECK(UnitCellDiscretization(homogeneous(8)).dof_count() == 64);
    CHECK(UnitCellDiscretization(homogeneous(16)).dof_count() == 256);
}

TEST_CASE("assemble: periodic Laplacian at k=0 with a constant kernel") {
    const UnitCellDiscretization disc(homogeneous(8));
    const AssembledSystem sys = assemble(disc, {0.0, 0.0});
    CHECK((sys.A - sys.A.adjoint()).cwiseAbs().maxCoeff() < 1e-12);

    const Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(disc.dof_count());
    CHECK((sys.A * ones).cwiseAbs().maxCoeff() < 1e-10);

    const auto pairs = solve_bands(disc, {0.0, 0.0}, 2);
    CHECK(pairs[0].lambda == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(pairs[1].lambda > 1.0);
}

TEST_CASE("assemble: Hermitian at random k and mass conservation") {
    UnitCellConfig cfg;
    cfg.epsilon = 8.9;
    cfg.inclusionRadiusRatio = 0.2;
    cfg.cellMeshN = 16;
    cfg.mode = Mode::TM;
    const UnitCellDiscretization disc(cfg);

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-M_PI, M_PI);
    for (int i = 0; i < 5; ++i) {
        const AssembledSystem sys = assemble(disc, {u(rng), u(rng)});
        CHECK((sys.A - sys.A.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    }

    // Total beta mass equals sum beta_T |T| exactly, and approximates
    // a^2 (1 + (eps-1) * disk fraction) up to the centroid-classification
    // error along the disk boundary (~ perimeter * h).
    const AssembledSystem sys = assemble(disc, {0.3, 0.2});
    const double total = sys.B.sum();
    CHECK(total == doctest::Approx(disc.beta_measure()).epsilon(1e-12));
    const double r = cfg.inclusionRadiusRatio;
    const double exact = 1.0 + (cfg.epsilon - 1.0) * M_PI * r * r;
    const double boundarySlack = (cfg.epsilon - 1.0) * 2.0 * M_PI * r * (2.0 / cfg.cellMeshN);
    CHECK(std::abs(total - exact) <= boundarySlack);
}

TEST_CASE("solve_bands: plane-wave oracle for the homogeneous medium") {
    const UnitCellDiscretization disc(homogeneous(16));

    // second eigenvalue at Gamma ~ 4 pi^2 within 2%
    const auto atGamma = solve_bands(disc, {0.0, 0.0}, 3);
    CHECK(atGamma[0].lambda == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(atGamma[1].lambda == doctest::Approx(4.0 * M_PI * M_PI).epsilon(0.02));

    // first eigenvalue at k = (pi/2, 0)
    const auto atK = solve_bands(disc, {M_PI / 2.0, 0.0}, 1);
    CHECK(atK[0].lambda == doctest::Approx(M_PI * M_PI / 4.0).epsilon(0.01));
}

TEST_CASE("solve_bands: residuals and B-normalization") {
    const UnitCellDiscretization disc(homogeneous(12));
    const WaveVector k{0.9, 0.4};
    const AssembledSystem sys = assemble(disc, k);
    const double scaleA = sys.A.cwiseAbs().maxCoeff();
    for (const EigenPair& p : solve_bands(disc, k, 4)) {
        const double res = (sys.A * p.u - p.lambda * sys.B.cast<std::complex<double>>() * p.u).norm();
        CHECK(res <= 1e-8 * scaleA * p.u.norm());
        const double nb = std::real(p.u.dot(sys.B.cast<std::complex<double>>() * p.u));
        CHECK(nb == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("eigenvalue continuity along a random segment") {
    const UnitCellDiscretization disc(homogeneous(10));
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    const WaveVector a{u(rng), u(rng)};
    const WaveVector dir{u(rng), u(rng)};
    const double step = 1e-3;
    double maxRatio = 0.0;
    std::vector<double> prev = solve_bands(disc, a, 3).empty() ? std::vector<double>{} : std::vector<double>{};
    std::vector<double> lamPrev;
    for (const auto& p : solve_bands(disc, a, 3)) lamPrev.push_back(p.lambda);
    for (int s = 1; s <= 10; ++s) {
        const WaveVector k = a + (step * s / norm(dir)) * dir;
        std::vector<double> lam;
        for (const auto& p : solve_bands(disc, k, 3)) lam.push_back(p.lambda);
        for (std::size_t q = 0; q < lam.size(); ++q)
            maxRatio = std::max(maxRatio, std::abs(lam[q] - lamPrev[q]) / step);
        lamPrev = lam;
    }
    MESSAGE("measured eigenvalue Lipschitz constant ~ ", maxRatio);
    CHECK(maxRatio < 100.0);
}

TEST_CASE("group_velocity: homogeneous plane wave has slope 1") {
    const UnitCellDiscretization disc(homogeneous(16));
    const WaveVector k{M_PI / 2.0, 0.0};
    const auto pairs = solve_bands(disc, k, 1);
    const WaveVector g = group_velocity(disc, k, pairs[0]);
    CHECK(g.k1 == doctest::Approx(1.0).epsilon(0.01));
    CHECK(std::abs(g.k2) < 1e-8);
}

TEST_CASE("group_velocity: even symmetry in k1 at k1 = 0") {
    UnitCellConfig cfg;
    cfg.epsilon = 8.9;
    cfg.cellMeshN = 12;
    const UnitCellDiscretization disc(cfg);
    const WaveVector k{0.0, 1.1};
    const auto pairs = solve_bands(disc, k, 1);
    const WaveVector g = group_velocity(disc, k, pairs[0]);
    CHECK(std::abs(g.k1) < 1e-3);
}

TEST_CASE("group_velocity throws at omega = 0") {
    const UnitCellDiscretization disc(homogeneous(8));
    const auto pairs = solve_bands(disc, {0.0, 0.0}, 1);
    CHECK_THROWS_AS(group_velocity(disc, {0.0, 0.0}, pairs[0]), SingularPointError);
}

TEST_CASE("fem_provider: cache, ordering, TE/TM equivalence at epsilon 1") {
    auto provider = fem_provider(homogeneous(8), 3);
    const WaveVector k{0.7, 0.2};
    (void)provider->lambda(k);
    const long solvesAfterFirst = provider->eigensolve_count();
    (void)provider->lambda(k);
    (void)provider->omega(k);
    CHECK(provider->eigensolve_count() == solvesAfterFirst); // cache hit

    // sorted nonnegative bands at random k for a high-contrast TE cell
    UnitCellConfig te;
    te.epsilon = 8.9;
    te.inclusionRadiusRatio = 0.2;
    te.cellMeshN = 10;
    te.mode = Mode::TE;
    auto pte = fem_provider(te, 4);
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> u(-M_PI, M_PI);
    for (int i = 0; i < 20; ++i) {
        const auto lam = pte->lambda({u(rng), u(rng)});
        for (std::size_t q = 0; q < lam.size(); ++q) {
            CHECK(lam[q] >= 0.0);
            if (q > 0) CHECK(lam[q] >= lam[q - 1]);
        }
    }

    // with epsilon = 1, TE and TM coefficients coincide
    UnitCellConfig tm = homogeneous(8);
    tm.mode = Mode::TM;
    auto ptm = fem_provider(tm, 3);
    for (int i = 0; i < 5; ++i) {
        const WaveVector kk{u(rng), u(rng)};
        const auto a = provider->lambda(kk);
        const auto b = ptm->lambda(kk);
        for (std::size_t q = 0; q < a.size(); ++q)
            CHECK(a[q] == doctest::Approx(b[q]).epsilon(1e-10));
    }

    // the declared singular set is the origin
    CHECK(provider->singular_set().contains({0.0, 0.0}, 1e-12));
    CHECK_THROWS_AS(provider->grad_omega({0.0, 0.0}, 1), SingularPointError);
}

TEST_CASE("hexagonal cell assembles and produces sorted bands") {
    UnitCellConfig cfg;
    cfg.lattice = Lattice::Hexagonal;
    cfg.epsilon = 8.9;
    cfg.inclusionRadiusRatio = 1.0 / 9.0;
    cfg.cellMeshN = 10;
    auto p = fem_provider(cfg, 3);
    const auto lam = p->lambda({0.5, 0.2});
    CHECK(lam.size() == 3);
    CHECK(lam[0] >= 0.0);
    CHECK(lam[1] >= lam[0]);
    CHECK(lam[2] >= lam[1]);
}

TEST_CASE("plane-wave convergence order is about 2 in h") {
    const WaveVector k{1.1, 0.6};
    const auto oracle = plane_wave_spectrum(k, 3);
    auto worst_err = [&](int n) {
        const UnitCellDiscretization disc(homogeneous(n));
        const auto pairs = solve_bands(disc, k, 3);
        double e = 0.0;
        for (int q = 0; q < 3; ++q)
            e = std::max(e, std::abs(pairs[static_cast<std::size_t>(q)].lambda - oracle[static_cast<std::size_t>(q)]) /
                                oracle[static_cast<std::size_t>(q)]);
        return e;
    };
    const double e16 = worst_err(16), e32 = worst_err(32);
    const double order = std::log2(e16 / e32);
    MESSAGE("plane-wave errors: 16 -> ", e16, ", 32 -> ", e32, ", order ", order);
    CHECK(order >= 1.8);
}
