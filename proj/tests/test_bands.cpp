#include "doctest.h"

#include "bandrec/bands.hpp"

#include <cmath>
#include <random>

using namespace bandrec;

namespace {

SymmetricMatrixBands make_2x2(double c, double delta) {
    auto family = [c, delta](WaveVector k) {
        Eigen::MatrixXd a(2, 2);
        a << c + k.k1, delta, delta, c + k.k2;
        return a;
    };
    auto d1 = [](WaveVector) {
        Eigen::MatrixXd a(2, 2);
        a << 1, 0, 0, 0;
        return a;
    };
    auto d2 = [](WaveVector) {
        Eigen::MatrixXd a(2, 2);
        a << 0, 0, 0, 1;
        return a;
    };
    SingularSet s;
    if (delta == 0.0) s.lines.push_back({{0.0, 0.0}, {1.0, 1.0}});
    return {2, family, d1, d2, s};
}

} // namespace

TEST_CASE("diagonal matrix family: eigenvalues are the entries") {
    const SymmetricMatrixBands p = make_2x2(1.0, 0.0);
    const auto lam = p.lambda({0.3, 0.7});
    REQUIRE(lam.size() == 2);
    CHECK(lam[0] == doctest::Approx(1.3).epsilon(1e-14));
    CHECK(lam[1] == doctest::Approx(1.7).epsilon(1e-14));
}

TEST_CASE("coupled 2x2 family: gap 2|delta| on the diagonal") {
    const SymmetricMatrixBands p = make_2x2(1.0, 0.1);
    const auto lam = p.lambda({0.5, 0.5});
    CHECK(lam[1] - lam[0] == doctest::Approx(0.2).epsilon(1e-13));
}

TEST_CASE("non-symmetric family is rejected") {
    auto family = [](WaveVector) {
        Eigen::MatrixXd a(2, 2);
        a << 1, 0.5, 0.0, 1;
        return a;
    };
    auto dz = [](WaveVector) { return Eigen::MatrixXd::Zero(2, 2).eval(); };
    const SymmetricMatrixBands p(2, family, dz, dz, {});
    CHECK_THROWS_AS(p.lambda({0, 0}), std::invalid_argument);
}

TEST_CASE("conical provider: unit slope sheets away from the apex") {
    const WaveVector k0{1.0, 1.0};
    auto p = make_conical_provider(5.0, k0);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 50; ++i) {
        WaveVector k{1.0 + u(rng), 1.0 + u(rng)};
        if (norm(k - k0) < 1e-3) continue;
        CHECK(norm(p->grad_omega(k, 1)) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(norm(p->grad_omega(k, 2)) == doctest::Approx(1.0).epsilon(1e-12));
        const auto w = p->omega(k);
        CHECK(w[1] - w[0] == doctest::Approx(2.0 * norm(k - k0)).epsilon(1e-12));
    }
}

TEST_CASE("matrix-family gradients match finite differences away from crossings") {
    const SymmetricMatrixBands p = make_2x2(2.0, 0.15);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.1, 1.4);
    const double h = 1e-6;
    for (int i = 0; i < 20; ++i) {
        const WaveVector k{u(rng), u(rng)};
        for (int q = 1; q <= 2; ++q) {
            const WaveVector g = p.grad_omega(k, q);
            const double fd1 = (p.omega({k.k1 + h, k.k2})[static_cast<std::size_t>(q - 1)] -
                                p.omega({k.k1 - h, k.k2})[static_cast<std::size_t>(q - 1)]) /
                               (2 * h);
            const double fd2 = (p.omega({k.k1, k.k2 + h})[static_cast<std::size_t>(q - 1)] -
                                p.omega({k.k1, k.k2 - h})[static_cast<std::size_t>(q - 1)]) /
                               (2 * h);
            CHECK(g.k1 == doctest::Approx(fd1).epsilon(1e-5));
            CHECK(g.k2 == doctest::Approx(fd2).epsilon(1e-5));
        }
    }
}

TEST_CASE("declared singular sets coincide with vanishing gaps") {
    auto line = make_crossing_line_provider(1.0, 1.0);
    for (int i = 0; i <= 40; ++i) {
        const double t = 2.0 * i / 40.0;
        const auto w = line->omega({1.0 + t, t}); // on the declared line
        CHECK(std::abs(w[1] - w[0]) < 1e-12);
    }
    auto cone = make_conical_provider(5.0, {0.7, 0.3});
    const auto w = cone->omega({0.7, 0.3});
    CHECK(std::abs(w[1] - w[0]) < 1e-12);
}

TEST_CASE("sheet providers sort bands and keep continuity along segments") {
    auto p = make_crossing_line_provider(1.0, 1.0);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    const WaveVector a{u(rng), u(rng)}, b{u(rng), u(rng)};
    std::vector<double> prev;
    for (int s = 0; s <= 400; ++s) {
        const double t = static_cast<double>(s) / 400.0;
        const WaveVector k = a + t * (b - a);
        const auto w = p->omega(k);
        CHECK(w[0] <= w[1]);
        if (!prev.empty()) {
            // Lipschitz spot check with unit-slope sheets
            const double step = norm(b - a) / 400.0;
            CHECK(std::abs(w[0] - prev[0]) <= 1.5 * step + 1e-12);
            CHECK(std::abs(w[1] - prev[1]) <= 1.5 * step + 1e-12);
        }
        prev = w;
    }
}

TEST_CASE("singular-set geometry predicates") {
    SingularSet s;
    s.lines.push_back({{0.0, 0.0}, {1.0, 1.0}});
    s.points.push_back({2.0, 0.5});

    CHECK(s.contains({1.5, 1.5}, 1e-12));
    CHECK(!s.contains({1.5, 1.4}, 1e-12));
    CHECK(s.contains({2.0, 0.5}, 1e-12));

    // triangle crossed by the line
    CHECK(s.intersects_triangle({{0.5, 0.0}, {1.5, 0.0}, {1.0, 2.0}}, 1e-12));
    // triangle away from everything
    CHECK(!s.intersects_triangle({{3.0, 0.0}, {4.0, 0.0}, {3.5, 0.4}}, 1e-12));
    // triangle containing the point
    CHECK(s.intersects_triangle({{1.8, 0.3}, {2.2, 0.3}, {2.0, 0.8}}, 1e-12));
    // line touching a single vertex still counts (closed triangle)
    CHECK(s.intersects_triangle({{1.0, 1.0}, {2.0, 1.0}, {2.0, 1.0 - 1.0}}, 1e-12));
}

TEST_CASE("grad_omega throws on vanishing omega") {
    auto p = make_affine_provider({{0.0, 1.0, 1.0}, {5.0, 0.0, 0.0}}, [] {
        SingularSet s;
        s.points.push_back({0.0, 0.0});
        return s;
    }());
    CHECK_THROWS_AS(p->grad_omega({0.0, 0.0}, 1), SingularPointError);
}
