#include "doctest.h"

#include "bandrec/bands.hpp"
#include "bandrec/interp.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <sstream>

using namespace bandrec;

namespace {

FeketeTable& table() {
    static FeketeTable t;
    return t;
}

RefPoint face_point(int i, double t) {
    const RefPoint a = refbasis::ref_vertex(refbasis::cyc(i + 1));
    const RefPoint b = refbasis::ref_vertex(refbasis::cyc(i + 2));
    return {(1 - t) / 2 * a.x + (1 + t) / 2 * b.x, (1 - t) / 2 * a.y + (1 + t) / 2 * b.y};
}

RefPoint random_interior(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(0.01, 0.98);
    double b1 = u(rng), b2 = u(rng);
    if (b1 + b2 > 0.99) {
        b1 = 0.99 - b1;
        b2 = 0.99 - b2;
    }
    const double b3 = 1.0 - b1 - b2;
    const RefPoint z1 = refbasis::ref_vertex(1), z2 = refbasis::ref_vertex(2), z3 = refbasis::ref_vertex(3);
    return {b1 * z1.x + b2 * z2.x + b3 * z3.x, b1 * z1.y + b2 * z2.y + b3 * z3.y};
}

LocalInterpolant random_member(const DegreeSignature& sig, std::mt19937& rng) {
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    LocalInterpolant p;
    p.sig = sig;
    for (double& v : p.nodalCoeffs) v = c(rng);
    for (int i = 1; i <= 3; ++i) {
        p.sideCoeffs[static_cast<std::size_t>(i - 1)].resize(static_cast<std::size_t>(sig.face(i) - 1));
        for (double& v : p.sideCoeffs[static_cast<std::size_t>(i - 1)]) v = c(rng);
    }
    if (sig.m >= 3) {
        p.internalCoeffs.resize(static_cast<std::size_t>(refbasis::internal_dim(sig.m)));
        for (double& v : p.internalCoeffs) v = c(rng);
    }
    return p;
}

const Triangle2 kSquareIBZ{{0.0, 0.0}, {M_PI, 0.0}, {M_PI, M_PI}};

ConformingDegrees uniform_degrees(const ParamMesh& mesh, int degree) {
    ConformingDegrees deg;
    deg.elementDegree.assign(static_cast<std::size_t>(mesh.element_count()), degree);
    for (const auto& [key, elems] : mesh.face_adjacency()) deg.faceDegree[key] = degree;
    return deg;
}

ConformingDegrees min_rule_degrees(const ParamMesh& mesh, const std::vector<int>& elementDegree) {
    ConformingDegrees deg;
    deg.elementDegree = elementDegree;
    for (const auto& [key, elems] : mesh.face_adjacency()) {
        int mF = deg.elementDegree[static_cast<std::size_t>(elems[0])];
        if (elems[1] >= 0) mF = std::min(mF, deg.elementDegree[static_cast<std::size_t>(elems[1])]);
        deg.faceDegree[key] = mF;
    }
    return deg;
}

WaveVector random_ibz_point(std::mt19937& rng, double lo = 0.0) {
    std::uniform_real_distribution<double> u(lo, 1.0);
    double a = u(rng), b = u(rng);
    if (a < b) std::swap(a, b);
    return {M_PI * a, M_PI * b};
}

} // namespace

TEST_CASE("face_interpolate: constants, linears, quadratics") {
    const FaceData c1 = face_interpolate([](double) { return 1.0; }, 3, 4);
    CHECK(c1.valueLo == 1.0);
    CHECK(c1.valueHi == 1.0);
    for (double c : c1.sideCoeffs) CHECK(std::abs(c) < 1e-14);

    // linear along the face: reproduced by the nodal trace alone
    const FaceData lin = face_interpolate([](double t) { return 0.3 - 0.7 * t; }, 3, 2);
    for (double c : lin.sideCoeffs) CHECK(std::abs(c) < 1e-14);

    // f(x) = x^2 on face 3, m=2: Gauss-Lobatto interpolation of a quadratic
    // is exact
    const FaceData sq = face_interpolate([](double t) { return t * t; }, 3, 2);
    for (int i = 0; i <= 50; ++i) {
        const double t = -1.0 + 2.0 * i / 50.0;
        CHECK(std::abs(sq.trace(t) - t * t) < 1e-13);
    }

    CHECK_THROWS_AS(face_interpolate([](double) { return 0.0; }, 0, 2), std::invalid_argument);
}

TEST_CASE("extend: partition of unity and trace identity") {
    std::array<FaceData, 3> faces;
    for (int i = 1; i <= 3; ++i)
        faces[static_cast<std::size_t>(i - 1)] = face_interpolate([](double) { return 1.0; }, i, 3);
    const LocalInterpolant e = extend(faces);
    std::mt19937 rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        const RefPoint z = random_interior(rng);
        CHECK(std::abs(e.value(z) - 1.0) < 1e-14);
    }
    for (int i = 1; i <= 3; ++i)
        for (int s = 0; s <= 20; ++s) {
            const double t = -1.0 + 2.0 * s / 20.0;
            CHECK(std::abs(e.value(face_point(i, t)) - faces[static_cast<std::size_t>(i - 1)].trace(t)) < 1e-13);
        }
}

TEST_CASE("extend: inconsistent shared-vertex values are rejected") {
    std::array<FaceData, 3> faces;
    for (int i = 1; i <= 3; ++i)
        faces[static_cast<std::size_t>(i - 1)] = face_interpolate([](double t) { return t; }, i, 2);
    faces[0].valueHi += 0.5;
    CHECK_THROWS_AS(extend(faces), ConformityError);
}

TEST_CASE("extension stability: one-face bound equals the face sup") {
    // f vanishing on faces 1,2 and at vertices, f = 1 - x^2 on face 3 with
    // m3 = 2: the sup over the triangle is bounded by the face sup (= 1).
    std::array<FaceData, 3> faces;
    faces[0] = face_interpolate([](double) { return 0.0; }, 1, 2);
    faces[1] = face_interpolate([](double) { return 0.0; }, 2, 2);
    faces[2] = face_interpolate([](double t) { return 1.0 - t * t; }, 3, 2);
    const LocalInterpolant e = extend(faces);
    double sup = 0.0;
    for (const RefPoint& z : barycentric_grid(250)) sup = std::max(sup, std::abs(e.value(z)));
    CHECK(sup <= 1.0 + 1e-12);
    CHECK(sup == doctest::Approx(1.0).epsilon(1e-3)); // attained on the face
}

TEST_CASE("extension stability: three-face bound by 3x the max face sup") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    const auto grid = barycentric_grid(150);
    for (int trial = 0; trial < 100; ++trial) {
        std::array<FaceData, 3> faces;
        const double v1 = c(rng), v2 = c(rng), v3 = c(rng);
        const std::array<std::array<double, 2>, 3> ends{{{v2, v3}, {v3, v1}, {v1, v2}}};
        for (int i = 0; i < 3; ++i) {
            FaceData f;
            f.mF = 3;
            f.valueLo = ends[static_cast<std::size_t>(i)][0];
            f.valueHi = ends[static_cast<std::size_t>(i)][1];
            f.sideCoeffs = {c(rng), c(rng)};
            faces[static_cast<std::size_t>(i)] = f;
        }
        const LocalInterpolant e = extend(faces);
        double faceSup = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int s = 0; s <= 400; ++s)
                faceSup = std::max(faceSup, std::abs(faces[static_cast<std::size_t>(i)].trace(-1.0 + s / 200.0)));
        double sup = 0.0;
        for (const RefPoint& z : grid) sup = std::max(sup, std::abs(e.value(z)));
        CHECK(sup <= 3.0 * faceSup + 1e-12);
    }
}

TEST_CASE("internal_interpolate: zero, the bubble itself, and a member function") {
    const auto zero = internal_interpolate([](RefPoint) { return 0.0; }, 5, table());
    CHECK(static_cast<int>(zero.size()) == refbasis::internal_dim(5));
    for (double a : zero) CHECK(a == 0.0);
    CHECK(internal_interpolate([](RefPoint) { return 1.0; }, 2, table()).empty());

    const auto bubbleCoeffs = internal_interpolate([](RefPoint z) { return refbasis::bubble(z); }, 3, table());
    REQUIRE(bubbleCoeffs.size() == 1);
    CHECK(bubbleCoeffs[0] == doctest::Approx(1.0).epsilon(1e-13));

    // g = bubble * x lies in the m=4 internal space: reproduced exactly
    auto g = [](RefPoint z) { return refbasis::bubble(z) * z.x; };
    const auto coeffs = internal_interpolate(g, 4, table());
    const auto basis = refbasis::internal_basis(4);
    std::mt19937 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const RefPoint z = random_interior(rng);
        double v = 0.0;
        for (std::size_t i = 0; i < coeffs.size(); ++i) v += coeffs[i] * basis[i].value(z);
        CHECK(std::abs(v - g(z)) < 1e-13);
    }
}

TEST_CASE("local_pi reproduces members of the constrained space") {
    std::mt19937 rng(11);
    const DegreeSignature sig{4, {4, 3, 2}};
    const LocalInterpolant p = random_member(sig, rng);
    const LocalInterpolant q = local_pi([&](RefPoint z) { return p.value(z); }, sig, table());
    for (int trial = 0; trial < 500; ++trial) {
        const RefPoint z = random_interior(rng);
        CHECK(std::abs(p.value(z) - q.value(z)) < 1e-11);
    }
}

TEST_CASE("local_pi: analytic error decreases monotonically in m") {
    auto f = [](RefPoint z) { return std::sin(z.x) * std::cos(z.y); };
    const auto grid = barycentric_grid(100);
    double prev = 1e300;
    for (int m = 2; m <= 6; ++m) {
        const LocalInterpolant q = local_pi(f, DegreeSignature{m, {m, m, m}}, table());
        double err = 0.0;
        for (const RefPoint& z : grid) err = std::max(err, std::abs(f(z) - q.value(z)));
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("local_pi: line singularity stalls at the algebraic rate") {
    auto f = [](RefPoint z) { return std::abs(z.x); };
    const auto grid = barycentric_grid(200);
    auto err_for = [&](int m) {
        const LocalInterpolant q = local_pi(f, DegreeSignature{m, {m, m, m}}, table());
        double err = 0.0;
        for (const RefPoint& z : grid) err = std::max(err, std::abs(f(z) - q.value(z)));
        return err;
    };
    const double e2 = err_for(2), e6 = err_for(6);
    MESSAGE("|x| errors: m=2 -> ", e2, ", m=6 -> ", e6);
    CHECK(e2 / e6 <= 4.0); // no better than O(1/m) on the kink
}

TEST_CASE("local_pi satisfies the interpolation conditions") {
    auto f = [](RefPoint z) { return std::exp(0.3 * z.x - 0.2 * z.y); };
    const DegreeSignature sig{5, {5, 4, 3}};
    const LocalInterpolant q = local_pi(f, sig, table());

    for (const RefPoint& z : table().get(5).nodes) CHECK(std::abs(q.value(z) - f(z)) < 1e-12);

    // face traces equal the univariate Gauss-Lobatto interpolants
    for (int i = 1; i <= 3; ++i) {
        const int mi = sig.face(i);
        const GaussLobattoSet gl = gauss_lobatto(mi);
        Eigen::MatrixXd V(mi + 1, mi + 1);
        Eigen::VectorXd rhs(mi + 1);
        for (int r = 0; r <= mi; ++r) {
            const double t = gl.nodes[static_cast<std::size_t>(r)];
            for (int cc = 0; cc <= mi; ++cc) V(r, cc) = std::pow(t, cc);
            rhs(r) = f(face_point(i, t));
        }
        const Eigen::VectorXd coef = V.fullPivLu().solve(rhs);
        for (int s = 0; s <= 40; ++s) {
            const double t = -1.0 + 2.0 * s / 40.0;
            double uni = 0.0;
            for (int cc = 0; cc <= mi; ++cc) uni += coef(cc) * std::pow(t, cc);
            CHECK(std::abs(q.value(face_point(i, t)) - uni) < 1e-11);
        }
    }
}

TEST_CASE("local_pi is idempotent and linear") {
    std::mt19937 rng(17);
    const DegreeSignature sig{5, {5, 3, 4}};
    auto f = [](RefPoint z) { return std::sin(1.3 * z.x + 0.4 * z.y); };
    auto g = [](RefPoint z) { return std::cos(0.8 * z.x) + z.y * z.y * z.x; };

    const LocalInterpolant pf = local_pi(f, sig, table());
    const LocalInterpolant ppf = local_pi([&](RefPoint z) { return pf.value(z); }, sig, table());
    const LocalInterpolant pg = local_pi(g, sig, table());
    const LocalInterpolant plin =
        local_pi([&](RefPoint z) { return 2.5 * f(z) - 0.75 * g(z); }, sig, table());

    for (int trial = 0; trial < 200; ++trial) {
        const RefPoint z = random_interior(rng);
        CHECK(std::abs(pf.value(z) - ppf.value(z)) < 1e-12);
        CHECK(std::abs(plin.value(z) - (2.5 * pf.value(z) - 0.75 * pg.value(z))) < 1e-12);
    }
}

TEST_CASE("stability growth of the local operator is at most ~ m log m") {
    // Cardinal functions by pushing indicator data through the pipeline: the
    // operator samples f at vertices, interior face GL nodes, and interior
    // Fekete nodes.
    const auto grid = barycentric_grid(100);
    std::vector<double> lambdas, mlogm;
    for (int m = 2; m <= 8; ++m) {
        const DegreeSignature sig{m, {m, m, m}};
        std::vector<RefPoint> nodes;
        for (int v = 1; v <= 3; ++v) nodes.push_back(refbasis::ref_vertex(v));
        const GaussLobattoSet gl = gauss_lobatto(m);
        for (int i = 1; i <= 3; ++i)
            for (int r = 1; r < m; ++r) nodes.push_back(face_point(i, gl.nodes[static_cast<std::size_t>(r)]));
        if (m >= 3)
            for (const RefPoint& z : table().get(m).nodes) nodes.push_back(z);

        auto near = [](RefPoint a, RefPoint b) { return std::hypot(a.x - b.x, a.y - b.y) < 1e-9; };
        std::vector<LocalInterpolant> cards;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            auto f = [&, i](RefPoint z) {
                for (std::size_t j = 0; j < nodes.size(); ++j)
                    if (near(z, nodes[j])) return j == i ? 1.0 : 0.0;
                return 0.0;
            };
            cards.push_back(local_pi(f, sig, table()));
        }
        double lambda = 0.0;
        for (const RefPoint& z : grid) {
            double s = 0.0;
            for (const LocalInterpolant& c : cards) s += std::abs(c.value(z));
            lambda = std::max(lambda, s);
        }
        MESSAGE("m = ", m, " operator Lebesgue ~ ", lambda, ", / (m log m) = ",
                lambda / (m * std::log(std::max(2.0, static_cast<double>(m)))));
        lambdas.push_back(std::log(lambda));
        mlogm.push_back(std::log(m * std::log(std::max(2.0, static_cast<double>(m)))));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(lambdas.size());
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        sx += mlogm[i];
        sy += lambdas[i];
        sxx += mlogm[i] * mlogm[i];
        sxy += mlogm[i] * lambdas[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    MESSAGE("fitted growth order vs m log m: ", slope);
    CHECK(slope <= 1.3);
}

TEST_CASE("global interpolation reproduces affine and quadratic bands") {
    auto affine = make_affine_provider({{0.5, 1.0, 1.0}, {9.0, 0.1, -0.2}});
    ParamMesh mesh = ParamMesh::uniform(kSquareIBZ, 1);
    mesh = mesh.refine_marked({0, 3});
    const GlobalInterpolant gi = global_interpolate(*affine, mesh, uniform_degrees(mesh, 3), 1, table());

    std::mt19937 rng(19);
    double err = 0.0;
    for (int i = 0; i < 5050; ++i) {
        const WaveVector k = random_ibz_point(rng);
        err = std::max(err, std::abs(gi.evaluate(k) - (0.5 + k.k1 + k.k2)));
    }
    CHECK(err < 1e-11);

    auto quad = [](WaveVector k) { return k.k1 * k.k1; };
    const GlobalInterpolant g2 = global_interpolate(quad, mesh, uniform_degrees(mesh, 2), table());
    double err2 = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const WaveVector k = random_ibz_point(rng);
        err2 = std::max(err2, std::abs(g2.evaluate(k) - quad(k)));
    }
    CHECK(err2 < 1e-11);
}

TEST_CASE("conformity: mixed-degree neighbors agree along the shared face") {
    auto f = [](WaveVector k) { return std::sin(k.k1) * std::cos(0.7 * k.k2) + 0.1 * k.k1 * k.k2; };
    ParamMesh mesh = ParamMesh::uniform(kSquareIBZ, 1);
    mesh = mesh.refine_marked({1});

    std::vector<int> ed(static_cast<std::size_t>(mesh.element_count()));
    for (const Element& e : mesh.elements()) ed[static_cast<std::size_t>(e.id)] = (e.id % 2 == 0) ? 4 : 2;
    const GlobalInterpolant gi = global_interpolate(f, mesh, min_rule_degrees(mesh, ed), table());

    double worst = 0.0;
    for (const auto& [key, elems] : mesh.face_adjacency()) {
        if (elems[1] < 0) continue;
        const int lo = static_cast<int>(key >> 32), hi = static_cast<int>(key & 0xffffffffu);
        const Vertex& a = mesh.vertex(lo);
        const Vertex& b = mesh.vertex(hi);
        for (int s = 1; s < 100; ++s) {
            const double t = static_cast<double>(s) / 100.0;
            const WaveVector p = a.position + t * (b.position - a.position);
            worst = std::max(worst, std::abs(gi.evaluate_in(elems[0], p) - gi.evaluate_in(elems[1], p)));
        }
    }
    MESSAGE("max face jump = ", worst);
    CHECK(worst < 1e-12);
}

TEST_CASE("evaluate: vertex values, shared-face agreement, band_value clamp") {
    auto f = [](WaveVector k) { return 1.0 + k.k1 + 0.5 * k.k2 * k.k2; };
    const ParamMesh mesh = ParamMesh::uniform(kSquareIBZ, 2);
    const GlobalInterpolant gi = global_interpolate(f, mesh, uniform_degrees(mesh, 3), table());

    for (const Vertex& v : mesh.vertices()) CHECK(std::abs(gi.evaluate(v.position) - f(v.position)) < 1e-12);

    for (const auto& [key, elems] : mesh.face_adjacency()) {
        if (elems[1] < 0) continue;
        const int lo = static_cast<int>(key >> 32), hi = static_cast<int>(key & 0xffffffffu);
        const WaveVector mid = 0.5 * (mesh.vertex(lo).position + mesh.vertex(hi).position);
        CHECK(std::abs(gi.evaluate_in(elems[0], mid) - gi.evaluate_in(elems[1], mid)) < 1e-12);
    }

    auto neg = [](WaveVector) { return -1.0; };
    const GlobalInterpolant gneg = global_interpolate(neg, mesh, uniform_degrees(mesh, 2), table());
    CHECK(gneg.band_value({1.0, 0.5}) == 0.0);
    CHECK(gneg.negative_clamp_count() == 1);
}

TEST_CASE("band_value of |k|^2 tracks |k| with the same error order") {
    auto f = [](WaveVector k) { return dot(k, k); };
    ParamMesh mesh = ParamMesh::uniform(kSquareIBZ, 2);
    const GlobalInterpolant gi = global_interpolate(f, mesh, uniform_degrees(mesh, 3), table());
    std::mt19937 rng(23);
    for (int i = 0; i < 200; ++i) {
        const WaveVector k = random_ibz_point(rng, 0.2);
        const double relLambda = std::abs(gi.evaluate(k) - f(k)) / f(k);
        const double relOmega = std::abs(gi.band_value(k) - norm(k)) / norm(k);
        CHECK(relOmega <= relLambda + 1e-15);
    }
}

TEST_CASE("interpolant dump/parse evaluates identically without the provider") {
    auto f = [](WaveVector k) { return std::sin(k.k1) + std::cos(k.k2); };
    ParamMesh mesh = ParamMesh::uniform(kSquareIBZ, 1);
    mesh = mesh.refine_marked({2});
    std::vector<int> ed(static_cast<std::size_t>(mesh.element_count()));
    for (const Element& e : mesh.elements()) ed[static_cast<std::size_t>(e.id)] = 2 + e.id % 3;
    const GlobalInterpolant gi = global_interpolate(f, mesh, min_rule_degrees(mesh, ed), table());

    std::stringstream ss;
    gi.dump(ss);
    const GlobalInterpolant re = GlobalInterpolant::parse(ss);

    std::mt19937 rng(29);
    for (int i = 0; i < 500; ++i) {
        const WaveVector k = random_ibz_point(rng);
        CHECK(re.evaluate(k) == gi.evaluate(k));
    }
}
