#include "bandrec/fem.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <bit>
#include <cmath>
#include <stdexcept>

namespace bandrec {

namespace {

std::array<WaveVector, 2> lattice_vectors(const UnitCellConfig& cfg) {
    if (cfg.lattice == Lattice::Square) return {WaveVector{cfg.a, 0.0}, WaveVector{0.0, cfg.a}};
    return {WaveVector{cfg.a / 2.0, cfg.a * kSqrt3 / 2.0}, WaveVector{cfg.a / 2.0, -cfg.a * kSqrt3 / 2.0}};
}

std::vector<WaveVector> inclusion_centers(const UnitCellConfig& cfg) {
    const auto [a1, a2] = lattice_vectors(cfg);
    const WaveVector c0 = 0.5 * (a1 + a2);
    if (cfg.lattice == Lattice::Square) return {c0};
    // Six cylinders at the vertices of the hexagon inscribed in the cell.
    std::vector<WaveVector> centers;
    const double R = cfg.a / 3.0;
    for (int j = 0; j < 6; ++j) {
        const double ang = M_PI / 3.0 * j;
        centers.push_back({c0.k1 + R * std::cos(ang), c0.k2 + R * std::sin(ang)});
    }
    return centers;
}

bool inside_inclusion(const UnitCellConfig& cfg, WaveVector p) {
    const auto [a1, a2] = lattice_vectors(cfg);
    const double r = cfg.inclusionRadiusRatio * cfg.a;
    for (const WaveVector& c : inclusion_centers(cfg))
        for (int i = -1; i <= 1; ++i)
            for (int j = -1; j <= 1; ++j)
                if (norm(p - (c + static_cast<double>(i) * a1 + static_cast<double>(j) * a2)) <= r) return true;
    return false;
}

} // namespace

UnitCellDiscretization::UnitCellDiscretization(const UnitCellConfig& config) : cfg_(config) {
    if (cfg_.cellMeshN < 2) throw std::invalid_argument("cellMeshN must be >= 2");
    if (cfg_.epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
    const int n = cfg_.cellMeshN;
    if (n * n > 4500) throw std::invalid_argument("desk-scale cap: cellMeshN^2 must be <= 4500 dofs");
    build();
}

void UnitCellDiscretization::build() {
    const int n = cfg_.cellMeshN;
    const auto [a1, a2] = lattice_vectors(cfg_);
    nDof_ = n * n;

    auto dof = [n](int i, int j) { return ((i % n + n) % n) * n + ((j % n + n) % n); };
    auto pos = [&](int i, int j) {
        const double s = static_cast<double>(i) / n, t = static_cast<double>(j) / n;
        return s * a1 + t * a2;
    };

    tris_.clear();
    triGeom_.clear();
    alpha_.clear();
    beta_.clear();
    cellArea_ = std::abs(bandrec::cross(a1, a2));
    betaMeasure_ = 0.0;

    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const WaveVector p00 = pos(i, j), p10 = pos(i + 1, j), p11 = pos(i + 1, j + 1), p01 = pos(i, j + 1);
            // Alternate the split diagonal (union jack); for even n the mesh
            // then carries the mirror symmetries of the cell.
            const bool even = (i + j) % 2 == 0;
            const std::array<std::array<WaveVector, 3>, 2> geoms =
                even ? std::array<std::array<WaveVector, 3>, 2>{{{p00, p10, p11}, {p00, p11, p01}}}
                     : std::array<std::array<WaveVector, 3>, 2>{{{p00, p10, p01}, {p10, p11, p01}}};
            const std::array<std::array<int, 3>, 2> dofs =
                even ? std::array<std::array<int, 3>, 2>{{{dof(i, j), dof(i + 1, j), dof(i + 1, j + 1)},
                                                          {dof(i, j), dof(i + 1, j + 1), dof(i, j + 1)}}}
                     : std::array<std::array<int, 3>, 2>{{{dof(i, j), dof(i + 1, j), dof(i, j + 1)},
                                                          {dof(i + 1, j), dof(i + 1, j + 1), dof(i, j + 1)}}};
            for (int t = 0; t < 2; ++t) {
                const Triangle2 tri{geoms[static_cast<std::size_t>(t)][0], geoms[static_cast<std::size_t>(t)][1],
                                    geoms[static_cast<std::size_t>(t)][2]};
                const bool inc = inside_inclusion(cfg_, tri.centroid());
                const double eps = inc ? cfg_.epsilon : 1.0;
                const double alpha = cfg_.mode == Mode::TE ? 1.0 / eps : 1.0;
                const double beta = cfg_.mode == Mode::TE ? 1.0 : eps;
                tris_.push_back(dofs[static_cast<std::size_t>(t)]);
                triGeom_.push_back(tri);
                alpha_.push_back(alpha);
                beta_.push_back(beta);
                betaMeasure_ += beta * std::abs(tri.signed_area());
            }
        }
    }

    // Assemble the k-independent blocks.
    using Trip = Eigen::Triplet<double>;
    std::vector<Trip> tK, tMa, tG1, tG2, tB;
    for (std::size_t e = 0; e < tris_.size(); ++e) {
        const Triangle2& tri = triGeom_[e];
        const double S = tri.signed_area();
        const std::array<WaveVector, 3> p{tri.a, tri.b, tri.c};
        std::array<WaveVector, 3> grad; // gradient of the P1 basis functions
        for (int l = 0; l < 3; ++l) {
            const WaveVector q = p[static_cast<std::size_t>((l + 1) % 3)];
            const WaveVector r = p[static_cast<std::size_t>((l + 2) % 3)];
            grad[static_cast<std::size_t>(l)] = {(q.k2 - r.k2) / (2.0 * S), (r.k1 - q.k1) / (2.0 * S)};
        }
        const double al = alpha_[e], be = beta_[e], Sa = std::abs(S);
        for (int a = 0; a < 3; ++a) {
            const int A = tris_[e][static_cast<std::size_t>(a)];
            for (int b = 0; b < 3; ++b) {
                const int B = tris_[e][static_cast<std::size_t>(b)];
                const double mass = Sa / 12.0 * (a == b ? 2.0 : 1.0);
                tK.emplace_back(A, B, al * Sa * dot(grad[static_cast<std::size_t>(a)], grad[static_cast<std::size_t>(b)]));
                tMa.emplace_back(A, B, al * mass);
                tB.emplace_back(A, B, be * mass);
                // D_i with (D_i)_{ab} = integral alpha (d_i phi_b) phi_a; we
                // assemble G_i = D_i^T - D_i directly.
                const double d1 = al * Sa / 3.0 * grad[static_cast<std::size_t>(b)].k1;
                const double d2 = al * Sa / 3.0 * grad[static_cast<std::size_t>(b)].k2;
                tG1.emplace_back(B, A, d1);
                tG1.emplace_back(A, B, -d1);
                tG2.emplace_back(B, A, d2);
                tG2.emplace_back(A, B, -d2);
            }
        }
    }
    auto mk = [&](std::vector<Trip>& t) {
        Eigen::SparseMatrix<double> M(nDof_, nDof_);
        M.setFromTriplets(t.begin(), t.end());
        return M;
    };
    K_ = mk(tK);
    Malpha_ = mk(tMa);
    G1_ = mk(tG1);
    G2_ = mk(tG2);
    B_ = mk(tB);
}

AssembledSystem assemble(const UnitCellDiscretization& disc, WaveVector k) {
    const double k2 = dot(k, k);
    AssembledSystem sys;
    const std::complex<double> iu(0.0, 1.0);
    sys.A = Eigen::MatrixXd(disc.stiffness() + k2 * disc.alpha_mass()).cast<std::complex<double>>() +
            iu * Eigen::MatrixXd(k.k1 * disc.cross(1) + k.k2 * disc.cross(2)).cast<std::complex<double>>();
    sys.B = Eigen::MatrixXd(disc.beta_mass());
    return sys;
}

std::vector<EigenPair> solve_bands(const UnitCellDiscretization& disc, WaveVector k, int L) {
    if (L < 1 || L > disc.dof_count()) throw std::invalid_argument("solve_bands: L out of range");
    const AssembledSystem sys = assemble(disc, k);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        sys.A, sys.B.cast<std::complex<double>>(), Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("solve_bands: eigensolve failed (B Cholesky or convergence)");

    std::vector<EigenPair> out;
    out.reserve(static_cast<std::size_t>(L));
    const double scale = sys.A.cwiseAbs().maxCoeff();
    for (int q = 0; q < L; ++q) {
        EigenPair pair;
        pair.lambda = es.eigenvalues()(q);
        if (pair.lambda < -1e-9 * std::max(1.0, scale))
            throw std::runtime_error("solve_bands: A(k) not positive semidefinite");
        // eigenvalues below solver precision are exact zeros (Gamma, band 1)
        if (pair.lambda < 1e-12 * std::max(1.0, scale)) pair.lambda = 0.0;
        pair.u = es.eigenvectors().col(q);
        // Eigen returns B-orthonormal vectors; renormalize defensively.
        const double nb = std::real(pair.u.dot(sys.B.cast<std::complex<double>>() * pair.u));
        pair.u /= std::sqrt(nb);
        out.push_back(std::move(pair));
    }
    return out;
}

WaveVector group_velocity(const UnitCellDiscretization& disc, WaveVector k, const EigenPair& pair) {
    const double omega = std::sqrt(pair.lambda);
    if (omega <= 0.0) throw SingularPointError("group_velocity: omega = 0");
    const Eigen::VectorXcd& u = pair.u;
    const std::complex<double> mAlpha = u.dot(disc.alpha_mass().cast<std::complex<double>>() * u);
    const std::complex<double> iu(0.0, 1.0);
    const std::complex<double> m1 = iu * u.dot(disc.cross(1).cast<std::complex<double>>() * u);
    const std::complex<double> m2 = iu * u.dot(disc.cross(2).cast<std::complex<double>>() * u);
    if (std::abs(mAlpha.imag()) > 1e-10 || std::abs(m1.imag()) > 1e-8 * (1.0 + std::abs(m1.real())) ||
        std::abs(m2.imag()) > 1e-8 * (1.0 + std::abs(m2.real())))
        throw std::runtime_error("group_velocity: quadratic forms are not real");
    return {(2.0 * k.k1 * mAlpha.real() + m1.real()) / (2.0 * omega),
            (2.0 * k.k2 * mAlpha.real() + m2.real()) / (2.0 * omega)};
}

FemBandProvider::FemBandProvider(std::shared_ptr<const UnitCellDiscretization> disc, int L)
    : disc_(std::move(disc)), L_(L) {
    singular_.points.push_back({0.0, 0.0});
}

const FemBandProvider::Entry& FemBandProvider::solve_cached(WaveVector k) const {
    auto key = [](WaveVector v) {
        const std::uint64_t h1 = std::bit_cast<std::uint64_t>(v.k1);
        const std::uint64_t h2 = std::bit_cast<std::uint64_t>(v.k2);
        return h1 ^ (h2 * 0x9e3779b97f4a7c15ULL + (h1 << 6));
    };
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(key(k));
    if (it != cache_.end()) return it->second;

    Entry entry;
    const auto pairs = solve_bands(*disc_, k, L_);
    ++solves_;
    for (const EigenPair& p : pairs) {
        entry.lambda.push_back(p.lambda);
        if (p.lambda > 0.0) {
            entry.gradOmega.push_back(group_velocity(*disc_, k, p));
        } else {
            entry.gradOmega.push_back({std::nan(""), std::nan("")});
        }
    }
    return cache_.emplace(key(k), std::move(entry)).first->second;
}

std::vector<double> FemBandProvider::lambda(WaveVector k) const { return solve_cached(k).lambda; }

WaveVector FemBandProvider::grad_omega(WaveVector k, int q) const {
    const WaveVector g = solve_cached(k).gradOmega.at(static_cast<std::size_t>(q - 1));
    if (std::isnan(g.k1)) throw SingularPointError("grad_omega: omega vanishes at this wave vector");
    return g;
}

long FemBandProvider::eigensolve_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return solves_;
}

std::unique_ptr<FemBandProvider> fem_provider(const UnitCellConfig& config, int L) {
    return std::make_unique<FemBandProvider>(std::make_shared<UnitCellDiscretization>(config), L);
}

} // namespace bandrec
