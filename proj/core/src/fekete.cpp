#include "bandrec/fekete.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

namespace bandrec {

namespace {

// Legendre P_m, P'_m, P''_m at x via the three-term recurrence and the
// Legendre ODE.
void legendre_eval(int m, double x, double& p, double& dp, double& ddp) {
    double p0 = 1.0, p1 = x;
    if (m == 0) {
        p = 1.0;
        dp = ddp = 0.0;
        return;
    }
    for (int n = 1; n < m; ++n) {
        const double p2 = ((2.0 * n + 1.0) * x * p1 - n * p0) / (n + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    dp = m * (x * p1 - p0) / (x * x - 1.0);
    ddp = (2.0 * x * dp - m * (m + 1.0) * p) / (1.0 - x * x);
}

} // namespace

GaussLobattoSet gauss_lobatto(int m) {
    if (m < 1) throw std::invalid_argument("gauss_lobatto: degree must be >= 1");
    GaussLobattoSet set;
    set.degree = m;
    set.nodes.assign(static_cast<std::size_t>(m + 1), 0.0);
    set.nodes.front() = -1.0;
    set.nodes.back() = 1.0;
    for (int i = 1; i < m; ++i) {
        // Newton on P'_m from the Chebyshev-Gauss-Lobatto guess.
        double x = -std::cos(M_PI * static_cast<double>(i) / static_cast<double>(m));
        for (int it = 0; it < 100; ++it) {
            double p, dp, ddp;
            legendre_eval(m, x, p, dp, ddp);
            const double step = dp / ddp;
            x -= step;
            if (std::abs(step) < 1e-15) break;
        }
        set.nodes[static_cast<std::size_t>(i)] = x;
    }
    // Enforce exact symmetry about 0.
    for (int i = 1; i < m; ++i) {
        const double s = 0.5 * (set.nodes[static_cast<std::size_t>(i)] -
                                set.nodes[static_cast<std::size_t>(m - i)]);
        set.nodes[static_cast<std::size_t>(i)] = s;
    }
    for (int i = 1; i <= m; ++i)
        if (set.nodes[static_cast<std::size_t>(i)] <= set.nodes[static_cast<std::size_t>(i - 1)])
            throw std::runtime_error("gauss_lobatto: nodes not increasing");
    return set;
}

namespace {

using Bary = std::array<double, 3>;

RefPoint bary_to_ref(const Bary& b) {
    const RefPoint z1 = refbasis::ref_vertex(1), z2 = refbasis::ref_vertex(2), z3 = refbasis::ref_vertex(3);
    return {b[0] * z1.x + b[1] * z2.x + b[2] * z3.x, b[0] * z1.y + b[1] * z2.y + b[2] * z3.y};
}

Bary ref_to_bary(RefPoint z) {
    const double n3 = refbasis::nodal(3, z);
    const double n2 = refbasis::nodal(2, z);
    return {1.0 - n2 - n3, n2, n3};
}

struct DetState {
    Eigen::MatrixXd V;    // V_ij = basis_j(node_i)
    Eigen::MatrixXd Vinv;
    double logAbsDet = -std::numeric_limits<double>::infinity();

    bool refresh(const std::vector<Bary>& nodes, const std::vector<refbasis::InternalTerm>& basis) {
        const int n = static_cast<int>(basis.size());
        V.resize(n, n);
        for (int i = 0; i < n; ++i) {
            const RefPoint z = bary_to_ref(nodes[static_cast<std::size_t>(i)]);
            for (int j = 0; j < n; ++j) V(i, j) = basis[static_cast<std::size_t>(j)].value(z);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(V);
        if (!lu.isInvertible()) return false;
        Vinv = lu.inverse();
        logAbsDet = 0.0;
        for (int i = 0; i < n; ++i) logAbsDet += std::log(std::abs(lu.matrixLU()(i, i)));
        return true;
    }
};

// |row(z) . column i of Vinv|: the factor by which |det V| changes when node
// i moves to z (determinant lemma for a rank-one row update).
double row_gain(const DetState& st, const std::vector<refbasis::InternalTerm>& basis, int i, RefPoint z) {
    double g = 0.0;
    for (int j = 0; j < static_cast<int>(basis.size()); ++j)
        g += basis[static_cast<std::size_t>(j)].value(z) * st.Vinv(j, i);
    return std::abs(g);
}

constexpr double kBaryFloor = 5e-3;

bool clamp_bary(Bary& b) {
    for (double& c : b)
        if (c < kBaryFloor) return false;
    return true;
}

// One multistart seed: cyclic coordinate ascent over barycentric coordinates
// of each node in turn, with doubling/halving steps on the per-node gain.
bool ascend(std::vector<Bary>& nodes, const std::vector<refbasis::InternalTerm>& basis, DetState& st) {
    if (!st.refresh(nodes, basis)) return false;
    const int n = static_cast<int>(nodes.size());
    const Bary dir1{1.0, -1.0, 0.0};
    const Bary dir2{1.0, 1.0, -2.0};

    for (int sweep = 0; sweep < 200; ++sweep) {
        double sweepGain = 1.0;
        for (int i = 0; i < n; ++i) {
            double bestGain = 1.0;
            Bary best = nodes[static_cast<std::size_t>(i)];
            const double base = row_gain(st, basis, i, bary_to_ref(best));
            if (base == 0.0) continue;
            for (const Bary& d : {dir1, dir2}) {
                for (double sgn : {1.0, -1.0}) {
                    double h = 0.05;
                    while (h > 1e-9) {
                        Bary cand = nodes[static_cast<std::size_t>(i)];
                        for (int c = 0; c < 3; ++c) cand[static_cast<std::size_t>(c)] += sgn * h * d[static_cast<std::size_t>(c)] / 2.0;
                        if (clamp_bary(cand)) {
                            const double g = row_gain(st, basis, i, bary_to_ref(cand)) / base;
                            if (g > bestGain * (1.0 + 1e-14)) {
                                bestGain = g;
                                best = cand;
                                break; // accept this step size, next direction
                            }
                        }
                        h *= 0.5; // backtrack
                    }
                }
            }
            if (bestGain > 1.0) {
                nodes[static_cast<std::size_t>(i)] = best;
                if (!st.refresh(nodes, basis)) return false;
                sweepGain = std::max(sweepGain, bestGain);
            }
        }
        if (sweepGain < 1.0 + 1e-12) break;
    }
    return true;
}

// The six barycentric permutations of the triangle symmetry group.
const std::array<std::array<int, 3>, 6> kPerms{{{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {0, 2, 1}, {2, 1, 0}, {1, 0, 2}}};

double bary_dist(const Bary& a, const Bary& b) {
    return std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]) + std::abs(a[2] - b[2]);
}

// Average each node over its orbit under every permutation that maps the
// node set to itself (within a matching tolerance). Removes optimizer noise
// and restores the exact symmetry of the Fekete configuration.
void symmetrize(std::vector<Bary>& nodes) {
    const int n = static_cast<int>(nodes.size());
    std::vector<Bary> acc(nodes.begin(), nodes.end());
    std::vector<int> hits(static_cast<std::size_t>(n), 1);

    for (std::size_t p = 1; p < kPerms.size(); ++p) {
        std::vector<int> match(static_cast<std::size_t>(n), -1);
        std::vector<bool> used(static_cast<std::size_t>(n), false);
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            Bary im{nodes[static_cast<std::size_t>(i)][static_cast<std::size_t>(kPerms[p][0])],
                    nodes[static_cast<std::size_t>(i)][static_cast<std::size_t>(kPerms[p][1])],
                    nodes[static_cast<std::size_t>(i)][static_cast<std::size_t>(kPerms[p][2])]};
            int bestJ = -1;
            double bestD = 1e-3; // detection tolerance
            for (int j = 0; j < n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double d = bary_dist(im, nodes[static_cast<std::size_t>(j)]);
                if (d < bestD) {
                    bestD = d;
                    bestJ = j;
                }
            }
            if (bestJ < 0) {
                ok = false;
            } else {
                match[static_cast<std::size_t>(i)] = bestJ;
                used[static_cast<std::size_t>(bestJ)] = true;
            }
        }
        if (!ok) continue;
        // nodes[match[i]] ~ perm(nodes[i]); accumulate perm^{-1}(nodes[match[i]])
        // onto node i.
        for (int i = 0; i < n; ++i) {
            const Bary& src = nodes[static_cast<std::size_t>(match[static_cast<std::size_t>(i)])];
            for (int c = 0; c < 3; ++c)
                acc[static_cast<std::size_t>(i)][static_cast<std::size_t>(kPerms[p][static_cast<std::size_t>(c)])] +=
                    src[static_cast<std::size_t>(c)];
            ++hits[static_cast<std::size_t>(i)];
        }
    }
    for (int i = 0; i < n; ++i) {
        Bary& b = acc[static_cast<std::size_t>(i)];
        double s = 0.0;
        for (double& c : b) {
            c /= static_cast<double>(hits[static_cast<std::size_t>(i)]);
            s += c;
        }
        for (double& c : b) c /= s;
        nodes[static_cast<std::size_t>(i)] = b;
    }
}

std::vector<Bary> seed_lattice(int m, int seed) {
    std::vector<Bary> nodes;
    for (int i = 1; i <= m - 2; ++i)
        for (int j = 1; j <= m - 1 - i; ++j) {
            const int l = m - i - j;
            nodes.push_back({static_cast<double>(i) / m, static_cast<double>(j) / m, static_cast<double>(l) / m});
        }
    if (seed > 0) {
        std::mt19937 rng(static_cast<std::uint32_t>(seed));
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const double amp = 0.25 / static_cast<double>(m);
        for (Bary& b : nodes) {
            for (double& c : b) c = std::max(kBaryFloor, c + amp * u(rng));
            const double s = b[0] + b[1] + b[2];
            for (double& c : b) c /= s;
        }
    }
    return nodes;
}

} // namespace

InteriorFeketeSet interior_fekete(int m, int seeds) {
    if (m < 3) throw std::invalid_argument("interior_fekete: degree must be >= 3");
    if (m > 10) throw std::invalid_argument("interior_fekete: degree capped at 10");
    if (seeds < 1) seeds = 1;

    const auto basis = refbasis::internal_basis(m);
    double bestLog = -std::numeric_limits<double>::infinity();
    std::vector<Bary> bestNodes;
    bool anySuccess = false;

    for (int s = 0; s < seeds; ++s) {
        std::vector<Bary> nodes = seed_lattice(m, s);
        DetState st;
        if (!ascend(nodes, basis, st)) continue;
        anySuccess = true;
        if (st.logAbsDet > bestLog) {
            bestLog = st.logAbsDet;
            bestNodes = nodes;
        }
    }
    if (!anySuccess) throw std::runtime_error("interior_fekete: optimizer failed (singular V at every start)");

    symmetrize(bestNodes);
    // Canonical node order.
    std::sort(bestNodes.begin(), bestNodes.end(), [](const Bary& a, const Bary& b) {
        if (a[2] != b[2]) return a[2] < b[2];
        return a[1] < b[1];
    });

    DetState st;
    if (!st.refresh(bestNodes, basis)) throw std::runtime_error("interior_fekete: singular after symmetrization");

    InteriorFeketeSet out;
    out.degree = m;
    out.logDetValue = st.logAbsDet;
    out.detValue = std::exp(st.logAbsDet);
    out.nodes.reserve(bestNodes.size());
    for (const Bary& b : bestNodes) out.nodes.push_back(bary_to_ref(b));
    return out;
}

double lebesgue_estimate(const std::vector<RefPoint>& nodes,
                         const std::vector<std::function<double(RefPoint)>>& basis,
                         const std::vector<RefPoint>& gridPoints) {
    const int n = static_cast<int>(nodes.size());
    if (static_cast<int>(basis.size()) != n)
        throw std::invalid_argument("lebesgue_estimate: node/basis count mismatch");
    Eigen::MatrixXd V(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) V(i, j) = basis[static_cast<std::size_t>(j)](nodes[static_cast<std::size_t>(i)]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(V.transpose());
    if (!lu.isInvertible()) throw std::runtime_error("lebesgue_estimate: nodes not unisolvent for the basis");

    double best = 0.0;
    Eigen::VectorXd b(n);
    for (const RefPoint& z : gridPoints) {
        for (int j = 0; j < n; ++j) b(j) = basis[static_cast<std::size_t>(j)](z);
        const Eigen::VectorXd card = lu.solve(b);
        best = std::max(best, card.cwiseAbs().sum());
    }
    return best;
}

double lebesgue_estimate(const std::vector<double>& nodes, int gridResolution) {
    std::vector<RefPoint> pts;
    pts.reserve(nodes.size());
    for (double t : nodes) pts.push_back({t, 0.0});
    std::vector<std::function<double(RefPoint)>> basis;
    for (std::size_t j = 0; j < nodes.size(); ++j)
        basis.push_back([j](RefPoint z) {
            double r = 1.0;
            for (std::size_t i = 0; i < j; ++i) r *= z.x;
            return r;
        });
    std::vector<RefPoint> grid;
    grid.reserve(static_cast<std::size_t>(gridResolution));
    for (int i = 0; i < gridResolution; ++i)
        grid.push_back({-1.0 + 2.0 * static_cast<double>(i) / (gridResolution - 1), 0.0});
    return lebesgue_estimate(pts, basis, grid);
}

std::vector<RefPoint> barycentric_grid(int resolution) {
    std::vector<RefPoint> out;
    out.reserve(static_cast<std::size_t>((resolution + 1) * (resolution + 2) / 2));
    for (int i = 0; i <= resolution; ++i)
        for (int j = 0; j <= resolution - i; ++j) {
            const double b1 = static_cast<double>(i) / resolution;
            const double b2 = static_cast<double>(j) / resolution;
            out.push_back(bary_to_ref({b1, b2, 1.0 - b1 - b2}));
        }
    return out;
}

FeketeTable::FeketeTable(std::string path) : cache_(11), present_(11, false) {
    if (path.empty()) {
        if (const char* env = std::getenv("BANDREC_FEKETE_TABLE")) path = env;
        else path = default_path();
    }
    std::ifstream in(path);
    if (!in) return;
    std::string line;
    std::vector<std::vector<Bary>> rows(11);
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        int m = 0, i = 0;
        Bary b{};
        if (ss >> m >> i >> b[0] >> b[1] >> b[2])
            if (m >= 3 && m <= 10) rows[static_cast<std::size_t>(m)].push_back(b);
    }
    for (int m = 3; m <= 10; ++m) {
        auto& r = rows[static_cast<std::size_t>(m)];
        if (static_cast<int>(r.size()) != refbasis::internal_dim(m)) continue;
        InteriorFeketeSet set;
        set.degree = m;
        for (const Bary& b : r) set.nodes.push_back(bary_to_ref(b));
        const auto basis = refbasis::internal_basis(m);
        const int n = static_cast<int>(basis.size());
        Eigen::MatrixXd V(n, n);
        for (int a = 0; a < n; ++a)
            for (int c = 0; c < n; ++c)
                V(a, c) = basis[static_cast<std::size_t>(c)].value(set.nodes[static_cast<std::size_t>(a)]);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(V);
        if (!lu.isInvertible()) continue;
        set.logDetValue = 0.0;
        for (int a = 0; a < n; ++a) set.logDetValue += std::log(std::abs(lu.matrixLU()(a, a)));
        set.detValue = std::exp(set.logDetValue);
        cache_[static_cast<std::size_t>(m)] = std::move(set);
        present_[static_cast<std::size_t>(m)] = true;
    }
}

const InteriorFeketeSet& FeketeTable::get(int m) const {
    if (m < 3 || m > 10) throw std::invalid_argument("FeketeTable: degree must be in [3, 10]");
    if (!present_[static_cast<std::size_t>(m)]) {
        cache_[static_cast<std::size_t>(m)] = interior_fekete(m, 8);
        present_[static_cast<std::size_t>(m)] = true;
    }
    return cache_[static_cast<std::size_t>(m)];
}

const InteriorFeketeSet& FeketeTable::recompute(int m, int seeds) {
    if (m < 3 || m > 10) throw std::invalid_argument("FeketeTable: degree must be in [3, 10]");
    cache_[static_cast<std::size_t>(m)] = interior_fekete(m, seeds);
    present_[static_cast<std::size_t>(m)] = true;
    return cache_[static_cast<std::size_t>(m)];
}

void FeketeTable::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("FeketeTable: cannot write " + path);
    out << "# interior Fekete nodes, format: m i b1 b2 b3\n";
    out << std::setprecision(17);
    for (int m = 3; m <= 10; ++m) {
        if (!present_[static_cast<std::size_t>(m)]) continue;
        const auto& set = cache_[static_cast<std::size_t>(m)];
        for (std::size_t i = 0; i < set.nodes.size(); ++i) {
            const Bary b = ref_to_bary(set.nodes[i]);
            out << m << ' ' << i << ' ' << b[0] << ' ' << b[1] << ' ' << b[2] << '\n';
        }
    }
}

std::string FeketeTable::default_path() {
#ifdef BANDREC_DATA_DIR
    return std::string(BANDREC_DATA_DIR) + "/fekete_nodes.txt";
#else
    return "data/fekete_nodes.txt";
#endif
}

} // namespace bandrec
