#pragma once

#include "bandrec/refbasis.hpp"

#include <functional>
#include <string>
#include <vector>

namespace bandrec {

/// Gauss-Lobatto nodes of degree m on [-1,1]: the endpoints plus the m-1
/// roots of the derivative of the degree-m Legendre polynomial. Strictly
/// increasing, symmetric about 0.
struct GaussLobattoSet {
    int degree = 1;
    std::vector<double> nodes; // size degree + 1
};

GaussLobattoSet gauss_lobatto(int m);

/// Interior Fekete nodes for the internal space of degree m: the m-hat
/// points maximizing |det V| with V_ij = Nring_j(z_i).
struct InteriorFeketeSet {
    int degree = 3;
    std::vector<RefPoint> nodes; // m-hat points, strictly inside the triangle
    double detValue = 0.0;       // |det V| at the nodes
    double logDetValue = 0.0;    // log |det V|
};

/// Multistart maximization of log|det V| over interior points, parametrized
/// by barycentric coordinates on the open simplex. Per-node cyclic coordinate
/// ascent with backtracking steps; seeds are perturbations of the interior
/// principal lattice, and the best (logdet, seed) wins. Deterministic for a
/// fixed seed count. Requires 3 <= m <= 10.
InteriorFeketeSet interior_fekete(int m, int seeds);

/// Max over gridPoints of sum_i |l_i(z)| where l_i are the cardinal functions
/// of the node/basis pair. Throws if the collocation system is singular.
double lebesgue_estimate(const std::vector<RefPoint>& nodes,
                         const std::vector<std::function<double(RefPoint)>>& basis,
                         const std::vector<RefPoint>& gridPoints);

/// 1D convenience overload: monomial basis on [-1,1], uniform grid.
double lebesgue_estimate(const std::vector<double>& nodes, int gridResolution);

/// Disk-backed table of interior Fekete node sets, keyed by degree.
/// Lines are `m i b1 b2 b3` with barycentric coordinates. Missing degrees
/// are computed on demand with a default seed count.
class FeketeTable {
public:
    /// Resolution order: explicit path, $BANDREC_FEKETE_TABLE, compiled-in
    /// data directory.
    explicit FeketeTable(std::string path = "");

    const InteriorFeketeSet& get(int m) const;

    /// Recompute one degree and overwrite the in-memory entry.
    const InteriorFeketeSet& recompute(int m, int seeds);

    void save(const std::string& path) const;
    static std::string default_path();

private:
    mutable std::vector<InteriorFeketeSet> cache_; // indexed by degree
    mutable std::vector<bool> present_;
};

std::vector<RefPoint> barycentric_grid(int resolution);

} // namespace bandrec
