#pragma once

#include "bandrec/bands.hpp"
#include "bandrec/geometry.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <complex>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

namespace bandrec {

enum class Mode { TE, TM };
enum class Lattice { Square, Hexagonal };

struct UnitCellConfig {
    Lattice lattice = Lattice::Square;
    Mode mode = Mode::TE;
    double epsilon = 8.9;              // relative permittivity of the inclusions
    double inclusionRadiusRatio = 0.2; // disk radius / lattice constant
    int cellMeshN = 16;                // cells per lattice direction
    double a = 1.0;                    // lattice constant
};

/// P1 discretization of the periodic unit cell: a structured triangulation
/// with per-element coefficients alpha, beta assigned by a centroid-in-disk
/// test, and opposite-boundary vertices identified pairwise.
class UnitCellDiscretization {
public:
    explicit UnitCellDiscretization(const UnitCellConfig& config);

    const UnitCellConfig& config() const { return cfg_; }
    int dof_count() const { return nDof_; }
    int element_count() const { return static_cast<int>(tris_.size()); }

    double cell_area() const { return cellArea_; }
    /// sum over elements of beta_T |T| (equals the total mass of B).
    double beta_measure() const { return betaMeasure_; }

    // k-independent assembled blocks on identified dofs:
    //   A(k) = K + |k|^2 Malpha + i (k1 G1 + k2 G2),   B = beta-mass.
    const Eigen::SparseMatrix<double>& stiffness() const { return K_; }
    const Eigen::SparseMatrix<double>& alpha_mass() const { return Malpha_; }
    const Eigen::SparseMatrix<double>& cross(int i) const { return i == 1 ? G1_ : G2_; }
    const Eigen::SparseMatrix<double>& beta_mass() const { return B_; }

private:
    void build();

    UnitCellConfig cfg_;
    std::vector<WaveVector> nodes_;        // grid vertices (unwrapped positions)
    std::vector<std::array<int, 3>> tris_; // dof indices per element
    std::vector<Triangle2> triGeom_;
    std::vector<double> alpha_, beta_;
    int nDof_ = 0;
    double cellArea_ = 0.0;
    double betaMeasure_ = 0.0;
    Eigen::SparseMatrix<double> K_, Malpha_, G1_, G2_, B_;
};

struct AssembledSystem {
    Eigen::MatrixXcd A; // Hermitian, positive semidefinite
    Eigen::MatrixXd B;  // symmetric positive definite
};

AssembledSystem assemble(const UnitCellDiscretization& disc, WaveVector k);

struct EigenPair {
    double lambda = 0.0;
    Eigen::VectorXcd u; // normalized so u* B u = 1
};

/// Lowest L eigenpairs of the Hermitian definite pencil (A(k), B) via
/// B-Cholesky reduction and a dense Hermitian eigensolve.
std::vector<EigenPair> solve_bands(const UnitCellDiscretization& disc, WaveVector k, int L);

/// Group velocity d omega / dk from the eigenpair quadratic forms:
/// (2 k_i m_alpha(u,u) + m_{alpha i}(u,u)) / (2 omega). Throws
/// SingularPointError at omega = 0.
WaveVector group_velocity(const UnitCellDiscretization& disc, WaveVector k, const EigenPair& pair);

/// BandProvider over the FEM eigensolver with a per-k memoization cache.
/// The singular set is the origin.
class FemBandProvider : public BandProvider {
public:
    FemBandProvider(std::shared_ptr<const UnitCellDiscretization> disc, int L);

    int band_count() const override { return L_; }
    std::vector<double> lambda(WaveVector k) const override;
    WaveVector grad_omega(WaveVector k, int q) const override;
    const SingularSet& singular_set() const override { return singular_; }

    long eigensolve_count() const;
    const UnitCellDiscretization& discretization() const { return *disc_; }

private:
    struct Entry {
        std::vector<double> lambda;
        std::vector<WaveVector> gradOmega; // NaN components where omega = 0
    };
    const Entry& solve_cached(WaveVector k) const;

    std::shared_ptr<const UnitCellDiscretization> disc_;
    int L_;
    SingularSet singular_;
    mutable std::mutex mutex_;
    mutable std::unordered_map<std::uint64_t, Entry> cache_;
    mutable long solves_ = 0;
};

std::unique_ptr<FemBandProvider> fem_provider(const UnitCellConfig& config, int L);

} // namespace bandrec
