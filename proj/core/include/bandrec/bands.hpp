#pragma once

#include "bandrec/geometry.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>
#include <memory>
#include <vector>

namespace bandrec {

class SingularPointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Exact description of the set where band functions lose analyticity
/// (crossings and the origin-type square-root point).
struct SingularSet {
    struct Line {
        WaveVector point;
        WaveVector direction; // need not be normalized
    };

    std::vector<WaveVector> points;
    std::vector<Line> lines;

    bool empty() const { return points.empty() && lines.empty(); }
    bool contains(WaveVector k, double tol) const;
    /// Closed-triangle intersection test.
    bool intersects_triangle(const Triangle2& t, double tol) const;
};

/// Produces the first L eigenvalues lambda_1 <= ... <= lambda_L (and band
/// functions omega_q = sqrt(lambda_q)) at any wave vector.
class BandProvider {
public:
    virtual ~BandProvider() = default;

    virtual int band_count() const = 0;

    /// Eigenvalues at k, ascending, nonnegative.
    virtual std::vector<double> lambda(WaveVector k) const = 0;

    std::vector<double> omega(WaveVector k) const;

    /// Gradient of omega_q (q is 1-based). Throws SingularPointError where
    /// omega_q vanishes.
    virtual WaveVector grad_omega(WaveVector k, int q) const = 0;

    virtual const SingularSet& singular_set() const;
};

/// Band provider built from closed-form analytic lambda sheets; the bands are
/// the sorted sheet values. Crossing sets are declared exactly by the caller.
class SheetBandProvider : public BandProvider {
public:
    struct Sheet {
        std::function<double(WaveVector)> lambda;
        std::function<WaveVector(WaveVector)> gradLambda;
    };

    SheetBandProvider(std::vector<Sheet> sheets, SingularSet singular);

    int band_count() const override { return static_cast<int>(sheets_.size()); }
    std::vector<double> lambda(WaveVector k) const override;
    WaveVector grad_omega(WaveVector k, int q) const override;
    const SingularSet& singular_set() const override { return singular_; }

private:
    std::vector<Sheet> sheets_;
    SingularSet singular_;
};

/// Bands of a symmetric L x L matrix family with closed-form entries:
/// lambda_q(k) are the sorted eigenvalues, gradients come from the analytic
/// perturbation formula (v_q^T dA/dk_i v_q) away from crossings.
class SymmetricMatrixBands : public BandProvider {
public:
    using MatrixFn = std::function<Eigen::MatrixXd(WaveVector)>;

    /// dA1, dA2 are the entrywise partial derivatives of the family.
    SymmetricMatrixBands(int L, MatrixFn family, MatrixFn dA1, MatrixFn dA2, SingularSet singular);

    int band_count() const override { return L_; }
    std::vector<double> lambda(WaveVector k) const override;
    WaveVector grad_omega(WaveVector k, int q) const override;
    const SingularSet& singular_set() const override { return singular_; }

private:
    void solve(WaveVector k, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) const;

    int L_;
    MatrixFn family_, dA1_, dA2_;
    SingularSet singular_;
};

/// lambda sheets c_q + a_q . k (affine eigenvalues; every local space
/// reproduces them exactly).
std::unique_ptr<SheetBandProvider> make_affine_provider(
    const std::vector<std::array<double, 3>>& coeffs, // rows {c, a1, a2}
    SingularSet singular = {});

/// Two lambda sheets (c + k1)^2 and (c + offset + k2)^2: the omega sheets
/// have unit slope and cross exactly on the line k2 = k1 - offset. With
/// offset > 0 the crossing line runs through the interior of the square
/// IBZ wedge {0 <= k2 <= k1 <= pi}.
std::unique_ptr<SheetBandProvider> make_crossing_line_provider(double c, double offset = 1.0);

/// Two sheets (c -+ |k - k0|)^2: conical omega sheets with unit slope and a
/// single crossing point at k0. Requires c > max |k - k0| over the domain.
std::unique_ptr<SheetBandProvider> make_conical_provider(double c, WaveVector k0);

/// Analytic, well-separated bands (no crossings in any bounded domain).
std::unique_ptr<SheetBandProvider> make_smooth_provider();

} // namespace bandrec
