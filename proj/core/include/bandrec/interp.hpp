#pragma once

#include "bandrec/degrees.hpp"
#include "bandrec/fekete.hpp"
#include "bandrec/geometry.hpp"
#include "bandrec/mesh.hpp"
#include "bandrec/refbasis.hpp"

#include <array>
#include <atomic>
#include <functional>
#include <iosfwd>
#include <vector>

namespace bandrec {

class BandProvider;

/// Affine map z -> A z + b from the reference triangle onto an element.
struct AffineMap {
    double a11 = 1, a12 = 0, a21 = 0, a22 = 1;
    WaveVector b;

    /// Maps the reference vertices to (t.a, t.b, t.c) in that order.
    static AffineMap to_triangle(const Triangle2& t);

    WaveVector map(RefPoint z) const { return {a11 * z.x + a12 * z.y + b.k1, a21 * z.x + a22 * z.y + b.k2}; }

    RefPoint inv_map(WaveVector p) const {
        const double x = p.k1 - b.k1, y = p.k2 - b.k2;
        return {i11 * x + i12 * y, i21 * x + i22 * y};
    }

    double i11 = 1, i12 = 0, i21 = 0, i22 = 1; // cached inverse
};

class ConformityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Gauss-Lobatto interpolation data of a scalar function along one face,
/// in a fixed orientation: t = -1 at the first endpoint, t = +1 at the
/// second. valueLo/valueHi are the endpoint values and sideCoeffs the m_F - 1
/// side-function coefficients.
struct FaceData {
    int mF = 1;
    double valueLo = 0.0;
    double valueHi = 0.0;
    std::vector<double> sideCoeffs;

    /// Reverse the face parametrization (t -> -t).
    FaceData flipped() const {
        FaceData out = *this;
        std::swap(out.valueLo, out.valueHi);
        for (std::size_t j = 0; j < out.sideCoeffs.size(); ++j)
            if (j % 2 == 1) out.sideCoeffs[j] = -out.sideCoeffs[j];
        return out;
    }

    /// Trace value at face parameter t in [-1,1].
    double trace(double t) const;
};

/// Interpolate f (given as a function of the face parameter t in [-1,1]) at
/// the degree-m_F Gauss-Lobatto nodes of face `faceIndex`.
FaceData face_interpolate(const std::function<double(double)>& f, int faceIndex, int mF);

/// Local interpolant on the reference triangle in the nodal/side/internal
/// shape-function basis.
struct LocalInterpolant {
    DegreeSignature sig;
    std::array<double, 3> nodalCoeffs{};
    std::array<std::vector<double>, 3> sideCoeffs; // per face, size m_i - 1
    std::vector<double> internalCoeffs;            // (m-1)(m-2)/2

    double value(RefPoint z) const;
    RefGrad gradient(RefPoint z) const;
};

/// Assemble the external block E(Ef) from the three face interpolants
/// (in local face orientation: face i runs from vertex i+1 to vertex i+2).
/// Throws ConformityError if shared-vertex values disagree.
LocalInterpolant extend(const std::array<FaceData, 3>& faces);

/// Coefficients of the internal interpolant of g at the interior Fekete
/// nodes of degree m. Empty for m < 3.
std::vector<double> internal_interpolate(const std::function<double(RefPoint)>& g, int m,
                                         const FeketeTable& table);

/// Pi f = E(Ef) + I(f - E(Ef)).
LocalInterpolant local_pi(const std::function<double(RefPoint)>& f, const DegreeSignature& sig,
                          const FeketeTable& table);

/// Element-wise interpolant of one band over a mesh, continuous across faces.
class GlobalInterpolant {
public:
    GlobalInterpolant() = default;
    GlobalInterpolant(ParamMesh mesh, std::vector<LocalInterpolant> locals, std::vector<AffineMap> maps,
                      std::map<std::uint64_t, int> faceDegrees);

    const ParamMesh& mesh() const { return mesh_; }
    const LocalInterpolant& local(int elementId) const { return locals_.at(static_cast<std::size_t>(elementId)); }
    const AffineMap& affine(int elementId) const { return maps_.at(static_cast<std::size_t>(elementId)); }

    /// Pull k back through the containing element's map and evaluate.
    double evaluate(WaveVector k) const;
    double evaluate_in(int elementId, WaveVector k) const;

    /// sqrt(max(0, evaluate)); negative overshoots are clamped and counted.
    double band_value(WaveVector k) const;
    long negative_clamp_count() const { return clampCount_.load(); }

    GlobalInterpolant(const GlobalInterpolant& other)
        : mesh_(other.mesh_), locals_(other.locals_), maps_(other.maps_),
          faceDegrees_(other.faceDegrees_), clampCount_(other.clampCount_.load()) {}
    GlobalInterpolant& operator=(const GlobalInterpolant& other) {
        mesh_ = other.mesh_;
        locals_ = other.locals_;
        maps_ = other.maps_;
        faceDegrees_ = other.faceDegrees_;
        clampCount_ = other.clampCount_.load();
        return *this;
    }
    GlobalInterpolant(GlobalInterpolant&&) noexcept;
    GlobalInterpolant& operator=(GlobalInterpolant&&) noexcept;

    void dump(std::ostream& os) const;
    static GlobalInterpolant parse(std::istream& is);

private:
    ParamMesh mesh_;
    std::vector<LocalInterpolant> locals_;
    std::vector<AffineMap> maps_;
    std::map<std::uint64_t, int> faceDegrees_;
    mutable std::atomic<long> clampCount_{0};
};

/// Interpolate band j (1-based, j <= L-1) of the provider's lambda over the
/// mesh with the given conforming degrees. Shared-face Gauss-Lobatto samples
/// are computed once per face, so the result is continuous by construction.
GlobalInterpolant global_interpolate(const BandProvider& provider, const ParamMesh& mesh,
                                     const ConformingDegrees& degrees, int bandIndex,
                                     const FeketeTable& table);

/// Same entry point for a plain scalar field (used by tests and baselines).
GlobalInterpolant global_interpolate(const std::function<double(WaveVector)>& f, const ParamMesh& mesh,
                                     const ConformingDegrees& degrees, const FeketeTable& table);

} // namespace bandrec
