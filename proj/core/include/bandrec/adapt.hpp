#pragma once

#include "bandrec/bands.hpp"
#include "bandrec/degrees.hpp"
#include "bandrec/fekete.hpp"
#include "bandrec/interp.hpp"
#include "bandrec/mesh.hpp"

#include <array>
#include <vector>

namespace bandrec {

struct AdaptConfig {
    int L = 2;          // bands evaluated; bands 1..L-1 are interpolated
    double kappa = 2.0 * 1.4142135623730951; // 2 sqrt 2
    double mu = 1.0;    // slope parameter of the degree design
    double tol2 = 1e-6; // smallest allowed element diameter
    int nMax = 8;       // maximum number of refinement loops
    Triangle2 domain{{0.0, 0.0}, {M_PI, 0.0}, {M_PI, M_PI}};
    double shapeBound = 40.0; // h_T / rho_T sanity bound
    int initialLevels = 2;    // red-refinement levels of the initial mesh
    int maxDegree = 10;       // cap on n_T (interior Fekete tables stop at 10)

    void validate() const;
};

/// Per-element marking data for one loop. `marked` carries the refinement
/// guard h_T >= tol2; the degree design conditions on eta <= tol1 only.
struct MarkRow {
    double eta = 0.0;
    double tol1 = 0.0;
    double hT = 0.0;
    bool marked = false;

    bool below_tol1() const { return eta <= tol1; }
};

struct MarkReport {
    std::vector<MarkRow> rows;

    std::set<int> marked_ids() const {
        std::set<int> out;
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (rows[i].marked) out.insert(static_cast<int>(i));
        return out;
    }
};

/// Gap indicator: min over adjacent band pairs of the minimum vertex gap
/// |omega_q - omega_{q+1}|. Throws if any vertex list is not ascending.
double indicator(const std::array<std::vector<double>, 3>& vertexOmegas);

/// kappa * h_T * max of the supplied gradient magnitudes.
double tolerance1(double hT, const std::vector<double>& gradMagnitudes, double kappa);

/// Evaluate eta and tol1 for every element. Vertex band values are computed
/// once per vertex and shared by incident elements; vertices on the
/// provider's singular set are excluded from the gradient maximum, and if a
/// whole element is excluded the maximum over its face midpoints is used.
MarkReport mark(const ParamMesh& mesh, const BandProvider& provider, const AdaptConfig& config);

struct LoopRow {
    int loop = 0;
    int nElems = 0;
    int nMarked = 0;
    double hMin = 0.0;
    long N = 0;
};

struct AdaptResult {
    ParamMesh mesh;
    std::vector<LoopRow> log;
};

/// Algorithm: loop mark -> refine until nMax. When a loop marks nothing the
/// remaining loops cannot change the mesh; they are fast-forwarded with the
/// generation counter advanced so that layers keep growing.
AdaptResult adapt_mesh(const BandProvider& provider, const AdaptConfig& config);

/// n_T = 2 on eta-marked elements, max{2, ceil(mu * layer)} elsewhere
/// (capped at maxDegree); m_F = min over incident elements.
ConformingDegrees assign_degrees(const ParamMesh& mesh, const MarkReport& lastMark, double mu,
                                 int maxDegree = 10);

struct HpResult {
    ParamMesh mesh;
    MarkReport finalMark;
    ConformingDegrees degrees;
    std::vector<GlobalInterpolant> bands; // lambda_1 .. lambda_{L-1}
    long N = 0;                           // dimension of the conforming space
    std::vector<LoopRow> log;
};

/// End-to-end run: adapt_mesh, degree design, per-band global interpolation.
HpResult run_hp(const BandProvider& provider, const AdaptConfig& config, const FeketeTable& table);

} // namespace bandrec
