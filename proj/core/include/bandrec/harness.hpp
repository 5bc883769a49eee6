#pragma once

#include "bandrec/adapt.hpp"
#include "bandrec/bands.hpp"
#include "bandrec/interp.hpp"

#include <string>
#include <vector>

namespace bandrec {

/// Triangular lattice of G(G+1)/2 points evenly covering the closed domain
/// triangle.
struct ReferenceGrid {
    std::vector<WaveVector> points;

    static ReferenceGrid make(const Triangle2& domain, int G);
};

/// Pointwise relative errors e_i(k) = |omega_i - omega_hat_i| / omega_i of
/// the interpolated bands on the reference grid. Points where the reference
/// band magnitude is below 1e-12 are excluded (NaN entries).
struct ErrorReport {
    std::vector<std::vector<double>> e; // [band][point]
    double errorInf = 0.0;
    int argmaxBand = 0;       // 1-based
    int argmaxPoint = -1;     // grid index
    WaveVector argmaxLocation;
    int argmaxElement = -1;   // containing element in the interpolants' mesh
    long N = 0;               // sampling-point count of the run
};

ErrorReport error_report(const std::vector<GlobalInterpolant>& interpolants, const BandProvider& provider,
                         const ReferenceGrid& grid, long N, int reportBands);

struct StudyRow {
    int loop = 0;
    long N = 0;
    double errorInf = 0.0;
};

/// run_hp at each loop count 1..loops, reporting errorInf on the grid.
std::vector<StudyRow> convergence_study(const BandProvider& provider, const AdaptConfig& config, int loops,
                                        int gridG, int reportBands, const FeketeTable& table);

/// Least-squares slope of log(errorInf) against log(N) over the last
/// `tail` rows (default 4).
double fit_loglog_slope(const std::vector<StudyRow>& rows, int tail = 4);

/// Least-squares fit y = a + b x; returns {a, b, R^2}.
std::array<double, 3> linear_fit(const std::vector<double>& x, const std::vector<double>& y);

enum class BaselineMode { UniformH, UniformP };

/// Uniform refinement with fixed degree 2 (uniform-h) or a fixed one-level
/// mesh with growing degree (uniform-p), until N exceeds budgetN.
std::vector<StudyRow> baseline_study(const BandProvider& provider, const AdaptConfig& config,
                                     BaselineMode mode, long budgetN, int gridG, int reportBands,
                                     const FeketeTable& table);

void export_csv(const std::vector<StudyRow>& rows, const std::string& path);
void export_loop_csv(const std::vector<LoopRow>& rows, const std::string& path);
void export_band_errors_csv(const ErrorReport& report, const ReferenceGrid& grid, int band,
                            const std::string& path);
void export_mesh_svg(const ParamMesh& mesh, const std::set<int>& marked, const std::string& path);
void export_error_svg(const ErrorReport& report, const ReferenceGrid& grid, const ParamMesh& mesh,
                      const std::string& path);
void export_convergence_svg(const std::vector<std::vector<StudyRow>>& series,
                            const std::vector<std::string>& labels, const std::string& path);

} // namespace bandrec
