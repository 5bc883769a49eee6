#include "bandrec/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bandrec {

void AdaptConfig::validate() const {
    if (L < 2) throw std::invalid_argument("AdaptConfig: L must be >= 2");
    if (kappa < 0.0) throw std::invalid_argument("AdaptConfig: kappa must be >= 0");
    if (mu <= 0.0) throw std::invalid_argument("AdaptConfig: mu must be > 0");
    if (tol2 <= 0.0) throw std::invalid_argument("AdaptConfig: tol2 must be > 0");
    if (nMax < 1) throw std::invalid_argument("AdaptConfig: nMax must be >= 1");
    if (initialLevels < 0) throw std::invalid_argument("AdaptConfig: initialLevels must be >= 0");
    if (maxDegree < 2 || maxDegree > 10)
        throw std::invalid_argument("AdaptConfig: maxDegree must be in [2, 10]");
    if (std::abs(domain.signed_area()) == 0.0) throw std::invalid_argument("AdaptConfig: degenerate domain");
}

double indicator(const std::array<std::vector<double>, 3>& vertexOmegas) {
    const std::size_t L = vertexOmegas[0].size();
    for (const auto& w : vertexOmegas) {
        if (w.size() != L) throw std::invalid_argument("indicator: ragged band values");
        for (std::size_t q = 1; q < w.size(); ++q)
            if (w[q] < w[q - 1]) throw std::invalid_argument("indicator: band values must be ascending");
    }
    double eta = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q + 1 < L; ++q) {
        double vmin = std::numeric_limits<double>::infinity();
        for (const auto& w : vertexOmegas) vmin = std::min(vmin, w[q + 1] - w[q]);
        eta = std::min(eta, vmin);
    }
    return eta;
}

double tolerance1(double hT, const std::vector<double>& gradMagnitudes, double kappa) {
    if (gradMagnitudes.empty()) throw std::invalid_argument("tolerance1: no gradient data");
    double g = 0.0;
    for (double m : gradMagnitudes) {
        if (!std::isfinite(m)) throw std::invalid_argument("tolerance1: non-finite gradient");
        g = std::max(g, m);
    }
    return kappa * hT * g;
}

namespace {

constexpr double kSingularTol = 1e-12;

// Gradient magnitudes of all bands at k, or nothing if k is singular.
std::vector<double> grad_mags_at(const BandProvider& provider, WaveVector k) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(provider.band_count()));
    for (int q = 1; q <= provider.band_count(); ++q) out.push_back(norm(provider.grad_omega(k, q)));
    return out;
}

} // namespace

MarkReport mark(const ParamMesh& mesh, const BandProvider& provider, const AdaptConfig& config) {
    config.validate();
    const SingularSet& S = provider.singular_set();

    // Band values and gradient magnitudes per vertex, shared across elements.
    std::vector<std::vector<double>> vertexOmega(static_cast<std::size_t>(mesh.vertex_count()));
    std::vector<std::vector<double>> vertexGrad(static_cast<std::size_t>(mesh.vertex_count()));
    std::vector<bool> vertexSingular(static_cast<std::size_t>(mesh.vertex_count()), false);
    for (const Vertex& v : mesh.vertices()) {
        vertexOmega[static_cast<std::size_t>(v.id)] = provider.omega(v.position);
        const bool sing = S.contains(v.position, kSingularTol);
        vertexSingular[static_cast<std::size_t>(v.id)] = sing;
        if (!sing) vertexGrad[static_cast<std::size_t>(v.id)] = grad_mags_at(provider, v.position);
    }

    MarkReport report;
    report.rows.resize(static_cast<std::size_t>(mesh.element_count()));
    for (const Element& e : mesh.elements()) {
        MarkRow row;
        row.hT = mesh.element_diameter(e.id);

        std::array<std::vector<double>, 3> omegas;
        std::vector<double> mags;
        for (int v = 0; v < 3; ++v) {
            const int vid = e.vertexIds[static_cast<std::size_t>(v)];
            omegas[static_cast<std::size_t>(v)] = vertexOmega[static_cast<std::size_t>(vid)];
            if (!vertexSingular[static_cast<std::size_t>(vid)])
                for (double m : vertexGrad[static_cast<std::size_t>(vid)]) mags.push_back(m);
        }
        row.eta = indicator(omegas);

        if (mags.empty()) {
            // All three vertices singular: fall back to the face midpoints.
            for (int f = 1; f <= 3; ++f) {
                const auto fv = mesh.face_vertices(e.id, f);
                const WaveVector mid = 0.5 * (mesh.vertex(fv[0]).position + mesh.vertex(fv[1]).position);
                if (S.contains(mid, kSingularTol)) continue;
                for (double m : grad_mags_at(provider, mid)) mags.push_back(m);
            }
            if (mags.empty())
                throw std::runtime_error("mark: every vertex and face midpoint of an element is singular");
        }
        row.tol1 = tolerance1(row.hT, mags, config.kappa);
        row.marked = row.eta <= row.tol1 && row.hT >= config.tol2;
        report.rows[static_cast<std::size_t>(e.id)] = row;
    }
    return report;
}

ConformingDegrees assign_degrees(const ParamMesh& mesh, const MarkReport& lastMark, double mu,
                                 int maxDegree) {
    if (static_cast<int>(lastMark.rows.size()) != mesh.element_count())
        throw std::invalid_argument("assign_degrees: mark report does not match the mesh");
    ConformingDegrees deg;
    deg.elementDegree.resize(static_cast<std::size_t>(mesh.element_count()), 2);
    for (const Element& e : mesh.elements()) {
        int nT = 2;
        if (!lastMark.rows[static_cast<std::size_t>(e.id)].below_tol1()) {
            const int layer = mesh.layer_of(e.id);
            nT = std::max(2, static_cast<int>(std::ceil(mu * static_cast<double>(layer))));
            nT = std::min(nT, maxDegree);
        }
        deg.elementDegree[static_cast<std::size_t>(e.id)] = nT;
    }
    for (const auto& [key, elems] : mesh.face_adjacency()) {
        int mF = deg.elementDegree[static_cast<std::size_t>(elems[0])];
        if (elems[1] >= 0) mF = std::min(mF, deg.elementDegree[static_cast<std::size_t>(elems[1])]);
        deg.faceDegree[key] = mF;
    }
    return deg;
}

namespace {

double min_diameter(const ParamMesh& mesh) {
    double h = std::numeric_limits<double>::infinity();
    for (const Element& e : mesh.elements()) h = std::min(h, mesh.element_diameter(e.id));
    return h;
}

} // namespace

AdaptResult adapt_mesh(const BandProvider& provider, const AdaptConfig& config) {
    config.validate();
    ParamMesh mesh = ParamMesh::uniform(config.domain, config.initialLevels);

    AdaptResult result{std::move(mesh), {}};
    for (int loop = 1; loop <= config.nMax; ++loop) {
        const MarkReport report = mark(result.mesh, provider, config);
        const std::set<int> marked = report.marked_ids();
        const ConformingDegrees deg = assign_degrees(result.mesh, report, config.mu, config.maxDegree);
        result.log.push_back({loop, result.mesh.element_count(), static_cast<int>(marked.size()),
                              min_diameter(result.mesh), deg.dimension(result.mesh)});
        if (marked.empty()) {
            // Nothing can change in the remaining loops; advance the
            // generation round by round so layers (and degrees) keep growing.
            for (int l = loop + 1; l <= config.nMax; ++l) {
                result.mesh = result.mesh.with_generations_advanced(1);
                const MarkReport r2 = mark(result.mesh, provider, config);
                const ConformingDegrees d2 = assign_degrees(result.mesh, r2, config.mu, config.maxDegree);
                result.log.push_back({l, result.mesh.element_count(), 0, result.log.back().hMin,
                                      d2.dimension(result.mesh)});
            }
            result.mesh = result.mesh.with_generations_advanced(1);
            return result;
        }
        result.mesh = result.mesh.refine_marked(marked);
        for (const Element& e : result.mesh.elements())
            if (result.mesh.shape_ratio(e.id) > config.shapeBound)
                throw std::runtime_error("adapt_mesh: shape regularity bound violated");
    }
    return result;
}

HpResult run_hp(const BandProvider& provider, const AdaptConfig& config, const FeketeTable& table) {
    config.validate();
    if (provider.band_count() < config.L)
        throw std::invalid_argument("run_hp: provider supplies fewer bands than config.L");

    AdaptResult adapted = adapt_mesh(provider, config);
    HpResult out;
    out.mesh = std::move(adapted.mesh);
    out.log = std::move(adapted.log);
    out.finalMark = mark(out.mesh, provider, config);
    out.degrees = assign_degrees(out.mesh, out.finalMark, config.mu, config.maxDegree);
    out.N = out.degrees.dimension(out.mesh);
    out.bands.reserve(static_cast<std::size_t>(config.L - 1));
    for (int j = 1; j <= config.L - 1; ++j)
        out.bands.push_back(global_interpolate(provider, out.mesh, out.degrees, j, table));
    return out;
}

} // namespace bandrec
