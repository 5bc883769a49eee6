#include "bandrec/interp.hpp"

#include "bandrec/bands.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_map>

namespace bandrec {

AffineMap AffineMap::to_triangle(const Triangle2& t) {
    AffineMap m;
    m.a11 = (t.b.k1 - t.a.k1) / 2.0;
    m.a21 = (t.b.k2 - t.a.k2) / 2.0;
    m.a12 = (t.c.k1 - t.a.k1 - m.a11) / kSqrt3;
    m.a22 = (t.c.k2 - t.a.k2 - m.a21) / kSqrt3;
    m.b = {t.a.k1 + m.a11, t.a.k2 + m.a21};
    const double det = m.a11 * m.a22 - m.a12 * m.a21;
    if (det == 0.0) throw std::invalid_argument("AffineMap: degenerate element");
    m.i11 = m.a22 / det;
    m.i12 = -m.a12 / det;
    m.i21 = -m.a21 / det;
    m.i22 = m.a11 / det;
    return m;
}

namespace {

// Side-function trace along any face: (1 - t^2)/4 * t^(j-2).
double side_trace(int j, double t) {
    double r = (1.0 - t * t) / 4.0;
    for (int p = 0; p < j - 2; ++p) r *= t;
    return r;
}

} // namespace

double FaceData::trace(double t) const {
    double r = valueLo * (1.0 - t) / 2.0 + valueHi * (1.0 + t) / 2.0;
    for (std::size_t j = 0; j < sideCoeffs.size(); ++j) r += sideCoeffs[j] * side_trace(static_cast<int>(j) + 2, t);
    return r;
}

FaceData face_interpolate(const std::function<double(double)>& f, int faceIndex, int mF) {
    if (faceIndex < 1 || faceIndex > 3) throw std::invalid_argument("face_interpolate: face index must be 1..3");
    if (mF < 1) throw std::invalid_argument("face_interpolate: face degree must be >= 1");
    FaceData out;
    out.mF = mF;
    out.valueLo = f(-1.0);
    out.valueHi = f(1.0);
    if (mF == 1) return out;

    const GaussLobattoSet gl = gauss_lobatto(mF);
    const int n = mF - 1;
    Eigen::MatrixXd M(n, n);
    Eigen::VectorXd rhs(n);
    for (int k = 0; k < n; ++k) {
        const double t = gl.nodes[static_cast<std::size_t>(k + 1)];
        for (int j = 0; j < n; ++j) M(k, j) = side_trace(j + 2, t);
        rhs(k) = f(t) - (out.valueLo * (1.0 - t) / 2.0 + out.valueHi * (1.0 + t) / 2.0);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible()) throw std::runtime_error("face_interpolate: singular collocation system");
    const Eigen::VectorXd c = lu.solve(rhs);
    out.sideCoeffs.assign(c.data(), c.data() + n);
    return out;
}

double LocalInterpolant::value(RefPoint z) const {
    double r = 0.0;
    for (int i = 1; i <= 3; ++i) r += nodalCoeffs[static_cast<std::size_t>(i - 1)] * refbasis::nodal(i, z);
    for (int i = 1; i <= 3; ++i) {
        const auto& cs = sideCoeffs[static_cast<std::size_t>(i - 1)];
        for (std::size_t j = 0; j < cs.size(); ++j)
            r += cs[j] * refbasis::side(i, static_cast<int>(j) + 2, z);
    }
    if (!internalCoeffs.empty()) {
        std::size_t j = 0;
        for (int total = 0; total <= sig.m - 3; ++total)
            for (int a = 0; a <= total; ++a, ++j)
                r += internalCoeffs[j] * refbasis::InternalTerm{a, total - a}.value(z);
    }
    return r;
}

RefGrad LocalInterpolant::gradient(RefPoint z) const {
    RefGrad g;
    for (int i = 1; i <= 3; ++i) {
        const RefGrad gn = refbasis::nodal_grad(i);
        g.dx += nodalCoeffs[static_cast<std::size_t>(i - 1)] * gn.dx;
        g.dy += nodalCoeffs[static_cast<std::size_t>(i - 1)] * gn.dy;
    }
    for (int i = 1; i <= 3; ++i) {
        const auto& cs = sideCoeffs[static_cast<std::size_t>(i - 1)];
        for (std::size_t j = 0; j < cs.size(); ++j) {
            const RefGrad gs = refbasis::side_grad(i, static_cast<int>(j) + 2, z);
            g.dx += cs[j] * gs.dx;
            g.dy += cs[j] * gs.dy;
        }
    }
    if (!internalCoeffs.empty()) {
        std::size_t j = 0;
        for (int total = 0; total <= sig.m - 3; ++total)
            for (int a = 0; a <= total; ++a, ++j) {
                const RefGrad gi = refbasis::InternalTerm{a, total - a}.gradient(z);
                g.dx += internalCoeffs[j] * gi.dx;
                g.dy += internalCoeffs[j] * gi.dy;
            }
    }
    return g;
}

LocalInterpolant extend(const std::array<FaceData, 3>& faces) {
    // Face i runs from vertex i+1 (t=-1) to vertex i+2 (t=+1); each vertex is
    // the HI end of one face and the LO end of the next.
    const std::array<double, 3> fromHi{faces[1].valueHi, faces[2].valueHi, faces[0].valueHi};
    const std::array<double, 3> fromLo{faces[2].valueLo, faces[0].valueLo, faces[1].valueLo};
    LocalInterpolant out;
    double scale = 1.0;
    for (int v = 0; v < 3; ++v)
        scale = std::max({scale, std::abs(fromHi[static_cast<std::size_t>(v)]), std::abs(fromLo[static_cast<std::size_t>(v)])});
    for (int v = 0; v < 3; ++v) {
        const double a = fromHi[static_cast<std::size_t>(v)], b = fromLo[static_cast<std::size_t>(v)];
        if (std::abs(a - b) > 1e-12 * scale)
            throw ConformityError("extend: inconsistent shared-vertex values");
        out.nodalCoeffs[static_cast<std::size_t>(v)] = a;
    }
    int m = 2;
    for (int i = 0; i < 3; ++i) {
        out.sideCoeffs[static_cast<std::size_t>(i)] = faces[static_cast<std::size_t>(i)].sideCoeffs;
        out.sig.faceDegree[static_cast<std::size_t>(i)] = faces[static_cast<std::size_t>(i)].mF;
        m = std::max(m, faces[static_cast<std::size_t>(i)].mF);
    }
    out.sig.m = m;
    return out;
}

std::vector<double> internal_interpolate(const std::function<double(RefPoint)>& g, int m,
                                         const FeketeTable& table) {
    if (m < 3) return {};
    const InteriorFeketeSet& fk = table.get(m);
    const auto basis = refbasis::internal_basis(m);
    const int n = static_cast<int>(basis.size());
    Eigen::MatrixXd V(n, n);
    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) {
        const RefPoint z = fk.nodes[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) V(i, j) = basis[static_cast<std::size_t>(j)].value(z);
        rhs(i) = g(z);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(V);
    if (!lu.isInvertible()) throw std::runtime_error("internal_interpolate: singular Fekete Vandermonde");
    const Eigen::VectorXd a = lu.solve(rhs);
    return {a.data(), a.data() + n};
}

LocalInterpolant local_pi(const std::function<double(RefPoint)>& f, const DegreeSignature& sig,
                          const FeketeTable& table) {
    sig.validate();
    std::array<FaceData, 3> faces;
    for (int i = 1; i <= 3; ++i) {
        const RefPoint zA = refbasis::ref_vertex(refbasis::cyc(i + 1));
        const RefPoint zB = refbasis::ref_vertex(refbasis::cyc(i + 2));
        auto onFace = [&](double t) {
            return f({(1.0 - t) / 2.0 * zA.x + (1.0 + t) / 2.0 * zB.x,
                      (1.0 - t) / 2.0 * zA.y + (1.0 + t) / 2.0 * zB.y});
        };
        faces[static_cast<std::size_t>(i - 1)] = face_interpolate(onFace, i, sig.face(i));
    }
    LocalInterpolant out = extend(faces);
    out.sig = sig;
    if (sig.m >= 3) {
        const LocalInterpolant ext = out;
        out.internalCoeffs =
            internal_interpolate([&](RefPoint z) { return f(z) - ext.value(z); }, sig.m, table);
    }
    return out;
}

GlobalInterpolant::GlobalInterpolant(ParamMesh mesh, std::vector<LocalInterpolant> locals,
                                     std::vector<AffineMap> maps, std::map<std::uint64_t, int> faceDegrees)
    : mesh_(std::move(mesh)), locals_(std::move(locals)), maps_(std::move(maps)),
      faceDegrees_(std::move(faceDegrees)) {}

GlobalInterpolant::GlobalInterpolant(GlobalInterpolant&& other) noexcept
    : mesh_(std::move(other.mesh_)), locals_(std::move(other.locals_)), maps_(std::move(other.maps_)),
      faceDegrees_(std::move(other.faceDegrees_)), clampCount_(other.clampCount_.load()) {}

GlobalInterpolant& GlobalInterpolant::operator=(GlobalInterpolant&& other) noexcept {
    mesh_ = std::move(other.mesh_);
    locals_ = std::move(other.locals_);
    maps_ = std::move(other.maps_);
    faceDegrees_ = std::move(other.faceDegrees_);
    clampCount_ = other.clampCount_.load();
    return *this;
}

double GlobalInterpolant::evaluate(WaveVector k) const { return evaluate_in(mesh_.locate(k), k); }

double GlobalInterpolant::evaluate_in(int elementId, WaveVector k) const {
    return locals_.at(static_cast<std::size_t>(elementId))
        .value(maps_.at(static_cast<std::size_t>(elementId)).inv_map(k));
}

double GlobalInterpolant::band_value(WaveVector k) const {
    const double v = evaluate(k);
    if (v < 0.0) {
        clampCount_.fetch_add(1, std::memory_order_relaxed);
        return 0.0;
    }
    return std::sqrt(v);
}

namespace {

std::array<int, 3> sorted_vertex_ids(const Element& e) {
    std::array<int, 3> v = e.vertexIds;
    std::sort(v.begin(), v.end());
    return v;
}

} // namespace

GlobalInterpolant global_interpolate(const std::function<double(WaveVector)>& f, const ParamMesh& mesh,
                                     const ConformingDegrees& degrees, const FeketeTable& table) {
    if (static_cast<int>(degrees.elementDegree.size()) != mesh.element_count())
        throw std::invalid_argument("global_interpolate: degrees do not match the mesh");

    // One lambda value per vertex, shared by every incident face and element.
    std::vector<double> vertexValue(static_cast<std::size_t>(mesh.vertex_count()));
    for (const Vertex& v : mesh.vertices()) vertexValue[static_cast<std::size_t>(v.id)] = f(v.position);

    // One Gauss-Lobatto solve per face, in the canonical orientation
    // (lower vertex id at t = -1).
    std::unordered_map<std::uint64_t, FaceData> faceData;
    faceData.reserve(degrees.faceDegree.size());
    for (const auto& [key, mF] : degrees.faceDegree) {
        const int lo = static_cast<int>(key >> 32);
        const int hi = static_cast<int>(key & 0xffffffffu);
        const WaveVector pLo = mesh.vertex(lo).position;
        const WaveVector pHi = mesh.vertex(hi).position;
        auto onFace = [&](double t) {
            if (t == -1.0) return vertexValue[static_cast<std::size_t>(lo)];
            if (t == 1.0) return vertexValue[static_cast<std::size_t>(hi)];
            return f({(1.0 - t) / 2.0 * pLo.k1 + (1.0 + t) / 2.0 * pHi.k1,
                      (1.0 - t) / 2.0 * pLo.k2 + (1.0 + t) / 2.0 * pHi.k2});
        };
        faceData.emplace(key, face_interpolate(onFace, 1, mF));
    }

    std::vector<LocalInterpolant> locals(static_cast<std::size_t>(mesh.element_count()));
    std::vector<AffineMap> maps(static_cast<std::size_t>(mesh.element_count()));
    for (const Element& e : mesh.elements()) {
        const std::array<int, 3> vid = sorted_vertex_ids(e);
        const Triangle2 tri{mesh.vertex(vid[0]).position, mesh.vertex(vid[1]).position,
                            mesh.vertex(vid[2]).position};
        const AffineMap map = AffineMap::to_triangle(tri);

        std::array<FaceData, 3> faces;
        DegreeSignature sig;
        sig.m = degrees.degree_of(e.id);
        for (int i = 1; i <= 3; ++i) {
            const int a = vid[static_cast<std::size_t>(i % 3)];
            const int b = vid[static_cast<std::size_t>((i + 1) % 3)];
            const FaceData& canonical = faceData.at(ParamMesh::face_key(a, b));
            faces[static_cast<std::size_t>(i - 1)] = (a < b) ? canonical : canonical.flipped();
            sig.faceDegree[static_cast<std::size_t>(i - 1)] = canonical.mF;
        }

        LocalInterpolant loc = extend(faces);
        loc.sig = sig;
        if (sig.m >= 3) {
            const LocalInterpolant ext = loc;
            loc.internalCoeffs = internal_interpolate(
                [&](RefPoint z) { return f(map.map(z)) - ext.value(z); }, sig.m, table);
        }
        locals[static_cast<std::size_t>(e.id)] = std::move(loc);
        maps[static_cast<std::size_t>(e.id)] = map;
    }
    return GlobalInterpolant(mesh, std::move(locals), std::move(maps), degrees.faceDegree);
}

GlobalInterpolant global_interpolate(const BandProvider& provider, const ParamMesh& mesh,
                                     const ConformingDegrees& degrees, int bandIndex,
                                     const FeketeTable& table) {
    return global_interpolate(
        [&provider, bandIndex](WaveVector k) {
            return provider.lambda(k).at(static_cast<std::size_t>(bandIndex - 1));
        },
        mesh, degrees, table);
}

void GlobalInterpolant::dump(std::ostream& os) const {
    os << "BANDREC-INTERP 1\n";
    mesh_.dump(os);
    os.precision(17);
    os << faceDegrees_.size() << '\n';
    for (const auto& [key, mF] : faceDegrees_)
        os << static_cast<int>(key >> 32) << ' ' << static_cast<int>(key & 0xffffffffu) << ' ' << mF << '\n';
    for (std::size_t i = 0; i < locals_.size(); ++i) {
        const LocalInterpolant& l = locals_[i];
        os << i << ' ' << l.sig.m << ' ' << l.sig.faceDegree[0] << ' ' << l.sig.faceDegree[1] << ' '
           << l.sig.faceDegree[2] << '\n';
        os << l.nodalCoeffs[0] << ' ' << l.nodalCoeffs[1] << ' ' << l.nodalCoeffs[2] << '\n';
        for (const auto& cs : l.sideCoeffs) {
            os << cs.size();
            for (double c : cs) os << ' ' << c;
            os << '\n';
        }
        os << l.internalCoeffs.size();
        for (double c : l.internalCoeffs) os << ' ' << c;
        os << '\n';
    }
}

GlobalInterpolant GlobalInterpolant::parse(std::istream& is) {
    std::string tag;
    int version = 0;
    if (!(is >> tag >> version) || tag != "BANDREC-INTERP")
        throw std::runtime_error("interpolant parse: bad header");
    GlobalInterpolant g;
    g.mesh_ = ParamMesh::parse(is);
    std::size_t nf = 0;
    is >> nf;
    for (std::size_t i = 0; i < nf; ++i) {
        int a = 0, b = 0, mF = 0;
        is >> a >> b >> mF;
        g.faceDegrees_[ParamMesh::face_key(a, b)] = mF;
    }
    const int ne = g.mesh_.element_count();
    g.locals_.resize(static_cast<std::size_t>(ne));
    g.maps_.resize(static_cast<std::size_t>(ne));
    for (int e = 0; e < ne; ++e) {
        std::size_t id = 0;
        LocalInterpolant l;
        is >> id >> l.sig.m >> l.sig.faceDegree[0] >> l.sig.faceDegree[1] >> l.sig.faceDegree[2];
        is >> l.nodalCoeffs[0] >> l.nodalCoeffs[1] >> l.nodalCoeffs[2];
        for (auto& cs : l.sideCoeffs) {
            std::size_t n = 0;
            is >> n;
            cs.resize(n);
            for (double& c : cs) is >> c;
        }
        std::size_t n = 0;
        is >> n;
        l.internalCoeffs.resize(n);
        for (double& c : l.internalCoeffs) is >> c;
        if (!is) throw std::runtime_error("interpolant parse: truncated element block");
        g.locals_[id] = std::move(l);

        const std::array<int, 3> vid = sorted_vertex_ids(g.mesh_.element(static_cast<int>(id)));
        g.maps_[id] = AffineMap::to_triangle({g.mesh_.vertex(vid[0]).position, g.mesh_.vertex(vid[1]).position,
                                              g.mesh_.vertex(vid[2]).position});
    }
    return g;
}

} // namespace bandrec
