#include "bandrec/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cassert>
#include <istream>
#include <ostream>
#include <sstream>

namespace bandrec {

namespace {

// Working element during one refinement round.
struct WorkElement {
    std::array<int, 3> verts;
    int refCount;
    int ancestor; // id in the pre-round mesh
    bool alive;
};

} // namespace

WaveVector ParamMesh::bary_position(const DyadicBary& d) const {
    const double den = std::ldexp(1.0, static_cast<int>(d.k));
    const double wa = static_cast<double>(d.a) / den;
    const double wb = static_cast<double>(d.b) / den;
    const double wc = 1.0 - wa - wb;
    return wa * root_.a + wb * root_.b + wc * root_.c;
}

int ParamMesh::intern_vertex(const DyadicBary& bary) {
    auto it = vertexIndex_.find(bary);
    if (it != vertexIndex_.end()) return it->second;
    const int id = static_cast<int>(vertices_.size());
    vertices_.push_back({id, bary_position(bary)});
    vertexBary_.push_back(bary);
    vertexIndex_.emplace(bary, id);
    return id;
}

ParamMesh ParamMesh::uniform(const Triangle2& domain, int levels) {
    if (levels < 0) throw std::invalid_argument("levels must be >= 0");
    Triangle2 d = domain;
    const double area = d.signed_area();
    const double scale = d.diameter();
    if (std::abs(area) < 1e-14 * scale * scale)
        throw std::invalid_argument("degenerate domain triangle (zero area)");
    if (area < 0.0) std::swap(d.b, d.c); // store counterclockwise

    ParamMesh m;
    m.root_ = d;
    const int ia = m.intern_vertex({1, 0, 0});
    const int ib = m.intern_vertex({0, 1, 0});
    const int ic = m.intern_vertex({0, 0, 0});

    std::vector<std::array<int, 3>> tris{{ia, ib, ic}};
    for (int lev = 0; lev < levels; ++lev) {
        std::vector<std::array<int, 3>> next;
        next.reserve(tris.size() * 4);
        for (const auto& t : tris) {
            const int m01 = m.intern_vertex(DyadicBary::midpoint(m.vertexBary_[static_cast<std::size_t>(t[0])],
                                                                 m.vertexBary_[static_cast<std::size_t>(t[1])]));
            const int m12 = m.intern_vertex(DyadicBary::midpoint(m.vertexBary_[static_cast<std::size_t>(t[1])],
                                                                 m.vertexBary_[static_cast<std::size_t>(t[2])]));
            const int m20 = m.intern_vertex(DyadicBary::midpoint(m.vertexBary_[static_cast<std::size_t>(t[2])],
                                                                 m.vertexBary_[static_cast<std::size_t>(t[0])]));
            next.push_back({t[0], m01, m20});
            next.push_back({m01, t[1], m12});
            next.push_back({m20, m12, t[2]});
            next.push_back({m01, m12, m20});
        }
        tris = std::move(next);
    }

    m.elements_.reserve(tris.size());
    for (std::size_t i = 0; i < tris.size(); ++i)
        m.elements_.push_back({static_cast<int>(i), tris[i], 0, -1});
    m.generation_ = 1;
    m.build_locate_index();
    assert(m.is_conforming());
    return m;
}

int ParamMesh::longest_edge(int elementId) const {
    (void)element(elementId); // bounds check
    int best = 1;
    double bestLen = -1.0;
    std::pair<int, int> bestKey{0, 0};
    for (int f = 1; f <= 3; ++f) {
        const auto fv = face_vertices(elementId, f);
        const double len = norm(vertex(fv[0]).position - vertex(fv[1]).position);
        std::pair<int, int> key{std::min(fv[0], fv[1]), std::max(fv[0], fv[1])};
        // strict improvement, or tie broken by the smaller id pair
        if (len > bestLen + 1e-14 * bestLen || (std::abs(len - bestLen) <= 1e-14 * bestLen && key < bestKey)) {
            best = f;
            bestLen = len;
            bestKey = key;
        }
    }
    return best;
}

ParamMesh ParamMesh::refine_marked(const std::set<int>& marked) const {
    for (int id : marked)
        if (id < 0 || id >= element_count()) throw std::invalid_argument("refine_marked: unknown element id");
    if (vertexBary_.size() != vertices_.size())
        throw std::runtime_error("refine_marked: mesh parsed from a dump is read-only");

    ParamMesh out;
    out.root_ = root_;
    out.vertices_ = vertices_;
    out.vertexBary_ = vertexBary_;
    out.vertexIndex_ = vertexIndex_;
    out.generation_ = generation_ + 1;

    std::vector<WorkElement> work;
    work.reserve(elements_.size() * 2);
    for (const Element& e : elements_) work.push_back({e.vertexIds, e.refinementCount, e.id, true});

    auto edge_len = [&](int a, int b) { return norm(out.vertices_[static_cast<std::size_t>(a)].position -
                                                    out.vertices_[static_cast<std::size_t>(b)].position); };

    // Longest edge of a working element, the tie-break matching longest_edge.
    auto longest_of = [&](const WorkElement& w) {
        int best = 0;
        double bestLen = -1.0;
        std::pair<int, int> bestKey{0, 0};
        for (int f = 0; f < 3; ++f) {
            const int a = w.verts[static_cast<std::size_t>((f + 1) % 3)];
            const int b = w.verts[static_cast<std::size_t>((f + 2) % 3)];
            const double len = edge_len(a, b);
            std::pair<int, int> key{std::min(a, b), std::max(a, b)};
            if (len > bestLen + 1e-14 * bestLen ||
                (std::abs(len - bestLen) <= 1e-14 * bestLen && key < bestKey)) {
                best = f;
                bestLen = len;
                bestKey = key;
            }
        }
        return best;
    };

    auto bisect = [&](std::size_t wi) {
        WorkElement w = work[wi];
        work[wi].alive = false;
        const int f = longest_of(w);
        const int ia = w.verts[static_cast<std::size_t>((f + 1) % 3)];
        const int ib = w.verts[static_cast<std::size_t>((f + 2) % 3)];
        const int mid = out.intern_vertex(DyadicBary::midpoint(out.vertexBary_[static_cast<std::size_t>(ia)],
                                                               out.vertexBary_[static_cast<std::size_t>(ib)]));
        // Replacing one endpoint of the bisected edge preserves orientation.
        std::array<int, 3> c1 = w.verts;
        std::array<int, 3> c2 = w.verts;
        c1[static_cast<std::size_t>((f + 2) % 3)] = mid;
        c2[static_cast<std::size_t>((f + 1) % 3)] = mid;
        work.push_back({c1, w.refCount + 1, w.ancestor, true});
        work.push_back({c2, w.refCount + 1, w.ancestor, true});
    };

    for (int id : marked) bisect(static_cast<std::size_t>(id));

    // Closure: an element has a hanging node when the exact midpoint of one
    // of its edges already exists as a mesh vertex. Bisect until fixpoint.
    bool changed = true;
    std::size_t guard = 0;
    while (changed) {
        changed = false;
        for (std::size_t wi = 0; wi < work.size(); ++wi) {
            if (!work[wi].alive) continue;
            for (int f = 0; f < 3; ++f) {
                const int a = work[wi].verts[static_cast<std::size_t>((f + 1) % 3)];
                const int b = work[wi].verts[static_cast<std::size_t>((f + 2) % 3)];
                const DyadicBary mid = DyadicBary::midpoint(out.vertexBary_[static_cast<std::size_t>(a)],
                                                            out.vertexBary_[static_cast<std::size_t>(b)]);
                if (out.vertexIndex_.count(mid)) {
                    bisect(wi);
                    changed = true;
                    break;
                }
            }
        }
        if (++guard > 10'000'000) throw std::runtime_error("refine_marked: closure did not terminate");
    }

    out.elements_.clear();
    for (const WorkElement& w : work) {
        if (!w.alive) continue;
        const int id = static_cast<int>(out.elements_.size());
        out.elements_.push_back({id, w.verts, w.refCount, w.ancestor});
    }
    out.build_locate_index();
    return out;
}

ParamMesh ParamMesh::with_generations_advanced(int rounds) const {
    ParamMesh out = *this;
    out.generation_ += rounds;
    return out;
}

void ParamMesh::build_locate_index() {
    if (elements_.empty()) return;
    double loX = vertices_[0].position.k1, hiX = loX;
    double loY = vertices_[0].position.k2, hiY = loY;
    for (const Vertex& v : vertices_) {
        loX = std::min(loX, v.position.k1);
        hiX = std::max(hiX, v.position.k1);
        loY = std::min(loY, v.position.k2);
        hiY = std::max(hiY, v.position.k2);
    }
    bins_ = std::clamp(static_cast<int>(std::sqrt(static_cast<double>(elements_.size()))), 1, 256);
    binLoX_ = loX;
    binLoY_ = loY;
    binW_ = std::max(hiX - loX, 1e-300) / bins_;
    binH_ = std::max(hiY - loY, 1e-300) / bins_;
    binElems_.assign(static_cast<std::size_t>(bins_) * static_cast<std::size_t>(bins_), {});
    const double pad = 1e-9 * std::max(hiX - loX, hiY - loY);
    for (const Element& e : elements_) {
        const Triangle2 t = element_triangle(e.id);
        const double eloX = std::min({t.a.k1, t.b.k1, t.c.k1}) - pad;
        const double ehiX = std::max({t.a.k1, t.b.k1, t.c.k1}) + pad;
        const double eloY = std::min({t.a.k2, t.b.k2, t.c.k2}) - pad;
        const double ehiY = std::max({t.a.k2, t.b.k2, t.c.k2}) + pad;
        const int i0 = std::clamp(static_cast<int>((eloX - binLoX_) / binW_), 0, bins_ - 1);
        const int i1 = std::clamp(static_cast<int>((ehiX - binLoX_) / binW_), 0, bins_ - 1);
        const int j0 = std::clamp(static_cast<int>((eloY - binLoY_) / binH_), 0, bins_ - 1);
        const int j1 = std::clamp(static_cast<int>((ehiY - binLoY_) / binH_), 0, bins_ - 1);
        for (int i = i0; i <= i1; ++i)
            for (int j = j0; j <= j1; ++j)
                binElems_[static_cast<std::size_t>(i) * static_cast<std::size_t>(bins_) +
                          static_cast<std::size_t>(j)]
                    .push_back(e.id);
    }
}

int ParamMesh::locate(WaveVector k) const {
    constexpr double tol = 1e-12;
    auto contains = [&](int id) {
        double wa, wb, wc;
        element_triangle(id).barycentric(k, wa, wb, wc);
        return wa >= -tol && wb >= -tol && wc >= -tol;
    };
    if (bins_ > 0) {
        const int i = std::clamp(static_cast<int>((k.k1 - binLoX_) / binW_), 0, bins_ - 1);
        const int j = std::clamp(static_cast<int>((k.k2 - binLoY_) / binH_), 0, bins_ - 1);
        for (int id : binElems_[static_cast<std::size_t>(i) * static_cast<std::size_t>(bins_) +
                                static_cast<std::size_t>(j)])
            if (contains(id)) return id;
    } else {
        for (const Element& e : elements_)
            if (contains(e.id)) return e.id;
    }
    std::ostringstream oss;
    oss << "locate: point (" << k.k1 << ", " << k.k2 << ") outside the domain";
    throw OutOfDomainError(k, oss.str());
}

ParamMesh::FaceMap ParamMesh::face_adjacency() const {
    FaceMap map;
    map.reserve(elements_.size() * 2);
    for (const Element& e : elements_) {
        for (int f = 1; f <= 3; ++f) {
            const auto fv = face_vertices(e.id, f);
            const std::uint64_t key = face_key(fv[0], fv[1]);
            auto [it, inserted] = map.try_emplace(key, std::array<int, 2>{e.id, -1});
            if (!inserted) {
                if (it->second[1] != -1) throw std::runtime_error("face shared by more than two elements");
                it->second[1] = e.id;
                if (it->second[0] > it->second[1]) std::swap(it->second[0], it->second[1]);
            }
        }
    }
    return map;
}

bool ParamMesh::is_conforming() const {
    // Every face shared by one or two elements, and no vertex strictly
    // inside another element's edge (it would be the exact edge midpoint).
    try {
        (void)face_adjacency();
    } catch (const std::runtime_error&) {
        return false;
    }
    for (const Element& e : elements_) {
        for (int f = 1; f <= 3; ++f) {
            const auto fv = face_vertices(e.id, f);
            const DyadicBary mid = DyadicBary::midpoint(vertexBary_[static_cast<std::size_t>(fv[0])],
                                                        vertexBary_[static_cast<std::size_t>(fv[1])]);
            if (vertexIndex_.count(mid)) return false;
        }
    }
    return true;
}

void ParamMesh::dump(std::ostream& os) const {
    os << vertex_count() << ' ' << element_count() << ' ' << generation_ << '\n';
    os.precision(17);
    for (const Vertex& v : vertices_) os << v.id << ' ' << v.position.k1 << ' ' << v.position.k2 << '\n';
    for (const Element& e : elements_)
        os << e.id << ' ' << e.vertexIds[0] << ' ' << e.vertexIds[1] << ' ' << e.vertexIds[2] << ' '
           << e.refinementCount << ' ' << e.parentId << '\n';
}

ParamMesh ParamMesh::parse(std::istream& is) {
    ParamMesh m;
    int nv = 0, ne = 0;
    if (!(is >> nv >> ne >> m.generation_)) throw std::runtime_error("mesh parse: bad header");
    m.vertices_.resize(static_cast<std::size_t>(nv));
    for (int i = 0; i < nv; ++i) {
        Vertex v;
        if (!(is >> v.id >> v.position.k1 >> v.position.k2)) throw std::runtime_error("mesh parse: bad vertex");
        m.vertices_[static_cast<std::size_t>(v.id)] = v;
    }
    m.elements_.resize(static_cast<std::size_t>(ne));
    for (int i = 0; i < ne; ++i) {
        Element e;
        if (!(is >> e.id >> e.vertexIds[0] >> e.vertexIds[1] >> e.vertexIds[2] >> e.refinementCount >> e.parentId))
            throw std::runtime_error("mesh parse: bad element");
        m.elements_[static_cast<std::size_t>(e.id)] = e;
    }
    // A parsed mesh has no exact barycentric table; it supports read-only
    // queries (locate, layer_of, dump) but not further refinement.
    if (!m.vertices_.empty()) {
        m.root_ = {m.vertices_[0].position, m.vertices_[0].position, m.vertices_[0].position};
        double loX = m.vertices_[0].position.k1, hiX = loX;
        double loY = m.vertices_[0].position.k2, hiY = loY;
        for (const Vertex& v : m.vertices_) {
            loX = std::min(loX, v.position.k1);
            hiX = std::max(hiX, v.position.k1);
            loY = std::min(loY, v.position.k2);
            hiY = std::max(hiY, v.position.k2);
        }
        m.root_ = {{loX, loY}, {hiX, loY}, {hiX, hiY}};
    }
    m.build_locate_index();
    return m;
}

void ParamMesh::write_svg(std::ostream& os, const std::set<int>* marked) const {
    double loX = 0, hiX = 1, loY = 0, hiY = 1;
    if (!vertices_.empty()) {
        loX = hiX = vertices_[0].position.k1;
        loY = hiY = vertices_[0].position.k2;
        for (const Vertex& v : vertices_) {
            loX = std::min(loX, v.position.k1);
            hiX = std::max(hiX, v.position.k1);
            loY = std::min(loY, v.position.k2);
            hiY = std::max(hiY, v.position.k2);
        }
    }
    const double w = hiX - loX, h = hiY - loY;
    const double scale = 560.0 / std::max(w, h);
    auto X = [&](double x) { return 20.0 + (x - loX) * scale; };
    auto Y = [&](double y) { return 580.0 - (y - loY) * scale; };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" "
          "viewBox=\"0 0 600 600\">\n";
    for (const Element& e : elements_) {
        const bool fill = marked && marked->count(e.id);
        os << "<polygon points=\"";
        for (int i = 0; i < 3; ++i) {
            const WaveVector p = vertex(e.vertexIds[static_cast<std::size_t>(i)]).position;
            os << X(p.k1) << ',' << Y(p.k2) << (i < 2 ? " " : "");
        }
        os << "\" fill=\"" << (fill ? "#e5704c" : "none") << "\" stroke=\"#333\" stroke-width=\"0.6\"/>\n";
    }
    os << "</svg>\n";
}

} // namespace bandrec
