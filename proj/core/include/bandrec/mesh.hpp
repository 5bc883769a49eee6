#pragma once

#include "bandrec/geometry.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <set>
#include <unordered_map>
#include <vector>

namespace bandrec {

/// Barycentric coordinates of a mesh vertex with respect to the root
/// triangle, stored as dyadic rationals a/2^k, b/2^k (the third coordinate
/// is implied). Edge midpoints are exact in this representation, so vertices
/// created from either side of a shared edge deduplicate bit-exactly.
struct DyadicBary {
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    std::uint32_t k = 0;

    friend bool operator==(const DyadicBary&, const DyadicBary&) = default;

    /// Reduce to the minimal denominator exponent.
    void normalize() {
        while (k > 0 && (a % 2 == 0) && (b % 2 == 0)) {
            a /= 2;
            b /= 2;
            --k;
        }
    }

    static DyadicBary midpoint(DyadicBary p, DyadicBary q) {
        const std::uint32_t kc = std::max(p.k, q.k);
        DyadicBary m{(p.a << (kc - p.k)) + (q.a << (kc - q.k)),
                     (p.b << (kc - p.k)) + (q.b << (kc - q.k)), kc + 1};
        m.normalize();
        return m;
    }
};

struct DyadicBaryHash {
    std::size_t operator()(const DyadicBary& d) const {
        std::size_t h = std::hash<std::uint64_t>{}(d.a);
        h ^= std::hash<std::uint64_t>{}(d.b) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h ^= std::hash<std::uint32_t>{}(d.k) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }
};

struct Vertex {
    int id = 0;
    WaveVector position;
};

struct Element {
    int id = 0;
    std::array<int, 3> vertexIds{}; // counterclockwise
    int refinementCount = 0;
    /// Id of the containing element in the previous generation; -1 for the
    /// initial mesh. Closure chains within one refinement round keep the
    /// previous-generation ancestor.
    int parentId = -1;
};

class OutOfDomainError : public std::runtime_error {
public:
    OutOfDomainError(WaveVector k, const std::string& what) : std::runtime_error(what), k(k) {}
    WaveVector k;
};

/// Conforming triangulation of the parameter triangle with iterated
/// newest-vertex-bisection refinement and per-element layer bookkeeping.
/// A constructed mesh is immutable; refine_marked returns a new mesh.
class ParamMesh {
public:
    /// Empty mesh; useful only as a target for parse or assignment.
    ParamMesh() = default;

    /// Uniform (red) refinement of the domain triangle into 4^levels
    /// congruent sub-triangles. Generation 1, all refinement counts 0.
    static ParamMesh uniform(const Triangle2& domain, int levels);

    int vertex_count() const { return static_cast<int>(vertices_.size()); }
    int element_count() const { return static_cast<int>(elements_.size()); }
    int generation() const { return generation_; }
    const Triangle2& domain() const { return root_; }

    const Vertex& vertex(int id) const { return vertices_.at(static_cast<std::size_t>(id)); }
    const Element& element(int id) const { return elements_.at(static_cast<std::size_t>(id)); }
    const std::vector<Vertex>& vertices() const { return vertices_; }
    const std::vector<Element>& elements() const { return elements_; }

    Triangle2 element_triangle(int id) const {
        const Element& e = element(id);
        return {vertex(e.vertexIds[0]).position, vertex(e.vertexIds[1]).position,
                vertex(e.vertexIds[2]).position};
    }

    double element_diameter(int id) const { return element_triangle(id).diameter(); }

    /// h_T / rho_T shape measure.
    double shape_ratio(int id) const {
        const Triangle2 t = element_triangle(id);
        return t.diameter() / t.inball_diameter();
    }

    /// Local face index (1..3) of the longest edge; face i is opposite local
    /// vertex i. Ties go to the face with the lexicographically smallest
    /// (min vertex id, max vertex id) pair.
    int longest_edge(int elementId) const;

    /// Endpoint vertex ids of local face f (1..3) of an element.
    std::array<int, 2> face_vertices(int elementId, int f) const {
        const auto& v = element(elementId).vertexIds;
        return {v[f % 3], v[(f + 1) % 3]};
    }

    /// Bisects every marked element at the midpoint of its longest edge and
    /// applies closure bisections until no hanging nodes remain. Children
    /// carry refinementCount = ancestor + number of bisections; the result
    /// generation is generation() + 1. Pure: identical inputs give identical
    /// vertex/element arrays.
    ParamMesh refine_marked(const std::set<int>& marked) const;

    /// Layer of an element: generation - refinementCount.
    int layer_of(int elementId) const { return generation_ - element(elementId).refinementCount; }

    /// Advance the generation counter by `rounds` without touching the mesh.
    /// Equivalent to that many refine_marked({}) rounds.
    ParamMesh with_generations_advanced(int rounds) const;

    /// Element whose closed triangle contains k (barycentric tolerance
    /// 1e-12); smallest containing id on shared faces/vertices.
    int locate(WaveVector k) const;

    /// Interior faces are shared by exactly two elements, boundary faces by
    /// one. Keyed by (min vertex id, max vertex id).
    using FaceMap = std::unordered_map<std::uint64_t, std::array<int, 2>>;
    FaceMap face_adjacency() const;

    static std::uint64_t face_key(int v0, int v1) {
        if (v0 > v1) std::swap(v0, v1);
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(v0)) << 32) |
               static_cast<std::uint32_t>(v1);
    }

    bool is_conforming() const;

    /// Plain-text dump: `nv ne generation`, vertices `id x y`, elements
    /// `id v1 v2 v3 refinementCount parentId`.
    void dump(std::ostream& os) const;
    static ParamMesh parse(std::istream& is);

    void write_svg(std::ostream& os, const std::set<int>* marked = nullptr) const;

private:
    int intern_vertex(const DyadicBary& bary);
    WaveVector bary_position(const DyadicBary& d) const;
    void build_locate_index();

    std::vector<Vertex> vertices_;
    std::vector<DyadicBary> vertexBary_;
    std::vector<Element> elements_;
    std::unordered_map<DyadicBary, int, DyadicBaryHash> vertexIndex_;
    Triangle2 root_{};
    int generation_ = 1;

    // Uniform-bin index over the bounding box; per-bin candidates stay in
    // ascending id order so the smallest-id tie-break is preserved.
    int bins_ = 0;
    double binLoX_ = 0, binLoY_ = 0, binW_ = 1, binH_ = 1;
    std::vector<std::vector<int>> binElems_;
};

} // namespace bandrec
