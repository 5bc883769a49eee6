#pragma once

#include "bandrec/mesh.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace bandrec {

/// Element-wise total degrees plus conforming face degrees
/// (m_F = min over the elements sharing the face).
struct ConformingDegrees {
    std::vector<int> elementDegree;          // indexed by element id
    std::map<std::uint64_t, int> faceDegree; // keyed by ParamMesh::face_key

    int degree_of(int elementId) const { return elementDegree.at(static_cast<std::size_t>(elementId)); }

    int face_degree(int v0, int v1) const { return faceDegree.at(ParamMesh::face_key(v0, v1)); }

    /// Dimension of the conforming space:
    /// #vertices + sum_F (m_F - 1) + sum_T (n_T - 1)(n_T - 2)/2.
    long dimension(const ParamMesh& mesh) const {
        long n = mesh.vertex_count();
        for (const auto& [key, mf] : faceDegree) n += mf - 1;
        for (int d : elementDegree) n += static_cast<long>(d - 1) * (d - 2) / 2;
        return n;
    }
};

} // namespace bandrec
