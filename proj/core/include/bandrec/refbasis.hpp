#pragma once

#include "bandrec/geometry.hpp"

#include <array>
#include <stdexcept>
#include <vector>

namespace bandrec {

/// Point in reference coordinates on the equilateral triangle with vertices
/// (-1,0), (1,0), (0,sqrt 3).
struct RefPoint {
    double x = 0.0;
    double y = 0.0;
};

struct RefGrad {
    double dx = 0.0;
    double dy = 0.0;
};

namespace refbasis {

inline RefPoint ref_vertex(int i) {
    switch (i) {
        case 1: return {-1.0, 0.0};
        case 2: return {1.0, 0.0};
        default: return {0.0, kSqrt3};
    }
}

/// Barycentric/nodal functions: value 1 at vertex i, 0 on the opposite face.
inline double nodal(int i, RefPoint z) {
    switch (i) {
        case 1: return (1.0 - z.x - z.y / kSqrt3) / 2.0;
        case 2: return (1.0 + z.x - z.y / kSqrt3) / 2.0;
        default: return z.y / kSqrt3;
    }
}

inline RefGrad nodal_grad(int i) {
    switch (i) {
        case 1: return {-0.5, -0.5 / kSqrt3};
        case 2: return {0.5, -0.5 / kSqrt3};
        default: return {0.0, 1.0 / kSqrt3};
    }
}

inline int cyc(int i) { return (i - 1) % 3 + 1; } // wrap 1..6 -> 1..3

/// Side shape function on face i (supported in the interior of the face and
/// of the triangle): N_{i+1} N_{i+2} (N_{i+2} - N_{i+1})^(j-2), j = 2..m_i.
double side(int i, int j, RefPoint z);
RefGrad side_grad(int i, int j, RefPoint z);

inline double bubble(RefPoint z) { return nodal(1, z) * nodal(2, z) * nodal(3, z); }
RefGrad bubble_grad(RefPoint z);

/// One internal basis function: bubble * x^px * y^py.
struct InternalTerm {
    int px = 0;
    int py = 0;
    double value(RefPoint z) const;
    RefGrad gradient(RefPoint z) const;
};

/// Basis of the internal space, (m-1)(m-2)/2 functions ordered by
/// (px+py, px) ascending. Throws for m < 3 (the space is empty).
std::vector<InternalTerm> internal_basis(int m);

inline int internal_dim(int m) { return m < 3 ? 0 : (m - 1) * (m - 2) / 2; }

} // namespace refbasis

/// Total and per-face degrees of a constrained local polynomial space.
struct DegreeSignature {
    int m = 2;
    std::array<int, 3> faceDegree{2, 2, 2};

    int face(int i) const { return faceDegree[static_cast<std::size_t>(i - 1)]; }

    /// 3 + sum_i (m_i - 1) + (m-2)(m-1)/2.
    int space_dim() const {
        return 3 + (faceDegree[0] - 1) + (faceDegree[1] - 1) + (faceDegree[2] - 1) +
               (m - 2) * (m - 1) / 2;
    }

    void validate() const {
        if (m < 2) throw std::invalid_argument("total degree must be >= 2");
        for (int mi : faceDegree)
            if (mi < 1 || mi > m) throw std::invalid_argument("face degree must be in [1, m]");
    }
};

/// Dense bivariate polynomial in monomial form, sum c_ab x^a y^b over
/// a+b <= degree. Used as a brute-force oracle and for Markov-type tests.
class Poly2 {
public:
    Poly2() = default;
    explicit Poly2(int degree) : degree_(degree), coeffs_(static_cast<std::size_t>((degree + 1) * (degree + 2) / 2), 0.0) {}

    int degree() const { return degree_; }
    double& coeff(int a, int b);
    double coeff(int a, int b) const;
    double value(RefPoint z) const;
    RefGrad gradient(RefPoint z) const;

private:
    int degree_ = 0;
    std::vector<double> coeffs_;
};

} // namespace bandrec
