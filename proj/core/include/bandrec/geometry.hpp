#pragma once

#include <cmath>
#include <stdexcept>

namespace bandrec {

inline constexpr double kSqrt3 = 1.7320508075688772;

/// Wave vector in the reciprocal lattice; also used as a plain 2D point in
/// the parameter (IBZ) plane.
struct WaveVector {
    double k1 = 0.0;
    double k2 = 0.0;

    friend WaveVector operator+(WaveVector a, WaveVector b) { return {a.k1 + b.k1, a.k2 + b.k2}; }
    friend WaveVector operator-(WaveVector a, WaveVector b) { return {a.k1 - b.k1, a.k2 - b.k2}; }
    friend WaveVector operator*(double s, WaveVector v) { return {s * v.k1, s * v.k2}; }
    friend WaveVector operator*(WaveVector v, double s) { return s * v; }
    friend bool operator==(const WaveVector&, const WaveVector&) = default;
};

inline double dot(WaveVector a, WaveVector b) { return a.k1 * b.k1 + a.k2 * b.k2; }
inline double norm(WaveVector v) { return std::hypot(v.k1, v.k2); }
inline double cross(WaveVector a, WaveVector b) { return a.k1 * b.k2 - a.k2 * b.k1; }

/// Triangle in the parameter plane.
struct Triangle2 {
    WaveVector a, b, c;

    double signed_area() const { return 0.5 * cross(b - a, c - a); }

    /// Longest edge length.
    double diameter() const {
        return std::max({norm(b - a), norm(c - b), norm(a - c)});
    }

    /// Diameter of the largest inscribed ball (twice the inradius).
    double inball_diameter() const {
        const double per = norm(b - a) + norm(c - b) + norm(a - c);
        return 4.0 * std::abs(signed_area()) / per;
    }

    WaveVector centroid() const { return (1.0 / 3.0) * (a + b + c); }

    /// Barycentric coordinates of p with respect to (a, b, c).
    /// Throws for degenerate triangles.
    void barycentric(WaveVector p, double& wa, double& wb, double& wc) const {
        const double den = cross(b - a, c - a);
        if (den == 0.0) throw std::invalid_argument("degenerate triangle");
        wa = cross(b - p, c - p) / den;
        wb = cross(c - p, a - p) / den;
        wc = 1.0 - wa - wb;
    }

    bool contains(WaveVector p, double tol) const {
        double wa, wb, wc;
        barycentric(p, wa, wb, wc);
        return wa >= -tol && wb >= -tol && wc >= -tol;
    }
};

} // namespace bandrec
