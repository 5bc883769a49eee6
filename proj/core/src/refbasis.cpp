#include "bandrec/refbasis.hpp"

#include <cmath>

namespace bandrec {
namespace refbasis {

namespace {

double int_pow(double t, int p) {
    double r = 1.0;
    for (int i = 0; i < p; ++i) r *= t;
    return r;
}

} // namespace

double side(int i, int j, RefPoint z) {
    const double u = nodal(cyc(i + 1), z);
    const double v = nodal(cyc(i + 2), z);
    return u * v * int_pow(v - u, j - 2);
}

RefGrad side_grad(int i, int j, RefPoint z) {
    const int p = j - 2;
    const double u = nodal(cyc(i + 1), z);
    const double v = nodal(cyc(i + 2), z);
    const RefGrad gu = nodal_grad(cyc(i + 1));
    const RefGrad gv = nodal_grad(cyc(i + 2));
    const double w = v - u;
    const double wp = int_pow(w, p);
    const double wp1 = p > 0 ? static_cast<double>(p) * int_pow(w, p - 1) : 0.0;
    const RefGrad gw{gv.dx - gu.dx, gv.dy - gu.dy};
    return {gu.dx * v * wp + u * gv.dx * wp + u * v * wp1 * gw.dx,
            gu.dy * v * wp + u * gv.dy * wp + u * v * wp1 * gw.dy};
}

RefGrad bubble_grad(RefPoint z) {
    const double n1 = nodal(1, z), n2 = nodal(2, z), n3 = nodal(3, z);
    const RefGrad g1 = nodal_grad(1), g2 = nodal_grad(2), g3 = nodal_grad(3);
    return {g1.dx * n2 * n3 + n1 * g2.dx * n3 + n1 * n2 * g3.dx,
            g1.dy * n2 * n3 + n1 * g2.dy * n3 + n1 * n2 * g3.dy};
}

double InternalTerm::value(RefPoint z) const {
    return bubble(z) * int_pow(z.x, px) * int_pow(z.y, py);
}

RefGrad InternalTerm::gradient(RefPoint z) const {
    const double b = bubble(z);
    const RefGrad gb = bubble_grad(z);
    const double xp = int_pow(z.x, px);
    const double yq = int_pow(z.y, py);
    const double dxp = px > 0 ? static_cast<double>(px) * int_pow(z.x, px - 1) : 0.0;
    const double dyq = py > 0 ? static_cast<double>(py) * int_pow(z.y, py - 1) : 0.0;
    return {gb.dx * xp * yq + b * dxp * yq, gb.dy * xp * yq + b * xp * dyq};
}

std::vector<InternalTerm> internal_basis(int m) {
    if (m < 3) throw std::domain_error("internal space is empty for m < 3");
    std::vector<InternalTerm> out;
    out.reserve(static_cast<std::size_t>(internal_dim(m)));
    for (int total = 0; total <= m - 3; ++total)
        for (int a = 0; a <= total; ++a) out.push_back({a, total - a});
    return out;
}

} // namespace refbasis

double& Poly2::coeff(int a, int b) {
    const int total = a + b;
    return coeffs_.at(static_cast<std::size_t>(total * (total + 1) / 2 + a));
}

double Poly2::coeff(int a, int b) const {
    const int total = a + b;
    return coeffs_.at(static_cast<std::size_t>(total * (total + 1) / 2 + a));
}

double Poly2::value(RefPoint z) const {
    double r = 0.0;
    std::size_t idx = 0;
    for (int total = 0; total <= degree_; ++total) {
        for (int a = 0; a <= total; ++a, ++idx) {
            double t = coeffs_[idx];
            for (int i = 0; i < a; ++i) t *= z.x;
            for (int i = 0; i < total - a; ++i) t *= z.y;
            r += t;
        }
    }
    return r;
}

RefGrad Poly2::gradient(RefPoint z) const {
    RefGrad g;
    std::size_t idx = 0;
    for (int total = 0; total <= degree_; ++total) {
        for (int a = 0; a <= total; ++a, ++idx) {
            const int b = total - a;
            const double c = coeffs_[idx];
            if (c == 0.0) continue;
            double xa1 = 1.0, yb1 = 1.0, xa = 1.0, yb = 1.0;
            for (int i = 0; i < a - 1; ++i) xa1 *= z.x;
            for (int i = 0; i < b - 1; ++i) yb1 *= z.y;
            xa = a > 0 ? xa1 * z.x : 1.0;
            yb = b > 0 ? yb1 * z.y : 1.0;
            if (a > 0) g.dx += c * static_cast<double>(a) * xa1 * yb;
            if (b > 0) g.dy += c * static_cast<double>(b) * xa * yb1;
        }
    }
    return g;
}

} // namespace bandrec
