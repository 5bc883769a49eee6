#include "bandrec/bands.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace bandrec {

bool SingularSet::contains(WaveVector k, double tol) const {
    for (const WaveVector& p : points)
        if (norm(k - p) <= tol) return true;
    for (const Line& l : lines) {
        const double d = std::abs(cross(k - l.point, l.direction)) / norm(l.direction);
        if (d <= tol) return true;
    }
    return false;
}

namespace {

bool segments_intersect(WaveVector a, WaveVector b, WaveVector c, WaveVector d, double tol) {
    const double d1 = cross(b - a, c - a);
    const double d2 = cross(b - a, d - a);
    const double d3 = cross(d - c, a - c);
    const double d4 = cross(d - c, b - c);
    if (((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol)) &&
        ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol)))
        return true;
    auto on_segment = [&](WaveVector p, WaveVector q, WaveVector r) {
        if (std::abs(cross(q - p, r - p)) > tol * std::max(1.0, norm(q - p))) return false;
        const double t = dot(r - p, q - p) / dot(q - p, q - p);
        return t >= -tol && t <= 1.0 + tol;
    };
    return on_segment(a, b, c) || on_segment(a, b, d) || on_segment(c, d, a) || on_segment(c, d, b);
}

} // namespace

bool SingularSet::intersects_triangle(const Triangle2& t, double tol) const {
    for (const WaveVector& p : points)
        if (t.contains(p, tol)) return true;
    for (const Line& l : lines) {
        // Clip a long segment of the line against the triangle.
        const double span = 4.0 * (t.diameter() + norm(t.centroid() - l.point));
        const WaveVector dir = (1.0 / norm(l.direction)) * l.direction;
        const WaveVector a = l.point - span * dir;
        const WaveVector b = l.point + span * dir;
        if (t.contains(a, tol) || t.contains(b, tol)) return true;
        const std::array<std::array<WaveVector, 2>, 3> edges{{{t.a, t.b}, {t.b, t.c}, {t.c, t.a}}};
        for (const auto& e : edges)
            if (segments_intersect(a, b, e[0], e[1], tol)) return true;
    }
    return false;
}

std::vector<double> BandProvider::omega(WaveVector k) const {
    std::vector<double> w = lambda(k);
    for (double& v : w) v = std::sqrt(std::max(0.0, v));
    return w;
}

const SingularSet& BandProvider::singular_set() const {
    static const SingularSet empty;
    return empty;
}

SheetBandProvider::SheetBandProvider(std::vector<Sheet> sheets, SingularSet singular)
    : sheets_(std::move(sheets)), singular_(std::move(singular)) {}

std::vector<double> SheetBandProvider::lambda(WaveVector k) const {
    std::vector<double> v;
    v.reserve(sheets_.size());
    for (const Sheet& s : sheets_) v.push_back(s.lambda(k));
    std::sort(v.begin(), v.end());
    return v;
}

WaveVector SheetBandProvider::grad_omega(WaveVector k, int q) const {
    // Identify the sheet holding the q-th sorted value; ties resolve to the
    // lower sheet index (deterministic one-sided value at crossings).
    std::vector<int> order(sheets_.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> vals(sheets_.size());
    for (std::size_t i = 0; i < sheets_.size(); ++i) vals[i] = sheets_[i].lambda(k);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return vals[static_cast<std::size_t>(a)] < vals[static_cast<std::size_t>(b)];
    });
    const int sheet = order.at(static_cast<std::size_t>(q - 1));
    const double lam = vals[static_cast<std::size_t>(sheet)];
    if (lam <= 0.0) throw SingularPointError("grad_omega: omega vanishes at this wave vector");
    const WaveVector gl = sheets_[static_cast<std::size_t>(sheet)].gradLambda(k);
    return (1.0 / (2.0 * std::sqrt(lam))) * gl;
}

SymmetricMatrixBands::SymmetricMatrixBands(int L, MatrixFn family, MatrixFn dA1, MatrixFn dA2,
                                           SingularSet singular)
    : L_(L), family_(std::move(family)), dA1_(std::move(dA1)), dA2_(std::move(dA2)),
      singular_(std::move(singular)) {}

void SymmetricMatrixBands::solve(WaveVector k, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) const {
    const Eigen::MatrixXd A = family_(k);
    if (A.rows() != L_ || A.cols() != L_) throw std::invalid_argument("matrix family: wrong dimensions");
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("matrix family: not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    if (L_ <= 3)
        es.computeDirect(A); // closed form for 2x2 and 3x3
    else
        es.compute(A);
    values = es.eigenvalues();
    vectors = es.eigenvectors();
}

std::vector<double> SymmetricMatrixBands::lambda(WaveVector k) const {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    solve(k, values, vectors);
    std::vector<double> out(values.data(), values.data() + L_);
    for (double v : out)
        if (v < -1e-12) throw std::runtime_error("matrix family: negative eigenvalue; shift the family");
    for (double& v : out) v = std::max(0.0, v);
    return out;
}

WaveVector SymmetricMatrixBands::grad_omega(WaveVector k, int q) const {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    solve(k, values, vectors);
    const double lam = values(q - 1);
    if (lam <= 0.0) throw SingularPointError("grad_omega: omega vanishes at this wave vector");
    const Eigen::VectorXd v = vectors.col(q - 1);
    const double g1 = v.dot(dA1_(k) * v);
    const double g2 = v.dot(dA2_(k) * v);
    return {g1 / (2.0 * std::sqrt(lam)), g2 / (2.0 * std::sqrt(lam))};
}

std::unique_ptr<SheetBandProvider> make_affine_provider(const std::vector<std::array<double, 3>>& coeffs,
                                                        SingularSet singular) {
    std::vector<SheetBandProvider::Sheet> sheets;
    for (const auto& c : coeffs) {
        sheets.push_back({[c](WaveVector k) { return c[0] + c[1] * k.k1 + c[2] * k.k2; },
                          [c](WaveVector) { return WaveVector{c[1], c[2]}; }});
    }
    return std::make_unique<SheetBandProvider>(std::move(sheets), std::move(singular));
}

std::unique_ptr<SheetBandProvider> make_crossing_line_provider(double c, double offset) {
    std::vector<SheetBandProvider::Sheet> sheets{
        {[c](WaveVector k) { const double w = c + k.k1; return w * w; },
         [c](WaveVector k) { return WaveVector{2.0 * (c + k.k1), 0.0}; }},
        {[c, offset](WaveVector k) { const double w = c + offset + k.k2; return w * w; },
         [c, offset](WaveVector k) { return WaveVector{0.0, 2.0 * (c + offset + k.k2)}; }}};
    SingularSet s;
    s.lines.push_back({{offset, 0.0}, {1.0, 1.0}});
    return std::make_unique<SheetBandProvider>(std::move(sheets), std::move(s));
}

std::unique_ptr<SheetBandProvider> make_conical_provider(double c, WaveVector k0) {
    auto lower = [c, k0](WaveVector k) { const double w = c - norm(k - k0); return w * w; };
    auto upper = [c, k0](WaveVector k) { const double w = c + norm(k - k0); return w * w; };
    auto gLower = [c, k0](WaveVector k) {
        const double r = norm(k - k0);
        if (r == 0.0) return WaveVector{0.0, 0.0};
        return (-2.0 * (c - r) / r) * (k - k0);
    };
    auto gUpper = [c, k0](WaveVector k) {
        const double r = norm(k - k0);
        if (r == 0.0) return WaveVector{0.0, 0.0};
        return (2.0 * (c + r) / r) * (k - k0);
    };
    std::vector<SheetBandProvider::Sheet> sheets{{lower, gLower}, {upper, gUpper}};
    SingularSet s;
    s.points.push_back(k0);
    return std::make_unique<SheetBandProvider>(std::move(sheets), std::move(s));
}

std::unique_ptr<SheetBandProvider> make_smooth_provider() {
    std::vector<SheetBandProvider::Sheet> sheets{
        {[](WaveVector k) { return 2.0 + std::sin(0.7 * k.k1) * std::cos(0.5 * k.k2); },
         [](WaveVector k) {
             return WaveVector{0.7 * std::cos(0.7 * k.k1) * std::cos(0.5 * k.k2),
                               -0.5 * std::sin(0.7 * k.k1) * std::sin(0.5 * k.k2)};
         }},
        {[](WaveVector k) { return 12.0 + std::cos(0.6 * k.k1) * std::cos(0.4 * k.k2); },
         [](WaveVector k) {
             return WaveVector{-0.6 * std::sin(0.6 * k.k1) * std::cos(0.4 * k.k2),
                               -0.4 * std::cos(0.6 * k.k1) * std::sin(0.4 * k.k2)};
         }}};
    return std::make_unique<SheetBandProvider>(std::move(sheets), SingularSet{});
}

} // namespace bandrec
