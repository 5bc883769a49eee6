#include "bandrec/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace bandrec {

ReferenceGrid ReferenceGrid::make(const Triangle2& domain, int G) {
    if (G < 2) throw std::invalid_argument("ReferenceGrid: G must be >= 2");
    ReferenceGrid grid;
    grid.points.reserve(static_cast<std::size_t>(G) * (G + 1) / 2);
    for (int i = 0; i < G; ++i) {
        for (int j = 0; j < G - i; ++j) {
            const double s = static_cast<double>(i) / (G - 1);
            const double t = static_cast<double>(j) / (G - 1);
            grid.points.push_back(domain.a + s * (domain.b - domain.a) + t * (domain.c - domain.a));
        }
    }
    return grid;
}

ErrorReport error_report(const std::vector<GlobalInterpolant>& interpolants, const BandProvider& provider,
                         const ReferenceGrid& grid, long N, int reportBands) {
    if (interpolants.empty()) throw std::invalid_argument("error_report: no interpolants");
    if (reportBands < 1 || reportBands > static_cast<int>(interpolants.size()))
        throw std::invalid_argument("error_report: reportBands out of range");

    ErrorReport rep;
    rep.N = N;
    rep.e.assign(static_cast<std::size_t>(reportBands),
                 std::vector<double>(grid.points.size(), std::numeric_limits<double>::quiet_NaN()));

    std::vector<std::vector<double>> refOmega(grid.points.size());
    for (std::size_t p = 0; p < grid.points.size(); ++p) refOmega[p] = provider.omega(grid.points[p]);

    rep.errorInf = 0.0;
    for (int band = 1; band <= reportBands; ++band) {
        const GlobalInterpolant& gi = interpolants[static_cast<std::size_t>(band - 1)];
        for (std::size_t p = 0; p < grid.points.size(); ++p) {
            const double ref = refOmega[p][static_cast<std::size_t>(band - 1)];
            if (std::abs(ref) < 1e-12) continue; // excluded denominator
            const double approx = gi.band_value(grid.points[p]);
            const double err = std::abs(ref - approx) / ref;
            rep.e[static_cast<std::size_t>(band - 1)][p] = err;
            if (err > rep.errorInf) {
                rep.errorInf = err;
                rep.argmaxBand = band;
                rep.argmaxPoint = static_cast<int>(p);
                rep.argmaxLocation = grid.points[p];
            }
        }
    }
    if (rep.argmaxPoint >= 0)
        rep.argmaxElement = interpolants[0].mesh().locate(rep.argmaxLocation);
    return rep;
}

std::vector<StudyRow> convergence_study(const BandProvider& provider, const AdaptConfig& config, int loops,
                                        int gridG, int reportBands, const FeketeTable& table) {
    if (loops > config.nMax) throw std::invalid_argument("convergence_study: loops > nMax");
    const ReferenceGrid grid = ReferenceGrid::make(config.domain, gridG);
    std::vector<StudyRow> rows;
    for (int l = 1; l <= loops; ++l) {
        AdaptConfig c = config;
        c.nMax = l;
        const HpResult run = run_hp(provider, c, table);
        const ErrorReport rep = error_report(run.bands, provider, grid, run.N, reportBands);
        rows.push_back({l, run.N, rep.errorInf});
    }
    return rows;
}

std::array<double, 3> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("linear_fit: need >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double nn = static_cast<double>(n);
    const double b = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    const double a = (sy - b * sx) / nn;
    double ssRes = 0, ssTot = 0;
    const double ybar = sy / nn;
    for (std::size_t i = 0; i < n; ++i) {
        const double fit = a + b * x[i];
        ssRes += (y[i] - fit) * (y[i] - fit);
        ssTot += (y[i] - ybar) * (y[i] - ybar);
    }
    const double r2 = ssTot > 0 ? 1.0 - ssRes / ssTot : 1.0;
    return {a, b, r2};
}

double fit_loglog_slope(const std::vector<StudyRow>& rows, int tail) {
    if (static_cast<int>(rows.size()) < 2) throw std::invalid_argument("fit_loglog_slope: need >= 2 rows");
    const std::size_t from = rows.size() > static_cast<std::size_t>(tail) ? rows.size() - static_cast<std::size_t>(tail) : 0;
    std::vector<double> x, y;
    for (std::size_t i = from; i < rows.size(); ++i) {
        x.push_back(std::log(static_cast<double>(rows[i].N)));
        y.push_back(std::log(rows[i].errorInf));
    }
    return linear_fit(x, y)[1];
}

std::vector<StudyRow> baseline_study(const BandProvider& provider, const AdaptConfig& config,
                                     BaselineMode mode, long budgetN, int gridG, int reportBands,
                                     const FeketeTable& table) {
    const ReferenceGrid grid = ReferenceGrid::make(config.domain, gridG);
    std::vector<StudyRow> rows;

    auto eval_run = [&](const ParamMesh& mesh, int degree, int step) {
        ConformingDegrees deg;
        deg.elementDegree.assign(static_cast<std::size_t>(mesh.element_count()), degree);
        for (const auto& [key, elems] : mesh.face_adjacency()) deg.faceDegree[key] = degree;
        const long N = deg.dimension(mesh);
        std::vector<GlobalInterpolant> bands;
        for (int j = 1; j <= provider.band_count() - 1; ++j)
            bands.push_back(global_interpolate(provider, mesh, deg, j, table));
        const ErrorReport rep = error_report(bands, provider, grid, N, reportBands);
        rows.push_back({step, N, rep.errorInf});
        return N;
    };

    if (mode == BaselineMode::UniformH) {
        for (int level = 0;; ++level) {
            const ParamMesh mesh = ParamMesh::uniform(config.domain, level);
            const long N = eval_run(mesh, 2, level + 1);
            if (N > budgetN || level >= 9) break;
        }
    } else {
        const ParamMesh mesh = ParamMesh::uniform(config.domain, std::max(0, config.initialLevels - 1));
        for (int p = 2; p <= config.maxDegree; ++p) {
            const long N = eval_run(mesh, p, p - 1);
            if (N > budgetN) break;
        }
    }
    return rows;
}

void export_csv(const std::vector<StudyRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_csv: cannot write " + path);
    out << "loop,N,errorInf\n";
    out.precision(17);
    for (const StudyRow& r : rows) out << r.loop << ',' << r.N << ',' << r.errorInf << '\n';
}

void export_loop_csv(const std::vector<LoopRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_loop_csv: cannot write " + path);
    out << "loop,nElems,nMarked,hMin,N\n";
    out.precision(17);
    for (const LoopRow& r : rows)
        out << r.loop << ',' << r.nElems << ',' << r.nMarked << ',' << r.hMin << ',' << r.N << '\n';
}

void export_band_errors_csv(const ErrorReport& report, const ReferenceGrid& grid, int band,
                            const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_band_errors_csv: cannot write " + path);
    out << "k1,k2,e\n";
    out.precision(17);
    const auto& e = report.e.at(static_cast<std::size_t>(band - 1));
    for (std::size_t p = 0; p < grid.points.size(); ++p) {
        if (std::isnan(e[p])) continue;
        out << grid.points[p].k1 << ',' << grid.points[p].k2 << ',' << e[p] << '\n';
    }
}

void export_mesh_svg(const ParamMesh& mesh, const std::set<int>& marked, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_mesh_svg: cannot write " + path);
    mesh.write_svg(out, &marked);
}

void export_error_svg(const ErrorReport& report, const ReferenceGrid& grid, const ParamMesh& mesh,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_error_svg: cannot write " + path);

    double loX = grid.points[0].k1, hiX = loX, loY = grid.points[0].k2, hiY = loY;
    for (const WaveVector& p : grid.points) {
        loX = std::min(loX, p.k1);
        hiX = std::max(hiX, p.k1);
        loY = std::min(loY, p.k2);
        hiY = std::max(hiY, p.k2);
    }
    const double scale = 560.0 / std::max(hiX - loX, hiY - loY);
    auto X = [&](double x) { return 20.0 + (x - loX) * scale; };
    auto Y = [&](double y) { return 580.0 - (y - loY) * scale; };

    // worst error over bands per point, log color ramp
    std::vector<double> worst(grid.points.size(), std::numeric_limits<double>::quiet_NaN());
    for (const auto& band : report.e)
        for (std::size_t p = 0; p < band.size(); ++p)
            if (!std::isnan(band[p]) && (std::isnan(worst[p]) || band[p] > worst[p])) worst[p] = band[p];

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" viewBox=\"0 0 600 600\">\n";
    for (const Element& e : mesh.elements()) {
        out << "<polygon points=\"";
        for (int i = 0; i < 3; ++i) {
            const WaveVector p = mesh.vertex(e.vertexIds[static_cast<std::size_t>(i)]).position;
            out << X(p.k1) << ',' << Y(p.k2) << (i < 2 ? " " : "");
        }
        out << "\" fill=\"none\" stroke=\"#bbb\" stroke-width=\"0.4\"/>\n";
    }
    for (std::size_t p = 0; p < grid.points.size(); ++p) {
        if (std::isnan(worst[p])) continue;
        const double l = std::clamp((std::log10(std::max(worst[p], 1e-16)) + 16.0) / 16.0, 0.0, 1.0);
        const int r = static_cast<int>(255.0 * l);
        const int b = static_cast<int>(255.0 * (1.0 - l));
        out << "<circle cx=\"" << X(grid.points[p].k1) << "\" cy=\"" << Y(grid.points[p].k2)
            << "\" r=\"2\" fill=\"rgb(" << r << ",40," << b << ")\"/>\n";
    }
    out << "</svg>\n";
}

void export_convergence_svg(const std::vector<std::vector<StudyRow>>& series,
                            const std::vector<std::string>& labels, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_convergence_svg: cannot write " + path);

    double loX = 1e300, hiX = -1e300, loY = 1e300, hiY = -1e300;
    for (const auto& s : series)
        for (const StudyRow& r : s) {
            if (r.errorInf <= 0.0) continue;
            loX = std::min(loX, std::log10(static_cast<double>(r.N)));
            hiX = std::max(hiX, std::log10(static_cast<double>(r.N)));
            loY = std::min(loY, std::log10(r.errorInf));
            hiY = std::max(hiY, std::log10(r.errorInf));
        }
    if (loX > hiX) {
        loX = 0;
        hiX = 1;
        loY = -1;
        hiY = 0;
    }
    const double padX = 0.05 * (hiX - loX + 1e-9), padY = 0.05 * (hiY - loY + 1e-9);
    loX -= padX;
    hiX += padX;
    loY -= padY;
    hiY += padY;
    auto X = [&](double v) { return 60.0 + (v - loX) / (hiX - loX) * 500.0; };
    auto Y = [&](double v) { return 560.0 - (v - loY) / (hiY - loY) * 520.0; };

    const std::array<std::string, 4> colors{"#2266cc", "#cc4422", "#22aa55", "#aa22aa"};
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"620\" viewBox=\"0 0 640 620\">\n";
    out << "<rect x=\"60\" y=\"40\" width=\"500\" height=\"520\" fill=\"none\" stroke=\"#333\"/>\n";
    out << "<text x=\"300\" y=\"600\" font-size=\"13\">log10 N</text>\n";
    out << "<text x=\"8\" y=\"300\" font-size=\"13\" transform=\"rotate(-90 14 300)\">log10 error</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const std::string& col = colors[s % colors.size()];
        out << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
        for (const StudyRow& r : series[s]) {
            if (r.errorInf <= 0.0) continue;
            out << X(std::log10(static_cast<double>(r.N))) << ',' << Y(std::log10(r.errorInf)) << ' ';
        }
        out << "\"/>\n";
        for (const StudyRow& r : series[s]) {
            if (r.errorInf <= 0.0) continue;
            out << "<circle cx=\"" << X(std::log10(static_cast<double>(r.N))) << "\" cy=\""
                << Y(std::log10(r.errorInf)) << "\" r=\"3\" fill=\"" << col << "\"/>\n";
        }
        if (s < labels.size())
            out << "<text x=\"70\" y=\"" << 60 + 18 * s << "\" font-size=\"13\" fill=\"" << col << "\">"
                << labels[s] << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace bandrec
