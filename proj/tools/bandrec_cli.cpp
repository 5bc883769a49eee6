// Command-line harness: Fekete node generation, band-provider queries, hp
// runs, and convergence/baseline studies driven by a JSON config.

#include "bandrec/fem.hpp"
#include "bandrec/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

using namespace bandrec;
using nlohmann::json;

namespace {

struct RunConfig {
    AdaptConfig adapt;
    std::unique_ptr<BandProvider> provider;
    int grid = 100;
    int reportBands = 1;
    std::string outputDir = "out";
};

Triangle2 default_domain(Lattice lattice) {
    if (lattice == Lattice::Hexagonal)
        return {{0.0, 0.0}, {4.0 * M_PI / 3.0, 0.0}, {M_PI, M_PI / kSqrt3}};
    return {{0.0, 0.0}, {M_PI, 0.0}, {M_PI, M_PI}};
}

std::unique_ptr<BandProvider> make_provider(const json& p) {
    const std::string type = p.value("type", "crossing-line");
    if (type == "crossing-line")
        return make_crossing_line_provider(p.value("c", 1.0), p.value("offset", 1.0));
    if (type == "conical") {
        const auto k0 = p.value("k0", std::vector<double>{2.0, 1.0});
        return make_conical_provider(p.value("c", 6.0), {k0.at(0), k0.at(1)});
    }
    if (type == "smooth") return make_smooth_provider();
    if (type == "affine") {
        std::vector<std::array<double, 3>> rows;
        for (const auto& s : p.at("sheets")) rows.push_back({s.at(0), s.at(1), s.at(2)});
        return make_affine_provider(rows);
    }
    if (type == "fem") {
        UnitCellConfig cell;
        cell.lattice = p.value("lattice", "square") == "hexagonal" ? Lattice::Hexagonal : Lattice::Square;
        cell.mode = p.value("mode", "TE") == "TM" ? Mode::TM : Mode::TE;
        cell.epsilon = p.value("epsilon", 8.9);
        cell.inclusionRadiusRatio = p.value("inclusionRadiusRatio", 0.2);
        cell.cellMeshN = p.value("cellMeshN", 16);
        return fem_provider(cell, p.value("L", 6));
    }
    throw std::runtime_error("unknown provider type: " + type);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    json j;
    in >> j;

    RunConfig cfg;
    cfg.provider = make_provider(j.value("provider", json{{"type", "crossing-line"}}));
    cfg.adapt.L = j.value("L", cfg.provider->band_count());
    cfg.adapt.kappa = j.value("kappa", 2.0 * std::sqrt(2.0));
    cfg.adapt.mu = j.value("mu", 1.0);
    cfg.adapt.tol2 = j.value("tol2", 1e-6);
    cfg.adapt.nMax = j.value("nMax", 8);
    cfg.adapt.initialLevels = j.value("initialLevels", 2);
    cfg.adapt.maxDegree = j.value("maxDegree", 10);
    cfg.adapt.shapeBound = j.value("shapeBound", 40.0);

    if (j.contains("domain")) {
        const auto& d = j.at("domain");
        cfg.adapt.domain = {{d.at(0).at(0), d.at(0).at(1)},
                            {d.at(1).at(0), d.at(1).at(1)},
                            {d.at(2).at(0), d.at(2).at(1)}};
    } else {
        const std::string lattice = j.value("provider", json::object()).value("lattice", "square");
        cfg.adapt.domain = default_domain(lattice == "hexagonal" ? Lattice::Hexagonal : Lattice::Square);
    }

    cfg.grid = j.value("grid", 100);
    cfg.reportBands = j.value("reportBands", std::max(1, cfg.adapt.L - 2));
    cfg.reportBands = std::min(cfg.reportBands, cfg.adapt.L - 1);
    cfg.outputDir = j.value("outputDir", "out");
    cfg.adapt.validate();
    return cfg;
}

int cmd_fekete_compute(int degree, int seeds, const std::string& out) {
    FeketeTable table;
    const InteriorFeketeSet& set = table.recompute(degree, seeds);
    std::cout << "degree " << degree << ": " << set.nodes.size()
              << " interior nodes, log|det V| = " << set.logDetValue << "\n";
    if (!out.empty()) {
        for (int m = 3; m <= 10; ++m)
            if (m != degree) (void)table.get(m); // fill the rest before saving
        table.save(out);
        std::cout << "table written to " << out << "\n";
    }
    return 0;
}

int cmd_bands_eval(const RunConfig& cfg, double k1, double k2) {
    const WaveVector k{k1, k2};
    const auto lam = cfg.provider->lambda(k);
    const auto om = cfg.provider->omega(k);
    std::cout.precision(12);
    std::cout << "lambda:";
    for (double v : lam) std::cout << ' ' << v;
    std::cout << "\nomega: ";
    for (double v : om) std::cout << ' ' << v;
    std::cout << '\n';
    return 0;
}

int cmd_bands_sweep(const RunConfig& cfg, int gridG) {
    const ReferenceGrid grid = ReferenceGrid::make(cfg.adapt.domain, gridG);
    std::cout << "k1,k2";
    for (int q = 1; q <= cfg.provider->band_count(); ++q) std::cout << ",omega" << q;
    std::cout << '\n';
    std::cout.precision(12);
    for (const WaveVector& k : grid.points) {
        std::cout << k.k1 << ',' << k.k2;
        for (double w : cfg.provider->omega(k)) std::cout << ',' << w;
        std::cout << '\n';
    }
    return 0;
}

int cmd_hp_run(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.outputDir);
    FeketeTable table;

    const HpResult run = run_hp(*cfg.provider, cfg.adapt, table);
    export_loop_csv(run.log, cfg.outputDir + "/loops.csv");

    {
        std::ofstream mesh(cfg.outputDir + "/mesh_final.txt");
        run.mesh.dump(mesh);
    }
    std::set<int> marked;
    for (std::size_t i = 0; i < run.finalMark.rows.size(); ++i)
        if (run.finalMark.rows[i].below_tol1()) marked.insert(static_cast<int>(i));
    export_mesh_svg(run.mesh, marked, cfg.outputDir + "/mesh_final.svg");

    for (std::size_t j = 0; j < run.bands.size(); ++j) {
        std::ofstream dump(cfg.outputDir + "/band_" + std::to_string(j + 1) + ".interp");
        run.bands[j].dump(dump);
    }
    std::cout << "loops: " << run.log.size() << ", elements: " << run.mesh.element_count()
              << ", N = " << run.N << ", bands dumped: " << run.bands.size() << "\n"
              << "outputs under " << cfg.outputDir << "/\n";
    return 0;
}

int cmd_study_run(const RunConfig& cfg, const std::string& baseline) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.outputDir);
    FeketeTable table;
    const ReferenceGrid grid = ReferenceGrid::make(cfg.adapt.domain, cfg.grid);

    std::vector<StudyRow> rows;
    for (int l = 1; l <= cfg.adapt.nMax; ++l) {
        AdaptConfig c = cfg.adapt;
        c.nMax = l;
        const HpResult run = run_hp(*cfg.provider, c, table);
        const ErrorReport rep = error_report(run.bands, *cfg.provider, grid, run.N, cfg.reportBands);
        rows.push_back({l, run.N, rep.errorInf});

        std::set<int> marked;
        for (std::size_t i = 0; i < run.finalMark.rows.size(); ++i)
            if (run.finalMark.rows[i].below_tol1()) marked.insert(static_cast<int>(i));
        export_mesh_svg(run.mesh, marked, cfg.outputDir + "/mesh_loop_" + std::to_string(l) + ".svg");

        if (l == cfg.adapt.nMax) {
            for (int b = 1; b <= cfg.reportBands; ++b)
                export_band_errors_csv(rep, grid, b,
                                       cfg.outputDir + "/errors_band_" + std::to_string(b) + ".csv");
            export_error_svg(rep, grid, run.mesh, cfg.outputDir + "/errors.svg");
        }
    }
    export_csv(rows, cfg.outputDir + "/loops.csv");

    std::vector<std::vector<StudyRow>> series{rows};
    std::vector<std::string> labels{"adaptive"};
    if (!baseline.empty()) {
        const BaselineMode mode = baseline == "uniform-p" ? BaselineMode::UniformP : BaselineMode::UniformH;
        const auto base = baseline_study(*cfg.provider, cfg.adapt, mode, rows.back().N, cfg.grid,
                                         cfg.reportBands, table);
        export_csv(base, cfg.outputDir + "/baseline_" + baseline + ".csv");
        series.push_back(base);
        labels.push_back(baseline);
    }
    export_convergence_svg(series, labels, cfg.outputDir + "/convergence.svg");

    std::cout << "study rows: " << rows.size() << ", final N = " << rows.back().N
              << ", final errorInf = " << rows.back().errorInf
              << ", fitted slope = " << fit_loglog_slope(rows) << "\n"
              << "outputs under " << cfg.outputDir << "/\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hp-adaptive band-function reconstruction"};
    app.require_subcommand(1);

    auto* fekete = app.add_subcommand("fekete", "interior Fekete node tools");
    auto* feketeCompute = fekete->add_subcommand("compute", "optimize interior nodes for one degree");
    int degree = 6, seeds = 8;
    std::string tableOut;
    feketeCompute->add_option("--degree", degree, "total degree (3..10)")->required();
    feketeCompute->add_option("--seeds", seeds, "multistart seed count");
    feketeCompute->add_option("--out", tableOut, "write the full node table to this path");

    auto* bands = app.add_subcommand("bands", "band-provider queries");
    std::string bandsConfig;
    bands->add_option("--config", bandsConfig, "JSON config with a provider block")->required();
    auto* bandsEval = bands->add_subcommand("eval", "print lambda and omega at one wave vector");
    std::vector<double> kflag;
    bandsEval->add_option("--k", kflag, "wave vector components")->expected(2)->required();
    auto* bandsSweep = bands->add_subcommand("sweep", "CSV of omega over a reference grid");
    int sweepGrid = 40;
    bandsSweep->add_option("--grid", sweepGrid, "triangular grid side count");

    auto* hp = app.add_subcommand("hp", "adaptive interpolation runs");
    auto* hpRun = hp->add_subcommand("run", "run the refinement loop and dump interpolants");
    std::string hpConfig;
    hpRun->add_option("--config", hpConfig, "JSON config file")->required();

    auto* study = app.add_subcommand("study", "convergence studies");
    auto* studyRun = study->add_subcommand("run", "per-loop error study with optional baseline");
    std::string studyConfig, baseline;
    studyRun->add_option("--config", studyConfig, "JSON config file")->required();
    studyRun->add_option("--baseline", baseline, "uniform-h or uniform-p")
        ->check(CLI::IsMember({"uniform-h", "uniform-p"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (feketeCompute->parsed()) return cmd_fekete_compute(degree, seeds, tableOut);
        if (bandsEval->parsed()) return cmd_bands_eval(load_config(bandsConfig), kflag[0], kflag[1]);
        if (bandsSweep->parsed()) return cmd_bands_sweep(load_config(bandsConfig), sweepGrid);
        if (hpRun->parsed()) return cmd_hp_run(load_config(hpConfig));
        if (studyRun->parsed()) return cmd_study_run(load_config(studyConfig), baseline);
        std::cerr << "missing subcommand\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
