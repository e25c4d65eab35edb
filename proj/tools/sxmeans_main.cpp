// Command-line front end: generate synthetic mixtures, estimate the
// cluster count of a CSV dataset, run benchmark suites, and re-render
// result tables. All randomness flows from --seed / --base-seed.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sxm/bench.hpp"
#include "sxm/csv.hpp"
#include "sxm/report_io.hpp"
#include "sxm/sxmeans.hpp"
#include "sxm/xmeans.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

sxm::Component parse_component(const std::string& text, std::size_t dim) {
    std::vector<std::string> cells = sxm::detail::split_csv_line(text);
    if (cells.size() != 2 && cells.size() != 2 + dim) {
        throw UsageError("--component expects 'n,kappa' or 'n,kappa,mu...' with " +
                         std::to_string(dim) + " mean coordinates: got '" + text + "'");
    }
    sxm::Component component;
    try {
        const long long n = std::stoll(cells[0]);
        if (n < 1) throw UsageError("--component needs n >= 1, got " + cells[0]);
        component.n = static_cast<std::size_t>(n);
        component.kappa = std::stod(cells[1]);
    } catch (const UsageError&) {
        throw;
    } catch (...) {
        throw UsageError("--component could not parse '" + text + "'");
    }
    if (!(component.kappa >= 0.0)) {
        throw UsageError("--component needs kappa >= 0, got " + cells[1]);
    }
    if (cells.size() == 2 + dim) {
        std::vector<double> mu(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            try {
                mu[i] = std::stod(cells[2 + i]);
            } catch (...) {
                throw UsageError("--component mean coordinate '" + cells[2 + i] +
                                 "' is not numeric");
            }
        }
        component.mu = std::move(mu);
    }
    return component;
}

std::string method_slug(const sxm::MethodSpec& method) {
    switch (method.kind) {
        case sxm::MethodSpec::Kind::sx:
            return "sx";
        case sxm::MethodSpec::Kind::fixed: {
            char buffer[64];
            std::snprintf(buffer, sizeof buffer, "fixed%g", method.kappa);
            return buffer;
        }
        case sxm::MethodSpec::Kind::xmeans:
            return "xmeans";
    }
    return "unknown";
}

int run_gen(std::size_t dim, std::uint64_t seed, const std::vector<std::string>& component_flags,
            const std::string& out_path, const std::string& labels_path) {
    if (dim < 2) throw UsageError("gen: --dim must be at least 2");
    if (component_flags.empty()) throw UsageError("gen: at least one --component is required");
    sxm::SyntheticSpec spec;
    spec.d = dim;
    spec.seed = seed;
    for (const auto& text : component_flags) spec.components.push_back(parse_component(text, dim));

    const sxm::LabeledPoints data = sxm::generate(spec);
    sxm::write_points_csv(out_path, data.points);
    sxm::write_labels_csv(labels_path, data.labels);

    sxm::DatasetRecord record;
    record.name = "synthetic";
    record.n = data.points.size();
    record.d = dim;
    record.true_k = spec.components.size();
    record.centered = false;
    record.normalized = true;
    std::cout << sxm::dump_json(sxm::to_json(record));
    return kExitOk;
}

int run_estimate(const std::string& input, const std::string& mode, std::optional<double> kappa,
                 bool center, bool normalize, std::uint64_t seed, std::size_t initial_k,
                 const std::optional<std::string>& label_column, const std::string& out_path) {
    if (mode == "fixed" && !kappa) throw UsageError("estimate: --mode fixed requires --kappa");
    if (mode == "fixed" && !(*kappa > 0.0)) throw UsageError("estimate: --kappa must be positive");
    if (initial_k < 1) throw UsageError("estimate: --initial-k must be at least 1");

    sxm::IngestOptions options;
    options.center = center;
    options.normalize = normalize;
    options.label_column = label_column;
    if (mode == "xmeans" && normalize) {
        std::cerr << "warning: --normalize is ignored for --mode xmeans\n";
        options.normalize = false;
    }
    const sxm::IngestResult ingest = sxm::ingest_csv(input, options);
    if (ingest.dropped_rows > 0) {
        std::cerr << "warning: dropped " << ingest.dropped_rows
                  << " zero rows before normalization\n";
    }

    sxm::ordered_json report_json;
    std::size_t k = 0;
    if (mode == "xmeans") {
        sxm::XMeansConfig config;
        config.seed = seed;
        config.initial_k = initial_k;
        const sxm::XMeansReport report = sxm::xmeans_baseline(ingest.raw, config);
        report_json = sxm::to_json(report);
        k = report.k;
    } else {
        sxm::PointSet points(ingest.raw.dim);
        if (ingest.points) {
            points = *ingest.points;
        } else {
            // Inputs that are not explicitly normalized are renormalized
            // onto the sphere on ingestion.
            for (std::size_t i = 0; i < ingest.raw.size(); ++i) {
                points.add_normalized(ingest.raw[i]);
            }
        }
        sxm::SxConfig config;
        config.seed = seed;
        config.initial_k = initial_k;
        const sxm::EstimationReport report = mode == "fixed"
                                                 ? sxm::fit_fixed(points, *kappa, config)
                                                 : sxm::estimate(points, config);
        report_json = sxm::to_json(report);
        k = report.k;
    }
    sxm::write_text_file(out_path, sxm::dump_json(report_json));
    std::cout << "k = " << k << "\n";
    return kExitOk;
}

struct Cell {
    std::string row;
    sxm::BenchResult result;
};

void write_cell(const fs::path& out_dir, const std::string& suite, const Cell& cell,
                const std::string& slug) {
    sxm::ordered_json j = sxm::to_json(cell.result);
    j["row"] = cell.row;
    sxm::write_text_file((out_dir / (suite + "_" + cell.row + "_" + slug + ".json")).string(),
                         sxm::dump_json(j));
}

void write_suite_outputs(const fs::path& out_dir, const std::string& suite,
                         const std::string& row_header, const std::vector<std::string>& rows,
                         const std::vector<std::string>& method_names,
                         const std::vector<Cell>& cells) {
    std::map<std::pair<std::string, std::string>, sxm::BenchResult> grid;
    std::vector<sxm::BenchResult> flat;
    std::vector<std::string> flat_rows;
    for (const auto& cell : cells) {
        grid[{cell.row, cell.result.method}] = cell.result;
        flat.push_back(cell.result);
        flat_rows.push_back(cell.row);
    }
    sxm::write_text_file((out_dir / (suite + ".md")).string(),
                         sxm::markdown_table(row_header, rows, method_names, grid));
    sxm::write_text_file((out_dir / (suite + "_runs.csv")).string(),
                         sxm::runs_csv(flat, flat_rows));
}

std::vector<sxm::MethodSpec> parse_methods(const std::string& methods_flag) {
    std::vector<sxm::MethodSpec> methods;
    for (const auto& name : sxm::detail::split_csv_line(methods_flag)) {
        methods.push_back(sxm::parse_method(name));
    }
    if (methods.empty()) throw UsageError("bench: no methods given");
    return methods;
}

int run_bench_table3(const fs::path& out_dir, std::size_t runs, std::uint64_t base_seed,
                     std::size_t k_min, std::size_t k_max, std::size_t points_per_cluster,
                     double data_kappa, std::size_t dim, const std::string& methods_flag,
                     std::size_t max_k) {
    const std::vector<sxm::MethodSpec> methods = parse_methods(methods_flag);
    std::vector<Cell> cells;
    std::vector<std::string> rows;
    std::vector<std::string> method_names;
    for (const auto& m : methods) method_names.push_back(sxm::format_method(m));
    for (std::size_t k = k_min; k <= k_max; ++k) {
        rows.push_back(std::to_string(k));
        const sxm::BenchSource source =
            sxm::synthetic_source(k, points_per_cluster, data_kappa, dim);
        for (const auto& method : methods) {
            Cell cell{std::to_string(k),
                      sxm::run_benchmark(method, source, k, runs, base_seed, max_k)};
            write_cell(out_dir, "table3", cell, method_slug(method));
            std::cerr << "table3 k=" << k << " " << cell.result.method << ": "
                      << sxm::format_cell(cell.result) << "\n";
            cells.push_back(std::move(cell));
        }
    }
    write_suite_outputs(out_dir, "table3", "true k", rows, method_names, cells);
    return kExitOk;
}

int run_bench_table5(const fs::path& out_dir, std::size_t runs, std::uint64_t base_seed,
                     const std::string& datasets_dir, const std::string& methods_flag,
                     std::size_t max_k) {
    const std::vector<sxm::MethodSpec> methods = parse_methods(methods_flag);
    std::vector<std::string> method_names;
    for (const auto& m : methods) method_names.push_back(sxm::format_method(m));

    // Catalogued datasets with their reference cluster counts.
    const std::vector<std::pair<std::string, std::size_t>> catalog = {
        {"blobs", 3}, {"iris", 3},  {"wine", 3},  {"ecoli", 8},
        {"yeast", 10}, {"mnist", 10}, {"cnae9", 9},
    };

    std::vector<Cell> cells;
    std::vector<std::string> rows;
    for (const auto& [name, true_k] : catalog) {
        rows.push_back(name);
        sxm::BenchSource spherical_source;
        sxm::BenchSource raw_source;
        bool available = false;
        if (name == "blobs") {
            auto [raw, labels] = sxm::make_blobs(base_seed);
            // Zero-mean the generated rows, then build the normalized view.
            std::vector<double> mean(raw.dim, 0.0);
            for (std::size_t i = 0; i < raw.size(); ++i) {
                for (std::size_t c = 0; c < raw.dim; ++c) mean[c] += raw[i][c];
            }
            for (double& m : mean) m /= static_cast<double>(raw.size());
            sxm::Matrix centered(raw.dim);
            sxm::PointSet points(raw.dim);
            std::vector<double> row(raw.dim);
            for (std::size_t i = 0; i < raw.size(); ++i) {
                for (std::size_t c = 0; c < raw.dim; ++c) row[c] = raw[i][c] - mean[c];
                centered.add(row);
                points.add_normalized(row);
            }
            raw_source.raw_rows = std::move(centered);
            spherical_source.sphere_points = std::move(points);
            available = true;
        } else {
            const fs::path csv_path = fs::path(datasets_dir) / (name + ".csv");
            if (fs::exists(csv_path)) {
                sxm::IngestOptions spherical_options;
                spherical_options.center = true;
                spherical_options.normalize = true;
                sxm::IngestOptions raw_options;
                raw_options.center = true;
                // Prefer a "label" column when the file carries one.
                try {
                    sxm::IngestOptions probe = spherical_options;
                    probe.label_column = "label";
                    spherical_source.sphere_points =
                        sxm::ingest_csv(csv_path.string(), probe).points;
                    raw_options.label_column = "label";
                } catch (const sxm::ParseError&) {
                    spherical_source.sphere_points =
                        sxm::ingest_csv(csv_path.string(), spherical_options).points;
                }
                raw_source.raw_rows = sxm::ingest_csv(csv_path.string(), raw_options).raw;
                available = true;
            } else {
                std::cerr << "table5 " << name << ": missing (" << csv_path.string() << ")\n";
            }
        }
        if (!available) continue;
        for (const auto& method : methods) {
            const sxm::BenchSource& source =
                method.kind == sxm::MethodSpec::Kind::xmeans ? raw_source : spherical_source;
            Cell cell{name, sxm::run_benchmark(method, source, true_k, runs, base_seed, max_k)};
            write_cell(out_dir, "table5", cell, method_slug(method));
            std::cerr << "table5 " << name << " " << cell.result.method << ": "
                      << sxm::format_cell(cell.result) << "\n";
            cells.push_back(std::move(cell));
        }
    }
    write_suite_outputs(out_dir, "table5", "dataset", rows, method_names, cells);
    return kExitOk;
}

int run_bench_custom(const fs::path& out_dir, std::size_t runs, std::uint64_t base_seed,
                     const std::optional<std::string>& csv,
                     const std::optional<std::string>& label_column, std::size_t true_k,
                     std::size_t points_per_cluster, double data_kappa, std::size_t dim,
                     const std::string& methods_flag, std::size_t max_k) {
    const std::vector<sxm::MethodSpec> methods = parse_methods(methods_flag);
    std::vector<std::string> method_names;
    for (const auto& m : methods) method_names.push_back(sxm::format_method(m));

    sxm::BenchSource spherical_source;
    sxm::BenchSource raw_source;
    std::string row;
    if (csv) {
        sxm::IngestOptions spherical_options;
        spherical_options.center = true;
        spherical_options.normalize = true;
        spherical_options.label_column = label_column;
        const sxm::IngestResult spherical = sxm::ingest_csv(*csv, spherical_options);
        spherical_source.sphere_points = spherical.points;
        sxm::IngestOptions raw_options;
        raw_options.center = true;
        raw_options.label_column = label_column;
        raw_source.raw_rows = sxm::ingest_csv(*csv, raw_options).raw;
        row = spherical.record.name;
        if (true_k == 0) true_k = spherical.record.true_k;
    } else {
        if (true_k == 0) throw UsageError("bench custom: --true-k is required without --csv");
        spherical_source = sxm::synthetic_source(true_k, points_per_cluster, data_kappa, dim);
        raw_source = spherical_source;
        row = std::to_string(true_k);
    }

    std::vector<Cell> cells;
    for (const auto& method : methods) {
        const sxm::BenchSource& source =
            method.kind == sxm::MethodSpec::Kind::xmeans ? raw_source : spherical_source;
        Cell cell{row, sxm::run_benchmark(method, source, true_k, runs, base_seed, max_k)};
        write_cell(out_dir, "custom", cell, method_slug(method));
        std::cerr << "custom " << row << " " << cell.result.method << ": "
                  << sxm::format_cell(cell.result) << "\n";
        cells.push_back(std::move(cell));
    }
    write_suite_outputs(out_dir, "custom", "data", {row}, method_names, cells);
    return kExitOk;
}

int run_report(const std::string& in_dir, const std::optional<std::string>& out_path) {
    std::map<std::pair<std::string, std::string>, sxm::BenchResult> grid;
    std::vector<std::string> rows;
    std::vector<std::string> methods;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(in_dir)) {
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        std::ifstream in(path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (...) {
            continue;
        }
        if (!j.contains("method") || !j.contains("mean_k") || !j.contains("row")) continue;
        sxm::BenchResult result;
        result.method = j["method"].get<std::string>();
        result.true_k = j["true_k"].get<std::size_t>();
        result.runs = j["runs"].get<std::size_t>();
        result.mean_k = j["mean_k"].get<double>();
        result.sd_k = j["sd_k"].get<double>();
        const std::string row = j["row"].get<std::string>();
        grid[{row, result.method}] = result;
        if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
        if (std::find(methods.begin(), methods.end(), result.method) == methods.end()) {
            methods.push_back(result.method);
        }
    }
    if (grid.empty()) throw UsageError("report: no benchmark cells found in " + in_dir);

    // Numeric rows sort numerically, names alphabetically after them.
    std::sort(rows.begin(), rows.end(), [](const std::string& a, const std::string& b) {
        const bool na = !a.empty() && std::isdigit(static_cast<unsigned char>(a[0]));
        const bool nb = !b.empty() && std::isdigit(static_cast<unsigned char>(b[0]));
        if (na != nb) return na;
        if (na && nb) return std::stol(a) < std::stol(b);
        return a < b;
    });
    const std::vector<std::string> canonical = {"sx", "fixed(10)", "fixed(40)", "xmeans"};
    std::stable_sort(methods.begin(), methods.end(),
                     [&](const std::string& a, const std::string& b) {
                         const auto ia = std::find(canonical.begin(), canonical.end(), a);
                         const auto ib = std::find(canonical.begin(), canonical.end(), b);
                         return ia - canonical.begin() < ib - canonical.begin();
                     });
    const std::string table = sxm::markdown_table("row", rows, methods, grid);
    if (out_path) {
        sxm::write_text_file(*out_path, table);
    } else {
        std::cout << table;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cluster-count estimation for data on the unit sphere"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a synthetic mixture as CSV");
    std::size_t gen_dim = 3;
    std::uint64_t gen_seed = 0;
    std::vector<std::string> gen_components;
    std::string gen_out = "points.csv";
    std::string gen_labels = "labels.csv";
    gen->add_option("--dim", gen_dim, "Ambient dimension (>= 2)");
    gen->add_option("--seed", gen_seed, "Random seed");
    gen->add_option("--component", gen_components,
                    "Component as 'n,kappa' or 'n,kappa,mu...' (repeatable)");
    gen->add_option("--out", gen_out, "Points CSV path");
    gen->add_option("--labels-out", gen_labels, "Labels CSV path");

    // estimate
    auto* est = app.add_subcommand("estimate", "Estimate the cluster count of a CSV dataset");
    std::string est_input;
    std::string est_mode = "sx";
    std::optional<double> est_kappa;
    bool est_center = false;
    bool est_normalize = false;
    std::uint64_t est_seed = 0;
    std::size_t est_initial_k = 2;
    std::optional<std::string> est_label_column;
    std::string est_out = "report.json";
    est->add_option("input", est_input, "Input CSV")->required();
    est->add_option("--mode", est_mode, "sx | fixed | xmeans")
        ->check(CLI::IsMember({"sx", "fixed", "xmeans"}));
    double est_kappa_value = 0.0;
    auto* kappa_opt = est->add_option("--kappa", est_kappa_value, "Concentration for --mode fixed");
    est->add_flag("--center", est_center, "Zero-mean the columns before anything else");
    est->add_flag("--normalize", est_normalize, "Normalize every row onto the sphere");
    est->add_option("--seed", est_seed, "Random seed");
    est->add_option("--initial-k", est_initial_k, "Starting cluster count");
    std::string est_label_value;
    auto* label_opt = est->add_option("--label-column", est_label_value,
                                      "Label column (header name or 0-based index) to strip");
    est->add_option("--out", est_out, "Report JSON path");

    // bench
    auto* bench = app.add_subcommand("bench", "Run a benchmark suite");
    std::string bench_suite;
    std::size_t bench_runs = 20;
    std::uint64_t bench_base_seed = 0;
    std::string bench_out_dir = "bench_out";
    std::string bench_datasets_dir = "data";
    std::size_t bench_k_min = 2, bench_k_max = 12;
    std::size_t bench_points = 500;
    double bench_kappa = 100.0;
    std::size_t bench_dim = 3;
    std::string bench_methods = "sx,fixed10,fixed40,xmeans";
    std::size_t bench_max_k = 0;
    std::optional<std::string> bench_csv;
    std::string bench_csv_value;
    std::optional<std::string> bench_label_column;
    std::string bench_label_value;
    std::size_t bench_true_k = 0;
    bench->add_option("--suite", bench_suite, "table3 | table5 | custom")
        ->required()
        ->check(CLI::IsMember({"table3", "table5", "custom"}));
    bench->add_option("--runs", bench_runs, "Runs per cell");
    bench->add_option("--base-seed", bench_base_seed, "First run seed");
    bench->add_option("--out-dir", bench_out_dir, "Output directory");
    bench->add_option("--datasets-dir", bench_datasets_dir, "Directory of <name>.csv datasets");
    bench->add_option("--k-min", bench_k_min, "Smallest true k (table3)");
    bench->add_option("--k-max", bench_k_max, "Largest true k (table3)");
    bench->add_option("--points-per-cluster", bench_points, "Points per component");
    bench->add_option("--data-kappa", bench_kappa, "Component concentration");
    bench->add_option("--dim", bench_dim, "Ambient dimension");
    bench->add_option("--methods", bench_methods, "Comma list: sx, fixed<k>, xmeans");
    bench->add_option("--max-k", bench_max_k,
                      "Growth cap per run (0 = N/2; tames runaway xmeans cells)");
    auto* bench_csv_opt = bench->add_option("--csv", bench_csv_value, "Dataset CSV (custom)");
    auto* bench_label_opt =
        bench->add_option("--label-column", bench_label_value, "Label column (custom)");
    bench->add_option("--true-k", bench_true_k, "Reference k (custom)");

    // report
    auto* report = app.add_subcommand("report", "Render benchmark JSON cells as Markdown");
    std::string report_in_dir;
    std::optional<std::string> report_out;
    std::string report_out_value;
    report->add_option("--in-dir", report_in_dir, "Directory of benchmark cell JSON files")
        ->required();
    auto* report_out_opt = report->add_option("--out", report_out_value, "Output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    if (kappa_opt->count() > 0) est_kappa = est_kappa_value;
    if (label_opt->count() > 0) est_label_column = est_label_value;
    if (bench_csv_opt->count() > 0) bench_csv = bench_csv_value;
    if (bench_label_opt->count() > 0) bench_label_column = bench_label_value;
    if (report_out_opt->count() > 0) report_out = report_out_value;

    try {
        if (gen->parsed()) {
            return run_gen(gen_dim, gen_seed, gen_components, gen_out, gen_labels);
        }
        if (est->parsed()) {
            return run_estimate(est_input, est_mode, est_kappa, est_center, est_normalize,
                                est_seed, est_initial_k, est_label_column, est_out);
        }
        if (bench->parsed()) {
            fs::create_directories(bench_out_dir);
            if (bench_suite == "table3") {
                return run_bench_table3(bench_out_dir, bench_runs, bench_base_seed, bench_k_min,
                                        bench_k_max, bench_points, bench_kappa, bench_dim,
                                        bench_methods, bench_max_k);
            }
            if (bench_suite == "table5") {
                return run_bench_table5(bench_out_dir, bench_runs, bench_base_seed,
                                        bench_datasets_dir, bench_methods, bench_max_k);
            }
            return run_bench_custom(bench_out_dir, bench_runs, bench_base_seed, bench_csv,
                                    bench_label_column, bench_true_k, bench_points, bench_kappa,
                                    bench_dim, bench_methods, bench_max_k);
        }
        if (report->parsed()) {
            return run_report(report_in_dir, report_out);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const sxm::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const sxm::AllRowsDegenerate& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const sxm::TooFewPoints& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const sxm::ZeroVector& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const sxm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInternal;
}
