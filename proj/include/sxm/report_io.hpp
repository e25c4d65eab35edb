#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sxm/bench.hpp"
#include "sxm/csv.hpp"
#include "sxm/model_selection.hpp"
#include "sxm/sxmeans.hpp"
#include "sxm/xmeans.hpp"

namespace sxm {

using ordered_json = nlohmann::ordered_json;

inline ordered_json to_json(const BicScore& score) {
    return ordered_json{{"log_likelihood", score.log_likelihood},
                        {"param_count", score.param_count},
                        {"n", score.n},
                        {"value", score.value}};
}

inline ordered_json to_json(const VmfParams& params) {
    return ordered_json{{"mu", params.mu.vec()}, {"kappa", params.kappa}};
}

inline ordered_json to_json(const SplitDecision& decision) {
    ordered_json j{{"cluster_id", decision.cluster_id},
                   {"accepted", decision.accepted},
                   {"pre", to_json(decision.pre)}};
    j["post"] = decision.post ? to_json(*decision.post) : ordered_json(nullptr);
    j["sub_sizes"] = decision.sub_sizes;
    if (decision.subs) {
        j["sub_params"] = ordered_json::array(
            {to_json((*decision.subs)[0].params), to_json((*decision.subs)[1].params)});
    } else {
        j["sub_params"] = nullptr;
    }
    j["note"] = decision.note;
    return j;
}

inline ordered_json trace_to_json(const std::vector<std::vector<SplitDecision>>& trace) {
    ordered_json rounds = ordered_json::array();
    for (const auto& round : trace) {
        ordered_json decisions = ordered_json::array();
        for (const auto& d : round) decisions.push_back(to_json(d));
        rounds.push_back(decisions);
    }
    return rounds;
}

inline ordered_json to_json(const EstimationReport& report) {
    ordered_json j;
    j["k"] = report.k;
    j["mode"] = report.mode == KappaMode::fixed ? "fixed" : "sx";
    if (report.mode == KappaMode::fixed) j["fixed_kappa"] = report.fixed_kappa;
    j["seed"] = report.seed;
    j["rounds"] = report.rounds;
    ordered_json clusters = ordered_json::array();
    for (const auto& c : report.clusters) {
        clusters.push_back(ordered_json{
            {"size", c.size}, {"mu", c.params.mu.vec()}, {"kappa", c.params.kappa}});
    }
    j["clusters"] = clusters;
    j["assignment"] = report.assignment;
    j["trace"] = trace_to_json(report.trace);
    j["notes"] = report.notes;
    return j;
}

inline ordered_json to_json(const XMeansReport& report) {
    ordered_json j;
    j["k"] = report.k;
    j["mode"] = "xmeans";
    j["seed"] = report.seed;
    j["rounds"] = report.rounds;
    ordered_json clusters = ordered_json::array();
    for (const auto& c : report.clusters) {
        clusters.push_back(
            ordered_json{{"size", c.size}, {"centroid", c.centroid}, {"variance", c.variance}});
    }
    j["clusters"] = clusters;
    j["assignment"] = report.assignment;
    j["trace"] = trace_to_json(report.trace);
    j["notes"] = report.notes;
    return j;
}

inline ordered_json to_json(const BenchResult& result) {
    ordered_json j;
    j["method"] = result.method;
    j["true_k"] = result.true_k;
    j["runs"] = result.runs;
    j["mean_k"] = result.mean_k;
    j["sd_k"] = result.sd_k;
    ordered_json per_run = ordered_json::array();
    for (const auto& run : result.per_run) {
        ordered_json r{{"seed", run.seed},
                       {"ok", run.ok},
                       {"k", run.k},
                       {"rounds", run.rounds},
                       {"accepted_splits", run.accepted_splits}};
        if (!run.ok) r["error"] = run.error;
        per_run.push_back(r);
    }
    j["per_run"] = per_run;
    return j;
}

inline ordered_json to_json(const DatasetRecord& record) {
    return ordered_json{{"name", record.name}, {"n", record.n},       {"d", record.d},
                        {"true_k", record.true_k}, {"centered", record.centered},
                        {"normalized", record.normalized}};
}

// "mean (sd)" with three decimals; the cell format of the report tables.
inline std::string format_mean_sd(double mean, double sd) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.3f (%.3f)", mean, sd);
    return buffer;
}

inline std::string format_cell(const BenchResult& result) {
    return format_mean_sd(result.mean_k, result.sd_k);
}

// Renders a grid of benchmark cells as a Markdown table. Rows appear in
// insertion order of `row_labels`; missing cells print as "missing".
inline std::string markdown_table(const std::string& row_header,
                                  const std::vector<std::string>& row_labels,
                                  const std::vector<std::string>& methods,
                                  const std::map<std::pair<std::string, std::string>,
                                                 BenchResult>& cells) {
    std::string out = "| " + row_header + " |";
    for (const auto& m : methods) out += " " + m + " |";
    out += "\n|";
    for (std::size_t i = 0; i <= methods.size(); ++i) out += " --- |";
    out += "\n";
    for (const auto& row : row_labels) {
        out += "| " + row + " |";
        for (const auto& m : methods) {
            const auto it = cells.find({row, m});
            out += " " + (it == cells.end() ? std::string("missing") : format_cell(it->second)) +
                   " |";
        }
        out += "\n";
    }
    return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw Error("write_text_file: cannot open '" + path + "' for writing");
    out << content;
}

inline std::string dump_json(const ordered_json& j) { return j.dump(2) + "\n"; }

// Flat per-run CSV (one row per run of every cell) for plotting.
inline std::string runs_csv(const std::vector<BenchResult>& results,
                            const std::vector<std::string>& row_labels) {
    std::string out = "row,method,seed,ok,k,rounds,accepted_splits\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        for (const auto& run : results[i].per_run) {
            out += row_labels[i] + "," + results[i].method + "," + std::to_string(run.seed) + "," +
                   (run.ok ? "1" : "0") + "," + std::to_string(run.k) + "," +
                   std::to_string(run.rounds) + "," + std::to_string(run.accepted_splits) + "\n";
        }
    }
    return out;
}

}  // namespace sxm
