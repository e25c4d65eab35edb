#include <doctest.h>

#include <string>

#include "schema_check.hpp"
#include "sxm/bench.hpp"
#include "sxm/report_io.hpp"
#include "sxm/sxmeans.hpp"
#include "sxm/xmeans.hpp"

using namespace sxm;

namespace {

const std::string kSchemaDir = std::string(SXM_SOURCE_DIR) + "/schemas/";

LabeledPoints small_mixture(std::uint64_t seed) {
    SyntheticSpec spec;
    spec.d = 3;
    spec.seed = seed;
    spec.components = {Component{150, std::vector<double>{0.0, 0.0, 1.0}, 100.0},
                       Component{150, std::vector<double>{1.0, 0.0, 0.0}, 100.0}};
    return generate(spec);
}

void expect_valid(const std::string& schema, const nlohmann::json& value) {
    const auto errors = schema_check::validate_against_file(kSchemaDir + schema, value);
    for (const auto& e : errors) MESSAGE(e);
    CHECK(errors.empty());
}

}  // namespace

TEST_CASE("estimation reports validate against the published schema") {
    const LabeledPoints data = small_mixture(3);
    SxConfig config;
    config.seed = 5;
    expect_valid("estimation_report.schema.json", to_json(estimate(data.points, config)));
    expect_valid("estimation_report.schema.json",
                 to_json(fit_fixed(data.points, 40.0, config)));
}

TEST_CASE("baseline reports validate against the published schema") {
    const LabeledPoints data = small_mixture(7);
    Matrix rows(3);
    for (std::size_t i = 0; i < data.points.size(); ++i) rows.add(data.points[i]);
    XMeansConfig config;
    config.seed = 5;
    expect_valid("xmeans_report.schema.json", to_json(xmeans_baseline(rows, config)));
}

TEST_CASE("benchmark results validate against the published schema") {
    const BenchSource source = synthetic_source(2, 100, 100.0, 3);
    const BenchResult result =
        run_benchmark(MethodSpec{MethodSpec::Kind::sx, 0.0}, source, 2, 2, 0);
    expect_valid("bench_result.schema.json", to_json(result));
}

TEST_CASE("dataset records validate against the published schema") {
    DatasetRecord record;
    record.name = "iris";
    record.n = 150;
    record.d = 4;
    record.true_k = 3;
    record.centered = true;
    record.normalized = true;
    expect_valid("dataset_record.schema.json", to_json(record));
}

TEST_CASE("the checker itself flags broken documents") {
    nlohmann::json bad = {{"name", "x"}, {"n", 1}};
    const auto errors =
        schema_check::validate_against_file(kSchemaDir + "dataset_record.schema.json", bad);
    CHECK_FALSE(errors.empty());
}
