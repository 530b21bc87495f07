#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "sgdlab/cli/config.hpp"
#include "sgdlab/cli/experiments.hpp"
#include "sgdlab/cli/plot.hpp"
#include "sgdlab/cli/runner.hpp"

using namespace sgdlab;
using namespace sgdlab::cli;
namespace fs = std::filesystem;

namespace {

std::size_t count(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
    return n;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("sgdlab_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string field_of(const std::string& text) {
    try {
        prepare_experiment(parse_config(text));
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "";
}

}  // namespace

TEST_CASE("config validation names the offending field") {
    CHECK(field_of(R"({"experiment": "fpt", "seed": 1, "optimizer": {"lr": 0.1, "lrr": 2}})") == "optimizer.lrr");
    CHECK(field_of(R"({"experiment": "fpt", "seed": 1, "extra": true})") == "extra");
    CHECK(field_of(R"({"experiment": "nope", "seed": 1})") == "experiment");
    CHECK(field_of(R"({"experiment": "fpt", "seed": -1})") == "seed");
    CHECK(field_of(R"({"experiment": "fpt", "seed": 1, "model": {"n": 10}, "optimizer": {"batch": 11}})") ==
          "optimizer.batch");
    CHECK(field_of(R"({"experiment": "gen-data", "seed": 1, "model": {"kind": "cnn"}})") == "model.kind");
    CHECK(field_of(R"({"experiment": "gen-data", "seed": 3, "model": {"d": 2, "n": 5}})") == "");
    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
}

TEST_CASE("batch larger than the data set is a config error mentioning N") {
    try {
        prepare_experiment(parse_config(R"({"experiment": "noise-scaling", "seed": 1, "model": {"n": 10}, "optimizer": {"batch": 50}})"));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("sample count N = 10") != std::string::npos);
    }
}

TEST_CASE("log-log plot renders points and a dashed guide deterministically") {
    PlotSpec spec;
    spec.kind = PlotKind::loglog_scatter;
    spec.title = "t";
    spec.series.push_back({"data", Vec{1.0, 10.0}, Vec{2.0, 20.0}});
    spec.reference = ReferenceLine{1.0, std::log(2.0), "slope 1"};
    const std::string svg = render_svg(spec);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(count(svg, "<circle") == 2);
    CHECK(count(svg, "stroke-dasharray") == 1);
    CHECK(render_svg(spec) == svg);

    spec.series[0].y = Vec{-1.0, 0.0};
    CHECK_THROWS_AS(render_svg(spec), InputError);
    spec.series.clear();
    CHECK_THROWS_AS(render_svg(spec), InputError);
}

TEST_CASE("gen-data runs are reproducible and reportable") {
    const fs::path root = scratch("gen");
    const std::string text = R"({"experiment": "gen-data", "seed": 5, "output_dir": ")" + root.string() +
                             R"(", "model": {"d": 3, "n": 50}})";
    std::ostringstream log;
    const RunResult a = run_experiment(parse_config(text), log);
    const RunResult b = run_experiment(parse_config(text), log);
    REQUIRE(a.exit_code == kExitOk);
    REQUIRE(b.exit_code == kExitOk);
    CHECK(a.dir != b.dir);
    for (const char* f : {"data.csv", "metrics.json", "config.json"}) CHECK(slurp(a.dir / f) == slurp(b.dir / f));
    CHECK(slurp(a.dir / "config.json") == text);
    CHECK(a.record["status"] == "ok");
    CHECK(a.record["seed"] == 5);

    std::ostringstream out, err;
    CHECK(report_command(root.string(), out, err) == kExitOk);
    CHECK(count(out.str(), "label_mean") == 2);
    CHECK(out.str().find("label_mean") != std::string::npos);

    // A damaged record is flagged, not fatal.
    std::ofstream(b.dir / "record.json") << "{\"started\": ";
    std::ostringstream out2;
    CHECK(report_command(root.string(), out2, err) == kExitOk);
    CHECK(count(out2.str(), "CORRUPT") == 1);
    fs::remove_all(root);
}

TEST_CASE("report on an empty directory and exit codes") {
    const fs::path root = scratch("empty");
    std::ostringstream out, err;
    CHECK(report_command(root.string(), out, err) == kExitConfig);
    CHECK(report_command((root / "missing").string(), out, err) == kExitConfig);

    std::ofstream(root / "bad.json") << R"({"experiment": "fpt", "seed": 1, "optimizer": {"typo": 1}})";
    CHECK(run_command((root / "bad.json").string(), out, err) == kExitConfig);
    CHECK(err.str().find("optimizer.typo") != std::string::npos);
    CHECK(run_command((root / "absent.json").string(), out, err) == kExitConfig);

    // stationary-fit requires d = 1; a larger data set is rejected before running.
    std::ofstream(root / "d2.json") << R"({"experiment": "stationary-fit", "seed": 1, "model": {"d": 2}})";
    CHECK(run_command((root / "d2.json").string(), out, err) == kExitConfig);

    CHECK(gen_data_command(2, 7, 1, (root / "x.csv").string(), err) == kExitOk);
    CHECK(count(slurp(root / "x.csv"), "\n") == 8);
    fs::remove_all(root);
}

TEST_CASE("summary deviation") {
    CHECK(*Summary{"m", 11.0, 10.0}.deviation() == doctest::Approx(0.1));
    CHECK(*Summary{"m", 0.25, 0.0}.deviation() == doctest::Approx(0.25));
    CHECK(!Summary{"m", 1.0, std::nullopt}.deviation());
}
