#include "sgdlab/cli/runner.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <ostream>

#include "sgdlab/cli/experiments.hpp"
#include "sgdlab/models/dataset.hpp"
#include "sgdlab/numerics/kernels.hpp"
#include "sgdlab/numerics/parallel.hpp"

namespace sgdlab::cli {

namespace {

std::string utc_stamp(bool compact) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), compact ? "%Y%m%dT%H%M%SZ" : "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::filesystem::path fresh_run_dir(const ExperimentConfig& config) {
    const std::filesystem::path parent = std::filesystem::path(config.output_dir) / config.experiment;
    std::filesystem::create_directories(parent);
    const std::string base = utc_stamp(true) + "-" + std::to_string(config.seed);
    for (int i = 0;; ++i) {
        const auto dir = parent / (i == 0 ? base : base + "-" + std::to_string(i));
        if (std::filesystem::create_directory(dir)) return dir;
    }
}

Json summary_json(const RunOutputs& out) {
    if (!out.summary) return nullptr;
    const Summary& s = *out.summary;
    Json j{{"metric", s.metric}, {"value", s.value}};
    j["theory"] = s.theory ? Json(*s.theory) : Json(nullptr);
    const auto dev = s.deviation();
    j["deviation"] = dev ? Json(*dev) : Json(nullptr);
    return j;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, std::ostream& log) {
    RunResult result;
    Experiment experiment;
    try {
        experiment = prepare_experiment(config);
    } catch (const InputError& e) {
        log << "config error: " << e.what() << '\n';
        result.exit_code = kExitConfig;
        return result;
    }

    result.dir = fresh_run_dir(config);
    RunOutputs out(result.dir);
    out.write_text("config.json", config.source_text);
    Json& rec = result.record;
    rec["experiment"] = config.experiment;
    rec["seed"] = config.seed;
    rec["config"] = config.document;
    rec["versions"] = {{"sgdlab", kVersion}, {"kernels", std::string(simd::active().name)}};
    rec["started"] = utc_stamp(false);
    rec["status"] = "ok";
    rec["error"] = nullptr;

    try {
        experiment(out);
    } catch (const InputError& e) {
        rec["status"] = "failed";
        rec["error"] = e.what();
        result.exit_code = kExitConfig;
    } catch (const std::exception& e) {
        rec["status"] = "failed";
        rec["error"] = e.what();
        result.exit_code = kExitNumeric;
    }
    out.write_json("metrics.json", out.metrics);
    rec["finished"] = utc_stamp(false);
    rec["metrics"] = out.metrics;
    rec["summary"] = summary_json(out);
    rec["artifacts"] = out.artifacts();
    {
        std::ofstream f(result.dir / "record.json", std::ios::binary);
        f << rec.dump(2) << '\n';
    }
    if (result.exit_code != kExitOk) {
        log << "run failed: " << rec["error"].get<std::string>() << '\n';
    }
    return result;
}

int run_command(const std::string& config_path, std::ostream& out, std::ostream& err) {
    ExperimentConfig config;
    try {
        config = load_config(config_path);
    } catch (const InputError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    const RunResult r = run_experiment(config, err);
    if (!r.dir.empty()) out << "run directory: " << r.dir.string() << '\n';
    if (r.exit_code == kExitOk && r.record.contains("summary") && !r.record["summary"].is_null()) {
        const Json& s = r.record["summary"];
        out << s["metric"].get<std::string>() << " = " << s["value"].dump();
        if (!s["theory"].is_null()) out << " (theory " << s["theory"].dump() << ")";
        out << '\n';
    }
    return r.exit_code;
}

int gen_data_command(std::size_t d, std::size_t n, std::uint64_t seed, const std::string& out_path,
                     std::ostream& err) {
    if (d < 1 || n < 1) {
        err << "gen-data: --d and --n must be >= 1\n";
        return kExitConfig;
    }
    RngStream rng(seed, kDataStream);
    const Dataset data = linreg_generate(d, n, rng);
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
        err << "gen-data: cannot write " << out_path << '\n';
        return kExitConfig;
    }
    write_csv(data, f);
    return kExitOk;
}

}  // namespace sgdlab::cli
