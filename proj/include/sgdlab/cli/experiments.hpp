#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sgdlab/cli/config.hpp"
#include "sgdlab/cli/plot.hpp"

namespace sgdlab::cli {

/// Headline number of a run, shown by `lab report`.
struct Summary {
    std::string metric;
    double value = 0.0;
    std::optional<double> theory;

    /// |value - theory| / |theory| (absolute difference when theory is 0).
    std::optional<double> deviation() const;
};

/// Everything one run writes into its directory. Files are recorded as
/// artifacts in creation order; metrics accumulate as the run proceeds so
/// a failing run still persists what it computed.
class RunOutputs {
public:
    explicit RunOutputs(std::filesystem::path dir) : dir_(std::move(dir)) {}

    const std::filesystem::path& dir() const { return dir_; }
    const std::vector<std::string>& artifacts() const { return artifacts_; }

    void write_text(const std::string& name, const std::string& content);
    void write_csv(const std::string& name, const std::function<void(std::ostream&)>& body);
    void write_json(const std::string& name, const Json& value);
    void write_svg(const std::string& name, const PlotSpec& spec);

    Json metrics = Json::object();
    std::optional<Summary> summary;

private:
    std::filesystem::path dir_;
    std::vector<std::string> artifacts_;
};

using Experiment = std::function<void(RunOutputs&)>;

/// Reads and validates every section the experiment uses, rejecting unknown
/// keys, before anything is computed. Throws ConfigError.
Experiment prepare_experiment(const ExperimentConfig& config);

/// RNG stream ids; each role gets its own stream of the run seed.
enum StreamRole : std::uint64_t { kDataStream = 1, kInitStream = 2, kDynamicsStream = 3, kAuxStream = 4 };

}  // namespace sgdlab::cli
