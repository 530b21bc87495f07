#pragma once

#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include "sgdlab/errors.hpp"
#include "sgdlab/numerics/linalg.hpp"

namespace sgdlab::cli {

using Json = nlohmann::json;

/// Schema violation; the message starts with the dotted field path.
class ConfigError : public InputError {
public:
    ConfigError(const std::string& field, const std::string& message)
        : InputError(field + ": " + message), field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Strict reader over one JSON object. Every key must be consumed by a
/// getter before finish(), otherwise finish() reports it as unknown.
class Section {
public:
    Section(const Json* node, std::string path);

    bool has(const std::string& key) const;
    double number(const std::string& key, double fallback, double lo = -std::numeric_limits<double>::infinity(),
                  double hi = std::numeric_limits<double>::infinity());
    double require_number(const std::string& key, double lo = -std::numeric_limits<double>::infinity(),
                          double hi = std::numeric_limits<double>::infinity());
    std::uint64_t integer(const std::string& key, std::uint64_t fallback, std::uint64_t lo = 0,
                          std::uint64_t hi = std::numeric_limits<std::uint64_t>::max());
    std::string text(const std::string& key, const std::string& fallback, const std::set<std::string>& allowed);
    Vec numbers(const std::string& key, const Vec& fallback, double lo = -std::numeric_limits<double>::infinity(),
                double hi = std::numeric_limits<double>::infinity());
    std::vector<std::uint64_t> integers(const std::string& key, const std::vector<std::uint64_t>& fallback,
                                        std::uint64_t lo = 0);
    /// Nested object; an absent key yields an empty section.
    Section child(const std::string& key);

    /// Marks a key as handled elsewhere.
    void skip(const std::string& key) { used_.insert(key); }

    /// Throws ConfigError for the first key no getter asked for.
    void finish() const;
    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const Json* find(const std::string& key);

    const Json* node_;
    std::string path_;
    std::set<std::string> used_;
};

inline const std::set<std::string>& experiment_kinds() {
    static const std::set<std::string> kinds{"gen-data", "fpt",        "stationary-fit", "noise-scaling",
                                             "decoupling", "kramers-1d", "langer-nd",      "sde-consistency"};
    return kinds;
}

/// Parsed top level: experiment kind, seed, output directory and the raw
/// document (sections are read by the experiment itself).
struct ExperimentConfig {
    std::string experiment;
    std::uint64_t seed = 0;
    std::string output_dir = "runs";
    std::string source_text;  // file contents, persisted verbatim
    Json document;
};

/// Parses JSON text and checks the top-level fields. Throws ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace sgdlab::cli
