#include "sgdlab/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace sgdlab::cli {

Section::Section(const Json* node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ != nullptr && !node_->is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
}

bool Section::has(const std::string& key) const { return node_ != nullptr && node_->contains(key); }

const Json* Section::find(const std::string& key) {
    used_.insert(key);
    if (node_ == nullptr) return nullptr;
    const auto it = node_->find(key);
    return it == node_->end() ? nullptr : &*it;
}

namespace {

double as_number(const Json& v, const std::string& field) {
    if (!v.is_number()) throw ConfigError(field, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(field, "must be finite");
    return x;
}

void check_range(double x, double lo, double hi, const std::string& field) {
    if (x < lo || x > hi) {
        std::ostringstream msg;
        msg << "value " << x << " outside [" << lo << ", " << hi << "]";
        throw ConfigError(field, msg.str());
    }
}

std::uint64_t as_integer(const Json& v, const std::string& field) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
        if (v.get<std::int64_t>() < 0) throw ConfigError(field, "must be >= 0");
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    if (v.is_number_float()) {
        const double x = v.get<double>();
        if (x >= 0.0 && x < 1.8e19 && std::floor(x) == x) return static_cast<std::uint64_t>(x);
    }
    throw ConfigError(field, "expected a nonnegative integer");
}

}  // namespace

double Section::number(const std::string& key, double fallback, double lo, double hi) {
    const Json* v = find(key);
    const double x = v ? as_number(*v, field(key)) : fallback;
    check_range(x, lo, hi, field(key));
    return x;
}

double Section::require_number(const std::string& key, double lo, double hi) {
    if (!has(key)) throw ConfigError(field(key), "required");
    return number(key, 0.0, lo, hi);
}

std::uint64_t Section::integer(const std::string& key, std::uint64_t fallback, std::uint64_t lo, std::uint64_t hi) {
    const Json* v = find(key);
    const std::uint64_t x = v ? as_integer(*v, field(key)) : fallback;
    if (x < lo || x > hi) {
        throw ConfigError(field(key), "value " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
                                          std::to_string(hi) + "]");
    }
    return x;
}

std::string Section::text(const std::string& key, const std::string& fallback, const std::set<std::string>& allowed) {
    const Json* v = find(key);
    if (v && !v->is_string()) throw ConfigError(field(key), "expected a string");
    std::string s = v ? v->get<std::string>() : fallback;
    if (!allowed.empty() && !allowed.count(s)) {
        std::string opts;
        for (const auto& a : allowed) opts += (opts.empty() ? "" : ", ") + a;
        throw ConfigError(field(key), "'" + s + "' is not one of {" + opts + "}");
    }
    return s;
}

Vec Section::numbers(const std::string& key, const Vec& fallback, double lo, double hi) {
    const Json* v = find(key);
    if (!v) return fallback;
    if (!v->is_array() || v->empty()) throw ConfigError(field(key), "expected a nonempty array of numbers");
    Vec out;
    for (std::size_t i = 0; i < v->size(); ++i) {
        const std::string f = field(key) + "[" + std::to_string(i) + "]";
        out.push_back(as_number((*v)[i], f));
        check_range(out.back(), lo, hi, f);
    }
    return out;
}

std::vector<std::uint64_t> Section::integers(const std::string& key, const std::vector<std::uint64_t>& fallback,
                                             std::uint64_t lo) {
    const Json* v = find(key);
    if (!v) return fallback;
    if (!v->is_array() || v->empty()) throw ConfigError(field(key), "expected a nonempty array of integers");
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
        const std::string f = field(key) + "[" + std::to_string(i) + "]";
        out.push_back(as_integer((*v)[i], f));
        if (out.back() < lo) throw ConfigError(f, "must be >= " + std::to_string(lo));
    }
    return out;
}

Section Section::child(const std::string& key) {
    const Json* v = find(key);
    return Section(v, field(key));
}

void Section::finish() const {
    if (node_ == nullptr) return;
    for (const auto& item : node_->items()) {
        if (!used_.count(item.key())) throw ConfigError(field(item.key()), "unknown key");
    }
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    cfg.source_text = text;
    try {
        cfg.document = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
    }
    if (!cfg.document.is_object()) throw ConfigError("<root>", "expected an object");
    const auto exp = cfg.document.find("experiment");
    if (exp == cfg.document.end()) throw ConfigError("experiment", "required");
    if (!exp->is_string()) throw ConfigError("experiment", "expected a string");
    cfg.experiment = exp->get<std::string>();
    if (!experiment_kinds().count(cfg.experiment)) throw ConfigError("experiment", "unknown kind '" + cfg.experiment + "'");
    const auto seed = cfg.document.find("seed");
    if (seed == cfg.document.end()) throw ConfigError("seed", "required");
    if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<std::int64_t>() >= 0)) {
        throw ConfigError("seed", "expected a nonnegative integer");
    }
    cfg.seed = seed->get<std::uint64_t>();
    if (const auto out = cfg.document.find("output_dir"); out != cfg.document.end()) {
        if (!out->is_string() || out->get<std::string>().empty()) throw ConfigError("output_dir", "expected a path");
        cfg.output_dir = out->get<std::string>();
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("<file>", "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace sgdlab::cli
