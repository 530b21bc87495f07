#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

#include "sgdlab/cli/runner.hpp"
#include "sgdlab/trajectory.hpp"

namespace sgdlab::cli {

namespace {

struct Row {
    std::string started;
    std::string experiment;
    std::string status;
    std::string metric;
    std::string value;
    std::string theory;
    std::string deviation;
    std::string path;
};

std::string cell(const Json& v) {
    if (v.is_number()) return format_double(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return "-";
}

Row read_record(const std::filesystem::path& file, const std::filesystem::path& root) {
    Row row;
    row.path = std::filesystem::relative(file.parent_path(), root).generic_string();
    try {
        std::ifstream in(file, std::ios::binary);
        const Json rec = Json::parse(in);
        row.started = rec.at("started").get<std::string>();
        row.experiment = rec.at("experiment").get<std::string>();
        row.status = rec.at("status").get<std::string>();
        const Json& s = rec.at("summary");
        if (s.is_object()) {
            row.metric = cell(s.at("metric"));
            row.value = cell(s.at("value"));
            row.theory = cell(s.at("theory"));
            row.deviation = cell(s.at("deviation"));
        } else {
            row.metric = row.value = row.theory = row.deviation = "-";
        }
    } catch (const std::exception&) {
        // Best effort: keep the row, flag it, sort it last.
        row = Row{"~", "?", "CORRUPT", "-", "-", "-", "-", row.path};
    }
    return row;
}

}  // namespace

int report_command(const std::string& dir, std::ostream& out, std::ostream& err) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
        err << "report: not a directory: " << dir << '\n';
        return kExitConfig;
    }
    std::vector<Row> rows;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().filename() == "record.json") {
            rows.push_back(read_record(entry.path(), dir));
        }
    }
    if (rows.empty()) {
        err << "report: no run records under " << dir << '\n';
        return kExitConfig;
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return a.started != b.started ? a.started < b.started : a.path < b.path;
    });

    const std::vector<std::string> header{"started", "experiment", "status", "metric", "value", "theory", "deviation", "run"};
    auto fields = [](const Row& r) {
        return std::vector<std::string>{r.started == "~" ? "?" : r.started, r.experiment, r.status, r.metric,
                                        r.value, r.theory, r.deviation, r.path};
    };
    std::vector<std::size_t> width(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
    for (const auto& r : rows) {
        const auto f = fields(r);
        for (std::size_t i = 0; i < f.size(); ++i) width[i] = std::max(width[i], f[i].size());
    }
    auto print = [&](const std::vector<std::string>& f) {
        std::ostringstream line;
        for (std::size_t i = 0; i < f.size(); ++i) {
            line << f[i];
            if (i + 1 < f.size()) line << std::string(width[i] - f[i].size() + 2, ' ');
        }
        out << line.str() << '\n';
    };
    print(header);
    for (const auto& r : rows) print(fields(r));
    return kExitOk;
}

}  // namespace sgdlab::cli
