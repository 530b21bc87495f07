#include "sgdlab/models/dataset.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "sgdlab/errors.hpp"
#include "sgdlab/numerics/kernels.hpp"

namespace sgdlab {

Dataset::Dataset(std::size_t dim, Vec inputs, Vec labels)
    : dim_(dim), inputs_(std::move(inputs)), labels_(std::move(labels)) {
    if (dim_ == 0) throw InputError("Dataset: dimension must be positive");
    if (labels_.empty()) throw InputError("Dataset: need at least one sample");
    if (inputs_.size() != labels_.size() * dim_) throw DimensionError("Dataset: inputs size != N * d");
    for (double v : inputs_) {
        if (!std::isfinite(v)) throw InputError("Dataset: non-finite input entry");
    }
    for (double v : labels_) {
        if (!std::isfinite(v)) throw InputError("Dataset: non-finite label");
    }
}

Dataset linreg_generate(std::size_t dim, std::size_t count, RngStream& rng) {
    if (dim == 0 || count == 0) throw InputError("linreg_generate: d and N must be positive");
    Vec inputs(dim * count);
    Vec labels(count);
    for (std::size_t mu = 0; mu < count; ++mu) {
        rng.fill_normal(std::span(inputs).subspan(mu * dim, dim));
        labels[mu] = rng.normal();
    }
    return Dataset(dim, std::move(inputs), std::move(labels));
}

Dataset binary_teacher_generate(std::size_t dim, std::size_t count, RngStream& rng) {
    if (dim == 0 || count == 0) throw InputError("binary_teacher_generate: d and N must be positive");
    Vec teacher(dim);
    rng.fill_normal(teacher);
    Vec inputs(dim * count);
    Vec labels(count);
    for (std::size_t mu = 0; mu < count; ++mu) {
        auto x = std::span(inputs).subspan(mu * dim, dim);
        rng.fill_normal(x);
        labels[mu] = simd::dot(teacher, x) >= 0.0 ? 1.0 : -1.0;
    }
    return Dataset(dim, std::move(inputs), std::move(labels));
}

namespace {

void put_double(std::ostream& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, res.ptr - buf);
}

double parse_double(std::string_view field, std::size_t line) {
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw InputError("read_csv: line " + std::to_string(line) + ": cannot parse '" + std::string(field) + "'");
    }
    return v;
}

}  // namespace

void write_csv(const Dataset& data, std::ostream& out) {
    for (std::size_t i = 0; i < data.dim(); ++i) out << "x_" << i << ',';
    out << "y\n";
    for (std::size_t mu = 0; mu < data.size(); ++mu) {
        for (double v : data.input(mu)) {
            put_double(out, v);
            out << ',';
        }
        put_double(out, data.label(mu));
        out << '\n';
    }
}

Dataset read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InputError("read_csv: missing header");
    std::size_t columns = 1;
    for (char ch : line) columns += ch == ',' ? 1 : 0;
    if (columns < 2) throw InputError("read_csv: need at least one input column and y");
    const std::size_t dim = columns - 1;
    {
        std::ostringstream expected;
        for (std::size_t i = 0; i < dim; ++i) expected << "x_" << i << ',';
        expected << 'y';
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line != expected.str()) throw InputError("read_csv: header must be " + expected.str());
    }
    Vec inputs, labels;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::string_view rest(line);
        for (std::size_t c = 0; c < columns; ++c) {
            const auto comma = rest.find(',');
            const bool last = c + 1 == columns;
            if (last != (comma == std::string_view::npos)) {
                throw InputError("read_csv: line " + std::to_string(lineno) + ": wrong column count");
            }
            const double v = parse_double(rest.substr(0, comma), lineno);
            (last ? labels : inputs).push_back(v);
            if (!last) rest.remove_prefix(comma + 1);
        }
    }
    return Dataset(dim, std::move(inputs), std::move(labels));
}

}  // namespace sgdlab
