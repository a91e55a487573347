#pragma once

// Named scalar fields for configs: {"kind": ..., params}.

#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <string>

#include "mpsh/io.hpp"

namespace mpsh::cli {

struct FieldSpec {
    std::function<double(const std::vector<double>&)> value;
    // Real Hessian in (x1, y1, ..., xn, yn) when known in closed form.
    std::function<RMatrix(const std::vector<double>&)> hessian;
    std::optional<GridFunction> samples;  // file-backed fields
};

inline FieldSpec field_from_json(const io::json& j, const GridDomain& d) {
    require(j.is_object(), "field: expected an object with a 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    const double shift = j.value("shift", 0.0);
    const int dim = d.real_dim();
    FieldSpec f;
    auto norm2 = [](const std::vector<double>& x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return s;
    };
    if (kind == "constant") {
        const double c = j.at("value").get<double>();
        f.value = [c](const std::vector<double>&) { return c; };
        f.hessian = [dim](const std::vector<double>&) { return RMatrix(RMatrix::Zero(dim, dim)); };
    } else if (kind == "quadratic") {
        const double a = j.value("scale", 1.0);
        f.value = [=](const std::vector<double>& x) { return a * norm2(x) + shift; };
        f.hessian = [=](const std::vector<double>&) { return RMatrix(2.0 * a * RMatrix::Identity(dim, dim)); };
    } else if (kind == "exp_perturbed") {
        const double a = j.value("amplitude", 0.05);
        f.value = [=](const std::vector<double>& x) { return norm2(x) + a * std::exp(x[0]) + shift; };
        f.hessian = [=](const std::vector<double>& x) {
            RMatrix h = 2.0 * RMatrix::Identity(dim, dim);
            h(0, 0) += a * std::exp(x[0]);
            return h;
        };
    } else if (kind == "max_re") {
        require(d.n() >= 2, "field max_re: needs n >= 2");
        f.value = [=](const std::vector<double>& x) { return std::max(x[0], x[2]) + shift; };
    } else if (kind == "cos_sum") {
        const double a = j.value("amplitude", 0.01);
        const double pi = std::acos(-1.0);
        f.value = [=](const std::vector<double>& x) {
            double s = 0.0;
            for (double v : x) s += std::cos(2.0 * pi * v);
            return shift + a * s;
        };
    } else if (kind == "log_pole") {
        f.value = [=](const std::vector<double>& x) {
            const double r = norm2(x);
            return r > 0.0 ? std::log(r) + shift : -std::numeric_limits<double>::infinity();
        };
    } else if (kind == "file") {
        const std::string path = j.at("path").get<std::string>();
        std::ifstream in(path, std::ios::binary);
        if (!in) fail(ErrorKind::Parse, "field: cannot open '" + path + "'");
        GridFunction g = read_binary(in);
        require(g.domain() == d, "field: file grid does not match the configured grid");
        f.samples = std::move(g);
    } else {
        fail(ErrorKind::InvalidArgument, "field: unknown kind '" + kind + "'");
    }
    return f;
}

inline GridFunction sample_field(const FieldSpec& f, const GridDomain& d) {
    if (f.samples) return *f.samples;
    return GridFunction::sample(d, f.value);
}

} // namespace mpsh::cli
