#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "decision.hpp"
#include "util.hpp"

namespace mcmargin {

// Flat line-oriented model document. All floats are written with 17
// significant digits, so serialize -> parse -> serialize is byte-identical.
// The meta line is stored verbatim and round-trips with the model.

namespace detail {

inline void write_values(std::ostream& os, const char* key, const std::vector<double>& v) {
    os << key;
    for (double x : v) os << ' ' << fmt17(x);
    os << '\n';
}

inline std::string expect_line(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("model parse: unexpected end of file");
    return line;
}

inline std::string expect_prefix(std::istream& is, const std::string& prefix) {
    std::string line = expect_line(is);
    if (line.compare(0, prefix.size(), prefix) != 0)
        throw std::runtime_error("model parse: expected '" + prefix + "', got '" + line + "'");
    return line.size() > prefix.size() ? line.substr(prefix.size() + (line[prefix.size()] == ' ' ? 1 : 0))
                                       : std::string();
}

inline std::vector<double> parse_values(const std::string& rest, size_t count, const char* key) {
    std::istringstream ss(rest);
    std::vector<double> v(count);
    for (size_t i = 0; i < count; ++i)
        if (!(ss >> v[i])) throw std::runtime_error(std::string("model parse: short '") + key + "' array");
    double extra;
    if (ss >> extra) throw std::runtime_error(std::string("model parse: long '") + key + "' array");
    return v;
}

} // namespace detail

struct ModelDoc {
    Decision decision;
    std::string meta;
};

inline void write_model(std::ostream& os, const Decision& dec, const std::string& meta) {
    os << "mcmargin-model v1\n";
    os << "meta" << (meta.empty() ? "" : " ") << meta << '\n';
    if (const auto* lin = std::get_if<LinearDecision>(&dec)) {
        os << "form linear\n";
        os << "k " << lin->k << '\n';
        os << "d " << lin->d << '\n';
        os << "intercept " << (lin->intercept ? 1 : 0) << '\n';
        detail::write_values(os, "w", lin->wfree);
        if (lin->intercept) detail::write_values(os, "b", lin->bfree);
    } else {
        const auto& kd = std::get<KernelDecision>(dec);
        os << "form kernel\n";
        os << "k " << kd.k << '\n';
        os << "kernel " << kernel_name(kd.kernel) << '\n';
        os << "d " << kd.d() << '\n';
        os << "n " << kd.n() << '\n';
        std::vector<double> flat;
        flat.reserve(static_cast<size_t>(kd.n()) * kd.d());
        for (const auto& p : kd.anchors) flat.insert(flat.end(), p.begin(), p.end());
        detail::write_values(os, "anchors", flat);
        detail::write_values(os, "alpha", kd.afree);
    }
    os << "end\n";
}

inline std::string write_model_string(const Decision& dec, const std::string& meta) {
    std::ostringstream os;
    write_model(os, dec, meta);
    return os.str();
}

inline ModelDoc read_model(std::istream& is) {
    using detail::expect_prefix;
    std::string magic = detail::expect_line(is);
    if (magic != "mcmargin-model v1") throw std::runtime_error("model parse: bad magic line");
    ModelDoc doc;
    doc.meta = expect_prefix(is, "meta");
    std::string form = expect_prefix(is, "form");
    if (form == "linear") {
        int k = std::stoi(expect_prefix(is, "k"));
        int d = std::stoi(expect_prefix(is, "d"));
        int ic = std::stoi(expect_prefix(is, "intercept"));
        LinearDecision lin(k, d, ic != 0);
        lin.wfree = detail::parse_values(expect_prefix(is, "w"), static_cast<size_t>(k - 1) * d, "w");
        if (ic != 0)
            lin.bfree = detail::parse_values(expect_prefix(is, "b"), static_cast<size_t>(k - 1), "b");
        doc.decision = lin;
    } else if (form == "kernel") {
        int k = std::stoi(expect_prefix(is, "k"));
        KernelId kern = parse_kernel(expect_prefix(is, "kernel"));
        int d = std::stoi(expect_prefix(is, "d"));
        int n = std::stoi(expect_prefix(is, "n"));
        auto flat = detail::parse_values(expect_prefix(is, "anchors"), static_cast<size_t>(n) * d, "anchors");
        std::vector<std::vector<double>> pts(n, std::vector<double>(d));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j) pts[i][j] = flat[static_cast<size_t>(i) * d + j];
        KernelDecision kd(k, kern, std::move(pts));
        kd.afree = detail::parse_values(expect_prefix(is, "alpha"), static_cast<size_t>(n) * (k - 1), "alpha");
        doc.decision = kd;
    } else {
        throw std::runtime_error("model parse: unknown form '" + form + "'");
    }
    if (detail::expect_line(is) != "end") throw std::runtime_error("model parse: missing end line");
    return doc;
}

inline ModelDoc read_model_string(const std::string& text) {
    std::istringstream is(text);
    return read_model(is);
}

} // namespace mcmargin
