#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "util.hpp"

namespace mcmargin {

struct Dataset {
    int k = 0; // number of classes
    int d = 0; // feature dimension
    std::vector<std::vector<double>> x;
    std::vector<int> y; // 1-based labels

    int n() const { return static_cast<int>(y.size()); }
};

// Plain CSV with header x1,...,xd,y. A leading '# ...' metadata comment is
// written by every producer and skipped by the reader.
inline void write_dataset_csv(std::ostream& os, const Dataset& ds, const std::string& meta) {
    if (!meta.empty()) os << "# " << meta << '\n';
    for (int j = 1; j <= ds.d; ++j) os << 'x' << j << ',';
    os << "y\n";
    for (int i = 0; i < ds.n(); ++i) {
        for (int j = 0; j < ds.d; ++j) os << fmt17(ds.x[i][j]) << ',';
        os << ds.y[i] << '\n';
    }
}

inline Dataset read_dataset_csv(std::istream& is) {
    Dataset ds;
    std::string line;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            // count columns; validate the trailing label column name
            int cols = 1;
            for (char ch : line)
                if (ch == ',') ++cols;
            if (cols < 2 || line.substr(line.rfind(',') + 1) != "y")
                throw std::runtime_error("dataset parse: bad header");
            ds.d = cols - 1;
            header_seen = true;
            continue;
        }
        std::istringstream ss(line);
        std::vector<double> row(ds.d);
        std::string cell;
        for (int j = 0; j < ds.d; ++j) {
            if (!std::getline(ss, cell, ',')) throw std::runtime_error("dataset parse: short row");
            row[j] = std::stod(cell);
        }
        if (!std::getline(ss, cell)) throw std::runtime_error("dataset parse: missing label");
        int label = std::stoi(cell);
        if (label < 1) throw std::runtime_error("dataset parse: labels are 1-based");
        ds.x.push_back(std::move(row));
        ds.y.push_back(label);
        if (label > ds.k) ds.k = label;
    }
    if (!header_seen) throw std::runtime_error("dataset parse: empty file");
    if (ds.k < 2) ds.k = 2;
    return ds;
}

} // namespace mcmargin
