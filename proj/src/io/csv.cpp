#include "degsde/error.hpp"
#include "degsde/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace degsde::io {

void CsvTable::add(std::vector<std::string> row) {
    if (row.size() != header.size()) throw Error("csv: row width does not match the header");
    rows.push_back(std::move(row));
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string to_string(const CsvTable& t) {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
    return out;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("csv: cannot open " + path);
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(f, line)) {
        std::vector<std::string> cells;
        std::stringstream in(line);
        std::string c;
        while (std::getline(in, c, ',')) cells.push_back(c);
        if (first) {
            t.header = cells;
            first = false;
        } else {
            t.rows.push_back(cells);
        }
    }
    return t;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot write " + tmp.string());
        f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!f) throw Error("short write to " + tmp.string());
    }
    fs::rename(tmp, p);
}

CsvTable path_bundle_csv(const linear_flow::PathBundle& b) {
    CsvTable t;
    t.header = {"path", "step", "t"};
    for (int c = 0; c < b.n_state; ++c) t.header.push_back("z" + std::to_string(c));
    for (int p = 0; p < b.n_paths; ++p)
        for (int i = 0; i <= b.n_steps(); ++i) {
            std::vector<std::string> r{std::to_string(p), std::to_string(i), fmt(b.times[i])};
            for (int c = 0; c < b.n_state; ++c) r.push_back(fmt(b.state(p, i, c)));
            t.add(std::move(r));
        }
    return t;
}

CsvTable picard_report_csv(const regularization::PicardReport& r) {
    CsvTable t;
    t.header = {"iteration", "residual", "factor", "lambda"};
    for (std::size_t i = 0; i < r.residuals.size(); ++i) {
        // factors[j] compares iterations j+2 and j+1
        std::string f = i >= 1 && i - 1 < r.factors.size() ? fmt(r.factors[i - 1]) : "";
        t.add({std::to_string(i + 1), fmt(r.residuals[i]), f, fmt(r.lambda)});
    }
    return t;
}

}  // namespace degsde::io
