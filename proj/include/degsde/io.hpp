#pragma once

#include "degsde/linear_flow.hpp"
#include "degsde/regularization.hpp"
#include "degsde/sde.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace degsde::io {

/// Columnar binary file: magic, description, dims, grid, seed, then the body
/// as little-endian f64 in the order given by dims (outermost first).
struct Columnar {
    std::string description;  ///< key=value lines
    std::vector<std::uint64_t> dims;
    std::vector<double> grid;
    std::uint64_t seed = 0;
    std::vector<double> body;
};

void write_columnar(const std::string& path, const Columnar& c);
Columnar read_columnar(const std::string& path);

/// Paths outermost: body [path][step][state..., noise..., eta...] over the
/// three dims blocks (states, dW, eta) written one after the other.
Columnar to_columnar(const linear_flow::PathBundle& b);
linear_flow::PathBundle path_bundle_from(const Columnar& c);

Columnar to_columnar(const regularization::FieldGrid& f);
regularization::FieldGrid field_grid_from(const Columnar& c);

Columnar to_columnar(const sde::MildTrajectory& t);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row);
};

std::string fmt(double v);
std::string to_string(const CsvTable& t);
CsvTable read_csv(const std::string& path);

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::string& path, const std::string& contents);

CsvTable path_bundle_csv(const linear_flow::PathBundle& b);
CsvTable picard_report_csv(const regularization::PicardReport& r);

}  // namespace degsde::io
