#include "degsde/io.hpp"
#include "degsde/linear_flow.hpp"

#include <catch_amalgamated.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

using namespace degsde;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / "degsde_io_test";
    fs::create_directories(p);
    return p / name;
}

}  // namespace

TEST_CASE("columnar round trip of a path bundle", "[io]") {
    auto M = model::build_example("kinetic", {}).model;
    auto b = linear_flow::sample_linear(M, 0.0, 1.0, Vec::Ones(2), 5, 4, 77);
    const auto path = scratch("paths.bin").string();
    io::write_columnar(path, io::to_columnar(b));
    auto c = io::read_columnar(path);
    REQUIRE(c.seed == 77);
    auto back = io::path_bundle_from(c);
    REQUIRE(back.n_paths == b.n_paths);
    REQUIRE(back.times == b.times);
    REQUIRE(back.states == b.states);
    REQUIRE(back.dW == b.dW);
    REQUIRE(back.eta == b.eta);
}

TEST_CASE("columnar body is little-endian f64 after the header", "[io]") {
    io::Columnar c;
    c.description = "kind=test\n";
    c.dims = {2};
    c.body = {1.0, -2.5};
    const auto path = scratch("raw.bin").string();
    io::write_columnar(path, c);
    std::ifstream f(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(f)), {});
    REQUIRE(bytes.substr(0, 8) == "DGSDCOL1");
    double last;
    std::memcpy(&last, bytes.data() + bytes.size() - 8, 8);
    REQUIRE(last == -2.5);
    REQUIRE_THROWS(io::read_columnar(scratch("missing.bin").string()));
}

TEST_CASE("columnar round trip of a field grid", "[io]") {
    auto spec = regularization::GridSpec::uniform({0, 1}, -1, 1, 4, 1.0, 3);
    regularization::FieldGrid f(1, 1, spec);
    auto& v = f.mutable_values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.1 * i;
    const auto path = scratch("field.bin").string();
    io::write_columnar(path, io::to_columnar(f));
    auto g = io::field_grid_from(io::read_columnar(path));
    REQUIRE(g.values() == f.values());
    REQUIRE(g.spec().nodes == spec.nodes);
    REQUIRE(g.spec().times == spec.times);
}

TEST_CASE("CSV round trip keeps full precision", "[io]") {
    io::CsvTable t;
    t.header = {"a", "b"};
    t.add({io::fmt(0.1), io::fmt(1.0 / 3.0)});
    const auto path = scratch("t.csv").string();
    io::write_file_atomic(path, io::to_string(t));
    auto r = io::read_csv(path);
    REQUIRE(r.header == t.header);
    REQUIRE(std::stod(r.rows[0][1]) == 1.0 / 3.0);
    REQUIRE_FALSE(fs::exists(path + ".tmp"));
}

TEST_CASE("Picard report CSV lists iterations", "[io]") {
    regularization::PicardReport r;
    r.lambda = 16;
    r.residuals = {1e-2, 1e-3, 1e-4};
    r.factors = {0.1, 0.1};
    auto t = io::picard_report_csv(r);
    REQUIRE(t.rows.size() == 3);
    REQUIRE(t.rows[0][2].empty());
}
