#include "degsde/error.hpp"
#include "degsde/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace degsde::io {

namespace {

constexpr char kMagic[8] = {'D', 'G', 'S', 'D', 'C', 'O', 'L', '1'};

static_assert(std::endian::native == std::endian::little, "columnar files are written little-endian");

void put_u64(std::string& out, std::uint64_t v) {
    char b[8];
    std::memcpy(b, &v, 8);
    out.append(b, 8);
}

void put_f64(std::string& out, double v) {
    char b[8];
    std::memcpy(b, &v, 8);
    out.append(b, 8);
}

class Reader {
public:
    explicit Reader(std::string data) : d_(std::move(data)) {}
    std::uint64_t u64() {
        need(8);
        std::uint64_t v;
        std::memcpy(&v, d_.data() + pos_, 8);
        pos_ += 8;
        return v;
    }
    double f64() {
        need(8);
        double v;
        std::memcpy(&v, d_.data() + pos_, 8);
        pos_ += 8;
        return v;
    }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s = d_.substr(pos_, n);
        pos_ += n;
        return s;
    }

private:
    void need(std::size_t n) const {
        if (pos_ + n > d_.size()) throw Error("columnar: truncated file");
    }
    std::string d_;
    std::size_t pos_ = 0;
};

std::map<std::string, std::string> parse_description(const std::string& s) {
    std::map<std::string, std::string> kv;
    std::istringstream in(s);
    std::string line;
    while (std::getline(in, line)) {
        auto eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> v;
    std::stringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) v.push_back(std::stod(tok));
    return v;
}

}  // namespace

void write_columnar(const std::string& path, const Columnar& c) {
    std::string out(kMagic, 8);
    put_u64(out, c.description.size());
    out += c.description;
    put_u64(out, c.dims.size());
    for (auto d : c.dims) put_u64(out, d);
    put_u64(out, c.grid.size());
    for (double g : c.grid) put_f64(out, g);
    put_u64(out, c.seed);
    put_u64(out, c.body.size());
    for (double v : c.body) put_f64(out, v);
    write_file_atomic(path, out);
}

Columnar read_columnar(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("columnar: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    Reader r(ss.str());
    if (r.bytes(8) != std::string(kMagic, 8)) throw Error("columnar: bad magic in " + path);
    Columnar c;
    c.description = r.bytes(r.u64());
    c.dims.resize(r.u64());
    for (auto& d : c.dims) d = r.u64();
    c.grid.resize(r.u64());
    for (auto& g : c.grid) g = r.f64();
    c.seed = r.u64();
    c.body.resize(r.u64());
    for (auto& v : c.body) v = r.f64();
    return c;
}

Columnar to_columnar(const linear_flow::PathBundle& b) {
    Columnar c;
    c.description = "kind=path_bundle\nstream=" + b.stream + "\nblocks=states,dW,eta\n";
    c.dims = {static_cast<std::uint64_t>(b.n_paths), b.times.size(), static_cast<std::uint64_t>(b.n_state),
              static_cast<std::uint64_t>(b.n_noise)};
    c.grid = b.times;
    c.seed = b.seed;
    c.body = b.states;
    c.body.insert(c.body.end(), b.dW.begin(), b.dW.end());
    c.body.insert(c.body.end(), b.eta.begin(), b.eta.end());
    return c;
}

linear_flow::PathBundle path_bundle_from(const Columnar& c) {
    auto kv = parse_description(c.description);
    if (kv["kind"] != "path_bundle" || c.dims.size() != 4) throw Error("columnar: not a path bundle");
    linear_flow::PathBundle b;
    b.n_paths = static_cast<int>(c.dims[0]);
    b.n_state = static_cast<int>(c.dims[2]);
    b.n_noise = static_cast<int>(c.dims[3]);
    b.times = c.grid;
    b.seed = c.seed;
    b.stream = kv["stream"];
    const std::size_t N = c.dims[1];
    const std::size_t ns = c.dims[0] * N * c.dims[2];
    const std::size_t nw = c.dims[0] * (N - 1) * c.dims[3];
    const std::size_t ne = c.dims[0] * (N - 1) * c.dims[2];
    if (c.body.size() != ns + nw + ne) throw Error("columnar: body size does not match the dims");
    b.states.assign(c.body.begin(), c.body.begin() + ns);
    b.dW.assign(c.body.begin() + ns, c.body.begin() + ns + nw);
    b.eta.assign(c.body.begin() + ns + nw, c.body.end());
    return b;
}

Columnar to_columnar(const regularization::FieldGrid& f) {
    const auto& g = f.spec();
    Columnar c;
    std::ostringstream d;
    d << "kind=field_grid\nm=" << f.m() << "\nd=" << f.d() << "\naxes=";
    for (std::size_t a = 0; a < g.axes.size(); ++a) d << (a ? "," : "") << g.axes[a];
    d << "\nsizes=";
    for (std::size_t a = 0; a < g.axes.size(); ++a) d << (a ? "," : "") << g.nodes[a].size();
    d << "\ngh_points=" << g.gh_points << "\ntime_points=" << g.time_points << "\n";
    if (f.declared_bound) d << "declared_bound=" << fmt(*f.declared_bound) << "\n";
    d << "layout=time,point,component\n";
    c.description = d.str();
    c.dims = {f.n_times(), f.n_points(), static_cast<std::uint64_t>(f.d())};
    c.grid = g.times;
    for (const auto& n : g.nodes) c.grid.insert(c.grid.end(), n.begin(), n.end());
    c.body = f.values();
    return c;
}

regularization::FieldGrid field_grid_from(const Columnar& c) {
    auto kv = parse_description(c.description);
    if (kv["kind"] != "field_grid" || c.dims.size() != 3) throw Error("columnar: not a field grid");
    regularization::GridSpec g;
    for (double a : parse_list(kv["axes"])) g.axes.push_back(static_cast<int>(a));
    std::vector<double> sizes = parse_list(kv["sizes"]);
    g.gh_points = std::stoi(kv["gh_points"]);
    g.time_points = std::stoi(kv["time_points"]);
    std::size_t pos = c.dims[0];
    g.times.assign(c.grid.begin(), c.grid.begin() + pos);
    for (double sz : sizes) {
        const std::size_t n = static_cast<std::size_t>(sz);
        g.nodes.emplace_back(c.grid.begin() + pos, c.grid.begin() + pos + n);
        pos += n;
    }
    regularization::FieldGrid f(std::stoi(kv["m"]), std::stoi(kv["d"]), g);
    if (f.values().size() != c.body.size()) throw Error("columnar: field body size does not match");
    f.mutable_values() = c.body;
    if (kv.count("declared_bound")) f.declared_bound = std::stod(kv["declared_bound"]);
    return f;
}

Columnar to_columnar(const sde::MildTrajectory& t) {
    Columnar c;
    c.description = "kind=mild_trajectory\nblew_up=" + std::string(t.blew_up ? "1" : "0") + "\n";
    if (t.blowup_time) c.description += "blowup_time=" + fmt(*t.blowup_time) + "\n";
    c.description += "blocks=states,dW\n";
    c.dims = {t.times.size(), static_cast<std::uint64_t>(t.n_state), static_cast<std::uint64_t>(t.noise.k)};
    c.grid = t.times;
    c.seed = t.noise.seed;
    c.body = t.states;
    const std::size_t nw = (t.times.size() - 1) * t.noise.k;
    c.body.insert(c.body.end(), t.noise.dW.begin(), t.noise.dW.begin() + nw);
    return c;
}

}  // namespace degsde::io
