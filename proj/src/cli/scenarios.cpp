#include "degsde/bismut.hpp"
#include "degsde/cli.hpp"
#include "degsde/error.hpp"
#include "degsde/io.hpp"
#include "degsde/linear_flow.hpp"
#include "degsde/regularization.hpp"
#include "degsde/sde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

namespace degsde::cli {

namespace {

using io::CsvTable;
using io::fmt;

const std::vector<Anchor> kAnchors = {
    {"gramian-inverse-scaling", "||Q_t^{-1}|| t^3 stays bounded as t -> 0 (scalar kinetic value: 6)"},
    {"bismut-derivative-formula", "grad_v P0_{s,T} f(z) = E[f(Z_{s,T}(z)) int_s^T <weight, dW>]"},
    {"coupling-girsanov", "perturbed and unperturbed linear flows agree at T; the Girsanov density has mean 1"},
    {"gradient-scaling", "sup|grad_x P0 f| ~ (T-s)^{-3/2}, sup|grad_y P0 f| ~ (T-s)^{-1/2} for bounded f"},
    {"hs-noise-bound", "int_s^t ||e^{(t-r)A2} sigma_r||_HS^2 dr <= c2 (t-s)^delta"},
    {"picard-contraction", "u = R^lambda(grad2_b u + b) is a contraction with factor <= 1/2 for large lambda"},
    {"lambda-decay", "||u^lambda||_inf + ||grad2 u^lambda||_inf decays like lambda^{-1/2}"},
    {"transform-bijection", "Theta_s(x, y) = (x, y + u_s(x, y)) is invertible when ||grad2 u|| < 1"},
    {"galerkin-limit", "fields of the truncated drifts converge to the full field as n grows"},
    {"representation-identity", "Y_t matches its representation through u^lambda along every path"},
    {"pathwise-uniqueness", "solutions on common noise coincide from a common start and stay close from close starts"},
    {"bihari-envelope", "sup_{r<=t} |Y_r - xi_r|^2 stays below Gamma^{-1}(Gamma(eta_T) + t)"},
};

const std::vector<ScenarioInfo> kScenarios = {
    {"kinetic_bismut", "bismut-derivative-formula", "weighted Monte-Carlo gradients vs Gaussian derivatives"},
    {"gradient_scaling", "gradient-scaling", "log-log slope of sup gradients over shrinking gaps"},
    {"gramian_sweep", "gramian-inverse-scaling", "||Q_t^{-1}|| t^3 over dyadic t"},
    {"picard_lambda_sweep", "picard-contraction", "lambda doubling search and sup-norm decay in lambda"},
    {"galerkin_wave", "galerkin-limit", "value and gradient gaps of truncated wave fields"},
    {"uniqueness_rough", "pathwise-uniqueness", "common-noise gaps over initial perturbations"},
    {"representation_residual", "representation-identity", "residual of the representation over step counts"},
    {"bihari_envelope", "bihari-envelope", "simulated sup|Y|^2 against the Bihari curve"},
};

std::string cite(const std::string& id, const std::string& text) {
    return "[" + anchor(id).id + "] " + text;
}

std::string num(double v, int prec = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

// Files are staged during the run and written once at the end.
struct Outputs {
    std::string dir;
    std::vector<std::string> formats;
    std::vector<std::pair<std::string, std::function<void(const std::string&)>>> staged;
    std::vector<std::string> summary;

    bool wants(const std::string& f) const { return std::find(formats.begin(), formats.end(), f) != formats.end(); }
    void csv(const std::string& name, const CsvTable& t) {
        std::string body = io::to_string(t);
        staged.push_back({name, [body](const std::string& p) { io::write_file_atomic(p, body); }});
    }
    void bin(const std::string& name, io::Columnar c) {
        if (!wants("bin")) return;
        staged.push_back({name, [c = std::move(c)](const std::string& p) { io::write_columnar(p, c); }});
    }
    void say(const std::string& id, const std::string& text) { summary.push_back(cite(id, text)); }
};

Vec vec_of(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

Vec start_point(const ScenarioConfig& cfg, int n, const std::string& key, double fill) {
    auto v = cfg.list(key, std::vector<double>(static_cast<std::size_t>(n), fill));
    if (static_cast<int>(v.size()) != n)
        throw ConfigError(key, "expected " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
    return vec_of(v);
}

std::vector<int> ints(const ScenarioConfig& cfg, const std::string& key, std::vector<int> fallback) {
    std::vector<double> d(fallback.begin(), fallback.end());
    std::vector<int> out;
    for (double x : cfg.list(key, d)) {
        if (x != std::floor(x)) throw ConfigError(key, "expected integers");
        out.push_back(static_cast<int>(x));
    }
    return out;
}

std::vector<double> dyadic(int lo, int hi) {
    std::vector<double> g;
    for (int j = hi; j >= lo; --j) g.push_back(std::ldexp(1.0, -j));
    return g;
}

bool decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

model::DriftParams drift_params(const ScenarioConfig& cfg, const std::string& section, model::DriftParams p) {
    p.amplitude = cfg.num(section + ".amplitude", p.amplitude);
    p.eps = cfg.num(section + ".eps", p.eps);
    p.alpha = cfg.num(section + ".alpha", p.alpha);
    p.power = cfg.num(section + ".power", p.power);
    return p;
}

// ---------------------------------------------------------------------------

struct Observed {
    std::string name;
    Observable f;
    // d/dv of E f under N(mean, cov) with d mean/dv = Fv.
    std::function<double(const Vec& mean, const Vec& Fv)> exact;
};

std::vector<Observed> polynomial_probes(int m) {
    const int x = 0, y = m;
    return {
        {"x", [=](const Vec& z) { return z(x); }, [=](const Vec&, const Vec& a) { return a(x); }},
        {"y", [=](const Vec& z) { return z(y); }, [=](const Vec&, const Vec& a) { return a(y); }},
        {"x^2", [=](const Vec& z) { return z(x) * z(x); }, [=](const Vec& mu, const Vec& a) { return 2 * mu(x) * a(x); }},
        {"y^2", [=](const Vec& z) { return z(y) * z(y); }, [=](const Vec& mu, const Vec& a) { return 2 * mu(y) * a(y); }},
        {"xy", [=](const Vec& z) { return z(x) * z(y); },
         [=](const Vec& mu, const Vec& a) { return a(x) * mu(y) + mu(x) * a(y); }},
    };
}

void kinetic_bismut(const ScenarioConfig& cfg, const model::Example& ex, Outputs& out) {
    const auto& M = ex.model;
    const std::uint64_t seed = cfg.seed();
    const double s = cfg.num("experiment.s", 0.0), T = cfg.num("experiment.T", 1.0);
    const long n_paths = cfg.integer("experiment.n_paths", 100000);
    const int n_steps = static_cast<int>(cfg.integer("experiment.n_steps", 64));
    const Vec z = start_point(cfg, M.n(), "experiment.probe", 0.0);
    const int m = M.m();

    auto probes = polynomial_probes(m);
    std::vector<Observable> fs;
    for (const auto& p : probes) fs.push_back(p.f);
    const std::vector<Vec> vs = {Vec::Unit(M.n(), 0), Vec::Unit(M.n(), m)};
    const std::vector<std::string> vnames = {"e_x", "e_y"};
    auto est = bismut::bismut_gradient_batch(M, s, T, fs, z, vs, n_paths, n_steps, seed);

    const Mat F = linear_flow::flow_matrix(M, T - s);
    const Vec mu = F * z;
    CsvTable t;
    t.header = {"s", "T", "component", "direction", "value", "stderr", "n_paths", "seed", "analytic"};
    double worst = 0.0;
    for (std::size_t i = 0; i < probes.size(); ++i)
        for (std::size_t j = 0; j < vs.size(); ++j) {
            const auto& e = est[i][j];
            const double a = probes[i].exact(mu, F * vs[j]);
            worst = std::max(worst, std::abs(e.value - a) / e.stderr_);
            t.add({fmt(s), fmt(T), probes[i].name, vnames[j], fmt(e.value), fmt(e.stderr_), std::to_string(e.n_paths),
                   std::to_string(seed), fmt(a)});
        }
    out.csv("gradient.csv", t);
    const auto& c = est[0][0];
    out.say("bismut-derivative-formula", "f=x v=e_x: " + num(c.value) + " +- " + num(c.stderr_) + " (analytic " +
                                             num(probes[0].exact(mu, F * vs[0])) + ")");
    out.say("bismut-derivative-formula",
            "largest |estimate - analytic| / stderr over " + std::to_string(probes.size() * vs.size()) +
                " pairs: " + num(worst, 3));

    const double eps = cfg.num("experiment.coupling_eps", 0.1);
    auto cr = bismut::verify_coupling(M, s, T, vs[0], eps, n_paths, n_steps, substream_seed(seed, "cli.coupling", 0));
    CsvTable ct;
    ct.header = {"eps", "terminal_gap", "girsanov_mean", "girsanov_stderr", "n_paths"};
    ct.add({fmt(eps), fmt(cr.terminal_gap), fmt(cr.girsanov_mean.value), fmt(cr.girsanov_mean.stderr_),
            std::to_string(cr.girsanov_mean.n)});
    out.csv("coupling.csv", ct);
    out.say("coupling-girsanov", "terminal gap " + num(cr.terminal_gap, 3) + ", E R = " + num(cr.girsanov_mean.value) +
                                     " +- " + num(cr.girsanov_mean.stderr_));

    if (out.wants("bin")) {
        const int n_save = static_cast<int>(cfg.integer("output.bin_paths", 256));
        out.bin("paths.bin", io::to_columnar(linear_flow::sample_linear(M, s, T, z, n_save, n_steps, seed)));
    }
}

void gradient_scaling(const ScenarioConfig& cfg, const model::Example& ex, Outputs& out) {
    bismut::ScalingBudget b;
    b.seed = cfg.seed();
    b.n_paths = cfg.integer("experiment.n_paths", 20000);
    b.n_steps = static_cast<int>(cfg.integer("experiment.n_steps", 64));
    const auto gaps = cfg.list("experiment.gaps", dyadic(3, 8));
    Observable sign_x = [](const Vec& z) { return z(0) > 0 ? 1.0 : (z(0) < 0 ? -1.0 : 0.0); };

    CsvTable t;
    t.header = {"component", "gap", "sup_grad", "rel_stderr", "slope", "slope_stderr"};
    const std::pair<bismut::Component, std::string> comps[] = {{bismut::Component::x, "x"}, {bismut::Component::y, "y"}};
    const double expected[] = {-1.5, -0.5};
    for (int c = 0; c < 2; ++c) {
        auto r = bismut::scaling_exponent(ex.model, sign_x, comps[c].first, gaps, b);
        for (std::size_t i = 0; i < gaps.size(); ++i)
            t.add({comps[c].second, fmt(gaps[i]), fmt(r.sup_grad[i]), fmt(r.rel_stderr[i]), fmt(r.slope),
                   fmt(r.slope_stderr)});
        std::string line = comps[c].second + "-direction slope " + num(r.slope, 4) + " +- " + num(r.slope_stderr, 2) +
                           " (exponent " + num(expected[c], 2) + ")";
        if (r.wide_confidence) line += "; " + r.warning;
        out.say("gradient-scaling", line);
    }
    out.csv("scaling.csv", t);
}

void gramian_sweep(const ScenarioConfig& cfg, const model::Example& ex, Outputs& out) {
    const auto ts = cfg.list("experiment.times", dyadic(0, 6));
    auto g = bismut::gramian_bound_check(ex.model, ts);
    CsvTable t;
    t.header = {"t", "norm_Qinv_t3"};
    double lo = INFINITY;
    for (std::size_t i = 0; i < g.t.size(); ++i) {
        t.add({fmt(g.t[i]), fmt(g.scaled[i])});
        lo = std::min(lo, g.scaled[i]);
    }
    out.csv("gramian.csv", t);
    out.say("gramian-inverse-scaling", "||Q_t^{-1}|| t^3 in [" + num(lo, 12) + ", " + num(g.sup, 12) + "] over " +
                                           std::to_string(g.t.size()) + " times");
    if (ex.model.is_spectral()) {
        CsvTable h;
        h.header = {"gap", "value", "bound"};
        bool ok = true;
        for (double gap : dyadic(3, 8)) {
            auto r = linear_flow::hs_noise_integral(ex.model, 0.0, gap);
            h.add({fmt(gap), fmt(r.value_with_tail), fmt(r.bound)});
            ok = ok && r.value_with_tail <= r.bound;
        }
        out.csv("hs_noise.csv", h);
        out.say("hs-noise-bound", std::string("value below c2 (t-s)^delta at every gap: ") + (ok ? "yes" : "no"));
    }
}

regularization::GridSpec grid_from(const ScenarioConfig& cfg, const std::string& sec, std::vector<int> axes,
                                   double T) {
    const double lo = cfg.num(sec + ".lo", -4.0), hi = cfg.num(sec + ".hi", 4.0);
    auto g = regularization::GridSpec::uniform(std::move(axes), lo, hi, static_cast<int>(cfg.integer(sec + ".points", 65)),
                                               T, static_cast<int>(cfg.integer(sec + ".times", 33)));
    g.gh_points = static_cast<int>(cfg.integer(sec + ".gh_points", g.gh_points));
    g.time_points = static_cast<int>(cfg.integer(sec + ".time_points", g.time_points));
    return g;
}

void picard_lambda_sweep(const ScenarioConfig& cfg, const model::Example& ex, Outputs& out) {
    using namespace regularization;
    const auto& M = ex.model;
    const double T = cfg.num("experiment.T", 1.0);
    const int m = M.m();

    // Doubling search on the full (x, y) grid.
    GridSpec g = grid_from(cfg, "grid", {0, m}, T);
    g.gh_points = static_cast<int>(cfg.integer("grid.gh_points", 5));
    auto search = find_lambda(M, ex.drift, g, cfg.num("experiment.tol", 1e-6),
                              static_cast<int>(cfg.integer("experiment.max_iter", 40)),
                              cfg.num("experiment.lambda_start", 16.0));
    const auto& rep = search.result.report;
    double fmax = 0.0;
    for (double f : rep.factors) fmax = std::max(fmax, f);
    out.csv("picard_report.csv", io::picard_report_csv(rep));
    out.bin("field.bin", io::to_columnar(search.result.field));
    out.say("picard-contraction", "lambda " + num(search.lambda) + " after " + std::to_string(search.tried.size()) +
                                      " trials; largest contraction factor " + num(fmax, 4));

    // Constant drift: the fixed point is known in closed form.
    {
        const double lam = search.lambda;
        model::DriftParams cp;
        cp.amplitude = cfg.num("experiment.constant", 1.0);
        auto bc = model::make_drift("constant", m, M.d(), cp);
        GridSpec g1 = GridSpec::uniform({m}, -2, 2, 9, T, 17);
        auto r = picard_solve(M, bc, lam, g1, 1e-12, 40);
        auto exact = AnalyticField::constant_drift(Vec::Constant(M.d(), cp.amplitude), lam, T);
        double err = 0.0;
        for (std::size_t it = 0; it < r.field.n_times(); ++it)
            for (std::size_t ip = 0; ip < r.field.n_points(); ++ip) {
                const Vec v = exact.value(g1.times[it], r.field.node_state(ip));
                for (int c = 0; c < M.d(); ++c) err = std::max(err, std::abs(r.field.at(it, ip, c) - v(c)));
            }
        out.say("picard-contraction", "constant drift: max |u - u_exact| = " + num(err, 3));
    }

    // Decay in lambda on a graded one-dimensional grid.
    model::DriftParams sp;
    sp.amplitude = -1.0;
    sp.eps = 0.001;
    sp = drift_params(cfg, "sweep", sp);
    auto bs = model::make_drift(cfg.str("sweep.family", "steep_tanh"), m, M.d(), sp);
    GridSpec gs;
    gs.axes = {m};
    gs.nodes = {graded_nodes(cfg.num("sweep.lo", -4.0), cfg.num("sweep.hi", 4.0), 0.0, cfg.num("sweep.fine", 0.0004),
                             cfg.num("sweep.ratio", 1.06))};
    gs.times = uniform_nodes(0.0, T, static_cast<int>(cfg.integer("sweep.times", 33)));
    gs.time_points = static_cast<int>(cfg.integer("sweep.time_points", 6));
    const auto lambdas = cfg.list("sweep.lambdas", {16, 32, 64, 128, 256, 512, 1024});
    CsvTable t;
    t.header = {"lambda", "iterations", "sup_u", "sup_grad2", "norm"};
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double lam : lambdas) {
        auto r = picard_solve(M, bs, lam, gs, cfg.num("sweep.tol", 1e-8), 60);
        const double H = r.report.sup_u + r.report.sup_grad2;
        t.add({fmt(lam), std::to_string(r.report.iterations), fmt(r.report.sup_u), fmt(r.report.sup_grad2), fmt(H)});
        const double x = std::log(lam), y = std::log(H);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    const double n = static_cast<double>(lambdas.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    out.csv("lambda_sweep.csv", t);
    out.say("lambda-decay", "slope of log(sup|u| + sup|grad2 u|) vs log lambda: " + num(slope, 4) + " (exponent -0.5)");
}

void galerkin_wave(const ScenarioConfig& cfg, const model::Example& ex, Outputs& out) {
    using namespace regularization;
    const auto& M = ex.model;
    const double T = cfg.num("experiment.T", 1.0);
    GridSpec g = grid_from(cfg, "grid", {0, M.m()}, T);
    const double lam = cfg.num("experiment.lambda", 16.0);
    const auto ns = ints(cfg, "experiment.n", {2, 4, 8});
    const int n_ref = static_cast<int>(cfg.integer("experiment.n_reference", M.d()));
    CsvTable t;
    t.header = {"n", "n_reference", "value_gap", "grad_gap"};
    std::vector<double> vg, gg;
    for (int n : ns) {
        auto r = galerkin_compare(M, ex.drift, lam, n, n_ref, g, cfg.num("experiment.tol", 1e-8),
                                  static_cast<int>(cfg.integer("experiment.max_iter", 40)));
        t.add({std::to_string(n), std::to_string(n_ref), fmt(r.value_gap), fmt(r.grad_gap)});
        vg.push_back(r.value_gap);
        gg.push_back(r.grad_gap);
    }
    out.csv("galerkin.csv", t);
    std::string line = "value gaps";
    for (double v : vg) line += " " + num(v, 4);
    line += ", gradient gaps";
    for (double v : gg) line += " " + num(v, 4);
    line += std::string("; monotone: ") + (decreasing(vg) && decreasing(gg) ? "yes" : "no");
    out.say("galerkin-limit", line);
}

void uniqueness_rough(const ScenarioConfig& cfg, const model::Example& ex, Outputs& out) {
    const auto& M = ex.model;
    const std::uint64_t seed = cfg.seed();
    const double T = cfg.num("experiment.T", 1.0);
    const Vec z0 = start_point(cfg, M.n(), "experiment.z0", 0.0);
    const auto steps = ints(cfg, "experiment.n_steps", {256, 1024, 4096});
    const auto perts = cfg.list("experiment.perturbations", {0.0, 1e-2, 1e-3, 1e-4});
    CsvTable t;
    t.header = {"perturbation", "n_steps", "sup_gap", "terminal_gap", "blew_up", "blowup_time"};
    std::vector<double> finest;
    for (double e : perts) {
        auto rows = sde::uniqueness_experiment(M, ex.drift, z0, e, T, steps, seed);
        for (const auto& r : rows)
            t.add({fmt(e), std::to_string(r.n_steps), fmt(r.sup_gap), fmt(r.terminal_gap), r.blew_up ? "1" : "0",
                   r.blowup_time ? fmt(*r.blowup_time) : ""});
        finest.push_back(rows.back().terminal_gap);
    }
    out.csv("uniqueness.csv", t);
    std::string line = "terminal gaps at " + std::to_string(steps.back()) + " steps:";
    for (std::size_t i = 0; i < perts.size(); ++i) line += " " + num(perts[i], 2) + "->" + num(finest[i], 4);
    out.say("pathwise-uniqueness", line);
    if (out.wants("bin"))
        out.bin("trajectory.bin", io::to_columnar(sde::integrate_mild(M, ex.drift, z0, T, steps.back(), seed)));
}

void representation_residual(const ScenarioConfig& cfg, const model::Example& ex, Outputs& out) {
    using namespace regularization;
    const auto& M = ex.model;
    const std::uint64_t seed = cfg.seed();
    const double T = cfg.num("experiment.T", 1.0);
    const double lam = cfg.num("experiment.lambda", 16.0);
    const Vec z0 = start_point(cfg, M.n(), "experiment.z0", 0.0);
    const auto steps = ints(cfg, "experiment.n_steps", {128, 256, 512, 1024, 2048});
    const int n_paths = static_cast<int>(cfg.integer("experiment.n_paths", 1024));

    CsvTable t;
    t.header = {"drift", "n_steps", "residual", "ratio"};
    auto record = [&](const std::string& name, const sde::ResidualSweep& sw) {
        for (std::size_t i = 0; i < sw.n_steps.size(); ++i)
            t.add({name, std::to_string(sw.n_steps[i]), fmt(sw.residual[i]), i >= 1 ? fmt(sw.ratios[i - 1]) : ""});
        double rmin = INFINITY;
        for (double r : sw.ratios) rmin = std::min(rmin, r);
        out.say("representation-identity", name + ": residual " + num(sw.residual.front(), 4) + " -> " +
                                               num(sw.residual.back(), 4) + ", smallest ratio per doubling " +
                                               num(rmin, 4));
    };

    model::DriftParams cp;
    cp.amplitude = cfg.num("experiment.constant", 1.0);
    auto bc = model::make_drift("constant", M.m(), M.d(), cp);
    auto exact = AnalyticField::constant_drift(Vec::Constant(M.d(), cp.amplitude), lam, T);
    record("constant", sde::residual_sweep(M, bc, z0, exact, lam, T, steps, n_paths, seed));

    GridSpec g;
    g.axes.clear();
    for (int i = 0; i < M.d(); ++i) g.axes.push_back(M.m() + i);
    const auto nodes = uniform_nodes(cfg.num("grid.lo", -5.0), cfg.num("grid.hi", 5.0),
                                     static_cast<int>(cfg.integer("grid.points", 401)));
    g.nodes.assign(g.axes.size(), nodes);
    g.times = uniform_nodes(0.0, T, static_cast<int>(cfg.integer("grid.times", 65)));
    auto sol = picard_solve(M, ex.drift, lam, g, cfg.num("experiment.tol", 1e-10), 60);
    out.csv("picard_report.csv", io::picard_report_csv(sol.report));
    out.bin("field.bin", io::to_columnar(sol.field));
    record(ex.drift.name, sde::residual_sweep(M, ex.drift, z0, sol.field, lam, T, steps, n_paths, seed, &sol.field));
    out.csv("residual.csv", t);
}

void bihari_envelope(const ScenarioConfig& cfg, const model::Example& ex, Outputs& out) {
    const auto& M = ex.model;
    const double T = cfg.num("experiment.T", 1.0);
    const Vec z0 = start_point(cfg, M.n(), "experiment.z0", 0.5);
    const int n_steps = static_cast<int>(cfg.integer("experiment.n_steps", 256));
    const int n_paths = static_cast<int>(cfg.integer("experiment.n_paths", 1000));
    auto rep = sde::envelope_experiment(M, ex.drift, z0, T, n_steps, n_paths, cfg.seed());
    CsvTable t;
    t.header = {"t", "bound_path0"};
    for (std::size_t i = 0; i < rep.curve.t.size(); ++i) t.add({fmt(rep.curve.t[i]), fmt(rep.curve.bound[i])});
    out.csv("bihari_curve.csv", t);
    CsvTable s;
    s.header = {"n_paths", "blowups", "eta_T", "C_env", "worst_ratio", "all_below"};
    s.add({std::to_string(rep.n_paths), std::to_string(rep.blowups), fmt(rep.eta_T), fmt(rep.C_env),
           fmt(rep.worst_ratio), rep.all_below ? "1" : "0"});
    out.csv("envelope.csv", s);
    out.say("bihari-envelope", std::to_string(rep.n_paths) + " paths, " + std::to_string(rep.blowups) +
                                   " blow-ups, largest sup|Y - xi|^2 / bound = " + num(rep.worst_ratio, 4));
    if (!rep.curve.warning.empty()) out.summary.push_back("warning: " + rep.curve.warning);
}

using Body = void (*)(const ScenarioConfig&, const model::Example&, Outputs&);

Body body_of(const std::string& name) {
    if (name == "kinetic_bismut") return kinetic_bismut;
    if (name == "gradient_scaling") return gradient_scaling;
    if (name == "gramian_sweep") return gramian_sweep;
    if (name == "picard_lambda_sweep") return picard_lambda_sweep;
    if (name == "galerkin_wave") return galerkin_wave;
    if (name == "uniqueness_rough") return uniqueness_rough;
    if (name == "representation_residual") return representation_residual;
    if (name == "bihari_envelope") return bihari_envelope;
    throw ConfigError("experiment.scenario", "unknown scenario '" + name + "'");
}

}  // namespace

const std::vector<Anchor>& anchors() { return kAnchors; }

const Anchor& anchor(const std::string& id) {
    for (const auto& a : kAnchors)
        if (a.id == id) return a;
    throw DomainError("unknown anchor '" + id + "'");
}

const std::vector<ScenarioInfo>& scenarios() { return kScenarios; }

std::string scenarios_csv() {
    CsvTable t;
    t.header = {"name", "anchor", "description"};
    for (const auto& s : kScenarios) t.add({s.name, s.anchor_id, s.description});
    return io::to_string(t);
}

std::string scenarios_text() {
    std::ostringstream os;
    for (const auto& s : kScenarios) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%-24s %-28s %s\n", s.name.c_str(), s.anchor_id.c_str(), s.description.c_str());
        os << buf;
    }
    return os.str();
}

RunResult run(const ScenarioConfig& cfg) {
    RunResult res;
    try {
        validate_config(cfg);
        const std::string name = cfg.scenario();
        Body body = body_of(name);
        model::Example ex = build_model(cfg);
        model::require_hypotheses(ex.model);

        Outputs out;
        out.dir = cfg.output_dir() + "/" + name;
        out.formats = cfg.formats();
        out.summary.push_back("scenario " + name + " seed " + std::to_string(cfg.seed()));
        body(cfg, ex, out);

        std::string text;
        for (const auto& l : out.summary) text += l + "\n";
        out.staged.push_back({"summary.txt", [text](const std::string& p) { io::write_file_atomic(p, text); }});
        for (const auto& [file, write] : out.staged) {
            const std::string path = out.dir + "/" + file;
            write(path);
            res.files.push_back(path);
        }
        res.summary = std::move(out.summary);
        res.exit_code = 0;
    } catch (const ConfigError& e) {
        res.exit_code = 2;
        res.message = std::string("invalid config: ") + e.what();
    } catch (const HypothesisViolation& e) {
        res.exit_code = 3;
        res.message = std::string("hypothesis violated: ") + e.what();
    } catch (const std::exception& e) {
        res.exit_code = 1;
        res.message = std::string("run failed: ") + e.what();
    }
    return res;
}

RunResult run_file(const std::string& path) {
    try {
        return run(load_config(path));
    } catch (const ConfigError& e) {
        RunResult r;
        r.exit_code = 2;
        r.message = std::string("invalid config: ") + e.what();
        return r;
    }
}

}  // namespace degsde::cli
