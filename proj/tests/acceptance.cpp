// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include "degsde/bismut.hpp"
#include "degsde/linear_flow.hpp"
#include "degsde/regularization.hpp"
#include "degsde/sde.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

using namespace degsde;
using namespace degsde::regularization;

namespace {

using clk = std::chrono::steady_clock;

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail, double secs) {
    std::printf("criterion %2d %-28s %s  %s  [%.1f s]\n", id, name, ok ? "PASS" : "FAIL", detail.c_str(), secs);
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string f(const char* fmt, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, fmt, a);
    return buf;
}

double since(clk::time_point t0) { return std::chrono::duration<double>(clk::now() - t0).count(); }

// Runs one criterion and turns an exception into a FAIL line.
void criterion(int id, const char* name, const std::function<bool(std::string&)>& body) {
    auto t0 = clk::now();
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail += std::string(" exception: ") + e.what();
    }
    report(id, name, ok, detail, since(t0));
}

model::SpectralModel kinetic() { return model::build_example("kinetic", {}).model; }

std::vector<double> dyadic(int lo, int hi) {
    std::vector<double> g;
    for (int j = hi; j >= lo; --j) g.push_back(std::ldexp(1.0, -j));
    return g;
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

}  // namespace

int main() {
    const auto M = kinetic();

    criterion(1, "gramian scaling", [&](std::string& d) {
        auto t0 = clk::now();
        auto g = bismut::gramian_bound_check(M, dyadic(0, 6));
        const double secs = since(t0);
        double worst = 0.0;
        for (double v : g.scaled) worst = std::max(worst, std::abs(v - 6.0) / 6.0);
        d = "max rel err " + f("%.2e", worst) + ", runtime " + f("%.3f s", secs);
        return g.t.size() == 7 && worst <= 1e-9 && secs < 1.0;
    });

    criterion(2, "bismut vs analytic", [&](std::string& d) {
        auto t0 = clk::now();
        Vec z(2);
        z << 0.5, -0.3;
        std::vector<Observable> fs = {[](const Vec& v) { return v(0); }, [](const Vec& v) { return v(1); },
                                      [](const Vec& v) { return v(0) * v(0); }, [](const Vec& v) { return v(1) * v(1); },
                                      [](const Vec& v) { return v(0) * v(1); }};
        std::vector<Vec> vs = {Vec::Unit(2, 0), Vec::Unit(2, 1)};
        auto est = bismut::bismut_gradient_batch(M, 0.0, 1.0, fs, z, vs, 100000, 64, 20240601);
        // Derivatives of Gaussian moments: only the mean F z moves with z.
        const Mat F = linear_flow::flow_matrix(M, 1.0);
        const Vec mu = F * z;
        double worst = 0.0;
        for (std::size_t j = 0; j < vs.size(); ++j) {
            const Vec a = F * vs[j];
            const double exact[] = {a(0), a(1), 2 * mu(0) * a(0), 2 * mu(1) * a(1), a(0) * mu(1) + mu(0) * a(1)};
            for (std::size_t i = 0; i < fs.size(); ++i)
                worst = std::max(worst, std::abs(est[i][j].value - exact[i]) / est[i][j].stderr_);
        }
        const double secs = since(t0);
        d = "max |err|/stderr " + f("%.2f", worst) + " over 10 pairs at 1e5 paths, runtime " + f("%.1f s", secs);
        return worst <= 5.0 && secs < 30.0;
    });

    criterion(3, "coupling and girsanov", [&](std::string& d) {
        auto r = bismut::verify_coupling(M, 0.0, 1.0, Vec::Unit(2, 0), 0.1, 100000, 64, 5);
        const double z = std::abs(r.girsanov_mean.value - 1.0) / r.girsanov_mean.stderr_;
        d = "terminal gap " + f("%.2e", r.terminal_gap) + ", girsanov mean " + f("%.5f", r.girsanov_mean.value) +
            " (" + f("%.2f", z) + " stderr)";
        return r.terminal_gap <= 1e-8 && z <= 5.0;
    });

    criterion(4, "gradient scaling exponents", [&](std::string& d) {
        auto t0 = clk::now();
        Observable sign_x = [](const Vec& v) { return v(0) > 0 ? 1.0 : (v(0) < 0 ? -1.0 : 0.0); };
        bismut::ScalingBudget b{20000, 64, 7};
        auto rx = bismut::scaling_exponent(M, sign_x, bismut::Component::x, dyadic(3, 8), b);
        auto ry = bismut::scaling_exponent(M, sign_x, bismut::Component::y, dyadic(3, 8), b);
        const double secs = since(t0);
        d = "x slope " + f("%.3f", rx.slope) + ", y slope " + f("%.3f", ry.slope) + ", runtime " + f("%.1f s", secs);
        return std::abs(rx.slope + 1.5) <= 0.2 && std::abs(ry.slope + 0.5) <= 0.2 && secs < 300.0;
    });

    criterion(5, "noise integral bound", [&](std::string& d) {
        auto W = model::build_example("wave", {}).model;
        bool below = true;
        double worst = 0.0;
        for (int j = 0; j <= 12; ++j) {
            auto r = linear_flow::hs_noise_integral(W, 0.0, std::ldexp(1.0, -j));
            below = below && r.value_with_tail <= r.bound;
            worst = std::max(worst, r.value_with_tail / r.bound);
        }
        model::ExampleParams p;
        p.A1 = Mat::Constant(1, 1, -1.0);
        p.A2 = Mat::Constant(1, 1, -1.0);
        auto S = model::build_example("kinetic", p).model;
        const double single = linear_flow::hs_noise_integral(S, 0.0, 0.5).value;
        const double err = std::abs(single - (1 - std::exp(-1.0)) / 2);
        d = "max value/bound " + f("%.3f", worst) + " over 13 gaps, single-mode err " + f("%.1e", err);
        return below && err <= 1e-12;
    });

    FieldGrid field2d(1, 1, GridSpec::uniform({0, 1}, -4, 4, 3, 1.0, 2));
    double field_lambda = 16.0;
    criterion(6, "picard fixed point", [&](std::string& d) {
        auto t0 = clk::now();
        model::ExampleParams p;
        p.drift = "rough";
        auto ex = model::build_example("kinetic", p);
        GridSpec g = GridSpec::uniform({0, 1}, -4, 4, 65, 1.0, 33);
        g.gh_points = 5;
        auto s = find_lambda(ex.model, ex.drift, g, 1e-6, 40);
        double fmax = 0.0;
        for (double x : s.result.report.factors) fmax = std::max(fmax, x);
        field2d = s.result.field;
        field_lambda = s.lambda;

        auto bc = model::make_drift("constant", 1, 1);
        GridSpec g1 = GridSpec::uniform({1}, -2, 2, 9, 1.0, 17);
        auto rc = picard_solve(M, bc, s.lambda, g1, 1e-12, 40);
        auto exact = AnalyticField::constant_drift(Vec::Ones(1), s.lambda, 1.0);
        double cerr = 0.0;
        for (std::size_t it = 0; it < rc.field.n_times(); ++it)
            for (std::size_t ip = 0; ip < rc.field.n_points(); ++ip)
                cerr = std::max(cerr, std::abs(rc.field.at(it, ip, 0) -
                                               exact.value(g1.times[it], rc.field.node_state(ip))(0)));

        model::DriftParams sp;
        sp.amplitude = -1.0;
        sp.eps = 0.001;
        auto bs = model::make_drift("steep_tanh", 1, 1, sp);
        GridSpec gs;
        gs.axes = {1};
        gs.nodes = {graded_nodes(-4, 4, 0.0, 0.0004, 1.06)};
        gs.times = uniform_nodes(0, 1, 33);
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (double lam = 16; lam <= 1024; lam *= 2, ++n) {
            auto r = picard_solve(M, bs, lam, gs, 1e-8, 60);
            const double x = std::log(lam), y = std::log(r.report.sup_u + r.report.sup_grad2);
            sx += x, sy += y, sxx += x * x, sxy += x * y;
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        const double secs = since(t0);
        d = "lambda " + f("%g", s.lambda) + " max factor " + f("%.3f", fmax) + ", constant err " + f("%.1e", cerr) +
            ", slope " + f("%.3f", slope) + ", runtime " + f("%.0f s", secs);
        return fmax <= 0.5 && !s.result.report.factors.empty() && cerr <= 1e-8 && slope >= -0.6 && slope <= -0.4 &&
               secs < 120.0;
    });

    criterion(7, "transform invertibility", [&](std::string& d) {
        // The round trip is only claimed for fields whose y-Lipschitz bound is
        // below 1; raise lambda on the same grid until that holds.
        model::ExampleParams p;
        p.drift = "rough";
        auto ex = model::build_example("kinetic", p);
        double lam = field_lambda;
        double L = field2d.grad2_bound();
        for (int k = 0; k < 6 && !(L < 1.0); ++k) {
            lam *= 2;
            field2d = picard_solve(ex.model, ex.drift, lam, field2d.spec(), 1e-6, 40).field;
            L = field2d.grad2_bound();
        }
        if (!(L < 1.0)) {
            d = "gradient bound " + f("%.3f", L) + " still >= 1 at lambda " + f("%g", lam);
            return false;
        }
        Rng rng(31);
        double worst = 0.0;
        for (int i = 0; i < 2000; ++i) {
            Vec z(2);
            z << -4 + 8 * rng.uniform(), -4 + 8 * rng.uniform();
            const double s = rng.uniform();
            worst = std::max(worst, (theta_inverse(field2d, s, theta_forward(field2d, s, z), 1e-13) - z).norm());
        }
        d = "lambda " + f("%g", lam) + ", gradient bound " + f("%.3f", L) + ", max round-trip err " +
            f("%.1e", worst) + " over 2000 points";
        return worst <= 1e-9;
    });

    criterion(8, "galerkin convergence", [&](std::string& d) {
        model::ExampleParams p;
        p.drift = "profile";
        auto ex = model::build_example("wave", p);
        GridSpec g = GridSpec::uniform({0, ex.model.m()}, -4, 4, 33, 1.0, 17);
        std::vector<double> vg, gg;
        for (int n : {2, 4, 8}) {
            auto r = galerkin_compare(ex.model, ex.drift, 16, n, ex.model.d(), g, 1e-8, 40);
            vg.push_back(r.value_gap);
            gg.push_back(r.grad_gap);
        }
        d = "value gaps " + f("%.3e", vg[0]) + f(" %.3e", vg[1]) + f(" %.3e", vg[2]) + ", gradient gaps " +
            f("%.3e", gg[0]) + f(" %.3e", gg[1]) + f(" %.3e", gg[2]);
        return strictly_decreasing(vg) && strictly_decreasing(gg);
    });

    criterion(9, "representation identity", [&](std::string& d) {
        const std::vector<int> steps = {128, 256, 512, 1024, 2048};
        const double lam = 16.0;
        auto bc = model::make_drift("constant", 1, 1);
        auto uc = AnalyticField::constant_drift(Vec::Ones(1), lam, 1.0);
        auto sc = sde::residual_sweep(M, bc, Vec::Zero(2), uc, lam, 1.0, steps, 1024, 7);

        auto br = model::make_drift("rough_y", 1, 1);
        GridSpec g;
        g.axes = {1};
        g.nodes = {uniform_nodes(-5, 5, 401)};
        g.times = uniform_nodes(0, 1, 65);
        auto ur = picard_solve(M, br, lam, g, 1e-10, 60);
        auto sr = sde::residual_sweep(M, br, Vec::Zero(2), ur.field, lam, 1.0, steps, 1024, 7, &ur.field);
        double rc = INFINITY, rr = INFINITY;
        for (double r : sc.ratios) rc = std::min(rc, r);
        for (double r : sr.ratios) rr = std::min(rr, r);
        d = "min ratio constant " + f("%.3f", rc) + ", rough " + f("%.3f", rr);
        return strictly_decreasing(sc.residual) && strictly_decreasing(sr.residual) && rc >= 1.3 && rr >= 1.3;
    });

    criterion(10, "pathwise uniqueness", [&](std::string& d) {
        model::ExampleParams p;
        p.drift = "rough";
        auto ex = model::build_example("kinetic", p);
        const bool d1 = model::classify_modulus(ex.drift.phi, 1e-12).in_D1;
        const std::vector<int> steps = {256, 1024, 4096};
        auto zero = sde::uniqueness_experiment(ex.model, ex.drift, Vec::Zero(2), 0.0, 1.0, steps, 11);
        bool exact_zero = true;
        for (const auto& r : zero) exact_zero = exact_zero && r.sup_gap == 0.0 && r.terminal_gap == 0.0;
        std::vector<double> gaps;
        for (double e : {1e-2, 1e-3, 1e-4})
            gaps.push_back(sde::uniqueness_experiment(ex.model, ex.drift, Vec::Zero(2), e, 1.0, steps, 11).back().terminal_gap);
        d = std::string("modulus in D1: ") + (d1 ? "yes" : "no") + ", zero-perturbation gap exactly 0: " +
            (exact_zero ? "yes" : "no") + ", terminal gaps " + f("%.3e", gaps[0]) + f(" %.3e", gaps[1]) +
            f(" %.3e", gaps[2]);
        return d1 && exact_zero && strictly_decreasing(gaps);
    });

    criterion(11, "non-explosion envelope", [&](std::string& d) {
        model::ExampleParams p;
        p.drift = "dissipative";
        auto ex = model::build_example("kinetic", p);
        auto rep = sde::envelope_experiment(ex.model, ex.drift, Vec::Constant(2, 0.5), 1.0, 256, 1000, 9);
        d = std::to_string(rep.n_paths) + " paths, " + std::to_string(rep.blowups) + " blow-ups, worst ratio " +
            f("%.3f", rep.worst_ratio);
        return rep.n_paths == 1000 && rep.blowups == 0 && rep.all_below;
    });

    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
