#include "degsde/error.hpp"
#include "degsde/model.hpp"
#include "degsde/rng.hpp"

#include <cmath>

namespace degsde::model {

Vec DriftSpec::operator()(double t, const Vec& z) const {
    return eval(t, z.head(m), z.segment(m, d));
}

double validate_drift_regularity(const DriftSpec& b, double ball_radius, long n_samples,
                                 std::uint64_t seed) {
    if (n_samples < 1) throw DomainError("validate_drift_regularity: n_samples must be >= 1");
    if (!(ball_radius > 0)) throw DomainError("validate_drift_regularity: ball_radius must be positive");
    const int n = b.m + b.d;
    double worst = -INFINITY;
    Vec z(n), zp(n), dir(n);
    for (long i = 0; i < n_samples; ++i) {
        Rng rng(seed, "model.drift_regularity", static_cast<std::uint64_t>(i));
        for (int c = 0; c < n; ++c) dir(c) = rng.normal();
        dir.normalize();
        // Half the base points uniform in the ball, half log-uniform in radius
        // so the neighbourhood of the origin is probed at every scale.
        double rad = rng.uniform() < 0.5 ? ball_radius * std::pow(rng.uniform(), 1.0 / n)
                                          : ball_radius * std::pow(10.0, -8.0 * rng.uniform());
        z = rad * dir;
        for (int c = 0; c < n; ++c) dir(c) = rng.normal();
        dir.normalize();
        double r = ball_radius * std::pow(10.0, -8.0 * rng.uniform());
        zp = z + r * dir;
        double nz = zp.norm();
        if (nz > ball_radius) zp *= ball_radius / nz;
        double t = rng.uniform();
        double dx = (z.head(b.m) - zp.head(b.m)).norm();
        double dy = (z.tail(b.d) - zp.tail(b.d)).norm();
        double diff = (b(t, z) - b(t, zp)).norm();
        double allowed = b.K * std::pow(dx, b.alpha) + b.phi(dy) + b.y_lipschitz * dy;
        worst = std::max(worst, diff - allowed);
    }
    return worst;
}

std::vector<std::string> drift_families() {
    return {"zero", "constant", "sine_x", "rough", "rough_y", "dissipative", "steep_tanh", "power_y", "profile"};
}

namespace {

std::function<double(double)> constant_fn(double c) {
    return [c](double) { return c; };
}

// Bounded drift: <b, y> <= S|y| <= S(1 + |y|^2)/2.
void bounded_growth(DriftSpec& s, double S) {
    double c = std::max(S, 1e-12);
    s.ell = [c](double r) { return 0.5 * c * (1.0 + r); };
    s.h = constant_fn(0.5 * c);
}

}  // namespace

DriftSpec make_drift(const std::string& family, int m, int d, const DriftParams& p) {
    if (m < 1 || d < 1) throw DomainError("make_drift: dimensions must be positive");
    DriftSpec s;
    s.name = family;
    s.m = m;
    s.d = d;
    s.alpha = p.alpha;
    s.phi = p.phi;
    const double A = p.amplitude;
    const double rd = std::sqrt(static_cast<double>(d));

    if (family == "zero") {
        s.eval = [d](double, const Vec&, const Vec&) { return Vec::Zero(d).eval(); };
        s.sup_norm = 0.0;
        s.ell = constant_fn(1.0);
        s.h = constant_fn(1.0);
    } else if (family == "constant") {
        Vec c = p.constant.size() == d ? p.constant : Vec::Constant(d, A);
        s.eval = [c](double, const Vec&, const Vec&) { return c; };
        s.sup_norm = c.norm();
        bounded_growth(s, c.norm());
    } else if (family == "sine_x") {
        s.eval = [A, m, d](double, const Vec& x, const Vec&) {
            Vec out(d);
            for (int i = 0; i < d; ++i) out(i) = A * std::sin(x(i % m));
            return out;
        };
        s.K = std::abs(A) * rd;
        s.sup_norm = std::abs(A) * rd;
        bounded_growth(s, *s.sup_norm);
    } else if (family == "rough") {
        // |x|^alpha sign(x) + phi(|y|) sign(y) per component; phi concave and
        // subadditive gives the declared constants below.
        Modulus phi = p.phi;
        double alpha = p.alpha;
        s.eval = [A, m, d, phi, alpha](double, const Vec& x, const Vec& y) {
            Vec out(d);
            for (int i = 0; i < d; ++i) {
                double xi = x(i % m), yi = y(i);
                double sx = xi > 0 ? 1.0 : (xi < 0 ? -1.0 : 0.0);
                double sy = yi > 0 ? 1.0 : (yi < 0 ? -1.0 : 0.0);
                out(i) = A * (std::pow(std::abs(xi), alpha) * sx + phi(std::abs(yi)) * sy);
            }
            return out;
        };
        double scale = std::abs(A) * rd;
        s.K = scale * std::pow(2.0, 1.0 - alpha);
        s.phi = Modulus::custom("2A*" + phi.name(), [phi, scale](double r) { return 2.0 * scale * phi(r); });
        double c = scale * (1.0 + phi(1.0));
        s.ell = [c](double r) { return c * (0.5 + 2.0 * r); };
        s.h = [c](double r) { return c * (1e-12 + r * r); };
    } else if (family == "dissipative") {
        // b = -y + A sin x + x/2. Young's inequality gives
        // <b(x, y + y'), y> <= A^2 d + |x|^2/4 + |y'|^2/2.
        s.eval = [A, m, d](double, const Vec& x, const Vec& y) {
            Vec out(d);
            for (int i = 0; i < d; ++i) {
                double xi = x(i % m);
                out(i) = -y(i) + A * std::sin(xi) + 0.5 * xi;
            }
            return out;
        };
        s.K = (std::abs(A) + 0.5) * rd;
        s.phi = Modulus::power(1.0, 0.5);
        s.y_lipschitz = 1.0;
        double c0 = A * A * d;
        s.ell = [c0](double r) { return std::max(c0, 1e-12) + 0.25 * r; };
        s.h = [](double r) { return 1e-12 + 0.5 * r * r; };
        if (m != d) throw DomainError("dissipative drift requires m = d");
    } else if (family == "steep_tanh") {
        double eps = p.eps;
        if (!(eps > 0)) throw DomainError("steep_tanh: eps must be positive");
        s.eval = [A, d, eps](double, const Vec&, const Vec& y) {
            Vec out(d);
            for (int i = 0; i < d; ++i) out(i) = A * std::tanh(y(i) / eps);
            return out;
        };
        s.K = 1.0;
        s.phi = Modulus::power(std::abs(A) * rd / eps, 1.0);
        s.sup_norm = std::abs(A) * rd;
        bounded_growth(s, *s.sup_norm);
    } else if (family == "power_y") {
        double pw = p.power;
        if (!(pw > 0 && pw <= 1)) throw DomainError("power_y: power must lie in (0, 1]");
        s.eval = [A, d, pw](double, const Vec&, const Vec& y) {
            Vec out(d);
            for (int i = 0; i < d; ++i) out(i) = A * std::pow(std::abs(y(i)), pw);
            return out;
        };
        s.K = 1.0;
        s.phi = Modulus::power(std::abs(A) * rd, pw);
        double c = std::abs(A) * rd;
        s.ell = [c](double r) { return c * (1.0 + r); };
        s.h = [c](double r) { return c * (1e-12 + r * r); };
    } else if (family == "rough_y") {
        // phi(|y|) sign(y) per component: bounded, no x dependence.
        Modulus phi = p.phi;
        s.eval = [A, d, phi](double, const Vec&, const Vec& y) {
            Vec out(d);
            for (int i = 0; i < d; ++i) {
                double yi = y(i);
                double sy = yi > 0 ? 1.0 : (yi < 0 ? -1.0 : 0.0);
                out(i) = A * phi(std::abs(yi)) * sy;
            }
            return out;
        };
        double scale = std::abs(A) * rd;
        s.K = 1.0;
        s.phi = Modulus::custom("2A*" + phi.name(), [phi, scale](double r) { return 2.0 * scale * phi(r); });
        s.sup_norm = scale * phi(1e6);
        bounded_growth(s, *s.sup_norm);
    } else if (family == "profile") {
        // b_i = w_i (sin(x_0) + tanh(y_0)) / 2: every output mode driven by
        // the leading coordinate pair.
        Vec w = p.mode_weights.size() == d ? p.mode_weights : Vec(d);
        if (p.mode_weights.size() != d)
            for (int i = 0; i < d; ++i) w(i) = A / (i + 1.0);
        s.eval = [w](double, const Vec& x, const Vec& y) {
            return (0.5 * (std::sin(x(0)) + std::tanh(y(0))) * w).eval();
        };
        s.K = w.norm();
        s.phi = Modulus::power(w.norm(), 0.5);
        s.sup_norm = w.norm();
        bounded_growth(s, w.norm());
    } else {
        throw DomainError("unknown drift family '" + family + "'");
    }
    return s;
}

}  // namespace degsde::model
