#include "degsde/error.hpp"
#include "degsde/quadrature.hpp"
#include "degsde/sde.hpp"

#include <cmath>

namespace degsde::sde {

namespace {

// Gamma on a table in u = log r, cumulative from r = 1.
struct GammaTable {
    std::vector<double> u, G;
};

double panel(const std::function<double(double)>& ell, double C, double a, double b) {
    if (a == b) return 0.0;
    if (a > b) return -panel(ell, C, b, a);
    auto f = [&](double u) {
        const double r = std::exp(u);
        return r / (2.0 * ell(C + C * r));
    };
    return quad::integrate_scalar(f, a, b, 1e-10);
}

}  // namespace

double bihari_gamma(const std::function<double(double)>& ell, double C_env, double s) {
    if (!(s > 0)) throw DomainError("bihari_gamma: s must be positive");
    const double L = std::log(s);
    // Unit panels in log r keep the integrand well resolved.
    double total = 0.0;
    const int n = static_cast<int>(std::ceil(std::abs(L)));
    for (int i = 0; i < n; ++i) {
        const double a = L * i / n, b = L * (i + 1) / n;
        total += panel(ell, C_env, a, b);
    }
    return total;
}

BihariCurve bihari_bound(const std::function<double(double)>& ell, double eta_T, double T, double C_env,
                         int n_points) {
    if (!(eta_T > 0)) throw DomainError("bihari_bound: eta_T must be positive");
    if (!(C_env > 1)) throw DomainError("bihari_bound: C_env must exceed 1");
    if (!(T > 0) || n_points < 2) throw DomainError("bihari_bound: need T > 0 and at least 2 points");
    if (!(ell(1.0) > 0)) throw DomainError("bihari_bound: ell must be positive");
    BihariCurve out;
    // Table from log(eta) up to log(1e150) in steps of 1/4.
    const double u0 = std::log(eta_T), top = std::log(1e150);
    std::vector<double> us{u0}, Gs{bihari_gamma(ell, C_env, eta_T)};
    while (us.back() < top) {
        const double a = us.back(), b = std::min(top, a + 0.25);
        Gs.push_back(Gs.back() + panel(ell, C_env, a, b));
        us.push_back(b);
    }
    out.gamma_eta = Gs.front();
    // Saturation test: the last 20 units of log r add under 1% of the growth.
    {
        const std::size_t n = us.size();
        const std::size_t back = std::min<std::size_t>(n - 1, 80);
        const double tail = Gs[n - 1] - Gs[n - 1 - back];
        if (tail < 0.01 * (Gs[n - 1] - Gs[0])) {
            out.non_osgood_warning = true;
            out.warning = "integral of 1/ell appears to converge; the bound may be infinite";
        }
    }
    for (int j = 0; j < n_points; ++j) {
        const double t = T * j / (n_points - 1);
        const double target = out.gamma_eta + t;
        out.t.push_back(t);
        if (j == 0) {
            out.bound.push_back(eta_T);
            continue;
        }
        if (target > Gs.back()) {
            out.bound.push_back(INFINITY);
            out.non_osgood_warning = true;
            if (out.warning.empty()) out.warning = "bound exceeds the tabulated range";
            continue;
        }
        std::size_t k = std::upper_bound(Gs.begin(), Gs.end(), target) - Gs.begin();
        k = std::max<std::size_t>(k, 1);
        // Bisection in u on the panel [us[k-1], us[k]].
        double lo = us[k - 1], hi = us[k];
        const double base = Gs[k - 1];
        for (int it = 0; it < 60 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (base + panel(ell, C_env, us[k - 1], mid) < target)
                lo = mid;
            else
                hi = mid;
        }
        out.bound.push_back(std::exp(0.5 * (lo + hi)));
    }
    return out;
}

}  // namespace degsde::sde
