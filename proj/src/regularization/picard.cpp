#include "degsde/error.hpp"
#include "degsde/linalg.hpp"
#include "degsde/linear_flow.hpp"
#include "degsde/quadrature.hpp"
#include "degsde/regularization.hpp"
#include "degsde/rng.hpp"
#include "stencil.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace degsde::regularization {

namespace {

struct TimeRule {
    std::vector<double> h;  // r - s
    std::vector<double> w;  // includes dr = 2 tau dtau and e^{-lambda h}
};

// Panels in tau = sqrt(r - s) with breaks {0, 1, 2, 4, 8} u, u = 1/sqrt(lambda),
// then one panel up to sqrt(span).
TimeRule time_rule(double lambda, double span, int points) {
    TimeRule tr;
    if (!(span > 0)) return tr;
    const double top = std::sqrt(span);
    double u = top / 8.0;
    if (lambda > 0) u = std::min(u, 1.0 / std::sqrt(lambda));
    std::vector<double> breaks{0.0};
    for (double k : {1.0, 2.0, 4.0, 8.0}) {
        if (k * u >= top) break;
        breaks.push_back(k * u);
    }
    breaks.push_back(top);
    const quad::Rule gl = quad::gauss_legendre(points);
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        const double a = breaks[p], b = breaks[p + 1];
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            const double tau = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[i];
            const double h = tau * tau;
            tr.h.push_back(h);
            tr.w.push_back(0.5 * (b - a) * gl.weights[i] * 2.0 * tau * std::exp(-lambda * h));
        }
    }
    return tr;
}

// Tensor Gauss-Hermite points in `dim` dimensions.
void gh_tensor(int dim, int q, std::vector<double>& pts, std::vector<double>& wts) {
    const quad::Rule r = quad::gauss_hermite(q);
    pts.clear();
    wts.clear();
    long total = 1;
    for (int k = 0; k < dim; ++k) total *= q;
    for (long i = 0; i < total; ++i) {
        long rest = i;
        double w = 1.0;
        for (int k = 0; k < dim; ++k) {
            const int j = static_cast<int>(rest % q);
            rest /= q;
            pts.push_back(r.nodes[j]);
            w *= r.weights[j];
        }
        wts.push_back(w);
    }
}

// One quadrature node in r for a fixed start time: where r falls in the time
// grid, the mean map on the active coordinates and the Gaussian offsets.
struct PlanNode {
    double w;
    int j;
    double t;
    Mat F;                     // k x k
    double sd = 0.0;           // one active axis: standard deviation
    std::vector<double> off;   // [gh point][k]
    std::vector<double> gw;    // gh weights
};

// Exact expectation of the piecewise-linear interpolant of `v` (node values
// blended in time with weight t) under N(mu, sd^2); constant beyond the ends.
void gauss_piecewise_linear(const std::vector<double>& x, double mu, double sd, const double* G0, const double* G1,
                            double t, double w, int d, double* acc) {
    const int n = static_cast<int>(x.size());
    auto val = [&](int i, int c) { return (1.0 - t) * G0[i * d + c] + t * G1[i * d + c]; };
    if (!(sd > 0)) {
        int j;
        double tt;
        detail::locate(x, mu, j, tt);
        for (int c = 0; c < d; ++c) acc[c] += w * ((1.0 - tt) * val(j, c) + tt * val(j + 1, c));
        return;
    }
    const double lo = mu - 9.0 * sd, hi = mu + 9.0 * sd;
    int j0 = static_cast<int>(std::upper_bound(x.begin(), x.end(), lo) - x.begin()) - 1;
    int j1 = static_cast<int>(std::lower_bound(x.begin(), x.end(), hi) - x.begin());
    j0 = std::clamp(j0, 0, n - 1);
    j1 = std::clamp(j1, 0, n - 1);
    constexpr double kInvSqrt2Pi = 0.3989422804014327;
    auto Phi = [](double z) { return 0.5 * std::erfc(-z * 0.7071067811865476); };
    double zl = (x[j0] - mu) / sd;
    double Pl = Phi(zl), pl = kInvSqrt2Pi * std::exp(-0.5 * zl * zl);
    if (j0 == 0)
        for (int c = 0; c < d; ++c) acc[c] += w * Pl * val(0, c);
    for (int j = j0; j < j1; ++j) {
        const double zr = (x[j + 1] - mu) / sd;
        const double Pr = Phi(zr), pr = kInvSqrt2Pi * std::exp(-0.5 * zr * zr);
        const double P = Pr - Pl;
        const double M1 = mu * P + sd * (pl - pr);
        const double dx = x[j + 1] - x[j];
        const double a = (x[j + 1] * P - M1) / dx, b = (M1 - x[j] * P) / dx;
        for (int c = 0; c < d; ++c) acc[c] += w * (a * val(j, c) + b * val(j + 1, c));
        Pl = Pr;
        pl = pr;
    }
    if (j1 == n - 1)
        for (int c = 0; c < d; ++c) acc[c] += w * (1.0 - Pl) * val(n - 1, c);
}

void check_closed(const SpectralModel& model, const std::vector<int>& axes) {
    const Mat A = model.block_operator();
    std::vector<bool> in(model.n(), false);
    for (int a : axes) in[a] = true;
    for (int a : axes)
        for (int b = 0; b < model.n(); ++b)
            if (!in[b] && A(a, b) != 0.0)
                throw CapabilityError("picard: active coordinates are not closed under the linear flow");
}

class Solver {
public:
    Solver(const SpectralModel& model, const DriftSpec& b, double lambda, const GridSpec& grid)
        : model_(model), b_(b), lambda_(lambda), field_(model.m(), model.d(), grid) {
        if (!(lambda >= 0)) throw DomainError("picard: lambda must be >= 0");
        if (b.m != model.m() || b.d != model.d()) throw DomainError("picard: drift dimensions do not match the model");
        check_closed(model, grid.axes);
        build_plan();
        cache_drift();
    }

    PicardResult run(double tol, int max_iter, bool screen) {
        const GridSpec& g = field_.spec();
        const std::size_t nt = field_.n_times(), np = field_.n_points();
        const int d = model_.d();
        FieldGrid prev = field_;
        PicardReport rep;
        rep.lambda = lambda_;
        double h_prev = 0.0, h_first = 0.0;
        int above_one = 0;
        std::vector<double> G(nt * np * d);
        const std::vector<int> ya = y_positions(g);
        for (int k = 1; k <= max_iter; ++k) {
            // Integrand g = b + grad2_b u at the nodes.
            for (std::size_t it = 0; it < nt; ++it)
                for (std::size_t ip = 0; ip < np; ++ip) {
                    const double* bv = &bnode_[(it * np + ip) * d];
                    double* out = &G[(it * np + ip) * d];
                    for (int c = 0; c < d; ++c) out[c] = bv[c];
                    if (k > 1 && !ya.empty()) {
                        Mat J = prev.node_grad2(it, ip);
                        for (int c = 0; c < d; ++c)
                            for (int a : ya) {
                                const int yc = g.axes[a] - model_.m();
                                out[c] += J(c, yc) * bv[yc];
                            }
                    }
                }
            FieldGrid next(model_.m(), d, g);
            sweep(G, next.mutable_values());
            // Differences in sup and in the surrogate norm sup|u| + sup|grad2 u|.
            FieldGrid diff(model_.m(), d, g);
            auto& dv = diff.mutable_values();
            double res = 0.0;
            for (std::size_t i = 0; i < dv.size(); ++i) {
                dv[i] = next.values()[i] - prev.values()[i];
                res = std::max(res, std::abs(dv[i]));
            }
            const double hn = diff.sup_norm() + diff.grad2_sup();
            rep.residuals.push_back(res);
            if (k == 1) h_first = hn;
            if (k > 1 && h_prev > 1e-13 * std::max(1.0, h_first)) {
                const double f = hn / h_prev;
                rep.factors.push_back(f);
                above_one = f >= 1.0 ? above_one + 1 : 0;
                if (above_one >= 3)
                    throw LambdaTooSmall(lambda_, "picard: contraction factor >= 1 for three consecutive iterations at lambda = " +
                                                      std::to_string(lambda_));
                if (screen && rep.factors.size() <= 3 && f > 0.5) rep.aborted = true;
            }
            h_prev = hn;
            prev = std::move(next);
            rep.iterations = k;
            if (rep.aborted) break;
            if (res < tol) {
                rep.converged = true;
                break;
            }
        }
        prev.check_invariants();
        rep.sup_u = prev.sup_norm();
        rep.sup_grad2 = prev.grad2_sup();
        return {std::move(prev), std::move(rep)};
    }

private:
    std::vector<int> y_positions(const GridSpec& g) const {
        std::vector<int> out;
        for (std::size_t a = 0; a < g.axes.size(); ++a)
            if (g.axes[a] >= model_.m()) out.push_back(static_cast<int>(a));
        return out;
    }

    void build_plan() {
        const GridSpec& g = field_.spec();
        const int k = static_cast<int>(g.axes.size());
        const double T = g.T();
        const std::size_t nt = g.times.size();
        plan_.resize(nt);
        std::map<double, std::pair<Mat, Mat>> cache;  // h -> (F_S, L_S) for homogeneous noise
        auto restrict_law = [&](double s, double r) {
            const double h = r - s;
            if (!model_.time_dependent()) {
                auto itc = cache.find(h);
                if (itc != cache.end()) return itc->second;
            }
            const Mat F = linear_flow::flow_matrix(model_, h);
            const Mat C = linear_flow::covariance(model_, s, r);
            Mat FS(k, k), CS(k, k);
            for (int a = 0; a < k; ++a)
                for (int b = 0; b < k; ++b) {
                    FS(a, b) = F(g.axes[a], g.axes[b]);
                    CS(a, b) = C(g.axes[a], g.axes[b]);
                }
            linalg::symmetrize(CS);
            auto out = std::make_pair(FS, linalg::psd_factor(CS));
            if (!model_.time_dependent()) cache.emplace(h, out);
            return out;
        };
        for (std::size_t i = 0; i + 1 < nt; ++i) {
            const double s = g.times[i];
            TimeRule tr = time_rule(lambda_, T - s, g.time_points);
            for (std::size_t q = 0; q < tr.h.size(); ++q) {
                const double r = std::min(T, s + tr.h[q]);
                PlanNode pn;
                pn.w = tr.w[q];
                detail::locate_time(g.times, r, pn.j, pn.t);
                auto [FS, L] = restrict_law(s, r);
                pn.F = FS;
                const int rank = static_cast<int>(L.cols());
                if (k == 1 && rank == 1) pn.sd = std::abs(L(0, 0));
                std::vector<double> xi;
                gh_tensor(rank, g.gh_points, xi, pn.gw);
                pn.off.assign(pn.gw.size() * k, 0.0);
                for (std::size_t p = 0; p < pn.gw.size(); ++p)
                    for (int a = 0; a < k; ++a) {
                        double v = 0.0;
                        for (int c = 0; c < rank; ++c) v += L(a, c) * xi[p * rank + c];
                        pn.off[p * k + a] = v;
                    }
                plan_[i].push_back(std::move(pn));
            }
        }
    }

    void cache_drift() {
        const GridSpec& g = field_.spec();
        const std::size_t nt = g.times.size(), np = field_.n_points();
        const int d = model_.d();
        bnode_.assign(nt * np * d, 0.0);
        for (std::size_t it = 0; it < nt; ++it)
            for (std::size_t ip = 0; ip < np; ++ip) {
                Vec v = b_(g.times[it], field_.node_state(ip));
                for (int c = 0; c < d; ++c) bnode_[(it * np + ip) * d + c] = v(c);
            }
        for (double v : bnode_)
            if (!std::isfinite(v)) throw DomainError("picard: drift is not finite on the grid box");
    }

    void sweep(const std::vector<double>& G, std::vector<double>& out) const {
        const GridSpec& g = field_.spec();
        const int k = static_cast<int>(g.axes.size());
        const std::size_t nt = g.times.size(), np = field_.n_points();
        const int d = model_.d();
        std::vector<std::size_t> strides(k, 1);
        for (int a = 1; a < k; ++a) strides[a] = strides[a - 1] * g.nodes[a - 1].size();
        std::vector<detail::AxisLocator> loc;
        for (int a = 0; a < k; ++a) loc.emplace_back(g.nodes[a]);
        std::vector<double> acc(d);
        double zS[3], mean[3], coords[3];
        for (std::size_t it = 0; it + 1 < nt; ++it)
            for (std::size_t ip = 0; ip < np; ++ip) {
                for (int a = 0; a < k; ++a) zS[a] = g.nodes[a][(ip / strides[a]) % g.nodes[a].size()];
                std::fill(acc.begin(), acc.end(), 0.0);
                for (const PlanNode& pn : plan_[it]) {
                    for (int a = 0; a < k; ++a) {
                        double v = 0.0;
                        for (int b = 0; b < k; ++b) v += pn.F(a, b) * zS[b];
                        mean[a] = v;
                    }
                    const double* G0 = &G[pn.j * np * d];
                    const double* G1 = &G[(pn.j + 1) * np * d];
                    if (k == 1) {
                        gauss_piecewise_linear(g.nodes[0], mean[0], pn.sd, G0, G1, pn.t, pn.w, d, acc.data());
                        continue;
                    }
                    for (std::size_t p = 0; p < pn.gw.size(); ++p) {
                        for (int a = 0; a < k; ++a) coords[a] = mean[a] + pn.off[p * k + a];
                        const detail::Stencil st = detail::make_stencil(loc, strides, coords);
                        const double wp = pn.w * pn.gw[p];
                        for (int q = 0; q < st.n; ++q) {
                            const double w0 = wp * st.w[q] * (1.0 - pn.t), w1 = wp * st.w[q] * pn.t;
                            const double* a0 = G0 + st.idx[q] * d;
                            const double* a1 = G1 + st.idx[q] * d;
                            for (int c = 0; c < d; ++c) acc[c] += w0 * a0[c] + w1 * a1[c];
                        }
                    }
                }
                for (int c = 0; c < d; ++c) out[(it * np + ip) * d + c] = acc[c];
            }
        // u_T = 0
        for (std::size_t ip = 0; ip < np; ++ip)
            for (int c = 0; c < d; ++c) out[((nt - 1) * np + ip) * d + c] = 0.0;
    }

    const SpectralModel& model_;
    const DriftSpec& b_;
    double lambda_;
    FieldGrid field_;
    std::vector<std::vector<PlanNode>> plan_;
    std::vector<double> bnode_;
};

}  // namespace

PicardResult picard_solve(const SpectralModel& model, const DriftSpec& b, double lambda, const GridSpec& grid,
                          double tol, int max_iter) {
    if (max_iter < 1) throw DomainError("picard: max_iter must be >= 1");
    if (!(tol > 0)) throw DomainError("picard: tol must be positive");
    Solver solver(model, b, lambda, grid);
    return solver.run(tol, max_iter, false);
}

LambdaSearch find_lambda(const SpectralModel& model, const DriftSpec& b, const GridSpec& grid, double tol,
                         int max_iter, double start, double cap) {
    if (!(start > 0) || !(cap >= start)) throw DomainError("find_lambda: need 0 < start <= cap");
    if (max_iter < 1 || !(tol > 0)) throw DomainError("find_lambda: need max_iter >= 1 and tol > 0");
    LambdaSearch out{0.0, {}, {FieldGrid(model.m(), model.d(), grid), {}}};
    for (double lambda = start; lambda <= cap; lambda *= 2.0) {
        out.tried.push_back(lambda);
        try {
            Solver solver(model, b, lambda, grid);
            PicardResult r = solver.run(tol, max_iter, true);
            const auto& f = r.report.factors;
            if (!r.report.aborted && (f.size() >= 3 || r.report.converged)) {
                out.lambda = lambda;
                out.result = std::move(r);
                return out;
            }
        } catch (const LambdaTooSmall&) {
        }
    }
    throw LambdaTooSmall(cap, "find_lambda: no contracting lambda up to the cap");
}

ResolventResult resolvent_apply(const SpectralModel& model, double lambda, const TimeField& f, double s, double T,
                                const Vec& z, const ResolventBudget& budget) {
    if (!(lambda >= 0)) throw DomainError("resolvent: lambda must be >= 0");
    if (!(s >= 0) || !(T >= s)) throw DomainError("resolvent: need 0 <= s <= T");
    const int n = model.n();
    if (z.size() != n) throw DomainError("resolvent: state dimension mismatch");
    auto expect = [&](double r, std::uint64_t idx) -> Vec {
        linear_flow::GaussianLaw law = linear_flow::transition_law(model, s, r, z);
        VectorObservable fr = [&](const Vec& x) { return f(r, x); };
        if (n <= 4) return linear_flow::expect_gh(law, fr, budget.gh_points);
        const Mat L = linalg::psd_factor(law.cov);
        Rng rng(budget.seed, "regularization.resolvent", idx);
        Vec acc, xi(L.cols());
        for (long p = 0; p < budget.mc_paths; ++p) {
            for (int c = 0; c < xi.size(); ++c) xi(c) = rng.normal();
            Vec v = fr(law.mean + L * xi);
            if (p == 0) acc = Vec::Zero(v.size());
            acc += v;
        }
        return acc / static_cast<double>(budget.mc_paths);
    };
    auto integrate = [&](int pts) {
        TimeRule tr = time_rule(lambda, T - s, pts);
        Vec acc = f(s, z) * 0.0;
        for (std::size_t q = 0; q < tr.h.size(); ++q) acc += tr.w[q] * expect(std::min(T, s + tr.h[q]), q);
        return acc;
    };
    ResolventResult out;
    const Vec coarse = integrate(8);
    out.value = integrate(16);
    out.error_estimate = (out.value - coarse).lpNorm<Eigen::Infinity>();
    out.achieved_tol = out.error_estimate <= budget.tol;
    return out;
}

}  // namespace degsde::regularization
