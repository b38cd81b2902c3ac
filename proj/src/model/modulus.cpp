#include "degsde/error.hpp"
#include "degsde/model.hpp"
#include "degsde/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace degsde::model {

std::string family_tag(ModulusFamily f) {
    switch (f) {
        case ModulusFamily::power: return "power";
        case ModulusFamily::log_power: return "log_power";
        case ModulusFamily::log_sqrt: return "log_sqrt";
        case ModulusFamily::table: return "table";
        case ModulusFamily::custom: return "custom";
    }
    return "custom";
}

ModulusFamily parse_family(const std::string& tag) {
    if (tag == "power") return ModulusFamily::power;
    if (tag == "log_power") return ModulusFamily::log_power;
    if (tag == "log_sqrt") return ModulusFamily::log_sqrt;
    if (tag == "table") return ModulusFamily::table;
    if (tag == "custom") return ModulusFamily::custom;
    throw InvalidModulus("unknown modulus family '" + tag + "'");
}

Modulus::Modulus() = default;

Modulus Modulus::power(double K, double alpha) {
    if (!(K > 0) || !(alpha > 0) || alpha > 1) throw InvalidModulus("power modulus needs K > 0, alpha in (0,1]");
    Modulus m;
    m.family_ = ModulusFamily::power;
    m.K_ = K;
    m.alpha_ = alpha;
    m.name_ = "power";
    return m;
}

Modulus Modulus::log_power(double K, double r, double c) {
    if (!(K > 0) || !(r > 0)) throw InvalidModulus("log_power modulus needs K > 0, r > 0");
    if (c <= 0) c = std::exp(2.0 * (1.0 + r) + 1.0);
    if (c < std::exp(1.0)) throw InvalidModulus("log_power modulus needs c >= e");
    Modulus m;
    m.family_ = ModulusFamily::log_power;
    m.K_ = K;
    m.r_ = r;
    m.c_ = c;
    m.name_ = "log_power";
    return m;
}

Modulus Modulus::log_sqrt(double K, double c) {
    if (!(K > 0)) throw InvalidModulus("log_sqrt modulus needs K > 0");
    if (c <= 0) c = std::exp(2.0);
    if (c < std::exp(1.0)) throw InvalidModulus("log_sqrt modulus needs c >= e");
    Modulus m;
    m.family_ = ModulusFamily::log_sqrt;
    m.K_ = K;
    m.c_ = c;
    m.name_ = "log_sqrt";
    return m;
}

Modulus Modulus::table(std::vector<double> s, std::vector<double> values) {
    if (s.size() != values.size() || s.size() < 2) throw InvalidModulus("table modulus needs >= 2 matching nodes");
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!(s[i] > 0)) throw InvalidModulus("table nodes must be positive");
        if (i > 0 && !(s[i] > s[i - 1])) throw InvalidModulus("table nodes must be strictly increasing");
    }
    Modulus m;
    m.family_ = ModulusFamily::table;
    m.ts_ = std::move(s);
    m.tv_ = std::move(values);
    m.K_ = m.tv_.back();
    m.name_ = "table";
    return m;
}

Modulus Modulus::custom(std::string name, std::function<double(double)> eval) {
    if (!eval) throw InvalidModulus("custom modulus needs an evaluator");
    Modulus m;
    m.family_ = ModulusFamily::custom;
    m.eval_ = std::move(eval);
    m.name_ = std::move(name);
    return m;
}

double Modulus::operator()(double s) const {
    if (s <= 0) return 0.0;
    switch (family_) {
        case ModulusFamily::power: return K_ * std::pow(s, alpha_);
        case ModulusFamily::log_power: return K_ / std::pow(std::log(c_ + 1.0 / s), 1.0 + r_);
        case ModulusFamily::log_sqrt: return K_ / std::sqrt(std::log(c_ + 1.0 / s));
        case ModulusFamily::table: {
            if (s >= ts_.back()) return tv_.back();
            if (s <= ts_.front()) {
                double beta = 1.0;
                if (tv_[1] > tv_[0] && tv_[0] > 0) beta = std::log(tv_[1] / tv_[0]) / std::log(ts_[1] / ts_[0]);
                if (!(beta > 0)) beta = 1.0;
                return tv_[0] * std::pow(s / ts_[0], beta);
            }
            auto it = std::upper_bound(ts_.begin(), ts_.end(), s);
            std::size_t j = static_cast<std::size_t>(it - ts_.begin());
            double w = (s - ts_[j - 1]) / (ts_[j] - ts_[j - 1]);
            return (1 - w) * tv_[j - 1] + w * tv_[j];
        }
        case ModulusFamily::custom: return eval_(s);
    }
    return 0.0;
}

void Modulus::validate() const {
    double at0 = family_ == ModulusFamily::custom ? eval_(0.0) : (*this)(0.0);
    if (at0 != 0.0) throw InvalidModulus(name_ + ": phi(0) must be 0");
    double prev = 0.0;
    const int n = 241;
    for (int i = 0; i < n; ++i) {
        double s = std::pow(10.0, -14.0 + 20.0 * i / (n - 1));
        double v = (*this)(s);
        if (!std::isfinite(v) || !(v > 0)) throw InvalidModulus(name_ + ": phi must be positive on (0, inf)");
        if (v < prev * (1.0 - 1e-14)) throw InvalidModulus(name_ + ": phi must be nondecreasing");
        prev = v;
    }
}

double phi_squared_concavity_slack(const Modulus& phi) {
    const int n = 64;
    std::vector<double> s(n), v(n);
    for (int i = 0; i < n; ++i) {
        s[i] = std::pow(10.0, -12.0 + 15.0 * i / (n - 1));
        double p = phi(s[i]);
        v[i] = p * p;
    }
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double mid = phi(0.5 * (s[i] + s[j]));
            worst = std::min(worst, mid * mid - 0.5 * (v[i] + v[j]));
        }
    return worst;
}

double dini_integral(const Modulus& phi, double lo) {
    if (!(lo > 0) || lo >= 1) throw DomainError("dini_integral: need 0 < lo < 1");
    // s = e^u turns phi(s)/s ds into phi(e^u) du.
    double L = -std::log(lo);
    double total = 0.0;
    // Split into unit panels in u so table kinks and slow logarithmic decay
    // do not starve the adaptive rule.
    double a = -L;
    while (a < 0) {
        double b = std::min(0.0, a + std::max(1.0, 0.25 * (0.0 - a)));
        total += quad::integrate_scalar([&](double u) { return phi(std::exp(u)); }, a, b, 1e-13);
        a = b;
    }
    return total;
}

ModulusClass classify_modulus(const Modulus& phi, double quad_floor) {
    if (!(quad_floor > 0) || quad_floor > 1e-3) throw DomainError("classify_modulus: quad_floor must lie in (0, 1e-3]");
    phi.validate();
    ModulusClass out;
    out.in_D0 = true;
    out.dini_integral_value = dini_integral(phi, quad_floor);
    out.phi2_concave = phi_squared_concavity_slack(phi) >= -1e-10;

    // Growth of I(L) = int_{e^{-L}}^1 phi(s)/s ds along doubling L.
    std::vector<double> Ls{8, 16, 32, 64, 128, 256}, I;
    for (double L : Ls) I.push_back(dini_integral(phi, std::exp(-L)));
    double d1 = I[4] - I[3], d2 = I[5] - I[4];
    double ratio = d1 > 0 ? d2 / d1 : 0.0;
    out.growth_exponent = ratio > 0 ? std::log2(ratio) : -INFINITY;

    switch (phi.family()) {
        case ModulusFamily::power:
        case ModulusFamily::log_power:
            out.dini_finite = true;
            break;
        case ModulusFamily::log_sqrt:
            out.dini_finite = false;
            break;
        default:
            out.heuristic = true;
            out.dini_finite = ratio < 0.9;
            break;
    }
    out.in_D1 = out.phi2_concave && out.dini_finite;
    if (phi.family() == ModulusFamily::log_sqrt) {
        // int_t^1 phi(s)/s ds ~ 2K sqrt(log 1/t), so the D2 integrand decays like 1/(t log 1/t).
        out.in_D2 = out.phi2_concave;
    } else if (out.heuristic) {
        out.in_D2 = out.phi2_concave && (out.dini_finite || out.growth_exponent <= 0.55);
    } else {
        out.in_D2 = out.in_D1;
    }
    return out;
}

}  // namespace degsde::model
