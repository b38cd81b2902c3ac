#include "degsde/bismut.hpp"
#include "degsde/error.hpp"
#include "degsde/linalg.hpp"
#include "degsde/quadrature.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>

namespace degsde::bismut {

GramianResult gramian_Q(const SpectralModel& model, double t) {
    if (!(t > 0)) throw DomainError("gramian_Q: need t > 0");
    const Mat BBt = model.B * model.B.transpose();
    const Mat& A0 = model.A0;
    auto f = [&](double u) {
        Mat E = linalg::expm(u * A0);
        return Mat(u * (t - u) * E * BBt * E.transpose());
    };
    GramianResult r;
    r.Q = quad::integrate(f, 0.0, t).value;
    linalg::symmetrize(r.Q);
    r.condition = linalg::condition_number(r.Q);
    if (!(r.condition <= 1e14))
        throw SingularGramian(r.condition, "gramian_Q: Q_t is numerically singular (condition " +
                                               std::to_string(r.condition) + ")");
    r.Q_inv = r.Q.partialPivLu().solve(Mat::Identity(r.Q.rows(), r.Q.cols()));
    return r;
}

GramianScaling gramian_bound_check(const SpectralModel& model, std::vector<double> ts) {
    if (ts.empty())
        for (int j = 6; j >= 0; --j) ts.push_back(std::ldexp(1.0, -j));
    GramianScaling out;
    for (double t : ts) {
        GramianResult g = gramian_Q(model, t);
        Eigen::JacobiSVD<Mat> svd(g.Q_inv);
        double v = svd.singularValues()(0) * t * t * t;
        out.t.push_back(t);
        out.scaled.push_back(v);
        out.sup = std::max(out.sup, v);
    }
    return out;
}

}  // namespace degsde::bismut
