#include "tcopula/numerics/optimize.hpp"

#include "tcopula/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace tcopula::numerics {

NelderMeadResult nelder_mead(const Objective& f, const Eigen::VectorXd& start,
                             const Eigen::VectorXd& steps, const NelderMeadOptions& options) {
    const Eigen::Index n = start.size();
    if (n == 0) throw DomainError("nelder_mead: empty parameter vector");
    if (steps.size() != n) throw ShapeError("nelder_mead: steps/start size mismatch");

    std::size_t evaluations = 0;
    auto eval = [&](const Eigen::VectorXd& x) {
        ++evaluations;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n + 1), start);
    std::vector<double> vals(pts.size());
    vals[0] = eval(start);
    for (Eigen::Index i = 0; i < n; ++i) {
        pts[static_cast<std::size_t>(i + 1)](i) += steps(i);
        vals[static_cast<std::size_t>(i + 1)] = eval(pts[static_cast<std::size_t>(i + 1)]);
    }

    std::vector<std::size_t> order(pts.size());
    NelderMeadResult result;
    for (;;) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[order.size() - 2];

        double diameter = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i)
            diameter = std::max(diameter, (pts[i] - pts[best]).cwiseAbs().maxCoeff());
        if (diameter < options.x_tol) {
            result.converged = true;
            break;
        }
        if (evaluations >= options.max_evaluations) break;
        ++result.iterations;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (i != worst) centroid += pts[i];
        centroid /= static_cast<double>(n);

        const Eigen::VectorXd reflected = centroid + (centroid - pts[worst]);
        const double f_r = eval(reflected);
        if (f_r < vals[best]) {
            const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - pts[worst]);
            const double f_e = eval(expanded);
            if (f_e < f_r) {
                pts[worst] = expanded;
                vals[worst] = f_e;
            } else {
                pts[worst] = reflected;
                vals[worst] = f_r;
            }
            continue;
        }
        if (f_r < vals[second]) {
            pts[worst] = reflected;
            vals[worst] = f_r;
            continue;
        }
        const bool outside = f_r < vals[worst];
        const Eigen::VectorXd contracted = outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                                                   : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
        const double f_c = eval(contracted);
        if (f_c < (outside ? f_r : vals[worst])) {
            pts[worst] = contracted;
            vals[worst] = f_c;
            continue;
        }
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i == best) continue;
            pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
            vals[i] = eval(pts[i]);
        }
    }
    const auto best_it = std::min_element(vals.begin(), vals.end());
    const auto best = static_cast<std::size_t>(std::distance(vals.begin(), best_it));
    result.x = pts[best];
    result.value = vals[best];
    result.evaluations = evaluations;
    return result;
}

Eigen::VectorXd central_difference_gradient(const Objective& f, const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& steps) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::VectorXd hi = x, lo = x;
        hi(i) += steps(i);
        lo(i) -= steps(i);
        g(i) = (f(hi) - f(lo)) / (2.0 * steps(i));
    }
    return g;
}

Eigen::MatrixXd central_difference_hessian(const Objective& f, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& steps) {
    const Eigen::Index n = x.size();
    if (steps.size() != n) throw ShapeError("central_difference_hessian: steps/x size mismatch");
    Eigen::MatrixXd h(n, n);
    const double f0 = f(x);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd hi = x, lo = x;
        hi(i) += steps(i);
        lo(i) -= steps(i);
        h(i, i) = (f(hi) - 2.0 * f0 + f(lo)) / (steps(i) * steps(i));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            auto at = [&](double si, double sj) {
                Eigen::VectorXd p = x;
                p(i) += si * steps(i);
                p(j) += sj * steps(j);
                return f(p);
            };
            const double v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) /
                             (4.0 * steps(i) * steps(j));
            h(i, j) = v;
            h(j, i) = v;
        }
    }
    return h;
}

}  // namespace tcopula::numerics
