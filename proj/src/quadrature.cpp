#include "tcopula/numerics/quadrature.hpp"

#include "tcopula/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

namespace tcopula::numerics {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = std::numeric_limits<double>::min();

struct Segment {
    double a;
    double b;
    double value;
    double error;
    bool splittable;
};

struct ByError {
    bool operator()(const Segment& x, const Segment& y) const { return x.error < y.error; }
};

// One 21-point Gauss-Kronrod panel with the QUADPACK error heuristic (qk21).
Segment kronrod21(const std::function<double(double)>& f, double a, double b) {
    using Kronrod = boost::math::quadrature::gauss_kronrod<double, 21>;
    using Gauss = boost::math::quadrature::gauss<double, 10>;
    const auto& xk = Kronrod::abscissa();
    const auto& wk = Kronrod::weights();
    const auto& wg = Gauss::weights();

    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    double fv[21];
    fv[0] = f(center);
    for (std::size_t i = 1; i < xk.size(); ++i) {
        const double dx = half * xk[i];
        fv[2 * i - 1] = f(center - dx);
        fv[2 * i] = f(center + dx);
    }
    for (double v : fv)
        if (!std::isfinite(v))
            throw QuadratureError("integrate: integrand is not finite on [" + std::to_string(a) +
                                      ", " + std::to_string(b) + "]",
                                  std::numeric_limits<double>::quiet_NaN(),
                                  std::numeric_limits<double>::infinity(), 0);

    double res_k = wk[0] * fv[0];
    double res_abs = std::abs(res_k);
    double res_g = 0.0;
    for (std::size_t i = 1; i < xk.size(); ++i) {
        const double pair = fv[2 * i - 1] + fv[2 * i];
        res_k += wk[i] * pair;
        res_abs += wk[i] * (std::abs(fv[2 * i - 1]) + std::abs(fv[2 * i]));
        if (i % 2 == 1) res_g += wg[i / 2] * pair;
    }
    const double mean = 0.5 * res_k;
    double res_asc = wk[0] * std::abs(fv[0] - mean);
    for (std::size_t i = 1; i < xk.size(); ++i)
        res_asc += wk[i] * (std::abs(fv[2 * i - 1] - mean) + std::abs(fv[2 * i] - mean));

    const double scale = std::abs(half);
    res_k *= half;
    res_abs *= scale;
    res_asc *= scale;
    double err = std::abs((res_k - res_g * half));
    if (res_asc != 0.0 && err != 0.0) err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
    if (res_abs > kTiny / (50.0 * kEps)) err = std::max(50.0 * kEps * res_abs, err);

    const double width = b - a;
    const bool splittable = std::abs(width) > 100.0 * kEps * std::max(std::abs(a), std::abs(b)) &&
                            std::abs(width) > 1e4 * kTiny;
    return Segment{a, b, res_k, err, splittable};
}

QuadratureResult adaptive(const std::function<double(double)>& g, double a, double b,
                          const QuadratureOptions& opt) {
    std::priority_queue<Segment, std::vector<Segment>, ByError> heap;
    Segment first = kronrod21(g, a, b);
    std::size_t evaluations = 21;
    double value = first.value;
    double error = first.error;
    heap.push(first);

    auto target = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::abs(value)); };

    while (error > target()) {
        const Segment worst = heap.top();
        if (!worst.splittable || evaluations + 42 > opt.max_evaluations) {
            const char* reason = worst.splittable ? "evaluation budget exhausted"
                                                  : "interval too narrow to subdivide";
            throw QuadratureError(std::string("integrate: ") + reason + " (estimate " +
                                      std::to_string(value) + ", error " +
                                      std::to_string(error) + ")",
                                  value, error, evaluations);
        }
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const Segment left = kronrod21(g, worst.a, mid);
        const Segment right = kronrod21(g, mid, worst.b);
        evaluations += 42;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Re-sum periodically so that cancellation in the running totals cannot drift.
        if ((evaluations / 42) % 64 == 0) {
            auto copy = heap;
            value = 0.0;
            error = 0.0;
            while (!copy.empty()) {
                value += copy.top().value;
                error += copy.top().error;
                copy.pop();
            }
        }
    }
    // Final exact re-summation, smallest contributions first.
    std::vector<Segment> all;
    all.reserve(heap.size());
    while (!heap.empty()) {
        all.push_back(heap.top());
        heap.pop();
    }
    std::sort(all.begin(), all.end(),
              [](const Segment& x, const Segment& y) { return std::abs(x.value) < std::abs(y.value); });
    value = 0.0;
    error = 0.0;
    for (const auto& s : all) {
        value += s.value;
        error += s.error;
    }
    return QuadratureResult{value, error, evaluations};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& options) {
    if (!(options.rel_tol > 0.0) || !(options.abs_tol > 0.0))
        throw DomainError("integrate: tolerances must be > 0");
    if (options.max_evaluations < 21) throw DomainError("integrate: evaluation budget below 21");
    if (std::isnan(a) || std::isnan(b)) throw DomainError("integrate: NaN limit");
    if (a == b) return QuadratureResult{0.0, 0.0, 1};
    if (a > b) {
        QuadratureResult r = integrate(f, b, a, options);
        r.value = -r.value;
        return r;
    }

    const bool lower_inf = std::isinf(a);
    const bool upper_inf = std::isinf(b);
    if (!lower_inf && !upper_inf) return adaptive(f, a, b, options);

    // x = t / (1 - t) maps [0, 1) onto [0, inf).
    auto jac = [](double t) { const double r = 1.0 - t; return 1.0 / (r * r); };
    auto map = [](double t) { return t / (1.0 - t); };
    std::function<double(double)> g;
    if (lower_inf && upper_inf) {
        g = [&](double t) {
            if (1.0 - t <= 0.0) return 0.0;
            const double x = map(t);
            return (f(x) + f(-x)) * jac(t);
        };
    } else if (upper_inf) {
        g = [&](double t) {
            if (1.0 - t <= 0.0) return 0.0;
            return f(a + map(t)) * jac(t);
        };
    } else {
        g = [&](double t) {
            if (1.0 - t <= 0.0) return 0.0;
            return f(b - map(t)) * jac(t);
        };
    }
    return adaptive(g, 0.0, 1.0, options);
}

}  // namespace tcopula::numerics
