#ifndef NORMCRM_QUADRATURE_HPP_
#define NORMCRM_QUADRATURE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "normcrm/common.hpp"

namespace normcrm {

struct QuadControl {
    double abs_tol = 1e-12;
    double rel_tol = 1e-9;
    int max_intervals = 4000;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;        // estimated absolute error bound
    bool converged = false;
    long evaluations = 0;
};

namespace detail {

// Gauss-Kronrod 7-15 nodes/weights on [-1,1] (QUADPACK dqk15).
inline constexpr double kGk15Nodes[8] = {
    0.99145537112081263921, 0.94910791234275852453, 0.86486442335976907279,
    0.74153118559939443986, 0.58608723546769113029, 0.40584515137739716691,
    0.20778495500789846760, 0.0};
inline constexpr double kGk15Weights[8] = {
    0.02293532201052922496, 0.06309209262997855329, 0.10479001032225018384,
    0.14065325971552591875, 0.16900472663926790283, 0.19035057806478540991,
    0.20443294007529889241, 0.20948214108472782801};
inline constexpr double kGauss7Weights[4] = {
    0.12948496616886969327, 0.27970539148927666790, 0.38183005050511894495,
    0.41795918367346938776};

template <typename F>
inline void gk15(F&& f, double a, double b, double* value, double* error,
                 long* evals) {
    const double h = 0.5 * (b - a);
    const double c = 0.5 * (a + b);
    const double fc = f(c);
    double kronrod = kGk15Weights[7] * fc;
    double gauss = kGauss7Weights[3] * fc;
    double resabs = std::abs(kronrod);
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kGk15Nodes[i];
        const double f1 = f(c - dx);
        const double f2 = f(c + dx);
        kronrod += kGk15Weights[i] * (f1 + f2);
        resabs += kGk15Weights[i] * (std::abs(f1) + std::abs(f2));
        if (i % 2 == 1) gauss += kGauss7Weights[i / 2] * (f1 + f2);
    }
    *evals += 15;
    *value = kronrod * h;
    // QUADPACK-style rescaled error estimate.
    double err = std::abs((kronrod - gauss) * h);
    resabs *= std::abs(h);
    if (resabs > 0.0 && err > 0.0) {
        const double scale = std::pow(200.0 * err / resabs, 1.5);
        err = (scale < 1.0) ? resabs * scale : resabs;
    }
    *error = err;
}

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over the finite interval [a, b].
/// Endpoints are never evaluated, so integrable endpoint singularities are
/// handled by subdivision.
template <typename F>
QuadResult integrate_adaptive(F&& f, double a, double b,
                              const QuadControl& ctrl = {}) {
    QuadResult res;
    if (!(a < b)) {
        res.converged = true;
        return res;
    }
    std::vector<detail::Segment> heap;
    heap.reserve(64);
    detail::Segment s0{a, b, 0.0, 0.0};
    detail::gk15(f, a, b, &s0.value, &s0.error, &res.evaluations);
    heap.push_back(s0);
    double total = s0.value;
    double total_err = s0.error;
    while (static_cast<int>(heap.size()) < ctrl.max_intervals) {
        const double tol = std::max(ctrl.abs_tol, ctrl.rel_tol * std::abs(total));
        if (total_err <= tol) break;
        std::pop_heap(heap.begin(), heap.end());
        detail::Segment worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(worst.a < mid && mid < worst.b)) {  // interval at double resolution
            heap.push_back(worst);
            std::push_heap(heap.begin(), heap.end());
            break;
        }
        total -= worst.value;
        total_err -= worst.error;
        detail::Segment left{worst.a, mid, 0.0, 0.0};
        detail::Segment right{mid, worst.b, 0.0, 0.0};
        detail::gk15(f, left.a, left.b, &left.value, &left.error, &res.evaluations);
        detail::gk15(f, right.a, right.b, &right.value, &right.error, &res.evaluations);
        total += left.value + right.value;
        total_err += left.error + right.error;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end());
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end());
    }
    res.value = total;
    res.error = std::max(total_err, 0.0);
    res.converged =
        total_err <= std::max(ctrl.abs_tol, ctrl.rel_tol * std::abs(total));
    if (!std::isfinite(res.value)) {
        throw AccuracyError("integrate_adaptive: non-finite integral estimate",
                            res.value, res.error);
    }
    return res;
}

/// Integral of f over (a, +inf) via the change of variable
/// x = a + scale*t/(1-t), t in (0,1). `scale` should be of the order of the
/// decay length of f past a.
template <typename F>
QuadResult integrate_semi_infinite(F&& f, double a, const QuadControl& ctrl = {},
                                   double scale = 1.0) {
    if (!(scale > 0.0) || !std::isfinite(scale)) scale = 1.0;
    auto g = [&f, a, scale](double t) {
        const double omt = 1.0 - t;
        const double x = a + scale * t / omt;
        if (!std::isfinite(x)) return 0.0;
        const double fx = f(x);
        return fx * scale / (omt * omt);
    };
    return integrate_adaptive(g, 0.0, 1.0, ctrl);
}

/// Throwing wrapper: returns the value if the tolerance was met, otherwise
/// signals an accuracy failure that still carries the best estimate.
inline double quad_value_or_throw(const QuadResult& r, const char* what) {
    if (!r.converged) {
        throw AccuracyError(std::string(what) + ": quadrature did not converge",
                            r.value, r.error);
    }
    return r.value;
}

}  // namespace normcrm

#endif  // NORMCRM_QUADRATURE_HPP_
