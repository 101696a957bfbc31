#include "levycal/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace levycal {

namespace {

QuadRule build_rule(int n) {
    QuadRule r;
    r.x.resize(n);
    r.w.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        double w = 2.0 / ((1.0 - z * z) * pp * pp);
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = w;
        r.w[n - 1 - i] = w;
    }
    return r;
}

// int_0^1 e^{i th t} dt and int_0^1 t e^{i th t} dt
void seg_kernels(double th, cplx& e0, cplx& e1) {
    if (std::abs(th) < 0.5) {
        cplx term(1.0, 0.0), s0(0.0, 0.0), s1(0.0, 0.0);
        const cplx ith(0.0, th);
        for (int k = 0; k < 24; ++k) {
            // term = (i th)^k / k!
            s0 += term / double(k + 1);
            s1 += term / double(k + 2);
            term *= ith / double(k + 1);
        }
        e0 = s0;
        e1 = s1;
        return;
    }
    const cplx e(std::cos(th), std::sin(th));
    const cplx ith(0.0, th);
    e0 = (e - 1.0) / ith;
    e1 = e / ith + (e - 1.0) / (th * th);
}

}  // namespace

const QuadRule& gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
    static std::mutex mtx;
    static std::map<int, std::unique_ptr<QuadRule>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, std::make_unique<QuadRule>(build_rule(n))).first;
    return *it->second;
}

QuadRule gauss_legendre(int n, double a, double b) {
    const QuadRule& base = gauss_legendre(n);
    QuadRule r;
    r.x.resize(n);
    r.w.resize(n);
    const double h = 0.5 * (b - a), c = 0.5 * (b + a);
    for (int i = 0; i < n; ++i) {
        r.x[i] = c + h * base.x[i];
        r.w[i] = h * base.w[i];
    }
    return r;
}

cplx cexpm1(cplx z) {
    const double er = std::expm1(z.real());
    const double half = std::sin(0.5 * z.imag());
    const double cm1 = -2.0 * half * half;  // cos(y) - 1
    return {er * std::cos(z.imag()) + cm1, (er + 1.0) * std::sin(z.imag())};
}

cplx segment_ft(double a, double b, double fa, double fb, double u) {
    const double h = b - a;
    cplx e0, e1;
    seg_kernels(u * h, e0, e1);
    return h * std::polar(1.0, u * a) * (fa * e0 + (fb - fa) * e1);
}

cplx pl_ft(const std::vector<double>& knots, const std::vector<double>& vals, double u) {
    const std::size_t n = knots.size();
    cplx sum(0.0, 0.0);
    if (n < 2) return sum;
    cplx ea = std::polar(1.0, u * knots[0]);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double h = knots[k + 1] - knots[k];
        const cplx eb = std::polar(1.0, u * knots[k + 1]);
        if (vals[k] != 0.0 || vals[k + 1] != 0.0) {
            cplx e0, e1;
            seg_kernels(u * h, e0, e1);
            sum += h * ea * (vals[k] * e0 + (vals[k + 1] - vals[k]) * e1);
        }
        ea = eb;
    }
    return sum;
}

}  // namespace levycal
