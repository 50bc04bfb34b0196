#include "srh/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "srh/errors.hpp"

namespace srh {

namespace {

double simpson_kernel(const std::function<double(double)>& f, double a, double fa, double b,
                      double fb, double m, double fm, double whole, double abs_tol,
                      double rel_tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    const double tol = std::max(abs_tol, rel_tol * std::abs(left + right));
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return simpson_kernel(f, a, fa, m, fm, lm, flm, left, 0.5 * abs_tol, rel_tol, depth - 1) +
           simpson_kernel(f, m, fm, b, fb, rm, frm, right, 0.5 * abs_tol, rel_tol, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, double rel_tol, int max_depth) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_kernel(f, a, fa, b, fb, m, fm, whole, abs_tol, rel_tol, max_depth);
}

HermiteSeries::HermiteSeries(std::vector<double> t, std::vector<double> v,
                             std::vector<double> dv)
    : t_(std::move(t)), v_(std::move(v)), d_(std::move(dv)) {
    if (t_.size() < 2 || t_.size() != v_.size() || t_.size() != d_.size()) {
        throw contract_error("HermiteSeries: need matching grids of at least two nodes");
    }
    for (std::size_t i = 1; i < t_.size(); ++i) {
        if (!(t_[i] > t_[i - 1])) {
            throw contract_error("HermiteSeries: grid must be strictly increasing");
        }
    }
    cumint_.resize(t_.size(), 0.0);
    for (std::size_t i = 1; i < t_.size(); ++i) {
        const double h = t_[i] - t_[i - 1];
        // Exact integral of the cubic Hermite piece.
        cumint_[i] = cumint_[i - 1] + 0.5 * h * (v_[i - 1] + v_[i]) +
                     h * h / 12.0 * (d_[i - 1] - d_[i]);
    }
}

std::size_t HermiteSeries::locate(double t) const {
    if (t < t_.front() - 1e-12 * (1.0 + std::abs(t_.front())) ||
        t > t_.back() + 1e-12 * (1.0 + std::abs(t_.back()))) {
        throw contract_error("HermiteSeries: query " + std::to_string(t) +
                             " outside tabulated range [" + std::to_string(t_.front()) + ", " +
                             std::to_string(t_.back()) + "]");
    }
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - t_.begin()));
    return std::min(i - 1, t_.size() - 2);
}

double HermiteSeries::operator()(double t) const {
    const std::size_t i = locate(t);
    const double h = t_[i + 1] - t_[i];
    const double s = (t - t_[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * v_[i] + (s3 - 2 * s2 + s) * h * d_[i] +
           (-2 * s3 + 3 * s2) * v_[i + 1] + (s3 - s2) * h * d_[i + 1];
}

double HermiteSeries::derivative(double t) const {
    const std::size_t i = locate(t);
    const double h = t_[i + 1] - t_[i];
    const double s = (t - t_[i]) / h;
    const double s2 = s * s;
    return ((6 * s2 - 6 * s) * v_[i] + (3 * s2 - 4 * s + 1) * h * d_[i] +
            (-6 * s2 + 6 * s) * v_[i + 1] + (3 * s2 - 2 * s) * h * d_[i + 1]) /
           h;
}

double HermiteSeries::integral_to(double t) const {
    const std::size_t i = locate(t);
    const double h = t_[i + 1] - t_[i];
    const double s = (t - t_[i]) / h;
    const double s2 = s * s, s3 = s2 * s, s4 = s2 * s2;
    const double part =
        (0.5 * s4 - s3 + s) * v_[i] + (0.25 * s4 - (2.0 / 3.0) * s3 + 0.5 * s2) * h * d_[i] +
        (-0.5 * s4 + s3) * v_[i + 1] + (0.25 * s4 - s3 / 3.0) * h * d_[i + 1];
    return cumint_[i] + h * part;
}

} // namespace srh
