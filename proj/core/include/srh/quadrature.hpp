#pragma once

#include <functional>
#include <vector>

namespace srh {

/// Adaptive composite Simpson integration of f over [a, b]. Tolerances are
/// applied per subinterval with the usual Richardson estimate; max_depth
/// bounds the recursion.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol = 1e-13, double rel_tol = 1e-12, int max_depth = 48);

/**
 * Piecewise cubic Hermite interpolant with caller-supplied slopes.
 *
 * Built on a strictly increasing grid; evaluation outside the grid throws.
 * When the slopes are the exact derivatives of a smooth function the
 * interpolation error is O(dt^4) per interval.
 */
class HermiteSeries {
public:
    HermiteSeries() = default;
    HermiteSeries(std::vector<double> t, std::vector<double> v, std::vector<double> dv);

    double operator()(double t) const;
    double derivative(double t) const;
    /// Exact integral of the interpolant from the grid start to t.
    double integral_to(double t) const;

    bool empty() const { return t_.empty(); }
    double front() const { return t_.front(); }
    double back() const { return t_.back(); }
    const std::vector<double>& grid() const { return t_; }
    const std::vector<double>& values() const { return v_; }
    const std::vector<double>& slopes() const { return d_; }

private:
    std::size_t locate(double t) const;
    std::vector<double> t_, v_, d_;
    std::vector<double> cumint_; // integral from t_[0] to each node
};

} // namespace srh
