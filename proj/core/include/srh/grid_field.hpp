#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "srh/model_space.hpp"

namespace srh {

/**
 * Scalar field sampled on the cells of a ModelSpace grid.
 *
 * Holds a non-owning pointer to its space; two fields are compatible when
 * they point to spaces that compare equal. Out-of-range reads go through
 * the wrapped accessors, which apply the periodic and sheared ghost rules
 * of the underlying space.
 */
class GridField {
public:
    GridField() : space_(nullptr) {}
    explicit GridField(const ModelSpace& space, double fill = 0.0)
        : space_(&space), v_(space.ncells(), fill) {}

    const ModelSpace& space() const;
    bool has_space() const { return space_ != nullptr; }
    std::size_t size() const { return v_.size(); }

    double& operator[](std::size_t idx) { return v_[idx]; }
    double operator[](std::size_t idx) const { return v_[idx]; }
    double& at(int i, int j, int l) { return v_[space_->index(i, j, l)]; }
    double at(int i, int j, int l) const { return v_[space_->index(i, j, l)]; }

    /// Read with full wrapping; i, j, l may lie outside the index ranges.
    double read_wrapped(int i, int j, int l) const;

    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }
    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }

    /// Fill from a callable of the cell coordinates (x, y, z).
    void fill_from(const std::function<double(double, double, double)>& fn);

    double min() const;
    double max() const;
    double linf() const;
    /// Measure-weighted integral, sum of weight * value.
    double integral() const;
    /// Measure-weighted L2 norm.
    double l2() const;

private:
    const ModelSpace* space_;
    std::vector<double> v_;
};

/// Measure-weighted inner product; fields must share a space.
double inner(const GridField& f, const GridField& g);

/// Throws contract_error unless both fields live on equal spaces.
void require_same_space(const GridField& f, const GridField& g, const char* op);

// Element-wise helpers; all enforce space compatibility.
GridField operator+(const GridField& f, const GridField& g);
GridField operator-(const GridField& f, const GridField& g);
GridField operator*(double c, const GridField& f);
GridField pointwise_mul(const GridField& f, const GridField& g);
GridField map_field(const GridField& f, const std::function<double(double)>& fn);
/// y += c * x
void axpy(double c, const GridField& x, GridField& y);

} // namespace srh
