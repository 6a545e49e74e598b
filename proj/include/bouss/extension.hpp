#pragma once

#include <bouss/field.hpp>
#include <bouss/grid.hpp>

namespace bouss {

// Linear extension from an aligned source rectangle to a target grid, supported inside
// 'support'. Across each side a first-order-matching reflection
// f(b+s) = 3 f(b-s) - 2 f(b-2s) is blended to zero by a quintic cutoff that vanishes
// halfway to the support rectangle. Sides shared with the support rectangle are not extended.
class ExtensionOperator {
public:
    ExtensionOperator() = default;
    ExtensionOperator(const Rect& source, const Grid2D& target, const Rect& support);

    ScalarField extend_scalar(const ScalarField& f) const;
    VectorField extend_vector(const VectorField& f) const;

    const Grid2D& source_grid() const { return src_; }
    const Grid2D& target_grid() const { return tgt_; }
    const Rect& support() const { return support_; }
    // blend widths for the left, right, bottom and top sides (0 = side not extended)
    const double* widths() const { return w_; }
    // bounding box (target node indices) of nodes that can be non-zero
    void support_box(int& i0, int& i1, int& j0, int& j1) const;

private:
    Rect source_{}, support_{};
    Grid2D src_, tgt_;
    int di_ = 0, dj_ = 0;
    double w_[4] = {0, 0, 0, 0};
    int n_[4] = {0, 0, 0, 0};  // widths in whole cells (nodes with s < w)
};

} // namespace bouss
