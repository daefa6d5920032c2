#pragma once

#include <cstdint>
#include <vector>

#include "weaklim/pl_map.hpp"

namespace weaklim {

// Occupancy grid over a box; the empirical stand-in for Lebesgue measure.
// A cell is occupied when its center lies in the rasterized set.
class RasterSet {
public:
    RasterSet(Box box, int resolution);

    const Box& box() const { return box_; }
    int resolution() const { return res_; }
    int dim() const { return box_.dim(); }
    std::size_t cell_count() const { return occ_.size(); }

    double cell_volume() const;
    double cell_side(int axis) const { return (box_.hi[axis] - box_.lo[axis]) / res_; }

    bool occupied(std::size_t idx) const { return occ_[idx] != 0; }
    void mark(std::size_t idx) { occ_[idx] = 1; }
    Vec cell_center(std::size_t idx) const;
    // Index of the cell containing p, or npos when outside the box.
    std::size_t find_cell(const Vec& p) const;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    std::size_t occupied_count() const;
    double measure() const { return occupied_count() * cell_volume(); }

    void unite(const RasterSet& other);
    double symmetric_difference_measure(const RasterSet& other) const;

    // Boundary cells: occupied cells with an unoccupied (or out-of-grid)
    // axis neighbor.
    std::size_t boundary_cell_count() const;

    // Surface measure from exposed cell faces, rescaled by the isotropic
    // face-count factor so smooth boundaries converge to their Hausdorff
    // measure instead of the Manhattan one.
    double perimeter() const;

    // Marks every cell whose center lies in the image of one of the listed
    // simplices (all simplices when `subset` is empty).
    void add_image(const PiecewiseAffineMap& map, const std::vector<int>& subset = {});

    void add_ball(const Vec& center, double radius);

private:
    Box box_;
    int res_;
    std::vector<uint8_t> occ_;

    std::size_t index_of(const std::array<int, kMaxDim>& c) const;
    void decompose(std::size_t idx, std::array<int, kMaxDim>& c) const;
};

struct IsoperimetricReport {
    double volume = 0;
    double perimeter = 0;
    double ratio = 0;  // volume^{1-1/n} / perimeter
};

IsoperimetricReport isoperimetric_check(const RasterSet& set);

// Rasterized measure of the image of the chosen simplices.
double image_measure(const PiecewiseAffineMap& map, const std::vector<int>& subset, int raster_resolution);

}  // namespace weaklim
