#pragma once

// Bow-tie lattice geometry: site coordinates, loading/storage zones, the
// tweezer overlay, corridor midlines, the trapping potential and clearance
// distances. Lengths are in micrometres, the origin is site (0, 0), x grows
// with the column index and y with the row index.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atomcycle/site_mask.hpp"

namespace atomcycle {

struct Point {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b);

struct SitePosition {
    int col = 0;
    int row = 0;
    Point point;
};

/// Rectangular block of tweezer spots inside the loading zone.
struct TweezerGrid {
    int cols = 17;
    int rows = 19;
    int col_stride = 4;
    int row_stride = 5;
    int col_offset = 2;
    int row_offset = 9;
};

struct GeometryParams {
    double spacing_x = 0.579;
    double spacing_y = 1.187;
    int n_cols = 224;
    int n_rows = 110;
    /// Columns [0, loading_cols) form the loading zone.
    int loading_cols = 68;
    /// Empty columns between the loading and storage zones.
    int guard_cols = 2;
    TweezerGrid tweezers;
    /// Overrides the tweezer grid when set (must lie in the loading zone).
    std::optional<std::vector<SiteIndex>> tweezer_sites;
};

/// Immutable after construction.
class LatticeGeometry {
public:
    explicit LatticeGeometry(const GeometryParams& params = {});

    const GeometryParams& params() const noexcept { return params_; }
    double spacing_x() const noexcept { return params_.spacing_x; }
    double spacing_y() const noexcept { return params_.spacing_y; }
    int n_cols() const noexcept { return params_.n_cols; }
    int n_rows() const noexcept { return params_.n_rows; }
    std::size_t site_count() const noexcept { return static_cast<std::size_t>(n_cols()) * n_rows(); }

    SiteIndex index(int col, int row) const;
    int col_of(SiteIndex site) const { return static_cast<int>(site % static_cast<SiteIndex>(n_cols())); }
    int row_of(SiteIndex site) const { return static_cast<int>(site / static_cast<SiteIndex>(n_cols())); }
    bool contains(SiteIndex site) const noexcept { return site < site_count(); }

    /// (col·spacing_x, row·spacing_y); throws RangeError naming the offending axis.
    Point site_position(int col, int row) const;
    Point position(SiteIndex site) const;
    SitePosition locate(SiteIndex site) const;

    /// Midline between rows `row` and `row + 1`.
    double corridor_y(int row) const;
    /// Midline between columns `col` and `col + 1`.
    double column_midline_x(int col) const;
    /// Column midline at the loading-zone boundary, used for vertical transit.
    double exit_x() const { return column_midline_x(params_.loading_cols - 1); }

    int storage_first_col() const noexcept { return params_.loading_cols + params_.guard_cols; }
    const SiteMask& loading_zone() const noexcept { return loading_; }
    const SiteMask& storage_zone() const noexcept { return storage_; }
    const SiteMask& tweezer_sites() const noexcept { return tweezers_; }
    bool in_loading_zone(SiteIndex site) const { return loading_.test(site); }
    bool in_storage_zone(SiteIndex site) const { return storage_.test(site); }

    /// Coordinates of every site, indexed by SiteIndex, for the vector kernels.
    std::span<const double> xs() const noexcept { return xs_; }
    std::span<const double> ys() const noexcept { return ys_; }

private:
    GeometryParams params_;
    SiteMask loading_;
    SiteMask storage_;
    SiteMask tweezers_;
    std::vector<double> xs_;
    std::vector<double> ys_;
};

enum class PotentialForm {
    /// U = -U0 cos²(πx/ax) cos²(πy/ay)
    separable,
    /// Separable term plus a row-confining term that keeps depth along rows:
    /// U = -U0 [c cos²(πx/ax) cos²(πy/ay) + (1 - c) cos²(πy/ay)], c = 1 - row_confinement
    tube,
};

std::string to_string(PotentialForm form);
PotentialForm parse_potential_form(const std::string& name);

struct PotentialModel {
    double lattice_depth = 200.0;  // μK
    double tweezer_depth_ratio = 10.0;
    PotentialForm form = PotentialForm::separable;
    double row_confinement = 0.3;  // tube form only, in [0, 1)
};

/// Trap energy in μK. The formulas are periodic, so points outside the lattice
/// extent see the periodic continuation of the pattern.
double potential_at(const PotentialModel& model, const LatticeGeometry& geometry, Point p);

struct PathModulation {
    double min = 0.0;
    double max = 0.0;
    double peak_to_peak = 0.0;
};

/// Samples the potential at n_samples points spaced uniformly by arc length.
PathModulation path_modulation(const PotentialModel& model, const LatticeGeometry& geometry,
                               std::span<const Point> polyline, int n_samples);

/// Smallest Euclidean distance between the polyline and any occupied point that
/// does not compare equal to an excluded point; +inf when no such point exists.
double min_clearance(std::span<const Point> polyline, std::span<const Point> occupied,
                     std::span<const Point> excluded = {});

struct TargetPatternParams {
    /// First target row.
    int row_offset = 0;
    int row_stride = 3;
    /// First target column, counted from the first storage column.
    int col_offset = 0;
    int col_stride = 2;
};

/// Sites of the maintained register inside the storage zone, with the
/// corridor each target row is approached from.
class TargetPattern {
public:
    TargetPattern(const LatticeGeometry& geometry, const TargetPatternParams& params);

    const TargetPatternParams& params() const noexcept { return params_; }
    const std::vector<SiteIndex>& sites() const noexcept { return sites_; }
    const SiteMask& mask() const noexcept { return mask_; }
    std::size_t capacity() const noexcept { return sites_.size(); }
    int row_stride() const noexcept { return params_.row_stride; }
    int col_stride() const noexcept { return params_.col_stride; }

    /// Signed offset in units of spacing_y from a target row to its approach
    /// corridor: the half-integer closest to row_stride/2, on the side that
    /// stays inside the lattice.
    double approach_offset(int row) const;

private:
    TargetPatternParams params_;
    int n_rows_;
    std::vector<SiteIndex> sites_;
    SiteMask mask_;
};

/// Smallest distance between any target site and the path used to reach
/// another target site: the vertical transit line at the zone boundary, the
/// approach corridors and the insertion strokes.
double transport_clearance(const LatticeGeometry& geometry, const TargetPattern& target);

/// Builds a TargetPattern and checks transport_clearance >= d_min.
TargetPattern make_target_pattern(const LatticeGeometry& geometry, const TargetPatternParams& params, double d_min);

}  // namespace atomcycle
