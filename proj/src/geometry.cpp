#include "atomcycle/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "atomcycle/errors.hpp"
#include "atomcycle/kernels.hpp"

namespace atomcycle {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

LatticeGeometry::LatticeGeometry(const GeometryParams& params) : params_(params) {
    if (!(params.spacing_x > 0.0) || !(params.spacing_y > 0.0))
        throw DomainError("lattice spacings must be positive");
    if (params.n_cols < 1 || params.n_rows < 1) throw DomainError("lattice needs at least one column and one row");
    if (static_cast<double>(params.n_cols) * params.n_rows > 4.0e9) throw DomainError("lattice too large");
    if (params.loading_cols < 1 || params.guard_cols < 0 ||
        params.loading_cols + params.guard_cols >= params.n_cols)
        throw DomainError("zone layout must leave at least one loading and one storage column");

    const std::size_t n = site_count();
    loading_ = SiteMask(n);
    storage_ = SiteMask(n);
    tweezers_ = SiteMask(n);
    xs_.resize(n);
    ys_.resize(n);
    for (int row = 0; row < params.n_rows; ++row) {
        for (int col = 0; col < params.n_cols; ++col) {
            const SiteIndex i = index(col, row);
            xs_[i] = col * params.spacing_x;
            ys_[i] = row * params.spacing_y;
            if (col < params.loading_cols) loading_.set(i);
            if (col >= storage_first_col()) storage_.set(i);
        }
    }

    if (params.tweezer_sites) {
        for (SiteIndex s : *params.tweezer_sites) {
            if (!contains(s) || !loading_.test(s)) throw DomainError("tweezer site outside the loading zone");
            tweezers_.set(s);
        }
    } else {
        const TweezerGrid& t = params.tweezers;
        if (t.cols < 0 || t.rows < 0 || t.col_stride < 1 || t.row_stride < 1 || t.col_offset < 0 || t.row_offset < 0)
            throw DomainError("tweezer grid needs non-negative counts/offsets and positive strides");
        for (int j = 0; j < t.rows; ++j) {
            for (int k = 0; k < t.cols; ++k) {
                const int col = t.col_offset + k * t.col_stride;
                const int row = t.row_offset + j * t.row_stride;
                if (col >= params.loading_cols || row >= params.n_rows)
                    throw DomainError("tweezer grid does not fit in the loading zone");
                tweezers_.set(index(col, row));
            }
        }
    }
}

SiteIndex LatticeGeometry::index(int col, int row) const {
    if (col < 0 || col >= n_cols())
        throw RangeError("column " + std::to_string(col) + " outside [0, " + std::to_string(n_cols()) + ")");
    if (row < 0 || row >= n_rows())
        throw RangeError("row " + std::to_string(row) + " outside [0, " + std::to_string(n_rows()) + ")");
    return static_cast<SiteIndex>(row) * static_cast<SiteIndex>(n_cols()) + static_cast<SiteIndex>(col);
}

Point LatticeGeometry::site_position(int col, int row) const {
    index(col, row);
    return Point{col * spacing_x(), row * spacing_y()};
}

Point LatticeGeometry::position(SiteIndex site) const {
    if (!contains(site)) throw RangeError("site " + std::to_string(site) + " outside the lattice");
    return Point{xs_[site], ys_[site]};
}

SitePosition LatticeGeometry::locate(SiteIndex site) const {
    const Point p = position(site);
    return SitePosition{col_of(site), row_of(site), p};
}

double LatticeGeometry::corridor_y(int row) const {
    if (row < 0 || row >= n_rows() - 1)
        throw RangeError("corridor row " + std::to_string(row) + " outside [0, " + std::to_string(n_rows() - 1) + ")");
    return (row + 0.5) * spacing_y();
}

double LatticeGeometry::column_midline_x(int col) const {
    if (col < 0 || col >= n_cols() - 1)
        throw RangeError("midline column " + std::to_string(col) + " outside [0, " + std::to_string(n_cols() - 1) +
                         ")");
    return (col + 0.5) * spacing_x();
}

std::string to_string(PotentialForm form) {
    switch (form) {
        case PotentialForm::separable:
            return "separable";
        case PotentialForm::tube:
            return "tube";
    }
    return "separable";
}

PotentialForm parse_potential_form(const std::string& name) {
    if (name == "separable") return PotentialForm::separable;
    if (name == "tube") return PotentialForm::tube;
    throw ConfigError("unknown potential form '" + name + "' (expected separable or tube)");
}

double potential_at(const PotentialModel& model, const LatticeGeometry& geometry, Point p) {
    const double cx = std::cos(std::numbers::pi * p.x / geometry.spacing_x());
    const double cy = std::cos(std::numbers::pi * p.y / geometry.spacing_y());
    const double site_term = cx * cx * cy * cy;
    switch (model.form) {
        case PotentialForm::separable:
            return -model.lattice_depth * site_term;
        case PotentialForm::tube: {
            const double c = 1.0 - model.row_confinement;
            return -model.lattice_depth * (c * site_term + (1.0 - c) * cy * cy);
        }
    }
    return 0.0;
}

namespace {

double polyline_length(std::span<const Point> polyline) {
    double total = 0.0;
    for (std::size_t i = 1; i < polyline.size(); ++i) total += distance(polyline[i - 1], polyline[i]);
    return total;
}

Point point_at_arc_length(std::span<const Point> polyline, double s) {
    for (std::size_t i = 1; i < polyline.size(); ++i) {
        const double len = distance(polyline[i - 1], polyline[i]);
        if (s <= len && len > 0.0) {
            const double t = s / len;
            return Point{polyline[i - 1].x + t * (polyline[i].x - polyline[i - 1].x),
                         polyline[i - 1].y + t * (polyline[i].y - polyline[i - 1].y)};
        }
        s -= len;
    }
    return polyline.back();
}

}  // namespace

PathModulation path_modulation(const PotentialModel& model, const LatticeGeometry& geometry,
                               std::span<const Point> polyline, int n_samples) {
    if (polyline.empty()) throw DomainError("path_modulation needs a nonempty polyline");
    if (n_samples < 2) throw DomainError("path_modulation needs at least two samples");
    const double total = polyline_length(polyline);
    if (total == 0.0) {
        const double u = potential_at(model, geometry, polyline.front());
        return PathModulation{u, u, 0.0};
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_samples; ++k) {
        const double s = total * static_cast<double>(k) / static_cast<double>(n_samples - 1);
        const double u = potential_at(model, geometry, point_at_arc_length(polyline, s));
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    return PathModulation{lo, hi, hi - lo};
}

double min_clearance(std::span<const Point> polyline, std::span<const Point> occupied, std::span<const Point> excluded) {
    if (polyline.empty()) throw DomainError("min_clearance needs a nonempty polyline");
    std::vector<double> xs;
    std::vector<double> ys;
    xs.reserve(occupied.size());
    ys.reserve(occupied.size());
    for (const Point& p : occupied) {
        if (std::find(excluded.begin(), excluded.end(), p) != excluded.end()) continue;
        xs.push_back(p.x);
        ys.push_back(p.y);
    }
    if (xs.empty()) return std::numeric_limits<double>::infinity();

    const auto& k = kernels::active();
    double best2 = std::numeric_limits<double>::infinity();
    const std::size_t n_segments = polyline.size() == 1 ? 1 : polyline.size() - 1;
    for (std::size_t i = 0; i < n_segments; ++i) {
        const Point a = polyline[i];
        const Point b = polyline.size() == 1 ? a : polyline[i + 1];
        best2 = std::min(best2, k.segment_min_dist2(kernels::Segment{a.x, a.y, b.x, b.y}, xs.data(), ys.data(), xs.size()));
    }
    return std::sqrt(best2);
}

TargetPattern::TargetPattern(const LatticeGeometry& geometry, const TargetPatternParams& params)
    : params_(params), n_rows_(geometry.n_rows()), mask_(geometry.site_count()) {
    if (params.row_stride < 1 || params.col_stride < 1) throw DomainError("target strides must be positive");
    if (params.row_offset < 0 || params.col_offset < 0) throw DomainError("target offsets must be non-negative");
    for (int row = params.row_offset; row < geometry.n_rows(); row += params.row_stride) {
        for (int col = geometry.storage_first_col() + params.col_offset; col < geometry.n_cols();
             col += params.col_stride) {
            const SiteIndex s = geometry.index(col, row);
            sites_.push_back(s);
            mask_.set(s);
        }
    }
    if (sites_.empty()) throw DomainError("target pattern selects no storage sites");
    if (geometry.n_rows() < 2) throw DomainError("target pattern needs at least two rows for corridors");
}

double TargetPattern::approach_offset(int row) const {
    const double half = std::floor(params_.row_stride / 2.0 - 0.5) + 0.5;
    // Corridor index k satisfies (k + 0.5) = row + offset.
    const double k_up = row + half - 0.5;
    if (k_up <= n_rows_ - 2) return half;
    const double k_down = row - half - 0.5;
    if (k_down >= 0) return -half;
    // Lattice too short for the preferred offset; fall back to the adjacent corridor.
    return row + 0.5 <= n_rows_ - 1.5 ? 0.5 : -0.5;
}

double transport_clearance(const LatticeGeometry& geometry, const TargetPattern& target) {
    const auto& p = target.params();
    std::vector<int> rows;
    for (int row = p.row_offset; row < geometry.n_rows(); row += p.row_stride) rows.push_back(row);

    // Vertical transit on the loading-zone boundary midline.
    const double first_target_x = (geometry.storage_first_col() + p.col_offset) * geometry.spacing_x();
    double clearance = first_target_x - geometry.exit_x();

    // Approach corridors.
    for (int row : rows) {
        const double corridor = row + target.approach_offset(row);
        for (int other : rows) clearance = std::min(clearance, std::abs(corridor - other) * geometry.spacing_y());
    }

    // Insertion strokes pass the neighbours in the destination row.
    const int n_target_cols = (geometry.n_cols() - geometry.storage_first_col() - p.col_offset + p.col_stride - 1) /
                              p.col_stride;
    if (n_target_cols > 1) clearance = std::min(clearance, p.col_stride * geometry.spacing_x());
    return clearance;
}

TargetPattern make_target_pattern(const LatticeGeometry& geometry, const TargetPatternParams& params, double d_min) {
    TargetPattern target(geometry, params);
    const double clearance = transport_clearance(geometry, target);
    if (clearance < d_min)
        throw DomainError("target pattern transport clearance " + std::to_string(clearance) +
                          " um is below d_min " + std::to_string(d_min) + " um");
    return target;
}

}  // namespace atomcycle
