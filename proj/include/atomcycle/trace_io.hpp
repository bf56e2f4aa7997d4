#pragma once

// Line-oriented text formats.
//
// Trace:
//   atomcycle-trace 1
//   seed <u64>
//   replica <int>
//   param <key> <value>          one per configuration setting
//   end-header
//   columns <names...>
//   cycle <values...>            one per cycle, followed by its images and destinations
//   image <cycle> <tag> hex <words>        or: image <cycle> <tag> grid, then n_rows lines of 0/1
//   dest <cycle> <count> <sites...>
//   end
//
// Occupancy grid: n_rows lines of n_cols characters '0'/'1', row 0 first.
// Blank lines and lines starting with '#' are ignored.
//
// Plan:
//   atomcycle-plan 1
//   d_min <value>
//   move <rank> <source> <destination> <n_strokes> <length> <duration>
//   stroke <x0> <y0> <x1> <y1> <mode>
//   violation <rank> <site> <distance>
//   end

#include <cstdint>
#include <iosfwd>
#include <string>

#include "atomcycle/config.hpp"
#include "atomcycle/simulator.hpp"

namespace atomcycle {

/// zlib CRC-32 of the mask words in little-endian byte order.
std::uint32_t image_crc32(const SiteMask& mask);

/// Column names of the cycle lines, in order.
const std::vector<std::string>& trace_columns();

void write_trace(std::ostream& out, const RunTrace& trace, OutputFormat image_format = OutputFormat::table);
/// Throws ParseError with the line and column of the first problem.
RunTrace read_trace(std::istream& in);
RunTrace read_trace_file(const std::string& path);

void write_occupancy_grid(std::ostream& out, const LatticeGeometry& geometry, const SiteMask& mask);
SiteMask read_occupancy_grid(std::istream& in, const LatticeGeometry& geometry);
SiteMask read_occupancy_grid_file(const std::string& path, const LatticeGeometry& geometry);

void write_plan(std::ostream& out, const MovePlan& plan, const KinematicParams& kinematics);
void write_trajectory(std::ostream& out, const TweezerTrajectory& trajectory);

}  // namespace atomcycle
