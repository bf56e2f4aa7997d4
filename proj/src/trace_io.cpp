#include "atomcycle/trace_io.hpp"

#include <zlib.h>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "atomcycle/errors.hpp"

namespace atomcycle {
namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string hex32(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08x", v);
    return buf;
}

// Reads lines and splits them into whitespace-separated tokens with columns.
class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    bool next() {
        if (!std::getline(in_, line_)) return false;
        ++number_;
        if (!line_.empty() && line_.back() == '\r') line_.pop_back();
        tokens_.clear();
        columns_.clear();
        std::size_t i = 0;
        while (i < line_.size()) {
            while (i < line_.size() && (line_[i] == ' ' || line_[i] == '\t')) ++i;
            if (i >= line_.size()) break;
            const std::size_t start = i;
            while (i < line_.size() && line_[i] != ' ' && line_[i] != '\t') ++i;
            tokens_.push_back(line_.substr(start, i - start));
            columns_.push_back(start + 1);
        }
        return true;
    }

    void require_next(const char* what) {
        if (!next()) throw ParseError(number_ + 1, 1, std::string("unexpected end of file, expected ") + what);
    }

    const std::string& line() const { return line_; }
    std::size_t number() const { return number_; }
    std::size_t size() const { return tokens_.size(); }
    const std::string& token(std::size_t i) const {
        if (i >= tokens_.size())
            throw ParseError(number_, line_.size() + 1, "missing field " + std::to_string(i + 1));
        return tokens_[i];
    }
    std::size_t column(std::size_t i) const { return i < columns_.size() ? columns_[i] : line_.size() + 1; }

    [[noreturn]] void fail(std::size_t token_index, const std::string& what) const {
        throw ParseError(number_, column(token_index), what);
    }

    void expect_keyword(const char* keyword) const {
        if (tokens_.empty() || tokens_[0] != keyword) fail(0, std::string("expected '") + keyword + "'");
    }

    template <typename Int>
    Int integer(std::size_t i) const {
        const std::string& t = token(i);
        Int v{};
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc() || ptr != t.data() + t.size()) fail(i, "expected an integer, got '" + t + "'");
        return v;
    }

private:
    std::istream& in_;
    std::string line_;
    std::size_t number_ = 0;
    std::vector<std::string> tokens_;
    std::vector<std::size_t> columns_;
};

std::string mask_hex(const SiteMask& mask) {
    std::string out;
    out.reserve(mask.words().size() * 16);
    char buf[20];
    for (std::uint64_t w : mask.words()) {
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(w));
        out += buf;
    }
    return out;
}

SiteMask parse_mask_hex(const LineReader& r, std::size_t token_index, std::size_t n_sites) {
    const std::string& t = r.token(token_index);
    SiteMask mask(n_sites);
    const std::size_t n_words = (n_sites + 63) / 64;
    if (t.size() != n_words * 16)
        r.fail(token_index, "expected " + std::to_string(n_words * 16) + " hex digits, got " + std::to_string(t.size()));
    for (std::size_t w = 0; w < n_words; ++w) {
        std::uint64_t value = 0;
        const char* begin = t.data() + w * 16;
        const auto [ptr, ec] = std::from_chars(begin, begin + 16, value, 16);
        if (ec != std::errc() || ptr != begin + 16)
            throw ParseError(r.number(), r.column(token_index) + w * 16, "invalid hex digit");
        for (int b = 0; b < 64; ++b) {
            if (!((value >> b) & 1U)) continue;
            const std::size_t site = w * 64 + static_cast<std::size_t>(b);
            if (site >= n_sites) throw ParseError(r.number(), r.column(token_index) + w * 16, "bit set past the lattice");
            mask.set(static_cast<SiteIndex>(site));
        }
    }
    return mask;
}

// Parses one grid row into `mask`; errors carry the 1-based column of the
// offending character.
void parse_grid_row(const std::string& line, std::size_t line_number, int row, const LatticeGeometry& g,
                    SiteMask& mask) {
    if (line.size() != static_cast<std::size_t>(g.n_cols())) {
        const std::size_t col = std::min(line.size(), static_cast<std::size_t>(g.n_cols())) + 1;
        throw ParseError(line_number, col,
                         "grid row has " + std::to_string(line.size()) + " cells, expected " +
                             std::to_string(g.n_cols()));
    }
    for (int c = 0; c < g.n_cols(); ++c) {
        const char ch = line[static_cast<std::size_t>(c)];
        if (ch == '1')
            mask.set(g.index(c, row));
        else if (ch != '0')
            throw ParseError(line_number, static_cast<std::size_t>(c) + 1, std::string("invalid grid cell '") + ch + "'");
    }
}

SiteMask read_grid_block(LineReader& r, const LatticeGeometry& g, bool skip_comments) {
    SiteMask mask(g.site_count());
    int row = 0;
    while (row < g.n_rows()) {
        if (!r.next())
            throw ParseError(r.number() + 1, 1,
                             "grid ended after " + std::to_string(row) + " rows, expected " + std::to_string(g.n_rows()));
        std::string line = r.line();
        if (skip_comments && (line.empty() || line[0] == '#')) continue;
        parse_grid_row(line, r.number(), row, g, mask);
        ++row;
    }
    return mask;
}

std::vector<std::size_t> record_values(const CycleRecord& rec) {
    return {static_cast<std::size_t>(rec.cycle_index), rec.resorted ? 1U : 0U, rec.n_loaded, rec.n_moves_planned,
            rec.n_moves_attempted, rec.n_moves_succeeded, rec.n_phantom_moves, rec.n_move_losses, rec.n_pair_losses,
            rec.n_collateral_losses, rec.n_disturbance_losses, rec.n_shelving_losses, rec.n_vacuum_losses,
            rec.n_imaging_losses, rec.stored_before, rec.stored_true_after, rec.new_survivors, rec.stored_count_after};
}

void assign_record_values(CycleRecord& rec, const std::vector<std::size_t>& v) {
    rec.cycle_index = static_cast<int>(v[0]);
    rec.resorted = v[1] != 0;
    rec.n_loaded = v[2];
    rec.n_moves_planned = v[3];
    rec.n_moves_attempted = v[4];
    rec.n_moves_succeeded = v[5];
    rec.n_phantom_moves = v[6];
    rec.n_move_losses = v[7];
    rec.n_pair_losses = v[8];
    rec.n_collateral_losses = v[9];
    rec.n_disturbance_losses = v[10];
    rec.n_shelving_losses = v[11];
    rec.n_vacuum_losses = v[12];
    rec.n_imaging_losses = v[13];
    rec.stored_before = v[14];
    rec.stored_true_after = v[15];
    rec.new_survivors = v[16];
    rec.stored_count_after = v[17];
}

}  // namespace

std::uint32_t image_crc32(const SiteMask& mask) {
    std::vector<unsigned char> bytes;
    bytes.reserve(mask.words().size() * 8);
    for (std::uint64_t w : mask.words())
        for (int b = 0; b < 8; ++b) bytes.push_back(static_cast<unsigned char>(w >> (8 * b)));
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
    return static_cast<std::uint32_t>(crc);
}

const std::vector<std::string>& trace_columns() {
    static const std::vector<std::string> names = {
        "cycle",      "resorted",    "n_loaded",  "planned",  "attempted",     "succeeded",
        "phantom",    "move_loss",   "pair_loss", "collateral", "disturbance", "shelving",
        "vacuum",     "imaging",     "stored_before", "stored_true_after", "new_survivors", "stored_count_after",
        "crc_image1", "crc_image2"};
    return names;
}

void write_trace(std::ostream& out, const RunTrace& trace, OutputFormat image_format) {
    RunConfiguration rc;
    rc.simulation = trace.config;
    const LatticeGeometry g(trace.config.geometry);

    out << "atomcycle-trace 1\n";
    out << "seed " << trace.seed << "\n";
    out << "replica " << trace.replica << "\n";
    for (const auto& [key, value] : flatten(rc)) {
        if (key.rfind("output.", 0) == 0 || key.rfind("predict.", 0) == 0) continue;
        out << "param " << key << ' ' << value << "\n";
    }
    out << "end-header\n";
    out << "columns";
    for (const std::string& c : trace_columns()) out << ' ' << c;
    out << "\n";

    for (const CycleRecord& rec : trace.records) {
        out << "cycle";
        for (std::size_t v : record_values(rec)) out << ' ' << v;
        out << ' ' << hex32(image_crc32(rec.image1.occupied)) << ' ' << hex32(image_crc32(rec.image2.occupied)) << "\n";
        for (const OccupancyMatrix* img : {&rec.image1, &rec.image2}) {
            out << "image " << rec.cycle_index << ' ' << img->image_tag;
            if (image_format == OutputFormat::grid) {
                out << " grid\n";
                write_occupancy_grid(out, g, img->occupied);
            } else {
                out << " hex " << mask_hex(img->occupied) << "\n";
            }
        }
        out << "dest " << rec.cycle_index << ' ' << rec.destinations.size();
        for (SiteIndex s : rec.destinations) out << ' ' << s;
        out << "\n";
    }
    out << "end\n";
}

RunTrace read_trace(std::istream& in) {
    LineReader r(in);
    r.require_next("trace header");
    if (r.size() != 2 || r.token(0) != "atomcycle-trace") r.fail(0, "not an atomcycle trace");
    if (r.token(1) != "1") r.fail(1, "unsupported trace version '" + r.token(1) + "'");

    RunTrace trace;
    r.require_next("seed");
    r.expect_keyword("seed");
    trace.seed = r.integer<std::uint64_t>(1);
    r.require_next("replica");
    r.expect_keyword("replica");
    trace.replica = r.integer<int>(1);

    RunConfiguration rc;
    for (;;) {
        r.require_next("param or end-header");
        if (r.size() == 1 && r.token(0) == "end-header") break;
        r.expect_keyword("param");
        const std::string& key = r.token(1);
        const std::size_t value_col = r.column(2);
        const std::string value = value_col <= r.line().size() ? r.line().substr(value_col - 1) : std::string();
        try {
            apply_setting(rc, key, value);
        } catch (const ConfigError& e) {
            r.fail(1, e.what());
        }
    }
    trace.config = rc.simulation;
    LatticeGeometry g(trace.config.geometry);

    r.require_next("columns");
    r.expect_keyword("columns");
    const auto& names = trace_columns();
    if (r.size() != names.size() + 1) r.fail(0, "expected " + std::to_string(names.size()) + " column names");
    for (std::size_t i = 0; i < names.size(); ++i)
        if (r.token(i + 1) != names[i]) r.fail(i + 1, "expected column '" + names[i] + "'");

    for (;;) {
        r.require_next("cycle or end");
        if (r.size() == 1 && r.token(0) == "end") break;
        r.expect_keyword("cycle");
        if (r.size() != names.size() + 1)
            r.fail(0, "cycle line has " + std::to_string(r.size() - 1) + " fields, expected " +
                          std::to_string(names.size()));
        CycleRecord rec;
        std::vector<std::size_t> values;
        for (std::size_t i = 1; i + 2 < r.size(); ++i) values.push_back(r.integer<std::size_t>(i));
        assign_record_values(rec, values);
        if (rec.cycle_index != static_cast<int>(trace.records.size()))
            r.fail(1, "expected cycle " + std::to_string(trace.records.size()));
        const std::size_t crc_index = r.size() - 2;
        std::uint32_t crcs[2];
        for (int k = 0; k < 2; ++k) {
            const std::string& t = r.token(crc_index + k);
            const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), crcs[k], 16);
            if (ec != std::errc() || ptr != t.data() + t.size()) r.fail(crc_index + k, "invalid checksum");
        }

        for (int tag = 1; tag <= 2; ++tag) {
            r.require_next("image");
            r.expect_keyword("image");
            if (r.integer<int>(1) != rec.cycle_index) r.fail(1, "image belongs to another cycle");
            if (r.integer<int>(2) != tag) r.fail(2, "expected image tag " + std::to_string(tag));
            OccupancyMatrix img;
            img.image_tag = tag;
            const std::size_t crc_line = r.number();
            if (r.token(3) == "hex") {
                img.occupied = parse_mask_hex(r, 4, g.site_count());
            } else if (r.token(3) == "grid") {
                img.occupied = read_grid_block(r, g, false);
            } else {
                r.fail(3, "expected 'hex' or 'grid'");
            }
            if (image_crc32(img.occupied) != crcs[tag - 1])
                throw ParseError(crc_line, 1, "image checksum mismatch for cycle " + std::to_string(rec.cycle_index));
            (tag == 1 ? rec.image1 : rec.image2) = std::move(img);
        }

        r.require_next("dest");
        r.expect_keyword("dest");
        if (r.integer<int>(1) != rec.cycle_index) r.fail(1, "destinations belong to another cycle");
        const auto count = r.integer<std::size_t>(2);
        if (r.size() != count + 3) r.fail(2, "destination count does not match the listed sites");
        for (std::size_t i = 0; i < count; ++i) {
            const auto s = r.integer<SiteIndex>(3 + i);
            if (!g.contains(s)) r.fail(3 + i, "destination outside the lattice");
            rec.destinations.push_back(s);
        }
        trace.records.push_back(std::move(rec));
    }
    trace.wall_parameters = emergent_parameters(trace.records);
    return trace;
}

RunTrace read_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read trace file " + path);
    return read_trace(in);
}

void write_occupancy_grid(std::ostream& out, const LatticeGeometry& g, const SiteMask& mask) {
    std::string line(static_cast<std::size_t>(g.n_cols()), '0');
    for (int row = 0; row < g.n_rows(); ++row) {
        for (int c = 0; c < g.n_cols(); ++c) line[static_cast<std::size_t>(c)] = mask.test(g.index(c, row)) ? '1' : '0';
        out << line << '\n';
    }
}

SiteMask read_occupancy_grid(std::istream& in, const LatticeGeometry& g) {
    LineReader r(in);
    SiteMask mask = read_grid_block(r, g, true);
    while (r.next()) {
        if (r.line().empty() || r.line()[0] == '#') continue;
        throw ParseError(r.number(), 1, "unexpected content after " + std::to_string(g.n_rows()) + " grid rows");
    }
    return mask;
}

SiteMask read_occupancy_grid_file(const std::string& path, const LatticeGeometry& g) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read occupancy file " + path);
    return read_occupancy_grid(in, g);
}

void write_plan(std::ostream& out, const MovePlan& plan, const KinematicParams& k) {
    out << "atomcycle-plan 1\n";
    out << "d_min " << fixed6(plan.d_min) << "\n";
    for (const Move& m : plan.moves) {
        out << "move " << m.order_rank << ' ' << m.source << ' ' << m.destination << ' ' << m.strokes.size() << ' '
            << fixed6(m.length()) << ' ' << fixed6(move_duration(m, k)) << "\n";
        for (const Stroke& s : m.strokes)
            out << "stroke " << fixed6(s.from.x) << ' ' << fixed6(s.from.y) << ' ' << fixed6(s.to.x) << ' '
                << fixed6(s.to.y) << ' ' << to_string(s.mode) << "\n";
    }
    for (const Violation& v : plan.violations)
        out << "violation " << v.move_rank << ' ' << v.site << ' ' << fixed6(v.distance) << "\n";
    out << "end\n";
}

void write_trajectory(std::ostream& out, const TweezerTrajectory& traj) {
    out << "# t_ms x_um y_um depth\n";
    for (const TrajectorySample& s : traj.samples)
        out << fixed6(s.t) << ' ' << fixed6(s.position.x) << ' ' << fixed6(s.position.y) << ' ' << fixed6(s.depth)
            << "\n";
}

}  // namespace atomcycle
