#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "crabgate/lattice.hpp"

namespace crabgate {

class ParseError : public Error {
public:
    ParseError(int line, int column, const std::string& what)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line_(line),
          column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

inline constexpr std::array<char, 2> kInputLabels{'A', 'B'};
inline constexpr std::array<int, 3> kOutputLabels{1, 2, 3};

/// A gate map: terrain and wall flow plus the labelled input and output
/// regions. Immutable once parsed; runs copy `world`.
struct GateLayout {
    std::string name;
    World world;  ///< terrain and flow, no agents
    std::map<char, std::vector<Cell>> input_regions;
    std::map<int, std::vector<Cell>> output_regions;

    /// Output region containing c, or 0.
    int output_at(Cell c) const {
        if (!world.in_bounds(c)) return 0;
        return output_index_.empty() ? 0 : output_index_[world.index(c)];
    }

    bool has_input(char label) const {
        auto it = input_regions.find(label);
        return it != input_regions.end() && !it->second.empty();
    }
    bool has_output(int label) const {
        auto it = output_regions.find(label);
        return it != output_regions.end() && !it->second.empty();
    }

    void index_outputs() {
        output_index_.assign(world.area(), 0);
        for (const auto& [label, cells] : output_regions) {
            for (const Cell c : cells) output_index_[world.index(c)] = static_cast<std::uint8_t>(label);
        }
    }

private:
    std::vector<std::uint8_t> output_index_;
};

namespace detail {

struct SourceRow {
    int line;
    std::string text;
};

inline std::optional<Vec2> flow_vector(char ch) {
    switch (ch) {
        case '^': return Vec2{0.0, -1.0};
        case 'v': return Vec2{0.0, 1.0};
        case '<': return Vec2{-1.0, 0.0};
        case '>': return Vec2{1.0, 0.0};
        default: return std::nullopt;
    }
}

inline char flow_char(std::optional<Vec2> v) {
    if (!v) return '.';
    if (v->y < -0.5) return '^';
    if (v->y > 0.5) return 'v';
    if (v->x < -0.5) return '<';
    return '>';
}

}  // namespace detail

/// Parses the MAP/FLOW text format.
///
///     ; comment
///     MAP
///     #######
///     #A.2.B#
///     FLOW
///     .......
///     .>...<.
///
/// MAP legend: '#' wall, '.' free, 'A'/'B' input regions, '1'/'2'/'3'
/// output regions. FLOW legend: '^' 'v' '<' '>' unit vectors (row-, row+,
/// col-, col+), '.' none. Flow may only sit on free cells next to a wall.
inline GateLayout parse_layout(std::string_view text, std::string name = "layout") {
    std::vector<detail::SourceRow> map_rows;
    std::vector<detail::SourceRow> flow_rows;
    std::vector<detail::SourceRow>* section = nullptr;
    int map_header = 0;
    int flow_header = 0;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string line(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (const auto semi = line.find(';'); semi != std::string::npos) line.erase(semi);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) line.pop_back();
        if (line.empty()) continue;

        if (line == "MAP" || line == "FLOW") {
            const bool is_map = line == "MAP";
            int& header = is_map ? map_header : flow_header;
            if (header != 0) throw ParseError(line_no, 1, "duplicate " + line + " section");
            header = line_no;
            section = is_map ? &map_rows : &flow_rows;
            continue;
        }
        if (section == nullptr) throw ParseError(line_no, 1, "content before MAP or FLOW section header");
        section->push_back({line_no, std::move(line)});
    }

    if (map_header == 0) throw ParseError(line_no, 1, "missing MAP section");
    if (flow_header == 0) throw ParseError(line_no, 1, "missing FLOW section");
    if (map_rows.empty()) throw ParseError(map_header, 1, "MAP section has no rows");

    const int height = static_cast<int>(map_rows.size());
    const int width = static_cast<int>(map_rows.front().text.size());
    for (const auto& r : map_rows) {
        if (static_cast<int>(r.text.size()) != width) {
            throw ParseError(r.line, static_cast<int>(std::min(r.text.size(), static_cast<std::size_t>(width))) + 1,
                             "MAP rows must all be " + std::to_string(width) + " characters wide");
        }
    }
    if (static_cast<int>(flow_rows.size()) != height) {
        throw ParseError(flow_rows.empty() ? flow_header : flow_rows.back().line, 1,
                         "FLOW has " + std::to_string(flow_rows.size()) + " rows, MAP has " +
                             std::to_string(height));
    }
    for (const auto& r : flow_rows) {
        if (static_cast<int>(r.text.size()) != width) {
            throw ParseError(r.line, static_cast<int>(std::min(r.text.size(), static_cast<std::size_t>(width))) + 1,
                             "FLOW rows must match the MAP width of " + std::to_string(width));
        }
    }

    GateLayout layout;
    layout.name = std::move(name);
    layout.world = World(width, height, Topology::Bounded);
    for (int row = 0; row < height; ++row) {
        const auto& src = map_rows[static_cast<std::size_t>(row)];
        for (int col = 0; col < width; ++col) {
            const char ch = src.text[static_cast<std::size_t>(col)];
            const Cell c{col, row};
            switch (ch) {
                case '#': layout.world.set_terrain(c, Terrain::Wall); break;
                case '.': break;
                case 'A':
                case 'B': layout.input_regions[ch].push_back(c); break;
                case '1':
                case '2':
                case '3': layout.output_regions[ch - '0'].push_back(c); break;
                default:
                    throw ParseError(src.line, col + 1, std::string("unknown MAP character '") + ch + "'");
            }
        }
    }
    for (int row = 0; row < height; ++row) {
        const auto& src = flow_rows[static_cast<std::size_t>(row)];
        for (int col = 0; col < width; ++col) {
            const char ch = src.text[static_cast<std::size_t>(col)];
            if (ch == '.') continue;
            const auto v = detail::flow_vector(ch);
            if (!v) throw ParseError(src.line, col + 1, std::string("unknown FLOW character '") + ch + "'");
            const Cell c{col, row};
            if (layout.world.is_wall(c)) throw ParseError(src.line, col + 1, "flow arrow on a wall cell");
            if (!layout.world.touches_wall(c)) throw ParseError(src.line, col + 1, "flow arrow not adjacent to a wall");
            layout.world.set_flow(c, v);
        }
    }

    if (layout.input_regions.empty()) throw ParseError(map_header, 1, "MAP defines no input region (A or B)");
    if (layout.output_regions.empty()) throw ParseError(map_header, 1, "MAP defines no output region (1, 2 or 3)");
    layout.index_outputs();
    return layout;
}

/// Reads a layout file; the layout is named after the file stem.
inline GateLayout load_layout(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open layout file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_layout(buf.str(), path.stem().string());
}

/// Writes a layout back in the MAP/FLOW format.
inline std::string format_layout(const GateLayout& layout) {
    const World& w = layout.world;
    std::vector<std::string> map(static_cast<std::size_t>(w.height()), std::string(static_cast<std::size_t>(w.width()), '.'));
    for (int row = 0; row < w.height(); ++row) {
        for (int col = 0; col < w.width(); ++col) {
            if (w.is_wall({col, row})) map[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)] = '#';
        }
    }
    for (const auto& [label, cells] : layout.input_regions) {
        for (const Cell c : cells) map[static_cast<std::size_t>(c.row)][static_cast<std::size_t>(c.col)] = label;
    }
    for (const auto& [label, cells] : layout.output_regions) {
        for (const Cell c : cells) {
            map[static_cast<std::size_t>(c.row)][static_cast<std::size_t>(c.col)] = static_cast<char>('0' + label);
        }
    }
    std::string out = "MAP\n";
    for (const auto& r : map) out += r + '\n';
    out += "FLOW\n";
    for (int row = 0; row < w.height(); ++row) {
        for (int col = 0; col < w.width(); ++col) out += detail::flow_char(w.flow({col, row}));
        out += '\n';
    }
    return out;
}

}  // namespace crabgate
