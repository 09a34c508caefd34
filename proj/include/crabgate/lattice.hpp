#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace crabgate {

/// Base class for every error the library raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Cell {
    int col = 0;
    int row = 0;

    friend constexpr bool operator==(const Cell&, const Cell&) = default;
    friend constexpr auto operator<=>(const Cell&, const Cell&) = default;
};

/// Plain 2-vector. x grows with the column index, y with the row index
/// (rows run downward, as in the map files).
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2& operator+=(Vec2 o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    double norm() const { return std::hypot(x, y); }
    constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }

    friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

/// The eight Moore directions, indexed by 45 degree sector counter-clockwise
/// in (x, y) from +x. Sector 2 is +y, i.e. one row down.
inline constexpr std::array<std::array<int, 2>, 8> kSectorOffsets{{
    {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1},
}};

/// Sector whose center is nearest to `angle` (radians).
inline int sector_of_angle(double angle) {
    constexpr double quarter = std::numbers::pi / 4.0;
    const auto k = static_cast<long>(std::floor(angle / quarter + 0.5));
    return static_cast<int>(((k % 8) + 8) % 8);
}

inline int sector_of(Vec2 v) { return sector_of_angle(std::atan2(v.y, v.x)); }

/// Unit vector along a Moore step (dc, dr), both in {-1, 0, 1}, not both 0.
inline Vec2 unit_step(int dc, int dr) {
    const Vec2 v{static_cast<double>(dc), static_cast<double>(dr)};
    return v * (1.0 / v.norm());
}

enum class Topology { Bounded, Torus };
enum class Terrain : std::uint8_t { Free, Wall };

/// Occupancy lattice. Cells outside a bounded world behave as walls.
class World {
public:
    static constexpr int kEmpty = -1;

    World() = default;
    World(int width, int height, Topology topology = Topology::Bounded)
        : width_(width),
          height_(height),
          topology_(topology),
          terrain_(checked_area(width, height), Terrain::Free),
          occupant_(terrain_.size(), kEmpty),
          flow_(terrain_.size()),
          has_flow_(terrain_.size(), 0) {}

    int width() const { return width_; }
    int height() const { return height_; }
    Topology topology() const { return topology_; }
    std::size_t area() const { return terrain_.size(); }

    bool in_bounds(Cell c) const {
        return c.col >= 0 && c.row >= 0 && c.col < width_ && c.row < height_;
    }
    std::size_t index(Cell c) const {
        return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(c.col);
    }
    Cell cell_at(std::size_t i) const {
        return {static_cast<int>(i % static_cast<std::size_t>(width_)),
                static_cast<int>(i / static_cast<std::size_t>(width_))};
    }

    /// Neighbor at offset (dc, dr); wraps on a torus, empty when it leaves a
    /// bounded world.
    std::optional<Cell> offset(Cell c, int dc, int dr) const {
        Cell n{c.col + dc, c.row + dr};
        if (topology_ == Topology::Torus) {
            n.col = ((n.col % width_) + width_) % width_;
            n.row = ((n.row % height_) + height_) % height_;
            return n;
        }
        if (!in_bounds(n)) return std::nullopt;
        return n;
    }

    /// Chebyshev distance, honoring wrap-around on a torus.
    int chebyshev(Cell a, Cell b) const {
        int dc = std::abs(a.col - b.col);
        int dr = std::abs(a.row - b.row);
        if (topology_ == Topology::Torus) {
            dc = std::min(dc, width_ - dc);
            dr = std::min(dr, height_ - dr);
        }
        return std::max(dc, dr);
    }

    /// Shortest displacement from a to b (components in {-1,0,1} for
    /// neighbors).
    std::array<int, 2> displacement(Cell a, Cell b) const {
        int dc = b.col - a.col;
        int dr = b.row - a.row;
        if (topology_ == Topology::Torus) {
            if (dc > width_ / 2) dc -= width_;
            if (dc < -width_ / 2) dc += width_;
            if (dr > height_ / 2) dr -= height_;
            if (dr < -height_ / 2) dr += height_;
        }
        return {dc, dr};
    }

    Terrain terrain(Cell c) const { return terrain_[index(c)]; }
    void set_terrain(Cell c, Terrain t) { terrain_[index(c)] = t; }
    bool is_free(Cell c) const { return in_bounds(c) && terrain_[index(c)] == Terrain::Free; }
    bool is_wall(Cell c) const { return !is_free(c); }

    int occupant(Cell c) const { return occupant_[index(c)]; }
    bool is_vacant(Cell c) const { return is_free(c) && occupant_[index(c)] == kEmpty; }
    void set_occupant(Cell c, int slot) { occupant_[index(c)] = slot; }
    void clear_occupancy() { std::fill(occupant_.begin(), occupant_.end(), kEmpty); }

    std::optional<Vec2> flow(Cell c) const {
        const auto i = index(c);
        if (!has_flow_[i]) return std::nullopt;
        return flow_[i];
    }
    void set_flow(Cell c, std::optional<Vec2> v) {
        const auto i = index(c);
        has_flow_[i] = v.has_value();
        flow_[i] = v.value_or(Vec2{});
    }

    /// True when some wall lies within Chebyshev distance 1 of c.
    bool touches_wall(Cell c) const {
        for (int dr = -1; dr <= 1; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
                if (dc == 0 && dr == 0) continue;
                const Cell n{c.col + dc, c.row + dr};
                if (in_bounds(n) && terrain_[index(n)] == Terrain::Wall) return true;
            }
        }
        return false;
    }

private:
    static std::size_t checked_area(int width, int height) {
        if (width <= 0 || height <= 0) {
            throw Error("world dimensions must be positive, got " + std::to_string(width) +
                        "x" + std::to_string(height));
        }
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }

    int width_ = 0;
    int height_ = 0;
    Topology topology_ = Topology::Bounded;
    std::vector<Terrain> terrain_;
    std::vector<int> occupant_;
    std::vector<Vec2> flow_;
    std::vector<std::uint8_t> has_flow_;
};

}  // namespace crabgate

template <>
struct std::hash<crabgate::Cell> {
    std::size_t operator()(const crabgate::Cell& c) const noexcept {
        return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.col)) << 32) |
                                          static_cast<std::uint32_t>(c.row));
    }
};
