#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crabgate/agent.hpp"
#include "crabgate/layout.hpp"

namespace crabgate {

enum class ImageFormat { Ppm, Svg };

inline ImageFormat parse_format(std::string_view s) {
    if (s == "ppm") return ImageFormat::Ppm;
    if (s == "svg") return ImageFormat::Svg;
    throw Error("image format must be ppm or svg");
}

inline std::string_view extension(ImageFormat f) { return f == ImageFormat::Ppm ? "ppm" : "svg"; }

/// frame_%06d.<ext>
inline std::string snapshot_name(int step, ImageFormat f) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%06d.", step);
    return buf + std::string(extension(f));
}

/// Last `length` positions of every agent, oldest first. Consecutive
/// repeats are folded, so an agent that stood still leaves a one-cell trail.
class TrailRecorder {
public:
    explicit TrailRecorder(int length = 5) : length_(length < 1 ? 1 : length) {}

    int length() const { return length_; }

    void record(std::span<const Agent> agents) {
        std::map<int, std::deque<Cell>> next;
        for (const auto& a : agents) {
            auto& t = next[a.id];
            if (auto it = history_.find(a.id); it != history_.end()) t = std::move(it->second);
            t.push_back(a.pos);
            while (static_cast<int>(t.size()) > length_) t.pop_front();
        }
        history_ = std::move(next);
    }

    std::vector<Cell> trail(int id) const {
        std::vector<Cell> out;
        auto it = history_.find(id);
        if (it == history_.end()) return out;
        for (const Cell c : it->second) {
            if (out.empty() || !(out.back() == c)) out.push_back(c);
        }
        return out;
    }

private:
    int length_;
    std::map<int, std::deque<Cell>> history_;
};

struct RenderOptions {
    int cell_px = 6;
    bool flow_arrows = false;
    const GateLayout* regions = nullptr;  ///< tints input/output regions when set
};

namespace detail {

using Rgb = std::array<std::uint8_t, 3>;

inline constexpr Rgb kBackground{250, 250, 247};
inline constexpr Rgb kWall{38, 38, 44};
inline constexpr Rgb kInputTint{214, 228, 245};
inline constexpr Rgb kOutputTint{216, 240, 214};
inline constexpr Rgb kAgent{196, 52, 40};
inline constexpr Rgb kArrow{120, 120, 130};

inline Rgb blend(Rgb a, Rgb b, double t) {
    Rgb out{};
    for (std::size_t i = 0; i < 3; ++i) {
        out[i] = static_cast<std::uint8_t>(a[i] + (b[i] - a[i]) * t + 0.5);
    }
    return out;
}

inline std::string hex(Rgb c) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
    return buf;
}

inline std::string fixed2(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
}

/// Trail shade for position k of n (0 oldest); newer is stronger.
inline double trail_strength(std::size_t k, std::size_t n) {
    return 0.15 + 0.5 * static_cast<double>(k + 1) / static_cast<double>(n);
}

struct Canvas {
    int width;
    int height;
    std::vector<std::uint8_t> rgb;

    Canvas(int w, int h, Rgb fill) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3) {
        for (std::size_t i = 0; i < rgb.size(); i += 3) std::copy(fill.begin(), fill.end(), rgb.begin() + i);
    }
    void put(int x, int y, Rgb c) {
        if (x < 0 || y < 0 || x >= width || y >= height) return;
        const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
        std::copy(c.begin(), c.end(), rgb.begin() + static_cast<std::ptrdiff_t>(i));
    }
    void rect(int x0, int y0, int w, int h, Rgb c) {
        for (int y = y0; y < y0 + h; ++y)
            for (int x = x0; x < x0 + w; ++x) put(x, y, c);
    }
};

}  // namespace detail

/// Draws one frame: walls dark, agents as squares, fading trails behind them.
inline std::string render_frame(const World& world, std::span<const Agent> agents, const TrailRecorder& trails,
                                ImageFormat format, const RenderOptions& opt = {}) {
    using namespace detail;
    const int px = opt.cell_px < 2 ? 2 : opt.cell_px;
    const int inset = px >= 4 ? 1 : 0;
    const int W = world.width() * px;
    const int H = world.height() * px;

    std::vector<std::uint8_t> is_input(world.area(), 0);
    if (opt.regions) {
        for (const auto& [label, cells] : opt.regions->input_regions) {
            for (const Cell c : cells)
                if (world.in_bounds(c)) is_input[world.index(c)] = 1;
        }
    }
    auto cell_color = [&](Cell c) -> std::optional<Rgb> {
        if (world.is_wall(c)) return kWall;
        if (opt.regions) {
            if (opt.regions->output_at(c) != 0) return kOutputTint;
            if (is_input[world.index(c)]) return kInputTint;
        }
        return std::nullopt;
    };

    if (format == ImageFormat::Ppm) {
        Canvas canvas(W, H, kBackground);
        for (int row = 0; row < world.height(); ++row) {
            for (int col = 0; col < world.width(); ++col) {
                if (const auto c = cell_color({col, row})) canvas.rect(col * px, row * px, px, px, *c);
            }
        }
        if (opt.flow_arrows) {
            for (int row = 0; row < world.height(); ++row) {
                for (int col = 0; col < world.width(); ++col) {
                    const auto f = world.flow({col, row});
                    if (!f) continue;
                    const int cx = col * px + px / 2;
                    const int cy = row * px + px / 2;
                    for (int k = 0; k <= px / 2; ++k) {
                        canvas.put(cx + static_cast<int>(f->x * k), cy + static_cast<int>(f->y * k), kArrow);
                    }
                }
            }
        }
        for (const auto& a : agents) {
            const auto t = trails.trail(a.id);
            for (std::size_t k = 0; k + 1 < t.size(); ++k) {
                const Rgb c = blend(kBackground, kAgent, trail_strength(k, t.size()));
                canvas.rect(t[k].col * px + inset, t[k].row * px + inset, px - 2 * inset, px - 2 * inset, c);
            }
        }
        for (const auto& a : agents) {
            canvas.rect(a.pos.col * px + inset, a.pos.row * px + inset, px - 2 * inset, px - 2 * inset, kAgent);
        }
        std::string out = "P6\n" + std::to_string(W) + ' ' + std::to_string(H) + "\n255\n";
        out.append(reinterpret_cast<const char*>(canvas.rgb.data()), canvas.rgb.size());
        return out;
    }

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(W) + "\" height=\"" +
           std::to_string(H) + "\" viewBox=\"0 0 " + std::to_string(W) + ' ' + std::to_string(H) + "\">\n";
    out += "<rect width=\"" + std::to_string(W) + "\" height=\"" + std::to_string(H) + "\" fill=\"" +
           hex(kBackground) + "\"/>\n";
    auto rect = [&](Cell c, int in, const std::string& attrs) {
        out += "<rect x=\"" + std::to_string(c.col * px + in) + "\" y=\"" + std::to_string(c.row * px + in) +
               "\" width=\"" + std::to_string(px - 2 * in) + "\" height=\"" + std::to_string(px - 2 * in) + "\" " +
               attrs + "/>\n";
    };
    for (int row = 0; row < world.height(); ++row) {
        for (int col = 0; col < world.width(); ++col) {
            if (const auto c = cell_color({col, row})) rect({col, row}, 0, "fill=\"" + hex(*c) + "\"");
        }
    }
    if (opt.flow_arrows) {
        for (int row = 0; row < world.height(); ++row) {
            for (int col = 0; col < world.width(); ++col) {
                const auto f = world.flow({col, row});
                if (!f) continue;
                const int cx = col * px + px / 2;
                const int cy = row * px + px / 2;
                out += "<line x1=\"" + std::to_string(cx) + "\" y1=\"" + std::to_string(cy) + "\" x2=\"" +
                       std::to_string(cx + static_cast<int>(f->x * (px / 2))) + "\" y2=\"" +
                       std::to_string(cy + static_cast<int>(f->y * (px / 2))) + "\" stroke=\"" + hex(kArrow) +
                       "\"/>\n";
            }
        }
    }
    for (const auto& a : agents) {
        const auto t = trails.trail(a.id);
        for (std::size_t k = 0; k + 1 < t.size(); ++k) {
            rect(t[k], inset, "fill=\"" + hex(kAgent) + "\" fill-opacity=\"" + fixed2(trail_strength(k, t.size())) + "\"");
        }
    }
    for (const auto& a : agents) rect(a.pos, inset, "fill=\"" + hex(kAgent) + "\"");
    out += "</svg>\n";
    return out;
}

}  // namespace crabgate
