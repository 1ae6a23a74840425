#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spaceops
{

    struct Rgb
    {
        std::uint8_t r{0};
        std::uint8_t g{0};
        std::uint8_t b{0};

        bool operator==(const Rgb &) const = default;
    };

    /// Row-major 8-bit RGB raster.
    class RgbImage
    {
    public:
        RgbImage() = default;
        RgbImage(int width, int height, Rgb fill = {});

        int width() const { return width_; }
        int height() const { return height_; }
        std::span<const std::uint8_t> bytes() const { return data_; }

        bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
        Rgb at(int x, int y) const;
        void set(int x, int y, Rgb c);

        void fill_rect(int x0, int y0, int w, int h, Rgb c);
        /// Pixels whose centre lies within [r_inner, r_outer] of (cx, cy).
        void fill_annulus(int cx, int cy, double r_inner, double r_outer, Rgb c);
        void fill_disc(int cx, int cy, double r, Rgb c) { fill_annulus(cx, cy, -1.0, r, c); }
        /// Bresenham segment, inclusive of both ends.
        void draw_line(int x0, int y0, int x1, int y1, Rgb c);

        bool operator==(const RgbImage &) const = default;

    private:
        int width_{0};
        int height_{0};
        std::vector<std::uint8_t> data_;
    };

    /// Row-major 16-bit single-channel raster.
    struct Gray16Image
    {
        int width{0};
        int height{0};
        std::vector<std::uint16_t> pixels;
    };

    /// Fixed 5x7 bitmap font (upper-case ASCII subset; lower case folds to upper).
    namespace font
    {
        constexpr int kGlyphWidth = 5;
        constexpr int kGlyphHeight = 7;
        constexpr int kAdvance = 6; ///< glyph + 1 column of spacing

        /// Seven rows, low 5 bits each, MSB = leftmost column.
        const std::array<std::uint8_t, kGlyphHeight> &glyph(char c);

        /// Draws `text` with its top-left at (x, y); returns the x after the last glyph.
        int draw_text(RgbImage &img, int x, int y, std::string_view text, Rgb color, int scale = 1);

        int text_width(std::string_view text, int scale = 1);
    } // namespace font

    /// PNG encoders. Output carries only IHDR/IDAT/IEND, so identical
    /// pixels give identical bytes.
    std::vector<std::uint8_t> encode_png(const RgbImage &img);
    std::vector<std::uint8_t> encode_png(const Gray16Image &img);

    std::string base64_encode(std::span<const std::uint8_t> data);
    std::vector<std::uint8_t> base64_decode(std::string_view text);

} // namespace spaceops
