#include "spaceops/raster.hpp"

#include "spaceops/errors.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstring>

namespace spaceops
{

    RgbImage::RgbImage(int width, int height, Rgb fill) : width_(width), height_(height)
    {
        if (width <= 0 || height <= 0)
        {
            throw InvalidArgument("image dimensions must be positive");
        }
        data_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
        for (std::size_t i = 0; i < data_.size(); i += 3)
        {
            data_[i] = fill.r;
            data_[i + 1] = fill.g;
            data_[i + 2] = fill.b;
        }
    }

    Rgb RgbImage::at(int x, int y) const
    {
        const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
        return {data_[i], data_[i + 1], data_[i + 2]};
    }

    void RgbImage::set(int x, int y, Rgb c)
    {
        if (!contains(x, y))
        {
            return;
        }
        const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
        data_[i] = c.r;
        data_[i + 1] = c.g;
        data_[i + 2] = c.b;
    }

    void RgbImage::fill_rect(int x0, int y0, int w, int h, Rgb c)
    {
        for (int y = std::max(0, y0); y < std::min(height_, y0 + h); ++y)
        {
            for (int x = std::max(0, x0); x < std::min(width_, x0 + w); ++x)
            {
                set(x, y, c);
            }
        }
    }

    void RgbImage::fill_annulus(int cx, int cy, double r_inner, double r_outer, Rgb c)
    {
        const int reach = static_cast<int>(std::ceil(r_outer)) + 1;
        const double in2 = r_inner < 0.0 ? -1.0 : r_inner * r_inner;
        const double out2 = r_outer * r_outer;
        for (int dy = -reach; dy <= reach; ++dy)
        {
            for (int dx = -reach; dx <= reach; ++dx)
            {
                const double d2 = static_cast<double>(dx * dx + dy * dy);
                if (d2 >= in2 && d2 <= out2)
                {
                    set(cx + dx, cy + dy, c);
                }
            }
        }
    }

    void RgbImage::draw_line(int x0, int y0, int x1, int y1, Rgb c)
    {
        const int dx = std::abs(x1 - x0);
        const int dy = -std::abs(y1 - y0);
        const int sx = x0 < x1 ? 1 : -1;
        const int sy = y0 < y1 ? 1 : -1;
        int err = dx + dy;
        for (;;)
        {
            set(x0, y0, c);
            if (x0 == x1 && y0 == y1)
            {
                break;
            }
            const int e2 = 2 * err;
            if (e2 >= dy)
            {
                err += dy;
                x0 += sx;
            }
            if (e2 <= dx)
            {
                err += dx;
                y0 += sy;
            }
        }
    }

    namespace font
    {

        namespace
        {
            using Glyph = std::array<std::uint8_t, kGlyphHeight>;

            struct Entry
            {
                char c;
                Glyph rows;
            };

            // clang-format off
            constexpr Entry kGlyphs[] = {
                {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
                {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
                {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
                {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
                {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
                {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
                {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
                {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
                {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
                {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
                {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
                {'A', {0x0E, 0x11, 0x11, 0x11, 0x1F, 0x11, 0x11}},
                {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
                {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
                {'D', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
                {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
                {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
                {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
                {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
                {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
                {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
                {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
                {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
                {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
                {'N', {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11}},
                {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
                {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
                {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
                {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
                {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
                {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
                {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
                {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
                {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}},
                {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
                {'Y', {0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04}},
                {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
                {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
                {',', {0x00, 0x00, 0x00, 0x00, 0x0C, 0x04, 0x08}},
                {':', {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00}},
                {'/', {0x00, 0x01, 0x02, 0x04, 0x08, 0x10, 0x00}},
                {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
                {'+', {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00}},
                {'=', {0x00, 0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00}},
                {'_', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F}},
                {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}},
                {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}},
                {'%', {0x18, 0x19, 0x02, 0x04, 0x08, 0x13, 0x03}},
                {'?', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x00, 0x04}},
            };
            // clang-format on
        } // namespace

        const std::array<std::uint8_t, kGlyphHeight> &glyph(char c)
        {
            const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            for (const auto &e : kGlyphs)
            {
                if (e.c == up)
                {
                    return e.rows;
                }
            }
            return glyph('?');
        }

        int draw_text(RgbImage &img, int x, int y, std::string_view text, Rgb color, int scale)
        {
            for (char c : text)
            {
                const auto &rows = glyph(c);
                for (int row = 0; row < kGlyphHeight; ++row)
                {
                    for (int col = 0; col < kGlyphWidth; ++col)
                    {
                        if (rows[row] & (0x10 >> col))
                        {
                            img.fill_rect(x + col * scale, y + row * scale, scale, scale, color);
                        }
                    }
                }
                x += kAdvance * scale;
            }
            return x;
        }

        int text_width(std::string_view text, int scale) { return static_cast<int>(text.size()) * kAdvance * scale; }

    } // namespace font

    namespace
    {

        struct PngWriter
        {
            png_structp png{nullptr};
            png_infop info{nullptr};
            std::vector<std::uint8_t> out;

            PngWriter()
            {
                png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
                if (!png)
                {
                    throw IoError("png_create_write_struct failed");
                }
                info = png_create_info_struct(png);
                if (!info)
                {
                    png_destroy_write_struct(&png, nullptr);
                    throw IoError("png_create_info_struct failed");
                }
            }
            ~PngWriter() { png_destroy_write_struct(&png, &info); }
            PngWriter(const PngWriter &) = delete;
            PngWriter &operator=(const PngWriter &) = delete;

            static void write_cb(png_structp p, png_bytep data, png_size_t len)
            {
                auto *self = static_cast<PngWriter *>(png_get_io_ptr(p));
                self->out.insert(self->out.end(), data, data + len);
            }
            static void flush_cb(png_structp) {}
        };

        std::vector<std::uint8_t> write_png(int width, int height, int bit_depth, int color_type,
                                            const std::vector<png_bytep> &rows)
        {
            PngWriter w;
            if (setjmp(png_jmpbuf(w.png)))
            {
                throw IoError("libpng failed while encoding");
            }
            png_set_write_fn(w.png, &w, &PngWriter::write_cb, &PngWriter::flush_cb);
            png_set_compression_level(w.png, 6);
            png_set_filter(w.png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
            png_set_IHDR(w.png, w.info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
                         color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
            png_write_info(w.png, w.info);
            if (bit_depth == 16)
            {
                png_set_swap(w.png); // host little-endian -> PNG big-endian
            }
            png_write_image(w.png, const_cast<png_bytepp>(rows.data()));
            png_write_end(w.png, nullptr);
            return std::move(w.out);
        }

    } // namespace

    std::vector<std::uint8_t> encode_png(const RgbImage &img)
    {
        std::vector<std::uint8_t> copy(img.bytes().begin(), img.bytes().end());
        std::vector<png_bytep> rows(static_cast<std::size_t>(img.height()));
        for (int y = 0; y < img.height(); ++y)
        {
            rows[static_cast<std::size_t>(y)] = copy.data() + static_cast<std::size_t>(y) * img.width() * 3;
        }
        return write_png(img.width(), img.height(), 8, PNG_COLOR_TYPE_RGB, rows);
    }

    std::vector<std::uint8_t> encode_png(const Gray16Image &img)
    {
        if (img.pixels.size() != static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height))
        {
            throw InvalidArgument("gray16 image size does not match dimensions");
        }
        std::vector<std::uint16_t> copy = img.pixels;
        std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
        for (int y = 0; y < img.height; ++y)
        {
            rows[static_cast<std::size_t>(y)] =
                reinterpret_cast<png_bytep>(copy.data() + static_cast<std::size_t>(y) * img.width);
        }
        return write_png(img.width, img.height, 16, PNG_COLOR_TYPE_GRAY, rows);
    }

    namespace
    {
        constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    }

    std::string base64_encode(std::span<const std::uint8_t> data)
    {
        std::string out;
        out.reserve((data.size() + 2) / 3 * 4);
        std::size_t i = 0;
        for (; i + 2 < data.size(); i += 3)
        {
            const std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
            out += kB64[(v >> 18) & 63];
            out += kB64[(v >> 12) & 63];
            out += kB64[(v >> 6) & 63];
            out += kB64[v & 63];
        }
        if (i + 1 == data.size())
        {
            const std::uint32_t v = data[i] << 16;
            out += kB64[(v >> 18) & 63];
            out += kB64[(v >> 12) & 63];
            out += "==";
        }
        else if (i + 2 == data.size())
        {
            const std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
            out += kB64[(v >> 18) & 63];
            out += kB64[(v >> 12) & 63];
            out += kB64[(v >> 6) & 63];
            out += '=';
        }
        return out;
    }

    std::vector<std::uint8_t> base64_decode(std::string_view text)
    {
        auto value = [](char c) -> int {
            const char *p = std::strchr(kB64, c);
            return (p && c != '\0') ? static_cast<int>(p - kB64) : -1;
        };
        std::vector<std::uint8_t> out;
        std::uint32_t acc = 0;
        int bits = 0;
        for (char c : text)
        {
            if (c == '=' || std::isspace(static_cast<unsigned char>(c)))
            {
                continue;
            }
            const int v = value(c);
            if (v < 0)
            {
                throw InvalidArgument("invalid base64 character");
            }
            acc = (acc << 6) | static_cast<std::uint32_t>(v);
            bits += 6;
            if (bits >= 8)
            {
                bits -= 8;
                out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xFF));
            }
        }
        return out;
    }

} // namespace spaceops
