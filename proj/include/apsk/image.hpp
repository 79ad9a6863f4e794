#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "apsk/channel.hpp"
#include "apsk/distortion.hpp"
#include "apsk/geometry.hpp"

namespace apsk {

struct GreyImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major

    std::size_t pixel_count() const { return pixels.size(); }

    void validate() const {
        if (width < 1 || height < 1)
            throw config_error("image dimensions must be positive");
        if (pixels.size() != static_cast<std::size_t>(width) * height)
            throw config_error("pixel count does not match dimensions");
    }

    bool operator==(const GreyImage&) const = default;
};

/// Pixel bytes chunked into 6-bit labels, MSB-first, zero-padded at the
/// tail. Fixed-length framing: corrupted labels can never change the
/// reconstructed dimensions.
struct PayloadFrame {
    std::vector<int> labels;
    int pad_bits = 0;
};

inline PayloadFrame pack(const GreyImage& img) {
    img.validate();
    const std::size_t n_bits = img.pixels.size() * 8;
    const std::size_t n_labels = (n_bits + 5) / 6;
    PayloadFrame frame;
    frame.labels.assign(n_labels, 0);
    frame.pad_bits = static_cast<int>(n_labels * 6 - n_bits);
    for (std::size_t i = 0; i < n_bits; ++i) {
        const int bit = (img.pixels[i >> 3] >> (7 - (i & 7))) & 1;
        frame.labels[i / 6] |= bit << (5 - i % 6);
    }
    return frame;
}

inline GreyImage unpack(const PayloadFrame& frame, int width, int height) {
    if (width < 1 || height < 1)
        throw config_error("image dimensions must be positive");
    if (frame.pad_bits < 0 || frame.pad_bits >= 6)
        throw config_error("pad_bits must lie in 0..5");
    const std::size_t n_bits =
        static_cast<std::size_t>(width) * height * 8;
    if (frame.labels.size() * 6 - frame.pad_bits != n_bits)
        throw config_error("frame length does not match image dimensions");
    GreyImage img;
    img.width = width;
    img.height = height;
    img.pixels.assign(static_cast<std::size_t>(width) * height, 0);
    for (std::size_t i = 0; i < n_bits; ++i) {
        const int lab = frame.labels[i / 6];
        if (lab < 0 || lab > 63) throw config_error("label outside 0..63");
        const int bit = (lab >> (5 - i % 6)) & 1;
        img.pixels[i >> 3] |= bit << (7 - (i & 7));
    }
    return img;
}

namespace detail {

inline int pgm_token(std::istream& in) {
    // netpbm token: skip whitespace and '#' comments
    int ch = in.get();
    while (ch != EOF) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n') ch = in.get();
        } else if (!std::isspace(ch)) {
            break;
        }
        ch = in.get();
    }
    if (ch == EOF) throw config_error("unexpected end of PGM header");
    int value = 0;
    bool any = false;
    while (ch != EOF && std::isdigit(ch)) {
        value = value * 10 + (ch - '0');
        any = true;
        ch = in.get();
    }
    if (!any) throw config_error("malformed PGM header");
    if (ch != EOF) in.unget();
    return value;
}

}  // namespace detail

/// Binary portable grey map (magic "P5"), maxval 255 only.
inline GreyImage read_pgm(std::istream& in) {
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (!in || m0 != 'P' || m1 != '5') throw config_error("not a P5 grey map");
    GreyImage img;
    img.width = detail::pgm_token(in);
    img.height = detail::pgm_token(in);
    const int maxval = detail::pgm_token(in);
    if (maxval != 255) throw config_error("only maxval 255 is supported");
    in.get();  // single whitespace after maxval
    if (img.width < 1 || img.height < 1) throw config_error("bad PGM dimensions");
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw config_error("truncated PGM pixel data");
    return img;
}

inline GreyImage read_pgm_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open image: " + path);
    try {
        return read_pgm(in);
    } catch (const config_error& e) {
        throw config_error(path + ": " + e.what());
    }
}

inline void write_pgm(const GreyImage& img, std::ostream& out) {
    img.validate();
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
}

inline void write_pgm_file(const GreyImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write image: " + path);
    write_pgm(img, out);
    if (!out) throw io_error("write failed: " + path);
}

struct ImageScore {
    GreyImage received;
    double pixel_mse = 0.0;
    double psnr_db = 0.0;  // +inf when the images are identical
    double label_mse = 0.0;
};

/// End-to-end payload run: pack, transmit, ML-demodulate, unpack, score.
inline ImageScore transmit_image(const GreyImage& img, const Constellation& c,
                                 const ChannelModel& model, std::uint64_t seed) {
    img.validate();
    const ChannelContext ctx(c, model);
    PayloadFrame frame = pack(img);

    double label_d2 = 0.0;
    for (std::size_t i = 0; i < frame.labels.size(); ++i) {
        const int sent = frame.labels[i];
        if (sent >= ctx.m)
            throw config_error("image payload needs a 64-point constellation");
        const int dec = ctx.ml_label(ctx.transmit_one(sent, seed, i));
        const double d = std::abs(sent - dec);
        label_d2 += d * d;
        frame.labels[i] = dec;
    }

    ImageScore score;
    score.received = unpack(frame, img.width, img.height);
    score.label_mse = label_d2 / static_cast<double>(frame.labels.size());
    double px = 0.0;
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        const double d = static_cast<double>(img.pixels[i]) - score.received.pixels[i];
        px += d * d;
    }
    score.pixel_mse = px / static_cast<double>(img.pixels.size());
    score.psnr_db = score.pixel_mse > 0.0
                        ? 10.0 * std::log10(255.0 * 255.0 / score.pixel_mse)
                        : std::numeric_limits<double>::infinity();
    return score;
}

/// Deterministic grey-level test pattern: smooth background, texture and
/// hard-edged shapes, so transmission damage is visible at a glance.
inline GreyImage synthetic_test_image(int width, int height) {
    GreyImage img;
    img.width = width;
    img.height = height;
    img.pixels.resize(static_cast<std::size_t>(width) * height);
    const double cx = 0.5 * (width - 1), cy = 0.5 * (height - 1);
    const double rmax = std::hypot(cx, cy);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const double r = std::hypot(x - cx, y - cy) / rmax;
            double v = 200.0 - 140.0 * r;
            v += 25.0 * std::sin(x * 0.17) * std::sin(y * 0.13);
            if (r < 0.22) v = 235.0 - 90.0 * r;  // bright disk
            if (x > width * 3 / 4 && y > height * 3 / 4 && ((x / 8 + y / 8) & 1))
                v = 30.0;  // checker corner
            if (std::abs(y - height / 3) < height / 64) v = 15.0;  // dark bar
            img.pixels[static_cast<std::size_t>(y) * width + x] =
                static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
        }
    return img;
}

}  // namespace apsk
