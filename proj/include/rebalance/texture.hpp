#pragma once

// Image-to-feature pipeline: median filtering, Otsu background
// suppression, overlapping tri-segmentation, gray-level co-occurrence
// matrices at the four unit offsets, and the thirteen co-occurrence
// statistics per offset (52 features per image or segment).

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rebalance {

struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    unsigned bit_depth = 8;                // intensities live in [0, 2^bit_depth)
    std::vector<std::uint16_t> pixels;     // row-major

    std::uint16_t at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
    std::uint16_t& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
    std::size_t size() const { return width * height; }
};

using PixelMask = std::vector<std::uint8_t>;  // 1 = foreground, row-major

GrayImage load_pgm(const std::filesystem::path& path);
void save_pgm(const GrayImage& img, const std::filesystem::path& path, bool binary = true);

// Median over an odd window x window neighborhood; edges replicate.
GrayImage median_filter(const GrayImage& img, std::size_t window);

struct BackgroundResult {
    GrayImage image;
    PixelMask mask;
    bool uniform_input = false;  // threshold undefined, returned unchanged
};

// Otsu threshold, then only the largest 8-connected foreground component
// survives; smaller blobs (burned-in labels, artifacts) are zeroed.
BackgroundResult suppress_background(const GrayImage& img);

struct RowRange {
    std::size_t begin;
    std::size_t end;
};

struct SegmentSet {
    GrayImage whole;
    GrayImage top, mid, bottom;
    double overlap_fraction = 0.0;
    std::array<RowRange, 3> ranges;  // top/mid/bottom row windows
};

// Three horizontal bands of height ceil(H*(1+2*overlap)/3): the top
// starts at row 0, the bottom ends at the last row, the middle is
// centered.
SegmentSet segment_thirds(const GrayImage& img, double overlap_fraction);

struct Glcm {
    std::size_t levels = 0;
    std::vector<double> p;  // levels x levels, row-major
    int dx = 0, dy = 0;
    bool normalized = false;

    double at(std::size_t i, std::size_t j) const { return p[i * levels + j]; }
    double& at(std::size_t i, std::size_t j) { return p[i * levels + j]; }
};

// The four canonical unit offsets, orientation-major order used everywhere:
// 0 deg (1,0), 45 deg (1,1), 90 deg (0,1), 135 deg (-1,1).
inline constexpr std::array<std::pair<int, int>, 4> kGlcmOffsets = {
    {{1, 0}, {1, 1}, {0, 1}, {-1, 1}}};

// Symmetric, normalized co-occurrence matrix after uniform re-quantization
// to `levels` bins over [0, 2^bit_depth). Masked-out pixels contribute no
// pairs.
Glcm glcm(const GrayImage& img, std::size_t levels, int dx, int dy,
          const PixelMask* mask = nullptr);

struct HaralickVector {
    // f1 angular second moment, f2 contrast, f3 correlation, f4 sum of
    // squares variance, f5 inverse difference moment, f6 sum average,
    // f7 sum variance, f8 sum entropy, f9 entropy, f10 difference
    // variance, f11 difference entropy, f12/f13 information measures of
    // correlation. Entropies use natural logs with 0*log0 = 0.
    std::array<double, 13> f{};
};

HaralickVector haralick13(const Glcm& g);

struct TextureConfig {
    std::size_t levels = 8;
    std::size_t median_window = 3;
    double overlap_fraction = 0.1;
};

// 13 features x 4 offsets in orientation-major order.
std::array<double, 52> haralick52(const GrayImage& img, std::size_t levels,
                                  const PixelMask* mask = nullptr);

struct SegmentFeatures {
    std::string segment;  // whole | top | mid | bottom
    std::array<double, 52> values;
    // Set when the segment's foreground mask held no pixel pairs and the
    // features were computed over the full segment instead.
    bool mask_ignored = false;
};

// One record for the whole image and one per band. The caller supplies a
// preprocessed (filtered, background-suppressed) image and its mask.
std::vector<SegmentFeatures> extract_features(const GrayImage& img, const PixelMask& mask,
                                              const TextureConfig& cfg);

// Fixed 52-name column list matching haralick52's order (f_000_01 ...).
std::vector<std::string> texture_feature_names();

}  // namespace rebalance
