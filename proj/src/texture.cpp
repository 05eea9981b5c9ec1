#include "rebalance/texture.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rebalance/error.hpp"

namespace rebalance {

// ---------------------------------------------------------------------------
// PGM I/O (P2 ascii, P5 binary; 8- or 16-bit)

namespace {

int next_pnm_token(std::istream& in, std::string& token) {
    token.clear();
    char c;
    while (in.get(c)) {
        if (c == '#') {
            while (in.get(c) && c != '\n') {
            }
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!token.empty()) return 1;
            continue;
        }
        token.push_back(c);
    }
    return token.empty() ? 0 : 1;
}

unsigned depth_for_maxval(unsigned maxval) {
    unsigned depth = 1;
    while ((1u << depth) <= maxval) ++depth;
    return depth;
}

}  // namespace

GrayImage load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::string magic, tok;
    if (!next_pnm_token(in, magic) || (magic != "P2" && magic != "P5"))
        throw Error(ErrorCode::ParseError, path.string() + ": not a P2/P5 PGM");
    unsigned long values[3];
    for (auto& v : values) {
        if (!next_pnm_token(in, tok))
            throw Error(ErrorCode::ParseError, path.string() + ": truncated PGM header");
        v = std::stoul(tok);
    }
    GrayImage img;
    img.width = values[0];
    img.height = values[1];
    unsigned maxval = static_cast<unsigned>(values[2]);
    if (img.width == 0 || img.height == 0 || maxval == 0 || maxval > 65535)
        throw Error(ErrorCode::ParseError, path.string() + ": bad PGM dimensions");
    img.bit_depth = depth_for_maxval(maxval);
    img.pixels.resize(img.size());

    if (magic == "P2") {
        for (auto& px : img.pixels) {
            if (!next_pnm_token(in, tok))
                throw Error(ErrorCode::ParseError, path.string() + ": truncated PGM data");
            px = static_cast<std::uint16_t>(std::stoul(tok));
        }
    } else {
        const bool wide = maxval > 255;
        std::vector<unsigned char> raw(img.size() * (wide ? 2 : 1));
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (static_cast<std::size_t>(in.gcount()) != raw.size())
            throw Error(ErrorCode::ParseError, path.string() + ": truncated PGM data");
        for (std::size_t i = 0; i < img.size(); ++i)
            img.pixels[i] = wide ? static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1])
                                 : raw[i];
    }
    for (auto px : img.pixels)
        if (px > maxval)
            throw Error(ErrorCode::ParseError, path.string() + ": pixel exceeds maxval");
    return img;
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path, bool binary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    const unsigned maxval = (1u << img.bit_depth) - 1;
    out << (binary ? "P5" : "P2") << '\n'
        << img.width << ' ' << img.height << '\n'
        << maxval << '\n';
    if (binary) {
        const bool wide = maxval > 255;
        for (auto px : img.pixels) {
            if (wide) out.put(static_cast<char>(px >> 8));
            out.put(static_cast<char>(px & 0xFF));
        }
    } else {
        for (std::size_t i = 0; i < img.pixels.size(); ++i)
            out << img.pixels[i] << ((i + 1) % img.width == 0 ? '\n' : ' ');
    }
}

// ---------------------------------------------------------------------------
// Filtering and background suppression

GrayImage median_filter(const GrayImage& img, std::size_t window) {
    if (window < 3 || window % 2 == 0)
        throw Error(ErrorCode::InvalidArgument, "median_filter: window must be odd and >= 3");
    if (img.size() == 0) throw Error(ErrorCode::InvalidArgument, "median_filter: empty image");
    GrayImage out = img;
    const auto half = static_cast<std::ptrdiff_t>(window / 2);
    const auto w = static_cast<std::ptrdiff_t>(img.width);
    const auto h = static_cast<std::ptrdiff_t>(img.height);

#pragma omp parallel
    {
        std::vector<std::uint16_t> patch(window * window);
#pragma omp for schedule(static)
        for (std::ptrdiff_t y = 0; y < h; ++y) {
            for (std::ptrdiff_t x = 0; x < w; ++x) {
                std::size_t n = 0;
                for (std::ptrdiff_t dy = -half; dy <= half; ++dy) {
                    std::ptrdiff_t sy = std::clamp<std::ptrdiff_t>(y + dy, 0, h - 1);
                    for (std::ptrdiff_t dx = -half; dx <= half; ++dx) {
                        std::ptrdiff_t sx = std::clamp<std::ptrdiff_t>(x + dx, 0, w - 1);
                        patch[n++] = img.at(static_cast<std::size_t>(sx),
                                            static_cast<std::size_t>(sy));
                    }
                }
                auto mid = patch.begin() + static_cast<std::ptrdiff_t>(n / 2);
                std::nth_element(patch.begin(), mid, patch.begin() + static_cast<std::ptrdiff_t>(n));
                out.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = *mid;
            }
        }
    }
    return out;
}

namespace {

// Otsu's threshold over the intensity histogram: the cut maximizing
// between-class variance, lowest cut on ties. Foreground is >= cut.
std::optional<unsigned> otsu_threshold(const GrayImage& img) {
    const std::size_t bins = std::size_t{1} << img.bit_depth;
    std::vector<double> hist(bins, 0.0);
    for (auto px : img.pixels) hist[px] += 1.0;

    std::size_t nonzero = 0;
    for (double hval : hist) nonzero += hval > 0.0;
    if (nonzero < 2) return std::nullopt;

    const double total = static_cast<double>(img.size());
    double sum_all = 0.0;
    for (std::size_t v = 0; v < bins; ++v) sum_all += static_cast<double>(v) * hist[v];

    double best_var = -1.0;
    unsigned best_t = 0;
    double w0 = 0.0, sum0 = 0.0;
    for (std::size_t t = 1; t < bins; ++t) {
        w0 += hist[t - 1];
        sum0 += static_cast<double>(t - 1) * hist[t - 1];
        double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        double mu0 = sum0 / w0;
        double mu1 = (sum_all - sum0) / w1;
        double var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (var > best_var) {
            best_var = var;
            best_t = static_cast<unsigned>(t);
        }
    }
    return best_t;
}

}  // namespace

BackgroundResult suppress_background(const GrayImage& img) {
    if (img.size() == 0)
        throw Error(ErrorCode::InvalidArgument, "suppress_background: empty image");
    auto threshold = otsu_threshold(img);
    if (!threshold) {
        BackgroundResult r{img, PixelMask(img.size(), 1), true};
        return r;
    }

    PixelMask fg(img.size(), 0);
    for (std::size_t i = 0; i < img.size(); ++i) fg[i] = img.pixels[i] >= *threshold;

    // Largest 8-connected foreground component survives.
    std::vector<std::int32_t> component(img.size(), -1);
    std::vector<std::size_t> component_size;
    const auto w = static_cast<std::ptrdiff_t>(img.width);
    const auto h = static_cast<std::ptrdiff_t>(img.height);
    std::deque<std::size_t> queue;
    for (std::size_t start = 0; start < img.size(); ++start) {
        if (!fg[start] || component[start] >= 0) continue;
        auto id = static_cast<std::int32_t>(component_size.size());
        component_size.push_back(0);
        component[start] = id;
        queue.push_back(start);
        while (!queue.empty()) {
            std::size_t cur = queue.front();
            queue.pop_front();
            ++component_size.back();
            auto cx = static_cast<std::ptrdiff_t>(cur % img.width);
            auto cy = static_cast<std::ptrdiff_t>(cur / img.width);
            for (std::ptrdiff_t dy = -1; dy <= 1; ++dy) {
                for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    std::ptrdiff_t nx = cx + dx, ny = cy + dy;
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    auto ni = static_cast<std::size_t>(ny) * img.width +
                              static_cast<std::size_t>(nx);
                    if (fg[ni] && component[ni] < 0) {
                        component[ni] = id;
                        queue.push_back(ni);
                    }
                }
            }
        }
    }
    std::size_t keep = 0;
    for (std::size_t id = 1; id < component_size.size(); ++id)
        if (component_size[id] > component_size[keep]) keep = id;

    BackgroundResult r;
    r.image = img;
    r.mask.assign(img.size(), 0);
    for (std::size_t i = 0; i < img.size(); ++i) {
        bool kept = fg[i] && component[i] == static_cast<std::int32_t>(keep);
        r.mask[i] = kept;
        if (!kept) r.image.pixels[i] = 0;
    }
    return r;
}

SegmentSet segment_thirds(const GrayImage& img, double overlap_fraction) {
    if (img.height < 9) throw Error(ErrorCode::InvalidArgument, "segment_thirds: image too short");
    if (!(overlap_fraction >= 0.0 && overlap_fraction < 0.5))
        throw Error(ErrorCode::InvalidArgument, "segment_thirds: overlap outside [0, 0.5)");

    const std::size_t h = img.height;
    const auto seg_h = static_cast<std::size_t>(
        std::ceil(static_cast<double>(h) * (1.0 + 2.0 * overlap_fraction) / 3.0));

    SegmentSet set;
    set.whole = img;
    set.overlap_fraction = overlap_fraction;
    set.ranges[0] = {0, seg_h};
    set.ranges[1] = {(h - seg_h) / 2, (h - seg_h) / 2 + seg_h};
    set.ranges[2] = {h - seg_h, h};

    auto slice = [&](const RowRange& range) {
        GrayImage part;
        part.width = img.width;
        part.height = range.end - range.begin;
        part.bit_depth = img.bit_depth;
        part.pixels.assign(img.pixels.begin() + static_cast<std::ptrdiff_t>(range.begin * img.width),
                           img.pixels.begin() + static_cast<std::ptrdiff_t>(range.end * img.width));
        return part;
    };
    set.top = slice(set.ranges[0]);
    set.mid = slice(set.ranges[1]);
    set.bottom = slice(set.ranges[2]);
    return set;
}

// ---------------------------------------------------------------------------
// Co-occurrence matrices

namespace {

// Hot loop as a plain leaf function: gcc keeps everything in registers
// here, which it does not manage to do inside an outlined omp body.
std::uint64_t glcm_accumulate(const std::uint16_t* px, const std::uint8_t* fg,
                              std::ptrdiff_t width, std::ptrdiff_t height, std::ptrdiff_t y0,
                              std::ptrdiff_t y1, std::ptrdiff_t dx, std::ptrdiff_t dy,
                              std::ptrdiff_t x_lo, std::ptrdiff_t x_hi, std::uint64_t levels,
                              unsigned depth, std::uint64_t* acc) {
    // range is 2^depth, so quantization is a multiply and a shift.
    std::uint64_t pairs = 0;
    for (std::ptrdiff_t y = y0; y < y1; ++y) {
        std::ptrdiff_t y2 = y + dy;
        if (y2 < 0 || y2 >= height || x_lo >= x_hi) continue;
        const std::uint16_t* row1 = px + y * width;
        const std::uint16_t* row2 = px + y2 * width + dx;
        if (fg) {
            const std::uint8_t* m1 = fg + y * width;
            const std::uint8_t* m2 = fg + y2 * width + dx;
            for (std::ptrdiff_t x = x_lo; x < x_hi; ++x) {
                if (!m1[x] || !m2[x]) continue;
                std::uint64_t a = (row1[x] * levels) >> depth;
                std::uint64_t b = (row2[x] * levels) >> depth;
                acc[a * levels + b]++;  // both orders: symmetric accumulation
                acc[b * levels + a]++;
                pairs += 2;
            }
        } else {
            for (std::ptrdiff_t x = x_lo; x < x_hi; ++x) {
                std::uint64_t a = (row1[x] * levels) >> depth;
                std::uint64_t b = (row2[x] * levels) >> depth;
                acc[a * levels + b]++;
                acc[b * levels + a]++;
            }
            pairs += 2 * static_cast<std::uint64_t>(x_hi - x_lo);
        }
    }
    return pairs;
}

}  // namespace

Glcm glcm(const GrayImage& img, std::size_t levels, int dx, int dy, const PixelMask* mask) {
    if (levels < 2) throw Error(ErrorCode::InvalidArgument, "glcm: levels must be >= 2");
    if (mask && mask->size() != img.size())
        throw Error(ErrorCode::InvalidArgument, "glcm: mask size mismatch");

    const auto w = static_cast<std::ptrdiff_t>(img.width);
    const auto h = static_cast<std::ptrdiff_t>(img.height);

    Glcm g;
    g.levels = levels;
    g.dx = dx;
    g.dy = dy;
    g.p.assign(levels * levels, 0.0);

    const std::ptrdiff_t x_lo = std::max<std::ptrdiff_t>(0, -dx);
    const std::ptrdiff_t x_hi = std::min<std::ptrdiff_t>(w, w - dx);

    std::vector<std::uint64_t> counts(levels * levels, 0);
    std::uint64_t pairs = 0;
#pragma omp parallel
    {
        int thread = 0, n_threads = 1;
#ifdef _OPENMP
        thread = omp_get_thread_num();
        n_threads = omp_get_num_threads();
#endif
        // Static row partition; integer merges keep the result identical
        // for any thread count.
        std::ptrdiff_t chunk = (h + n_threads - 1) / n_threads;
        std::ptrdiff_t y0 = std::min<std::ptrdiff_t>(h, thread * chunk);
        std::ptrdiff_t y1 = std::min<std::ptrdiff_t>(h, y0 + chunk);
        std::vector<std::uint64_t> local(levels * levels, 0);
        std::uint64_t local_pairs =
            glcm_accumulate(img.pixels.data(), mask ? mask->data() : nullptr, w, h, y0, y1, dx,
                            dy, x_lo, x_hi, levels, img.bit_depth, local.data());
#pragma omp critical(rebalance_glcm_merge)
        {
            for (std::size_t i = 0; i < local.size(); ++i) counts[i] += local[i];
            pairs += local_pairs;
        }
    }
    if (pairs == 0)
        throw Error(ErrorCode::InvalidArgument, "glcm: no valid pixel pairs for this offset");
    for (std::size_t i = 0; i < counts.size(); ++i)
        g.p[i] = static_cast<double>(counts[i]) / static_cast<double>(pairs);
    g.normalized = true;
    return g;
}

// ---------------------------------------------------------------------------
// Haralick statistics

HaralickVector haralick13(const Glcm& g) {
    if (!g.normalized || g.levels == 0)
        throw Error(ErrorCode::InvalidArgument, "haralick13: normalized GLCM required");
    const std::size_t n = g.levels;
    bool any = std::any_of(g.p.begin(), g.p.end(), [](double v) { return v > 0.0; });
    if (!any) throw Error(ErrorCode::InvalidArgument, "haralick13: empty GLCM");

    auto xlogx = [](double v) { return v > 0.0 ? v * std::log(v) : 0.0; };

    std::vector<double> px(n, 0.0), py(n, 0.0);
    std::vector<double> p_sum(2 * n - 1, 0.0);   // p_{x+y}, index i+j
    std::vector<double> p_diff(n, 0.0);          // p_{|x-y|}
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double v = g.at(i, j);
            px[i] += v;
            py[j] += v;
            p_sum[i + j] += v;
            p_diff[i > j ? i - j : j - i] += v;
        }
    }

    double mean_x = 0.0, var_x = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean_x += static_cast<double>(i) * px[i];
    for (std::size_t i = 0; i < n; ++i) {
        double d = static_cast<double>(i) - mean_x;
        var_x += d * d * px[i];
    }

    HaralickVector out;
    double& f1 = out.f[0];
    double& f2 = out.f[1];
    double& f3 = out.f[2];
    double& f4 = out.f[3];
    double& f5 = out.f[4];
    double& f6 = out.f[5];
    double& f7 = out.f[6];
    double& f8 = out.f[7];
    double& f9 = out.f[8];
    double& f10 = out.f[9];
    double& f11 = out.f[10];
    double& f12 = out.f[11];
    double& f13 = out.f[12];

    double cross = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double v = g.at(i, j);
            f1 += v * v;
            double dij = static_cast<double>(i) - static_cast<double>(j);
            f2 += dij * dij * v;
            cross += static_cast<double>(i) * static_cast<double>(j) * v;
            double dm = static_cast<double>(i) - mean_x;
            f4 += dm * dm * v;
            f5 += v / (1.0 + dij * dij);
            f9 -= xlogx(v);
        }
    }
    // Symmetric matrix: marginal means and deviations coincide. A flat
    // (zero-variance) marginal has perfectly dependent tones.
    f3 = var_x > 0.0 ? (cross - mean_x * mean_x) / var_x : 1.0;

    for (std::size_t k = 0; k < p_sum.size(); ++k) {
        f6 += static_cast<double>(k) * p_sum[k];
        f8 -= xlogx(p_sum[k]);
    }
    for (std::size_t k = 0; k < p_sum.size(); ++k) {
        double d = static_cast<double>(k) - f8;
        f7 += d * d * p_sum[k];
    }

    double diff_mean = 0.0;
    for (std::size_t k = 0; k < n; ++k) diff_mean += static_cast<double>(k) * p_diff[k];
    for (std::size_t k = 0; k < n; ++k) {
        double d = static_cast<double>(k) - diff_mean;
        f10 += d * d * p_diff[k];
        f11 -= xlogx(p_diff[k]);
    }

    double hx = 0.0, hxy1 = 0.0, hxy2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) hx -= xlogx(px[i]);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double prod = px[i] * py[j];
            double lp = prod > 0.0 ? std::log(prod) : 0.0;
            hxy1 -= g.at(i, j) > 0.0 ? g.at(i, j) * lp : 0.0;
            hxy2 -= prod > 0.0 ? prod * lp : 0.0;
        }
    }
    f12 = hx > 0.0 ? (f9 - hxy1) / hx : 1.0;  // hy == hx by symmetry
    double arg = 1.0 - std::exp(-2.0 * (hxy2 - f9));
    f13 = std::sqrt(std::max(arg, 0.0));
    return out;
}

std::array<double, 52> haralick52(const GrayImage& img, std::size_t levels,
                                  const PixelMask* mask) {
    std::array<double, 52> out{};
    std::size_t w = 0;
    for (auto [dx, dy] : kGlcmOffsets) {
        auto vec = haralick13(glcm(img, levels, dx, dy, mask));
        for (double v : vec.f) out[w++] = v;
    }
    return out;
}

std::vector<SegmentFeatures> extract_features(const GrayImage& img, const PixelMask& mask,
                                              const TextureConfig& cfg) {
    if (mask.size() != img.size())
        throw Error(ErrorCode::InvalidArgument, "extract_features: mask size mismatch");
    auto segments = segment_thirds(img, cfg.overlap_fraction);

    auto slice_mask = [&](const RowRange& range) {
        return PixelMask(mask.begin() + static_cast<std::ptrdiff_t>(range.begin * img.width),
                         mask.begin() + static_cast<std::ptrdiff_t>(range.end * img.width));
    };

    // A band can miss the foreground entirely (the retained blob need not
    // span the whole height); such segments fall back to full-area
    // features and say so.
    auto features_for = [&](const std::string& name, const GrayImage& part,
                            const PixelMask& part_mask) {
        SegmentFeatures rec;
        rec.segment = name;
        try {
            rec.values = haralick52(part, cfg.levels, &part_mask);
        } catch (const Error&) {
            rec.values = haralick52(part, cfg.levels, nullptr);
            rec.mask_ignored = true;
        }
        return rec;
    };

    std::vector<SegmentFeatures> records;
    records.push_back(features_for("whole", segments.whole, mask));
    records.push_back(features_for("top", segments.top, slice_mask(segments.ranges[0])));
    records.push_back(features_for("mid", segments.mid, slice_mask(segments.ranges[1])));
    records.push_back(features_for("bottom", segments.bottom, slice_mask(segments.ranges[2])));
    return records;
}

std::vector<std::string> texture_feature_names() {
    static const std::array<const char*, 4> angles = {"000", "045", "090", "135"};
    std::vector<std::string> names;
    names.reserve(52);
    for (const char* angle : angles) {
        for (int k = 1; k <= 13; ++k) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "f_%s_%02d", angle, k);
            names.emplace_back(buf);
        }
    }
    return names;
}

}  // namespace rebalance
