// Benchmark comparing the OpenMP kernels against their serial reference
// implementations on synthetic workloads, verifying that both produce
// identical results before timing them.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "rebalance/dataset.hpp"
#include "rebalance/experiment.hpp"
#include "rebalance/neighbors.hpp"
#include "rebalance/reference.hpp"
#include "rebalance/rng.hpp"
#include "rebalance/texture.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void print_row(const std::string& name, double serial, double parallel, bool equal) {
    std::printf("%-14s serial %8.3f ms   parallel %8.3f ms   speedup %5.2fx   %s\n",
                name.c_str(), serial * 1e3, parallel * 1e3, serial / parallel,
                equal ? "outputs match" : "OUTPUT MISMATCH");
}

rebalance::Dataset random_points(std::size_t n, std::size_t d, std::uint64_t seed) {
    rebalance::Dataset data;
    data.n_cols = d;
    data.column_kinds.assign(d, rebalance::ColumnKind::continuous);
    data.categories.resize(d);
    for (std::size_t c = 0; c < d; ++c) data.feature_names.push_back("x" + std::to_string(c));
    rebalance::Rng rng(seed);
    std::vector<double> row(d);
    for (std::size_t r = 0; r < n; ++r) {
        for (auto& v : row) v = rng.uniform(-1.0, 1.0);
        data.push_row(row, r % 2 == 0 ? 0 : 1, rebalance::RowProvenance::original);
    }
    return data;
}

rebalance::GrayImage random_image(std::size_t w, std::size_t h, std::uint64_t seed) {
    rebalance::GrayImage img;
    img.width = w;
    img.height = h;
    img.bit_depth = 8;
    img.pixels.resize(w * h);
    rebalance::Rng rng(seed);
    for (auto& px : img.pixels) px = static_cast<std::uint16_t>(rng.uniform_index(256));
    return img;
}

bool bench_knn(double scale) {
    auto n = static_cast<std::size_t>(3000 * scale);
    auto q = static_cast<std::size_t>(600 * scale);
    const std::size_t k = 8;
    auto data = random_points(n, 16, 1);
    auto rows = data.all_rows();
    std::vector<std::size_t> queries(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(q));

    auto t0 = Clock::now();
    std::vector<std::vector<rebalance::Neighbor>> expected(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i)
        expected[i] = rebalance::reference::knn_scan(data, rows, rebalance::DistanceKind::euclid(),
                                                     data.row(queries[i]), k,
                                                     static_cast<std::ptrdiff_t>(queries[i]));
    double serial = seconds_since(t0);

    auto index = rebalance::build_index(data, rows, rebalance::DistanceKind::euclid());
    t0 = Clock::now();
    auto actual = rebalance::knn_batch(index, queries, k);
    double parallel = seconds_since(t0);

    bool equal = true;
    for (std::size_t i = 0; i < queries.size() && equal; ++i)
        for (std::size_t j = 0; j < k && equal; ++j)
            equal = actual[i][j].row == expected[i][j].row;
    print_row("knn", serial, parallel, equal);
    return equal;
}

bool bench_median(double scale) {
    auto side = static_cast<std::size_t>(768 * scale);
    auto img = random_image(side, side, 2);

    auto t0 = Clock::now();
    auto expected = rebalance::reference::median_filter(img, 5);
    double serial = seconds_since(t0);

    t0 = Clock::now();
    auto actual = rebalance::median_filter(img, 5);
    double parallel = seconds_since(t0);

    print_row("median", serial, parallel, actual.pixels == expected.pixels);
    return actual.pixels == expected.pixels;
}

bool bench_glcm(double scale) {
    auto side = static_cast<std::size_t>(1536 * scale);
    auto img = random_image(side, side, 3);

    auto t0 = Clock::now();
    std::vector<rebalance::Glcm> expected;
    for (auto [dx, dy] : rebalance::kGlcmOffsets)
        expected.push_back(rebalance::reference::glcm(img, 16, dx, dy));
    double serial = seconds_since(t0);

    t0 = Clock::now();
    std::vector<rebalance::Glcm> actual;
    for (auto [dx, dy] : rebalance::kGlcmOffsets)
        actual.push_back(rebalance::glcm(img, 16, dx, dy));
    double parallel = seconds_since(t0);

    bool equal = true;
    for (std::size_t i = 0; i < actual.size(); ++i) equal = equal && actual[i].p == expected[i].p;
    print_row("glcm", serial, parallel, equal);
    return equal;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"serial-vs-parallel kernel benchmark"};
    double scale = 1.0;
    int threads = 0;
    app.add_option("--scale", scale, "workload scale factor (default 1.0)");
    app.add_option("--threads", threads, "worker threads (default: library setting)");
    CLI11_PARSE(app, argc, argv);

    rebalance::apply_thread_env();
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; parallel kernels run serially\n");
#endif

    bool ok = bench_knn(scale);
    ok = bench_median(scale) && ok;
    ok = bench_glcm(scale) && ok;
    return ok ? 0 : 1;
}
