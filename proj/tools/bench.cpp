// Benchmark: OpenMP event-reduction kernel against the serial reference, and
// one end-to-end parametric pass for scale.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sipipe/engine.hpp"
#include "sipipe/generators.hpp"
#include "sipipe/kernels.hpp"
#include "sipipe/rng.hpp"

using namespace sipipe;

namespace {

template <typename F>
double ms_per_call(F&& f, int iters) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < iters; ++i) f();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / iters;
}

std::vector<kernels::QuadEvent> random_events(Rng& rng, std::size_t m, double z) {
    std::vector<kernels::QuadEvent> events;
    events.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        kernels::QuadEvent e;
        e.a = rng.normal();
        e.b = rng.normal();
        e.c = rng.normal();
        e.leq = e.a * z * z + e.b * z + e.c <= 0.0;
        events.push_back(e);
    }
    return events;
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("openmp: not enabled\n");
#endif

    Rng rng(12345);
    const double z = 0.25;
    std::printf("%-10s %14s %14s %9s\n", "events", "parallel ms", "reference ms", "ratio");
    for (std::size_t m : {std::size_t{1000}, std::size_t{10000}, std::size_t{100000},
                          std::size_t{1000000}}) {
        const auto events = random_events(rng, m, z);
        volatile double sink = 0.0;
        const int iters = m >= 100000 ? 20 : 200;
        const double par = ms_per_call(
            [&] {
                const Interval iv = kernels::tightest_interval(events, z);
                sink = sink + iv.lo;
            },
            iters);
        const double ref = ms_per_call(
            [&] {
                const Interval iv = kernels::tightest_interval_serial(events, z);
                sink = sink + iv.lo;
            },
            iters / 4 + 1);
        std::printf("%-10zu %14.4f %14.4f %8.2fx\n", m, par, ref, ref / par);
    }

    // end-to-end: one parametric pass on a 100 x 10 null draw
    NullGenSpec ns;
    ns.n = 100;
    ns.d = 10;
    ns.seed = 7;
    const Eigen::MatrixXd A = generate_null(ns).mat();
    Eigen::MatrixXd B(100, 10);
    Rng brng(8);
    for (int i = 0; i < 100; ++i) {
        for (int j = 0; j < 10; ++j) B(i, j) = 0.3 * brng.normal();
    }
    const char* cfg = R"({"nodes":[
      {"id":"od","kind":"knn_od","params":{"k":5,"tau":60.0}},
      {"id":"fs","kind":"variance_fs","params":{"tau":0.5}},
      {"id":"cl","kind":"kmeans","params":{"n_clusters":3,"max_iter":20,"seed":0}}],
      "edges":[["od","fs"],["fs","cl"]]})";
    const PipelineGraph g = PipelineGraph::from_json_text(cfg);
    GramCache cache;
    const double per_pass = ms_per_call([&] { update_interval(g, A, B, 0.01, &cache); }, 200);
    std::printf("\nupdate_interval (n=100, d=10, od+fs+kmeans): %.3f ms per pass\n", per_pass);
    return 0;
}
