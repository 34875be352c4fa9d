#include <random>
#include <string>

#include <benchmark/benchmark.h>

#include "hq/callgraph.hpp"
#include "hq/danger.hpp"
#include "hq/unsafe.hpp"

namespace {

/* A layered random DAG: `width` nodes per layer, every node calling a few
 * nodes of the next layer.  Dense enough that reach queries do real work. */
hq::CallGraph layered_graph(int layers, int width, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, width - 1);
    std::uniform_int_distribution<int> unsafe(0, 6);

    nlohmann::json nodes = nlohmann::json::array();
    nlohmann::json edges = nlohmann::json::array();
    auto id_of = [](int layer, int i) {
        return "f" + std::to_string(layer) + "_" + std::to_string(i);
    };
    for (int layer = 0; layer < layers; ++layer) {
        for (int i = 0; i < width; ++i) {
            nodes.push_back({{"id", id_of(layer, i)},
                             {"name", id_of(layer, i)},
                             {"file", layer == 0 ? "include/api.h" : "src/impl.c"},
                             {"line", 1 + i},
                             {"external", false},
                             {"unsafe_count", unsafe(rng)}});
            if (layer + 1 < layers) {
                for (int k = 0; k < 3; ++k) {
                    edges.push_back({{"caller", id_of(layer, i)},
                                     {"callee", id_of(layer + 1, pick(rng))}});
                }
            }
        }
    }
    return hq::CallGraph::from_json(
        {{"version", 1}, {"nodes", nodes}, {"edges", edges}});
}

void bm_forward_reach(benchmark::State& state) {
    const hq::CallGraph g = layered_graph(30, 40, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(g.forward_reach("f0_0", 20));
    }
}
BENCHMARK(bm_forward_reach);

void bm_danger(benchmark::State& state) {
    const hq::CallGraph g = layered_graph(30, 40, 7);
    const hq::UnsafeProfile profile = hq::default_unsafe_profile();
    for (auto _ : state) {
        benchmark::DoNotOptimize(hq::danger(g, "f0_0", 20, profile));
    }
}
BENCHMARK(bm_danger);

void bm_count_unsafe(benchmark::State& state) {
    std::string source;
    for (int i = 0; i < 200; ++i) {
        source += "void fn" + std::to_string(i) +
                  "(char* p, size_t n) { memcpy(p, p + 1, n); p[0] = p->next; free(p); }\n";
    }
    const auto& patterns = hq::default_unsafe_patterns();
    for (auto _ : state) {
        benchmark::DoNotOptimize(hq::count_unsafe(source, patterns));
    }
}
BENCHMARK(bm_count_unsafe);

}  // namespace

BENCHMARK_MAIN();
