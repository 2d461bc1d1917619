// Parallel kernels against their serial references on a synthetic project.
#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "callsum/callgraph.hpp"
#include "callsum/java_index.hpp"

namespace fs = std::filesystem;

namespace {

// Writes `files` classes, each with `methods` methods that call into the
// previous class, so every method has callers.
fs::path synthetic_project(int files, int methods)
{
    const fs::path root = fs::temp_directory_path() / ("callsum_bench_" + std::to_string(files) + "_" + std::to_string(methods));
    if (fs::exists(root)) return root;
    fs::create_directories(root / "src");
    for (int f = 0; f < files; ++f) {
        std::ofstream out(root / "src" / ("C" + std::to_string(f) + ".java"));
        out << "package bench;\n\n/** Generated class " << f << ". */\npublic class C" << f << " {\n";
        for (int m = 0; m < methods; ++m) {
            out << "    // method " << m << "\n";
            out << "    public int m" << m << "_" << f << "(int x, String s) {\n";
            out << "        int acc = x * " << (f + m + 1) << ";\n";
            out << "        for (int i = 0; i < s.length(); i++) { acc += s.charAt(i); }\n";
            if (f > 0) out << "        acc += new C" << f - 1 << "().m" << m << "_" << f - 1 << "(acc, s);\n";
            out << "        return helper" << f << "(acc) + \"}\".length();\n";
            out << "    }\n\n";
        }
        out << "    private int helper" << f << "(int v) { /* {{ */ return v + 1; }\n}\n";
    }
    return root;
}

void BM_ScanParallel(benchmark::State& state)
{
    const auto root = synthetic_project(static_cast<int>(state.range(0)), 20);
    for (auto _ : state) benchmark::DoNotOptimize(callsum::scan_project(root));
}

void BM_ScanSerial(benchmark::State& state)
{
    const auto root = synthetic_project(static_cast<int>(state.range(0)), 20);
    for (auto _ : state) benchmark::DoNotOptimize(callsum::scan_project_serial(root));
}

void BM_ContextsParallel(benchmark::State& state)
{
    const auto idx = callsum::scan_project_serial(synthetic_project(static_cast<int>(state.range(0)), 20));
    for (auto _ : state) benchmark::DoNotOptimize(callsum::contexts_for_all(idx));
}

void BM_ContextsSerial(benchmark::State& state)
{
    const auto idx = callsum::scan_project_serial(synthetic_project(static_cast<int>(state.range(0)), 20));
    for (auto _ : state) benchmark::DoNotOptimize(callsum::contexts_for_all_serial(idx));
}

}  // namespace

BENCHMARK(BM_ScanParallel)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScanSerial)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ContextsParallel)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ContextsSerial)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
