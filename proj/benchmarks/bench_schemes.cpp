#include <benchmark/benchmark.h>

#include "phi4/bddv.hpp"
#include "phi4/diagnostics.hpp"
#include "phi4/msilcc.hpp"
#include "phi4/newton.hpp"

using namespace phi4;

// restart from the initial data well before the explicit scheme blows up
constexpr long restart_rows = 256;

static void newton_rows(benchmark::State& st) {
    const std::size_t n = static_cast<std::size_t>(st.range(0));
    const NewtonState start = newton_init(10.0, GridSpec::aligned(n, 1.0), PotentialParams{});
    NewtonState s = start;
    for (auto _ : st) {
        if (s.rows.time_index > restart_rows) {
            st.PauseTiming();
            s = start;
            st.ResumeTiming();
        }
        s = newton_step(s);
        benchmark::DoNotOptimize(s.rows.curr.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<long>(n));
}
BENCHMARK(newton_rows)->Arg(128)->Arg(1024)->Arg(8192);

static void bddv_rows(benchmark::State& st) {
    const std::size_t n = static_cast<std::size_t>(st.range(0));
    const BddvState start = bddv_init(10.0, GridSpec::lightcone(n, 1.0), PotentialParams{});
    BddvState s = start;
    for (auto _ : st) {
        if (s.rows.time_index > restart_rows) {
            st.PauseTiming();
            s = start;
            st.ResumeTiming();
        }
        s = bddv_step(s);
        benchmark::DoNotOptimize(s.rows.curr.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<long>(n));
}
BENCHMARK(bddv_rows)->Arg(128)->Arg(1024)->Arg(8192);

static void msilcc_rows(benchmark::State& st) {
    const std::size_t n = static_cast<std::size_t>(st.range(0));
    const MsilccState start = msilcc_init(10.0, GridSpec::lightcone(n, 1.0), PotentialParams{}, SolverSettings{});
    MsilccState s = start;
    SolverStats total;
    for (auto _ : st) {
        if (s.curr.time_index > restart_rows) {
            st.PauseTiming();
            total.total_iterations += s.stats.total_iterations;
            total.cells_solved += s.stats.cells_solved;
            s = start;
            st.ResumeTiming();
        }
        s = msilcc_step(s);
        benchmark::DoNotOptimize(s.curr.phi.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<long>(n));
    st.counters["iters_per_cell"] =
        static_cast<double>(total.total_iterations + s.stats.total_iterations) /
        static_cast<double>(total.cells_solved + s.stats.cells_solved);
}
BENCHMARK(msilcc_rows)->Arg(128)->Arg(1024)->Arg(8192);

static void msilcc_cell(benchmark::State& st) {
    const CellNeighborhood nb{{0.3, 0.1, -2.0, 0.0}, {0.5, 0.2, -1.8, 0.0}, {0.4, 0.0, -2.1, 0.0}, 1};
    for (auto _ : st) benchmark::DoNotOptimize(msilcc_solve_cell(nb, 0.005, PotentialParams{}, SolverSettings{}, 2, 0));
}
BENCHMARK(msilcc_cell);

static void msilcc_diagnostics(benchmark::State& st) {
    const std::size_t n = static_cast<std::size_t>(st.range(0));
    const GridSpec g = GridSpec::lightcone(n, 1.0);
    MsilccState s = msilcc_init(10.0, g, PotentialParams{}, SolverSettings{});
    ZetaRow r0 = s.prev, r1 = s.curr;
    s = msilcc_step(s);
    ZetaRow r2 = s.curr;
    s = msilcc_step(s);
    ZetaRow r3 = s.curr;
    s = msilcc_step(s);
    const ZetaWindow w{&r0, &r1, &r2, &r3, &s.curr};
    for (auto _ : st) benchmark::DoNotOptimize(msilcc_record(w, g, PotentialParams{}));
    st.SetItemsProcessed(st.iterations() * static_cast<long>(n));
}
BENCHMARK(msilcc_diagnostics)->Arg(128)->Arg(1024);
BENCHMARK_MAIN();
