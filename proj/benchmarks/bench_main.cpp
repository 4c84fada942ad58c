#include <benchmark/benchmark.h>

#include <random>

#include "fpresheaf/kappa.hpp"
#include "fpresheaf/pgroup.hpp"

using namespace fpre;

namespace {

std::shared_ptr<const site::TruncatedSite> bench_site() {
    static auto s = [] {
        fp::set_prime(2);
        return site::make_site(4);
    }();
    return s;
}

FpMatrix random_matrix(std::uint32_t rows, std::uint32_t cols, std::mt19937_64& rng) {
    FpMatrix m(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r)
        for (std::uint32_t c = 0; c < cols; ++c)
            m.set(r, c, static_cast<unsigned>(rng() & 1));
    return m;
}

} // namespace

static void BM_rref_gf2_64(benchmark::State& state) {
    fp::set_prime(2);
    std::mt19937_64 rng(5);
    FpMatrix m = random_matrix(64, 64, rng);
    for (auto _ : state) {
        auto rr = linalg::rref(m);
        benchmark::DoNotOptimize(rr.rank);
    }
}
BENCHMARK(BM_rref_gf2_64);

static void BM_kernel_basis_gf2(benchmark::State& state) {
    fp::set_prime(2);
    std::mt19937_64 rng(6);
    FpMatrix m = random_matrix(48, 96, rng);
    for (auto _ : state) {
        auto kb = linalg::kernel_basis(m);
        benchmark::DoNotOptimize(kb.size());
    }
}
BENCHMARK(BM_kernel_basis_gf2);

static void BM_enumerate_surjections_4_2(benchmark::State& state) {
    fp::set_prime(2);
    for (auto _ : state) {
        auto s = linalg::enumerate_surjections(4, 2);
        benchmark::DoNotOptimize(s.size());
    }
}
BENCHMARK(BM_enumerate_surjections_4_2);

static void BM_factor_hom33(benchmark::State& state) {
    fp::set_prime(2);
    for (auto _ : state) {
        state.PauseTiming();
        auto s = site::make_site(4); // fresh cache each round
        state.ResumeTiming();
        for (std::uint64_t k = 0; k < 512; ++k)
            benchmark::DoNotOptimize(s->factor(FpMatrix::from_index(3, 3, k)).rank);
    }
}
BENCHMARK(BM_factor_hom33);

static void BM_act_through_gr2(benchmark::State& state) {
    auto s = bench_site();
    presheaf::SetPresheaf g2 = presheaf::gr(s, 2);
    std::mt19937_64 rng(7);
    for (auto _ : state) {
        FpMatrix f = FpMatrix::from_index(4, 3, rng() % linalg::hom_count(4, 3));
        benchmark::DoNotOptimize(g2.act(f).size());
    }
}
BENCHMARK(BM_act_through_gr2);

static void BM_rank_filtration_gr2(benchmark::State& state) {
    auto s = bench_site();
    presheaf::SetPresheaf g2 = presheaf::gr(s, 2);
    for (auto _ : state) {
        auto f = presheaf::rank_filtration(g2);
        benchmark::DoNotOptimize(f.regular.size());
    }
}
BENCHMARK(BM_rank_filtration_gr2);

static void BM_q2_grassmannian(benchmark::State& state) {
    auto s = bench_site();
    lin::LinFunctor fg2 = lin::linearize(presheaf::gr(s, 2));
    for (auto _ : state) {
        auto q = lin::q_n(fg2, 2);
        benchmark::DoNotOptimize(q.quotient.dim(4));
    }
}
BENCHMARK(BM_q2_grassmannian);

static void BM_nat_hom_sym2_ext2(benchmark::State& state) {
    auto s = bench_site();
    lin::LinFunctor s2 = lin::sym_power(s, 2);
    lin::LinFunctor l2 = lin::ext_power(s, 2);
    for (auto _ : state) {
        auto basis = lin::nat_hom(s2, l2);
        benchmark::DoNotOptimize(basis.size());
    }
}
BENCHMARK(BM_nat_hom_sym2_ext2);

static void BM_kappa_gr_le2_degree3(benchmark::State& state) {
    auto s = bench_site();
    presheaf::SetPresheaf x = presheaf::gr_le(s, 2);
    for (auto _ : state) {
        auto k = kappa::kappa_degree(x, 3);
        benchmark::DoNotOptimize(k.dim);
    }
}
BENCHMARK(BM_kappa_gr_le2_degree3);

static void BM_frattini_heisenberg3(benchmark::State& state) {
    fp::set_prime(2);
    pg::HeisenbergGroup g(3); // order 512
    g.elements();
    for (auto _ : state) {
        auto phi = pg::frattini_subgroup(g);
        benchmark::DoNotOptimize(phi.size());
    }
}
BENCHMARK(BM_frattini_heisenberg3);

BENCHMARK_MAIN();
