#include <benchmark/benchmark.h>

#include "attrinfer/graph.hpp"
#include "attrinfer/numerics.hpp"
#include "attrinfer/rng.hpp"
#include "attrinfer/synthetic.hpp"

namespace attrinfer {
namespace {

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const DenseMatrix a = rng.normal_matrix(n, 64);
  const DenseMatrix b = rng.normal_matrix(64, 128);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * 64 * 128));
}
BENCHMARK(BM_Matmul)->Arg(300)->Arg(1000)->Arg(3000);

void BM_SparseDenseMatmul(benchmark::State& state) {
  SyntheticConfig config = benchmark_synthetic_config(static_cast<std::size_t>(state.range(0)));
  Rng rng(2);
  const SparseMatrix a = normalize_adjacency(generate_synthetic(config, rng).graph);
  const DenseMatrix h = rng.normal_matrix(a.rows(), 64);
  for (auto _ : state) benchmark::DoNotOptimize(sparse_dense_matmul(a, h));
  state.counters["nnz"] = static_cast<double>(a.values().size());
}
BENCHMARK(BM_SparseDenseMatmul)->Arg(300)->Arg(3000)->Arg(30000);

void BM_SoftmaxBlocks(benchmark::State& state) {
  const AttributeSchema schema = benchmark_synthetic_config().schema;
  Rng rng(3);
  const DenseMatrix logits =
      rng.normal_matrix(static_cast<std::size_t>(state.range(0)), schema.feature_count());
  for (auto _ : state) benchmark::DoNotOptimize(softmax_blocks(logits, schema.blocks()));
}
BENCHMARK(BM_SoftmaxBlocks)->Arg(300)->Arg(3000)->Arg(30000);

}  // namespace
}  // namespace attrinfer
