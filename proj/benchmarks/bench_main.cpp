#include <benchmark/benchmark.h>

#include <vector>

#include "forensicross/simnet.hpp"

using namespace forensicross;

namespace {

std::vector<Digest> leaves(std::size_t n) {
  std::vector<Digest> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(hash(to_bytes("leaf" + std::to_string(i))));
  return out;
}

void BM_MerkleRoot(benchmark::State& state) {
  const auto l = leaves(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(merkle_root(l));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MerkleRoot)->Range(8, 4096);

void BM_ValidateChain(benchmark::State& state) {
  const auto validator = KeyPair::from_seed(hash(to_bytes("validator")));
  const auto user = KeyPair::from_seed(hash(to_bytes("user")));
  Chain chain("A", {validator.public_key});
  for (std::int64_t h = 0; h < state.range(0); ++h) {
    for (int t = 0; t < 4; ++t) {
      chain.submit_transaction(make_transaction(user, PayloadKind::InterchainEnvelope,
                                                to_bytes(std::to_string(h) + ":" + std::to_string(t)), "A", {"B"}));
    }
    chain.mine_block(validator, static_cast<LogicalTime>(h + 1));
  }
  for (auto _ : state) benchmark::DoNotOptimize(validate_chain(chain));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ValidateChain)->Arg(20)->Arg(200);

// Both designs, one broadcast case creation per source chain.
void BM_CompareDesigns(benchmark::State& state) {
  const auto k = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(compare_designs(k, k, Pattern::Broadcast));
}
BENCHMARK(BM_CompareDesigns)->Arg(3)->Arg(6);

void BM_LifecycleScenario(benchmark::State& state) {
  const auto scenario = load_scenario(FX_SCENARIO_DIR "/lifecycle_3chain.yaml");
  for (auto _ : state) benchmark::DoNotOptimize(run(scenario).summary.blocks_mined);
}
BENCHMARK(BM_LifecycleScenario);

}  // namespace

BENCHMARK_MAIN();
