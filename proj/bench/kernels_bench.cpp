// Serial reference vs OpenMP kernels on a 512x512 plane.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "cvplan/vision/kernels.hpp"

namespace v = cvplan::vision;

namespace {

constexpr int kSide = 512;

const std::vector<double>& plane() {
  static const auto p = [] {
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> u(0, 255);
    std::vector<double> out(static_cast<std::size_t>(kSide) * kSide);
    for (auto& x : out) x = u(rng);
    return out;
  }();
  return p;
}

const std::vector<std::uint8_t>& bytes(unsigned seed) {
  static std::vector<std::vector<std::uint8_t>> cache(2);
  auto& b = cache[seed];
  if (b.empty()) {
    std::mt19937 rng(seed + 11);
    std::uniform_int_distribution<int> u(0, 255);
    b.resize(static_cast<std::size_t>(kSide) * kSide);
    for (auto& x : b) x = static_cast<std::uint8_t>(u(rng));
  }
  return b;
}

std::vector<std::uint8_t> mask() {
  auto m = bytes(1);
  for (auto& x : m) x = x > 127;
  return m;
}

template <auto F>
void resize(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(F(plane(), kSide, kSide, 1024, 1024, 1));
}

template <auto F>
void equalize(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(F(plane(), 256));
}

template <auto F>
void clahe(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(F(plane(), kSide, kSide, 256, 0.03, v::kClaheTiles, v::kClaheTiles));
}

template <auto F>
void moments(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(F(plane()));
}

template <auto F>
void threshold_scores(benchmark::State& s) {
  const auto m = mask();
  std::vector<v::LevelPair> pairs(8, v::LevelPair{bytes(0), m});
  for (auto _ : s) benchmark::DoNotOptimize(F(pairs));
}

template <auto F>
void overlay(benchmark::State& s) {
  const auto m = mask();
  for (auto _ : s) benchmark::DoNotOptimize(F(bytes(0), m, 0.5));
}

}  // namespace

BENCHMARK(resize<v::serial::resize_plane>)->Name("resize/serial");
BENCHMARK(resize<v::parallel::resize_plane>)->Name("resize/openmp");
BENCHMARK(equalize<v::serial::equalize>)->Name("equalize/serial");
BENCHMARK(equalize<v::parallel::equalize>)->Name("equalize/openmp");
BENCHMARK(clahe<v::serial::clahe>)->Name("clahe/serial");
BENCHMARK(clahe<v::parallel::clahe>)->Name("clahe/openmp");
BENCHMARK(moments<v::serial::moments>)->Name("moments/serial");
BENCHMARK(moments<v::parallel::moments>)->Name("moments/openmp");
BENCHMARK(threshold_scores<v::serial::threshold_scores>)->Name("threshold_scores/serial");
BENCHMARK(threshold_scores<v::parallel::threshold_scores>)->Name("threshold_scores/openmp");
BENCHMARK(overlay<v::serial::overlay>)->Name("overlay/serial");
BENCHMARK(overlay<v::parallel::overlay>)->Name("overlay/openmp");

BENCHMARK_MAIN();
