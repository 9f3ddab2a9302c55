// Writes a synthetic dataset to the given directory (for manual runs).
#include <cstdlib>
#include <iostream>
#include <string>

#include "synthetic.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: make_synthetic <dir> [noise]\n";
    return 2;
  }
  cvplan::testing::SyntheticOptions o;
  if (argc > 2) o.noise = std::stod(argv[2]);
  const auto d = cvplan::testing::make_synthetic_dataset(argv[1], o);
  std::cout << "bindings: " << d.bindings.string() << "\ncompletions: " << d.completions.string() << '\n';
  return 0;
}
