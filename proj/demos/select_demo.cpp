// Selects exemplars for one query from a random bank with each kernel and
// prints the picks next to the dense top-k baseline.

#include <iostream>
#include <random>

#include "kite/kite.hpp"

int main() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  kite::RowMatrix rows(200, 16);
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    for (Eigen::Index j = 0; j < rows.cols(); ++j) rows(i, j) = gauss(rng);
  const kite::EmbeddingBank bank(rows);
  const kite::Vector z = bank.row(3) + 0.1 * kite::Vector::Ones(16);

  auto print = [](const char* label, const kite::SelectionResult& r) {
    std::cout << label << ':';
    for (auto i : r.indices) std::cout << ' ' << i;
    std::cout << '\n';
  };

  kite::SelectionConfig config;
  config.k = 8;
  config.beta = 0.02;
  config.lambda = 0.5;
  for (const char* kernel : {"linear", "poly:c=1,m=3", "rbf:sigma=4"}) {
    config.kernel = kite::parse_kernel_spec(kernel);
    print(kernel, kite::select(bank, z, config));
  }
  print("dense", kite::select_dense_topk(bank, z, config.k));
  return 0;
}
