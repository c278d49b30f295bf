#include "bcpnn/rng.hpp"

#include <algorithm>

namespace bcpnn::rng {

std::vector<int> Stream::sample_without_replacement(int n, int k) {
  // Floyd's algorithm; result sorted ascending.
  std::vector<int> picked;
  picked.reserve(k);
  for (int j = n - k; j < n; ++j) {
    int t = static_cast<int>(next_below(static_cast<std::uint64_t>(j) + 1));
    if (std::find(picked.begin(), picked.end(), t) == picked.end())
      picked.push_back(t);
    else
      picked.push_back(j);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace bcpnn::rng
