#include "cwb/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cwb/rng.hpp"

namespace cwb {

std::vector<int> largest_remainder_counts(const std::vector<double>& ratios, int total) {
  if (ratios.empty()) throw ConfigError("mixture: no classes given");
  if (total < 0) throw ConfigError("mixture: negative total");
  double sum = 0.0;
  for (double r : ratios) {
    if (r < 0.0) throw ConfigError("mixture: negative ratio");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("mixture: ratios must sum to 1");

  std::vector<int> counts(ratios.size());
  std::vector<std::pair<double, std::size_t>> remainders(ratios.size());
  int assigned = 0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    double exact = ratios[i] * total;
    counts[i] = static_cast<int>(std::floor(exact));
    assigned += counts[i];
    remainders[i] = {exact - counts[i], i};
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int k = 0; k < total - assigned; ++k) counts[remainders[k].second] += 1;
  return counts;
}

std::vector<int> mixture_schedule(const std::vector<double>& ratios, int total,
                                  std::uint64_t seed) {
  std::vector<int> counts = largest_remainder_counts(ratios, total);
  std::vector<int> seq;
  seq.reserve(total);
  for (std::size_t c = 0; c < counts.size(); ++c)
    seq.insert(seq.end(), counts[c], static_cast<int>(c));
  RngStream rng(seed);
  for (std::size_t i = seq.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(seq[i - 1], seq[j]);
  }
  return seq;
}

}  // namespace cwb
