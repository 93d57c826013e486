#ifndef TAGAD_TESTS_ORACLES_HPP
#define TAGAD_TESTS_ORACLES_HPP

// Slow reference computations, written independently of the library code
// they check.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// Fraction of (positive, negative) pairs won by the positive, ties as half.
inline double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      pairs += 1;
      if (s[i] > s[j]) wins += 1;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

// For each positive: its rank under (score desc, id asc) and the number of
// positives at or above that rank.
inline double enumerated_ap(const std::vector<double>& s, const std::vector<int>& y,
                            const std::vector<std::int64_t>& ids) {
  auto ahead = [&](std::size_t j, std::size_t i) {
    return s[j] > s[i] || (s[j] == s[i] && ids[j] < ids[i]);
  };
  double total = 0;
  int positives = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    ++positives;
    int rank = 1;
    int pos_at_or_above = 1;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (j == i || !ahead(j, i)) continue;
      ++rank;
      if (y[j]) ++pos_at_or_above;
    }
    total += static_cast<double>(pos_at_or_above) / rank;
  }
  return total / positives;
}

// All-pairs hop counts by Floyd-Warshall over an adjacency matrix.
inline std::vector<std::vector<int>> all_pairs_hops(
    int n, const std::vector<std::pair<std::int64_t, std::int64_t>>& edges) {
  const int inf = std::numeric_limits<int>::max() / 4;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (int i = 0; i < n; ++i) d[i][i] = 0;
  for (auto [u, v] : edges) {
    if (u == v) continue;
    d[u][v] = d[v][u] = 1;
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  for (auto& row : d)
    for (auto& x : row)
      if (x >= inf) x = -1;
  return d;
}

// 1-based inclusive token ranges covered by sliding windows.
inline std::vector<std::pair<int, int>> windows(int tokens, int size, int overlap) {
  std::vector<std::pair<int, int>> out;
  int start = 1;
  while (true) {
    const int end = std::min(tokens, start + size - 1);
    out.emplace_back(start, end);
    if (end == tokens) break;
    start += size - overlap;
  }
  return out;
}

// Position of every item after sorting by key descending with tiebreak
// ascending, by counting how many items precede it.
template <typename Key, typename Tie>
std::vector<std::size_t> rank_positions(const std::vector<Key>& key,
                                        const std::vector<Tie>& tie) {
  std::vector<std::size_t> pos(key.size());
  for (std::size_t i = 0; i < key.size(); ++i) {
    std::size_t before = 0;
    for (std::size_t j = 0; j < key.size(); ++j) {
      if (j == i) continue;
      if (key[j] > key[i] || (key[j] == key[i] && tie[j] < tie[i])) ++before;
    }
    pos[i] = before;
  }
  return pos;
}

}  // namespace oracle

#endif  // TAGAD_TESTS_ORACLES_HPP
