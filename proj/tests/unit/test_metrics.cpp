#include "tiglab/errors.hpp"
#include "tiglab/metrics.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

using namespace tiglab;

namespace {

// Precision at each positive's rank, where items rank by score with earlier inputs
// (positives before negatives) first among equal scores.
double brute_ap(const std::vector<double>& pos, const std::vector<double>& neg) {
  std::vector<double> all(pos);
  all.insert(all.end(), neg.begin(), neg.end());
  std::vector<std::pair<std::size_t, double>> rank_prec;  // (rank, precision) per positive
  for (std::size_t i = 0; i < pos.size(); ++i) {
    std::size_t rank = 0, hits = 0;
    for (std::size_t j = 0; j < all.size(); ++j) {
      const bool before = all[j] > all[i] || (all[j] == all[i] && j <= i);
      if (before) {
        ++rank;
        if (j < pos.size()) ++hits;
      }
    }
    rank_prec.push_back({rank, static_cast<double>(hits) / static_cast<double>(rank)});
  }
  std::sort(rank_prec.begin(), rank_prec.end());
  double total = 0.0;
  for (const auto& rp : rank_prec) total += rp.second;
  return total / static_cast<double>(pos.size());
}

double brute_auroc(const std::vector<double>& s, const std::vector<int>& y) {
  long long twice = 0, p = 0, n = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] == 1) ++p; else ++n;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[i] != 1 || y[j] == 1) continue;
      twice += s[i] > s[j] ? 2 : (s[i] == s[j] ? 1 : 0);
    }
  }
  return static_cast<double>(twice) / (2.0 * static_cast<double>(p) * static_cast<double>(n));
}

}  // namespace

TEST_CASE("average precision on worked examples") {
  CHECK(average_precision(std::vector<double>{0.9, 0.8}, std::vector<double>{0.2, 0.1}) == 1.0);
  CHECK(average_precision(std::vector<double>{0.9}, std::vector<double>{0.1}) == 1.0);
  // ranks: 0.8 (pos) 0.6 (neg) 0.4 (pos) -> (1/1 + 2/3) / 2
  CHECK(average_precision(std::vector<double>{0.8, 0.4}, std::vector<double>{0.6}) ==
        doctest::Approx(0.8333333333).epsilon(1e-9));
  CHECK_THROWS_AS(average_precision(std::vector<double>{}, std::vector<double>{0.1}), ValidationError);
  CHECK_THROWS_AS(average_precision(std::vector<double>{0.1}, std::vector<double>{}), ValidationError);
}

TEST_CASE("auroc on worked examples") {
  CHECK(auroc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{0, 0, 1, 1}) == 1.0);
  CHECK(auroc(std::vector<double>{0.5, 0.5, 0.5}, std::vector<int>{0, 1, 0}) == 0.5);
  CHECK(auroc(std::vector<double>{0.3, 0.7, 0.5}, std::vector<int>{0, 1, 0}) == 1.0);
  CHECK_THROWS_AS(auroc(std::vector<double>{0.3, 0.7}, std::vector<int>{1, 1}), ValidationError);
}

TEST_CASE("metrics equal brute-force oracles exactly on random instances") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(1, 25), level(0, 9);
  std::uniform_real_distribution<double> cont(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const bool coarse = trial % 2 == 0;  // coarse scores force ties
    auto draw = [&] { return coarse ? level(rng) / 10.0 : cont(rng); };
    std::vector<double> pos(static_cast<std::size_t>(size(rng))), neg(static_cast<std::size_t>(size(rng)));
    for (auto& s : pos) s = draw();
    for (auto& s : neg) s = draw();
    REQUIRE(average_precision(pos, neg) == brute_ap(pos, neg));

    std::vector<double> s(pos);
    s.insert(s.end(), neg.begin(), neg.end());
    std::vector<int> y(pos.size(), 1);
    y.resize(s.size(), 0);
    std::shuffle(y.begin(), y.end(), rng);
    REQUIRE(auroc(s, y) == brute_auroc(s, y));
  }
}

TEST_CASE("spearman uses average ranks") {
  CHECK(spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{4, 3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{5, 5, 5}) == 0.0);
  // x ranks 1..4, y ranks 1, 2.5, 2.5, 4 -> Pearson of the rank vectors
  CHECK(spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 2, 2, 3}) ==
        doctest::Approx(0.9486832981));
}

TEST_CASE("mean and sample std; one value has no std") {
  const MeanStd one = mean_std(std::vector<double>{0.7});
  CHECK(one.mean == 0.7);
  CHECK_FALSE(one.has_std);
  const MeanStd three = mean_std(std::vector<double>{1.0, 2.0, 3.0});
  CHECK(three.mean == doctest::Approx(2.0));
  CHECK(three.std == doctest::Approx(1.0));
}
