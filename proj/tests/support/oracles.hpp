#pragma once

// Independent reference implementations and random generators for the test suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "gahmm/hmm.hpp"

namespace gahmm::oracle {

using Rng = std::mt19937_64;

inline std::vector<double> random_simplex(Rng& rng, std::size_t n) {
  std::exponential_distribution<double> draw(1.0);
  std::vector<double> v(n);
  double s = 0.0;
  for (auto& x : v) s += (x = draw(rng) + 1e-3);
  for (auto& x : v) x /= s;
  return v;
}

inline HmmModel random_model(Rng& rng, std::size_t states, std::size_t symbols) {
  HmmModel m;
  m.transition = Matrix(states, states);
  m.emission = Matrix(states, symbols);
  m.initial = random_simplex(rng, states);
  for (std::size_t i = 0; i < states; ++i) {
    const auto a = random_simplex(rng, states);
    const auto b = random_simplex(rng, symbols);
    for (std::size_t j = 0; j < states; ++j) m.transition(i, j) = a[j];
    for (std::size_t k = 0; k < symbols; ++k) m.emission(i, k) = b[k];
  }
  return m;
}

inline std::vector<Code> random_codes(Rng& rng, std::size_t len, std::size_t symbols) {
  std::uniform_int_distribution<Code> draw(0, static_cast<Code>(symbols - 1));
  std::vector<Code> out(len);
  for (auto& c : out) c = draw(rng);
  return out;
}

// Probability of one state path together with the observations.
inline double path_probability(const HmmModel& m, const std::vector<std::size_t>& path,
                               const std::vector<Code>& codes) {
  double p = m.initial[path[0]] * m.emission(path[0], codes[0]);
  for (std::size_t t = 1; t < codes.size(); ++t) {
    p *= m.transition(path[t - 1], path[t]) * m.emission(path[t], codes[t]);
  }
  return p;
}

// Visits every state path of the given length in lexicographic order.
template <typename F>
void for_each_path(std::size_t states, std::size_t len, F&& visit) {
  std::vector<std::size_t> path(len, 0);
  while (true) {
    visit(path);
    std::size_t t = len;
    while (t > 0 && ++path[t - 1] == states) path[--t] = 0;
    if (t == 0) return;
  }
}

inline double brute_force_log_likelihood(const HmmModel& m, const std::vector<Code>& codes) {
  double total = 0.0;
  for_each_path(m.states(), codes.size(), [&](const auto& path) { total += path_probability(m, path, codes); });
  return std::log(total);
}

struct BestPath {
  std::vector<std::size_t> path;
  double probability = -1.0;
  std::vector<std::vector<std::size_t>> maximizers;
};

// First path (lexicographically) reaching the maximum probability, plus every
// path within `rel_tol` of it; products of the same factors in another order
// can differ in the last bit.
inline BestPath brute_force_viterbi(const HmmModel& m, const std::vector<Code>& codes, double rel_tol = 1e-12) {
  BestPath best;
  for_each_path(m.states(), codes.size(), [&](const auto& path) {
    const double p = path_probability(m, path, codes);
    if (p > best.probability) {
      best.path = path;
      best.probability = p;
    }
  });
  for_each_path(m.states(), codes.size(), [&](const auto& path) {
    if (path_probability(m, path, codes) >= best.probability * (1.0 - rel_tol)) best.maximizers.push_back(path);
  });
  return best;
}

inline bool is_maximizer(const BestPath& best, const std::vector<std::size_t>& path) {
  return std::find(best.maximizers.begin(), best.maximizers.end(), path) != best.maximizers.end();
}

inline double correlation_recursive(double x, int y) {
  if (y == 1) return x;
  const double prev = correlation_recursive(x, y - 1);
  return prev + (1.0 - prev) / 2.0;
}

}  // namespace gahmm::oracle
