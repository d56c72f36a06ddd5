#pragma once

#include <string>

#include "ttk/corpus.hpp"
#include "ttk/random.hpp"
#include "ttk/shifts.hpp"

namespace ttk::testing {

// A dataset with `per_domain` complete triplets for each of the genres
// g0..g{genres-1} and authors a0..a{authors-1}.
inline std::string dataset_jsonl(int genres, int authors, int per_domain) {
  std::string out;
  for (int g = 0; g < genres; ++g) {
    for (int i = 0; i < per_domain; ++i) {
      const std::string sid = "src-g" + std::to_string(g) + "-" + std::to_string(i);
      out += R"({"kind":"source","id":")" + sid + R"(","genre":"g)" + std::to_string(g) +
             R"(","text":"source text )" + sid + "\"}\n";
      for (int a = 0; a < authors; ++a) {
        const std::string au = "a" + std::to_string(a);
        for (const char* cond : {"low", "high"}) {
          out += R"({"kind":"translation","id":")" + sid + "-" + au + "-" + cond + R"(","source_id":")" + sid +
                 R"(","author":")" + au + R"(","condition":")" + cond + R"(","text":")" + cond + " by " + au +
                 " of " + sid + "\"}\n";
        }
      }
    }
  }
  return out;
}

inline corpus::Dataset make_dataset(int genres, int authors, int per_domain) {
  return corpus::parse_dataset(dataset_jsonl(genres, authors, per_domain));
}

// 7 genres x 2 authors x {low, high}: 28 keys, every model scored on every
// data key. MLL = base(model) + G[genre] + A[author] + T[cond] (+ noise), so
// the overall shift is exactly the sum of the three single-component shifts.
inline shifts::MllGrid additive_grid(double noise_sigma, std::uint64_t seed) {
  Xorshift64Star rng(seed);
  std::vector<double> g(7), a(2);
  for (auto& v : g) v = -rng.uniform();
  for (auto& v : a) v = -0.5 * rng.uniform();
  const double t_low = -0.3, t_high = -0.1;
  std::vector<shifts::GridKey> keys;
  for (int gi = 0; gi < 7; ++gi)
    for (int ai = 0; ai < 2; ++ai)
      for (auto c : {corpus::Condition::low, corpus::Condition::high})
        keys.push_back({"genre" + std::to_string(gi), "author" + std::to_string(ai), c});
  auto effect = [&](const shifts::GridKey& k) {
    return g[k.genre.back() - '0'] + a[k.author.back() - '0'] + (k.condition == corpus::Condition::low ? t_low : t_high);
  };
  shifts::MllGrid grid;
  for (const auto& m : keys) {
    const double base = -2.0 - rng.uniform();
    for (const auto& d : keys) grid.add({m, d, base + effect(d) + noise_sigma * rng.normal()});
  }
  return grid;
}

}  // namespace ttk::testing
