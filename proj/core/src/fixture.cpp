#include "ttk/fixture.hpp"

#include <algorithm>
#include <cstdio>

#include "ttk/error.hpp"
#include "ttk/random.hpp"

namespace ttk::fixture {
namespace {

backend::LayerEmbeddings embeddings(Xorshift64Star& rng, const FixtureSpec& spec, int label) {
  backend::LayerEmbeddings e;
  e.layers = spec.layers;
  e.dim = spec.dim;
  e.data.resize(spec.layers * spec.dim);
  for (std::size_t l = 0; l < spec.layers; ++l) {
    for (std::size_t d = 0; d < spec.dim; ++d) {
      double v = 0.2 * rng.normal();
      if (d == l % spec.dim) v += 1.0;  // keeps every row away from zero norm
      if (d == (l + 1) % spec.dim) v += 0.5 * label;
      e.data[l * spec.dim + d] = static_cast<float>(v);
    }
  }
  return e;
}

}  // namespace

Fixture make_fixture(const FixtureSpec& spec) {
  if (!(spec.gap >= 0.0)) throw ValidationError("fixture gap must be >= 0");
  if (spec.n_train > spec.n_samples) throw ValidationError("fixture n_train exceeds n_samples");
  if (spec.layers < 2 || spec.dim < 1) throw ValidationError("fixture embeddings need >= 2 layers and dim >= 1");
  Fixture out;
  char id[32];
  for (std::size_t i = 0; i < spec.n_samples; ++i) {
    Xorshift64Star rng(spec.seed + 0x9E3779B97F4A7C15ULL * (i + 1));
    const int label = static_cast<int>(i % 2);
    std::snprintf(id, sizeof id, "s%05zu", i);
    const std::size_t n = 8 + static_cast<std::size_t>(rng.below(17));

    backend::TokenScores lo, hi;
    lo.sample_id = hi.sample_id = id;
    lo.model_id = spec.low_model_id;
    hi.model_id = spec.high_model_id;
    std::vector<double> h_lo, h_hi, m2_lo, m2_hi;
    for (std::size_t t = 0; t < n; ++t) {
      const double base = -(0.5 + 2.0 * rng.uniform());
      double a = base + 0.3 * rng.normal();
      const double b = base + 0.3 * rng.normal();
      if (label == 1) a -= spec.gap;
      lo.token_logprobs.push_back(std::min(0.0, a));
      hi.token_logprobs.push_back(std::min(0.0, b));
      for (auto* pair : {&h_lo, &h_hi}) pair->push_back(0.5 + 1.5 * rng.uniform());
      m2_lo.push_back(h_lo.back() * h_lo.back() + 0.2 + rng.uniform());
      m2_hi.push_back(h_hi.back() * h_hi.back() + 0.2 + rng.uniform());
    }
    lo.token_entropies = std::move(h_lo);
    hi.token_entropies = std::move(h_hi);
    lo.logp_second_moments = std::move(m2_lo);
    hi.logp_second_moments = std::move(m2_hi);
    lo.layer_embeddings = embeddings(rng, spec, label);
    hi.layer_embeddings = embeddings(rng, spec, label);
    out.low_model.push_back(std::move(lo));
    out.high_model.push_back(std::move(hi));
    out.labels.push_back({id, label, spec.domain, i < spec.n_train ? "train" : "test"});
  }
  return out;
}

}  // namespace ttk::fixture
