#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ttk/backend.hpp"
#include "ttk/labels.hpp"

// Synthetic two-model dumps with a planted translationese signal, for
// exercising the evaluation pipeline without any language model.
namespace ttk::fixture {

struct FixtureSpec {
  std::uint64_t seed = 42;
  std::size_t n_samples = 200;
  /// Per-token logprob advantage of the high model on high-labelled samples.
  double gap = 1.0;
  /// The first n_train samples are marked split=train (embedding fits).
  std::size_t n_train = 0;
  std::string low_model_id = "fixture-low";
  std::string high_model_id = "fixture-high";
  std::string domain = "fixture:a1";
  std::size_t layers = 4;  // rows of the embedding matrix
  std::size_t dim = 8;
};

struct Fixture {
  std::vector<backend::TokenScores> low_model;
  std::vector<backend::TokenScores> high_model;
  std::vector<labels::LabelRecord> labels;
};

/// Sample i has label i % 2 and 8..24 tokens. Both models share a per-token
/// base logprob; each adds its own N(0, 0.3^2) noise, and on label-1 samples
/// the low model's logprobs are lowered by `gap` (then clamped to <= 0).
/// Entropies, second moments and embeddings are filled so every method can
/// run. Output depends only on the spec.
Fixture make_fixture(const FixtureSpec& spec);

}  // namespace ttk::fixture
