#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "mock_server.hpp"
#include "ttk/backend.hpp"
#include "ttk/error.hpp"
#include "ttk/text.hpp"

namespace be = ttk::backend;
using namespace std::chrono_literals;

namespace {

be::TokenScores full_record() {
  be::TokenScores ts;
  ts.sample_id = "s1";
  ts.model_id = "m";
  ts.token_logprobs = {-0.5, -1.25, 0.0};
  ts.token_entropies = std::vector<double>{0.3, 1.0, 0.0};
  ts.logp_second_moments = std::vector<double>{0.1, 1.5, 0.0};
  ts.layer_embeddings = be::LayerEmbeddings{2, 3, {0.5f, -1.0f, 2.0f, 0.25f, 0.0f, 3.5f}};
  return ts;
}

std::string message_of(const be::TokenScores& ts) {
  try {
    be::validate(ts);
  } catch (const ttk::ValidationError& e) {
    return e.what();
  }
  return "";
}

be::BackendConfig config_for(const ttk::testing::MockServer& server) {
  be::BackendConfig cfg;
  cfg.base_url = server.base_url();
  cfg.model_id = "mock";
  cfg.timeout = 5000ms;
  cfg.backoff_initial = 1ms;
  cfg.backoff_max = 2ms;
  cfg.scoring_template = "P:{source}|";
  return cfg;
}

}  // namespace

TEST(Dump, RoundTripIsExact) {
  const auto ts = full_record();
  const auto line = be::serialize_dump_record(ts);
  EXPECT_EQ(be::parse_dump_record(line), ts);
  std::vector<be::TokenScores> records{ts, ts};
  records[1].sample_id = "s2";
  records[1].token_logprobs[0] = -0.1 - 1e-17;
  const auto jsonl = be::serialize_dump(records);
  EXPECT_EQ(be::parse_dump(jsonl), records);
  EXPECT_EQ(be::serialize_dump(be::parse_dump(jsonl)), jsonl);
}

TEST(Dump, ValidationNamesField) {
  auto ts = full_record();
  ts.token_logprobs[1] = 0.5;
  EXPECT_NE(message_of(ts).find("token_logprobs"), std::string::npos);
  ts = full_record();
  ts.token_entropies->pop_back();
  EXPECT_NE(message_of(ts).find("token_entropies"), std::string::npos);
  ts = full_record();
  (*ts.logp_second_moments)[1] = 0.5;  // below H^2 = 1
  EXPECT_NE(message_of(ts).find("logp_second_moments"), std::string::npos);
  ts = full_record();
  ts.layer_embeddings->data.pop_back();
  EXPECT_NE(message_of(ts).find("layer_embeddings"), std::string::npos);
  ts = full_record();
  ts.token_logprobs[0] = std::nan("");
  EXPECT_FALSE(message_of(ts).empty());
  ts = full_record();
  ts.token_logprobs.clear();
  ts.token_entropies.reset();
  ts.logp_second_moments.reset();
  EXPECT_NE(message_of(ts).find("n_tokens"), std::string::npos);
}

TEST(Dump, NTokensMismatchAndLineNumbers) {
  EXPECT_THROW(be::parse_dump_record(R"({"sample_id":"a","model_id":"m","n_tokens":2,"token_logprobs":[-1]})"),
               ttk::ValidationError);
  const std::string good = R"({"sample_id":"a","model_id":"m","n_tokens":1,"token_logprobs":[-1]})";
  const auto path = std::filesystem::temp_directory_path() / "ttk_dump_bad.jsonl";
  ttk::text::write_file(path, good + "\n" + good.substr(0, 10) + "\n");
  try {
    be::read_dump(path);
    FAIL();
  } catch (const ttk::ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  std::filesystem::remove(path);
  EXPECT_THROW(be::read_dump(path), ttk::IoError);
}

TEST(Config, Validation) {
  be::BackendConfig cfg;
  cfg.model_id = "m";
  EXPECT_NO_THROW(cfg.validate());
  cfg.max_parallel = 0;
  EXPECT_THROW(cfg.validate(), ttk::ValidationError);
  cfg.max_parallel = 1;
  cfg.model_id.clear();
  EXPECT_THROW(cfg.validate(), ttk::ValidationError);
}

TEST(Cache, KeysAndDirectoryMirror) {
  EXPECT_EQ(be::cache_key("m", "p", "t"), be::cache_key("m", "p", "t"));
  EXPECT_NE(be::cache_key("m", "p", "t"), be::cache_key("m2", "p", "t"));
  EXPECT_NE(be::cache_key("m", "pt", ""), be::cache_key("m", "p", "t"));
  const auto dir = std::filesystem::temp_directory_path() / "ttk_cache_test";
  std::filesystem::remove_all(dir);
  {
    be::ResponseCache c(dir);
    c.put("k", {-0.5, -0.25});
  }
  be::ResponseCache reopened(dir);
  ASSERT_TRUE(reopened.get("k").has_value());
  EXPECT_EQ(*reopened.get("k"), (std::vector<double>{-0.5, -0.25}));
  EXPECT_FALSE(reopened.get("other").has_value());
  std::filesystem::remove_all(dir);
}

TEST(Prompts, Bundled) {
  for (auto k : {be::PromptKind::low_translationese, be::PromptKind::high_translationese, be::PromptKind::vanilla}) {
    EXPECT_TRUE(ttk::text::has_source_placeholder(be::bundled_prompt(k).template_text));
    EXPECT_EQ(be::parse_prompt_kind(be::to_string(k)), k);
  }
  EXPECT_THROW(be::parse_prompt_kind("loud"), ttk::ValidationError);
}

TEST(Http, ContinuationLogprobsAndCache) {
  ttk::testing::MockServer server;
  const auto cfg = config_for(server);
  be::ModelClient client(cfg, be::make_http_transport(cfg));
  // prompt "P:源|" is 4 code points; the translation tokens sit at 4..6.
  const auto ts = client.fetch_logprobs("x", "源", "译文。");
  EXPECT_EQ(server.last_prompt(), "P:源|译文。");
  ASSERT_EQ(ts.n_tokens(), 3u);
  EXPECT_DOUBLE_EQ(ts.token_logprobs[0], -0.5);
  EXPECT_DOUBLE_EQ(ts.token_logprobs[1], -0.1);
  EXPECT_DOUBLE_EQ(ts.token_logprobs[2], -0.2);
  EXPECT_EQ(ts.model_id, "mock");
  EXPECT_EQ(server.completions(), 1);

  const auto again = client.fetch_logprobs("y", "源", "译文。");
  EXPECT_EQ(server.completions(), 1);
  EXPECT_EQ(again.token_logprobs, ts.token_logprobs);
  EXPECT_EQ(again.sample_id, "y");
}

TEST(Http, RetriesThenTransportError) {
  ttk::testing::MockServer server;
  server.set_mode(ttk::testing::MockServer::Mode::fail_500);
  auto cfg = config_for(server);
  cfg.retries = 2;
  be::ModelClient client(cfg, be::make_http_transport(cfg));
  EXPECT_THROW(client.fetch_logprobs("x", "s", "t"), ttk::TransportError);
  EXPECT_EQ(server.completions(), 3);
}

TEST(Http, MissingLogprobsIsCapabilityError) {
  ttk::testing::MockServer server;
  server.set_mode(ttk::testing::MockServer::Mode::no_logprobs);
  const auto cfg = config_for(server);
  be::ModelClient client(cfg, be::make_http_transport(cfg));
  EXPECT_THROW(client.fetch_logprobs("x", "s", "t"), ttk::CapabilityError);
}

TEST(Http, UnreachableEndpoint) {
  be::BackendConfig cfg;
  cfg.base_url = "http://127.0.0.1:1";
  cfg.model_id = "m";
  cfg.retries = 1;
  cfg.timeout = 500ms;
  cfg.backoff_initial = 1ms;
  be::ModelClient client(cfg, be::make_http_transport(cfg));
  EXPECT_THROW(client.fetch_logprobs("x", "s", "t"), ttk::TransportError);
}

TEST(Http, ChatGeneration) {
  ttk::testing::MockServer server;
  const auto cfg = config_for(server);
  be::ModelClient client(cfg, be::make_http_transport(cfg));
  const be::GenerationPrompt prompt{be::PromptKind::vanilla, "Translate: {source}"};
  EXPECT_EQ(client.generate_translation(prompt, "你好"), "Translate: 你好");
  EXPECT_EQ(server.chats(), 1);
}

TEST(Http, BatchOrderIndependentOfParallelism) {
  ttk::testing::MockServer server;
  std::vector<be::ScoringRequest> reqs;
  for (int i = 0; i < 24; ++i) {
    reqs.push_back({"s" + std::to_string(i), "source " + std::to_string(i), std::string(1 + i % 7, 'a' + i % 26)});
  }
  auto cfg = config_for(server);
  cfg.max_parallel = 1;
  be::ModelClient serial(cfg, be::make_http_transport(cfg));
  cfg.max_parallel = 8;
  be::ModelClient parallel(cfg, be::make_http_transport(cfg));
  const auto a = serial.fetch_batch(reqs);
  const auto b = parallel.fetch_batch(reqs);
  ASSERT_EQ(a.size(), reqs.size());
  EXPECT_EQ(a, b);
  for (std::size_t i = 0; i < reqs.size(); ++i) EXPECT_EQ(a[i].sample_id, reqs[i].sample_id);
}
