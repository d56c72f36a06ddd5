#include "ttk/cli/app.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <functional>
#include <map>

#include "ttk/backend.hpp"
#include "ttk/cli/commands.hpp"
#include "ttk/corpus.hpp"
#include "ttk/error.hpp"
#include "ttk/fixture.hpp"
#include "ttk/labels.hpp"
#include "ttk/scoring.hpp"
#include "ttk/text.hpp"

namespace ttk::cli {
namespace {

using corpus::Triplet;

struct Io {
  std::ostream& out;
  std::ostream& err;
};

void emit(const Io& io, const std::string& out_path, const std::string& bytes) {
  if (out_path.empty() || out_path == "-") {
    io.out << bytes;
  } else {
    text::write_file(out_path, bytes);
  }
}

std::string triplet_line(const Triplet& t) {
  ordered_json j;
  j["source_id"] = t.source.id;
  j["genre"] = t.source.genre;
  j["author"] = t.low.author;
  j["low_id"] = t.low.id;
  j["high_id"] = t.high.id;
  return j.dump() + "\n";
}

std::string triplet_lines(const std::vector<Triplet>& ts) {
  std::string out;
  for (const auto& t : ts) out += triplet_line(t);
  return out;
}

corpus::TripletBuild triplets_with_warnings(const corpus::Dataset& ds, const Io& io) {
  auto build = corpus::build_triplets(ds);
  for (const auto& o : build.orphans) {
    io.err << "warning: orphan group source=" << o.source_id << " author=" << o.author << ": " << o.reason << "\n";
  }
  return build;
}

struct Selection {
  std::string strategy;
  std::size_t k = 1;
  std::vector<std::string> domains;
  std::uint64_t seed = 0;
};

void add_selection_flags(CLI::App* sub, Selection& sel) {
  sub->add_option("--strategy", sel.strategy, "unpaired | single_domain | mixed_domain");
  sub->add_option("--k", sel.k, "number of training pairs");
  sub->add_option("--domain", sel.domains, "genre:author (repeatable)");
  sub->add_option("--seed", sel.seed, "sampling seed");
}

std::vector<corpus::TrainingPair> select_pairs(const std::vector<Triplet>& triplets, const Selection& sel) {
  if (sel.strategy.empty()) {
    std::vector<corpus::TrainingPair> all;
    for (const auto& t : triplets) all.push_back({t.source, t.low.text, t.source, t.high.text});
    return all;
  }
  corpus::MixStrategy s;
  s.kind = corpus::parse_mix_kind(sel.strategy);
  s.k = sel.k;
  s.seed = sel.seed;
  for (const auto& d : sel.domains) s.domains.push_back(corpus::parse_domain_key(d));
  return corpus::select_training_pairs(triplets, s);
}

backend::BackendConfig backend_config(const std::string& base_url, const std::string& model_id, std::size_t parallel,
                                      std::size_t retries, long timeout_ms, const std::string& template_path) {
  backend::BackendConfig c;
  c.base_url = base_url;
  c.model_id = model_id;
  c.max_parallel = parallel;
  c.retries = retries;
  c.timeout = std::chrono::milliseconds(timeout_ms);
  if (const char* key = std::getenv(backend::kApiKeyEnv)) c.api_key = key;
  if (!template_path.empty()) c.scoring_template = text::read_file(template_path);
  c.validate();
  return c;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const Io io{out, err};
  CLI::App app{"Translationese measurement and evaluation toolkit", "ttk"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  std::function<void()> action;
  auto on = [&action](CLI::App* sub, std::function<void()> fn) {
    sub->callback([&action, fn = std::move(fn)] { action = fn; });
  };

  std::string out_path;

  // fixture
  fixture::FixtureSpec fx;
  auto* fixture_cmd = app.add_subcommand("fixture", "write a synthetic two-model dump pair with labels");
  fixture_cmd->add_option("--seed", fx.seed);
  fixture_cmd->add_option("--n", fx.n_samples, "number of samples");
  fixture_cmd->add_option("--gap", fx.gap, "planted per-token logprob gap (>= 0)");
  fixture_cmd->add_option("--n-train", fx.n_train, "leading samples marked split=train");
  fixture_cmd->add_option("--out", out_path, "output directory")->required();
  on(fixture_cmd, [&] {
    const auto f = fixture::make_fixture(fx);
    std::error_code ec;
    std::filesystem::create_directories(out_path, ec);
    if (ec) throw IoError("cannot create " + out_path + ": " + ec.message());
    backend::write_dump(f.low_model, std::filesystem::path(out_path) / "low.jsonl");
    backend::write_dump(f.high_model, std::filesystem::path(out_path) / "high.jsonl");
    text::write_file(std::filesystem::path(out_path) / "labels.jsonl", labels::serialize_labels(f.labels));
  });

  // dataset
  std::string dataset_path;
  auto* dataset_cmd = app.add_subcommand("dataset", "dataset validation, triplets, splits and SFT export");
  dataset_cmd->require_subcommand(1);

  auto* ds_validate = dataset_cmd->add_subcommand("validate", "check a dataset JSONL file");
  ds_validate->add_option("--dataset", dataset_path)->required();
  on(ds_validate, [&] {
    const auto ds = corpus::load_dataset(dataset_path);
    const auto build = triplets_with_warnings(ds, io);
    io.out << "sources " << ds.sources().size() << "\ntranslations " << ds.translations().size() << "\ntriplets "
           << build.triplets.size() << "\norphans " << build.orphans.size() << "\n";
  });

  auto* ds_triplets = dataset_cmd->add_subcommand("triplets", "list complete low/high triplets");
  ds_triplets->add_option("--dataset", dataset_path)->required();
  ds_triplets->add_option("--out", out_path);
  on(ds_triplets, [&] {
    const auto build = triplets_with_warnings(corpus::load_dataset(dataset_path), io);
    emit(io, out_path, triplet_lines(build.triplets));
  });

  corpus::SplitSpec split_spec;
  auto* ds_split = dataset_cmd->add_subcommand("split", "seeded per-domain train/valid/test split");
  ds_split->add_option("--dataset", dataset_path)->required();
  ds_split->add_option("--train-n", split_spec.train_n);
  ds_split->add_option("--valid-n", split_spec.valid_n);
  ds_split->add_option("--test-n", split_spec.test_n);
  ds_split->add_option("--seed", split_spec.seed);
  ds_split->add_option("--out", out_path, "output directory")->required();
  on(ds_split, [&] {
    const auto build = triplets_with_warnings(corpus::load_dataset(dataset_path), io);
    const auto s = corpus::split(build.triplets, split_spec);
    std::error_code ec;
    std::filesystem::create_directories(out_path, ec);
    if (ec) throw IoError("cannot create " + out_path + ": " + ec.message());
    const std::filesystem::path dir(out_path);
    text::write_file(dir / "train.jsonl", triplet_lines(s.train));
    text::write_file(dir / "valid.jsonl", triplet_lines(s.valid));
    text::write_file(dir / "test.jsonl", triplet_lines(s.test));
  });

  Selection selection;
  auto* ds_select = dataset_cmd->add_subcommand("select", "choose training pairs by mixing strategy");
  ds_select->add_option("--dataset", dataset_path)->required();
  add_selection_flags(ds_select, selection);
  ds_select->add_option("--out", out_path);
  on(ds_select, [&] {
    const auto build = triplets_with_warnings(corpus::load_dataset(dataset_path), io);
    std::string bytes;
    for (const auto& p : select_pairs(build.triplets, selection)) {
      ordered_json j;
      j["low_source_id"] = p.low_source.id;
      j["low_text"] = p.low_text;
      j["high_source_id"] = p.high_source.id;
      j["high_text"] = p.high_text;
      bytes += j.dump() + "\n";
    }
    emit(io, out_path, bytes);
  });

  std::string side = "low";
  std::string template_path;
  auto* ds_export = dataset_cmd->add_subcommand("export-sft", "write prompt/completion JSONL for one side");
  ds_export->add_option("--dataset", dataset_path)->required();
  ds_export->add_option("--side", side, "low | high");
  ds_export->add_option("--template", template_path, "prompt template file containing {source}");
  add_selection_flags(ds_export, selection);
  ds_export->add_option("--out", out_path);
  on(ds_export, [&] {
    if (side != "low" && side != "high") throw ValidationError("--side must be low or high");
    const auto build = triplets_with_warnings(corpus::load_dataset(dataset_path), io);
    const auto pairs = select_pairs(build.triplets, selection);
    const std::string tmpl = template_path.empty() ? std::string(corpus::default_sft_template())
                                                   : text::read_file(template_path);
    emit(io, out_path, corpus::render_sft(pairs, side == "low" ? corpus::Side::low : corpus::Side::high, tmpl));
  });

  // dump validate
  std::string dump_path;
  auto* dump_cmd = app.add_subcommand("dump", "score-dump utilities");
  dump_cmd->require_subcommand(1);
  auto* dump_validate = dump_cmd->add_subcommand("validate", "check every record of a dump");
  dump_validate->add_option("--dump", dump_path)->required();
  on(dump_validate, [&] {
    const auto records = backend::read_dump(dump_path);
    io.out << "records " << records.size() << "\n";
  });

  // score
  std::string method_name, normalization = "per_token", dump_low, dump_high;
  auto* score_cmd = app.add_subcommand("score", "compute per-sample scores into ScoreRecord JSONL");
  score_cmd->add_option("--method", method_name, "tindex | loglik | entropy | fdg | tv")->required();
  score_cmd->add_option("--dump", dump_path, "dump for single-model methods");
  score_cmd->add_option("--dump-low", dump_low, "low-translationese model dump (tindex)");
  score_cmd->add_option("--dump-high", dump_high, "high-translationese model dump (tindex)");
  score_cmd->add_option("--normalization", normalization, "per_token | sum (tindex)");
  score_cmd->add_option("--out", out_path);
  on(score_cmd, [&] {
    const auto m = scoring::parse_method(method_name);
    const auto norm = scoring::parse_normalization(normalization);
    std::vector<scoring::ScoreRecord> records;
    std::size_t skipped = 0;
    if (m == scoring::Method::md || m == scoring::Method::rmd) {
      throw ValidationError("md and rmd need a fitted training distribution; use eval-binary with split labels");
    }
    if (m == scoring::Method::tindex) {
      if (dump_low.empty() || dump_high.empty()) throw ValidationError("tindex needs --dump-low and --dump-high");
      const auto low = backend::read_dump(dump_low);
      const auto high = backend::read_dump(dump_high);
      std::map<std::string, const backend::TokenScores*, std::less<>> by_id;
      for (const auto& h : high) by_id.emplace(h.sample_id, &h);
      for (const auto& l : low) {
        const auto it = by_id.find(l.sample_id);
        if (it == by_id.end()) throw ValidationError("high-model dump has no sample \"" + l.sample_id + "\"");
        records.push_back(
            {l.sample_id, m, {l.model_id, it->second->model_id}, scoring::tindex(l, *it->second, norm), norm});
      }
    } else {
      if (dump_path.empty()) throw ValidationError(method_name + " needs --dump");
      for (const auto& ts : backend::read_dump(dump_path)) {
        double v = 0.0;
        try {
          switch (m) {
            case scoring::Method::loglik: v = scoring::log_likelihood(ts); break;
            case scoring::Method::entropy: v = scoring::entropy_score(ts); break;
            case scoring::Method::fdg: v = scoring::fast_detect_gpt(ts); break;
            case scoring::Method::tv:
              if (!ts.layer_embeddings) {
                throw CapabilityError("tv needs layer_embeddings, absent for sample \"" + ts.sample_id + "\"");
              }
              v = scoring::trajectory_volatility(*ts.layer_embeddings);
              break;
            default: break;
          }
        } catch (const UndefinedScoreError& e) {
          io.err << "warning: skipped: " << e.what() << "\n";
          ++skipped;
          continue;
        }
        records.push_back({ts.sample_id, m, {ts.model_id}, v, scoring::Normalization::per_token});
      }
    }
    if (skipped) io.err << "warning: " << skipped << " undefined scores skipped\n";
    emit(io, out_path, scoring::serialize_scores(records));
  });

  // fetch / generate
  std::string base_url, model_id, condition_filter, cache_dir, scoring_template_path, prompt_kind = "vanilla",
                                                                                    author = "model";
  std::size_t max_parallel = 1, retries = 2;
  long timeout_ms = 30000;
  auto add_backend_flags = [&](CLI::App* sub) {
    sub->add_option("--base-url", base_url, "endpoint base URL")->required();
    sub->add_option("--model-id", model_id)->required();
    sub->add_option("--max-parallel", max_parallel);
    sub->add_option("--retries", retries);
    sub->add_option("--timeout-ms", timeout_ms);
  };
  auto* fetch_cmd = app.add_subcommand("fetch", "fetch token logprobs for dataset translations over HTTP");
  add_backend_flags(fetch_cmd);
  fetch_cmd->add_option("--dataset", dataset_path)->required();
  fetch_cmd->add_option("--condition", condition_filter, "only translations with this condition");
  fetch_cmd->add_option("--cache-dir", cache_dir);
  fetch_cmd->add_option("--scoring-template", scoring_template_path);
  fetch_cmd->add_option("--out", out_path);
  on(fetch_cmd, [&] {
    const auto cfg = backend_config(base_url, model_id, max_parallel, retries, timeout_ms, scoring_template_path);
    const auto ds = corpus::load_dataset(dataset_path);
    std::vector<backend::ScoringRequest> requests;
    for (const auto& t : ds.translations()) {
      if (!condition_filter.empty() && corpus::to_string(t.condition) != condition_filter) continue;
      requests.push_back({t.id, ds.source(t.source_id).text, t.text});
    }
    auto cache = cache_dir.empty() ? std::make_shared<backend::ResponseCache>()
                                   : std::make_shared<backend::ResponseCache>(cache_dir);
    backend::ModelClient client(cfg, backend::make_http_transport(cfg), cache);
    emit(io, out_path, backend::serialize_dump(client.fetch_batch(requests)));
  });

  auto* generate_cmd = app.add_subcommand("generate", "translate every source with a bundled prompt over HTTP");
  add_backend_flags(generate_cmd);
  generate_cmd->add_option("--dataset", dataset_path)->required();
  generate_cmd->add_option("--prompt", prompt_kind, "low_translationese | high_translationese | vanilla");
  generate_cmd->add_option("--author", author, "author tag for generated translations");
  generate_cmd->add_option("--out", out_path);
  on(generate_cmd, [&] {
    const auto cfg = backend_config(base_url, model_id, max_parallel, retries, timeout_ms, "");
    const auto kind = backend::parse_prompt_kind(prompt_kind);
    const auto cond = kind == backend::PromptKind::low_translationese    ? corpus::Condition::low
                      : kind == backend::PromptKind::high_translationese ? corpus::Condition::high
                                                                         : corpus::Condition::wild;
    const auto ds = corpus::load_dataset(dataset_path);
    backend::ModelClient client(cfg, backend::make_http_transport(cfg));
    const auto prompt = backend::bundled_prompt(kind);
    auto translations = ds.translations();
    for (const auto& s : ds.sources()) {
      translations.push_back({s.id + "." + author + "." + std::string(corpus::to_string(cond)), s.id, author, cond,
                              client.generate_translation(prompt, s.text)});
    }
    emit(io, out_path, corpus::serialize_dataset(corpus::Dataset(ds.sources(), std::move(translations))));
  });

  // reports
  std::string format = "json";
  auto emit_report = [&](const EvalReport& r) { emit(io, out_path, serialize_report(r)); };

  BinaryEvalOptions bin;
  std::vector<std::string> methods;
  auto* eval_binary = app.add_subcommand("eval-binary", "accuracy / AUROC per method, model and domain");
  eval_binary->add_option("--dump-low", bin.dump_low, "low-model dump (repeat once per seed)")->required();
  eval_binary->add_option("--dump-high", bin.dump_high, "high-model dump (repeat once per seed)")->required();
  eval_binary->add_option("--labels", bin.labels)->required();
  eval_binary->add_option("--method", methods, "method (repeatable; default all)");
  eval_binary->add_option("--normalization", bin.normalization);
  eval_binary->add_option("--out", out_path);
  on(eval_binary, [&] {
    bin.methods = methods;
    emit_report(cmd_eval_binary(bin));
  });

  PairwiseEvalOptions pw;
  std::string pw_dataset;
  auto* eval_pairwise = app.add_subcommand("eval-pairwise", "agreement with pairwise human majority votes");
  eval_pairwise->add_option("--scores", pw.scores)->required();
  eval_pairwise->add_option("--manifest", pw.manifest)->required();
  eval_pairwise->add_option("--votes", pw.votes)->required();
  eval_pairwise->add_option("--raters", pw.raters, "votes per pair (odd)");
  eval_pairwise->add_option("--dataset", pw_dataset, "enables the disagreement table");
  eval_pairwise->add_option("--out", out_path);
  on(eval_pairwise, [&] {
    if (!pw_dataset.empty()) pw.dataset = pw_dataset;
    emit_report(cmd_eval_pairwise(pw));
  });

  PointwiseEvalOptions pt;
  auto* eval_pointwise = app.add_subcommand("eval-pointwise", "Pearson between scores and mean ratings");
  eval_pointwise->add_option("--scores", pt.scores)->required();
  eval_pointwise->add_option("--ratings", pt.ratings)->required();
  eval_pointwise->add_option("--out", out_path);
  on(eval_pointwise, [&] { emit_report(cmd_eval_pointwise(pt)); });

  QeCorrelateOptions qe;
  auto* qe_correlate = app.add_subcommand("qe-correlate", "Pearson between T-index and QE metrics");
  qe_correlate->add_option("--scores", qe.tindex_scores, "ScoreRecord JSONL with tindex scores")->required();
  qe_correlate->add_option("--qe", qe.qe_scores, "QE score JSONL (repeatable)")->required();
  qe_correlate->add_option("--out", out_path);
  on(qe_correlate, [&] { emit_report(cmd_qe_correlate(qe)); });

  std::string bleu_input;
  auto* qe_bleu_cmd = app.add_subcommand("qe-bleu", "character-level sentence BLEU as QE score records");
  qe_bleu_cmd->add_option("--input", bleu_input, "JSONL with hypothesis/reference pairs")->required();
  qe_bleu_cmd->add_option("--out", out_path);
  on(qe_bleu_cmd, [&] { emit(io, out_path, serialize_qe_scores(qe_bleu(text::read_file(bleu_input)))); });

  CorpusStatsOptions cs;
  std::string low_texts, high_texts, lexicon_dir;
  auto* corpus_stats = app.add_subcommand("corpus-stats", "linguistic features of low vs high translations");
  corpus_stats->add_option("--dataset", dataset_path);
  corpus_stats->add_option("--low-texts", low_texts, "one text per line");
  corpus_stats->add_option("--high-texts", high_texts, "one text per line");
  corpus_stats->add_option("--lexicon", lexicon_dir, "directory with the four lexicon files");
  corpus_stats->add_option("--tokenize", cs.tokenize, "character | whitespace | pretokenized");
  corpus_stats->add_option("--out", out_path);
  on(corpus_stats, [&] {
    if (!dataset_path.empty()) cs.dataset = dataset_path;
    if (!low_texts.empty()) cs.low_texts = low_texts;
    if (!high_texts.empty()) cs.high_texts = high_texts;
    if (!lexicon_dir.empty()) cs.lexicon_dir = lexicon_dir;
    emit_report(cmd_corpus_stats(cs));
  });

  ShiftsOptions sh;
  std::string manifest_path;
  auto* shifts_cmd = app.add_subcommand("shifts", "MLL grid and shift decomposition");
  shifts_cmd->require_subcommand(1);
  auto* shifts_grid = shifts_cmd->add_subcommand("grid", "compute MLL cells from dumps listed in a manifest CSV");
  shifts_grid->add_option("--manifest", manifest_path)->required();
  shifts_grid->add_option("--out", out_path);
  on(shifts_grid, [&] { emit(io, out_path, build_grid_csv(manifest_path)); });
  auto* shifts_analyze = shifts_cmd->add_subcommand("analyze", "shift regression and cancellation test");
  shifts_analyze->add_option("--grid", sh.grid)->required();
  shifts_analyze->add_flag("--exclude-reference", sh.exclude_reference, "drop data == model observations");
  shifts_analyze->add_option("--out", out_path);
  on(shifts_analyze, [&] { emit_report(cmd_shifts(sh)); });

  std::string report_path;
  auto* report_cmd = app.add_subcommand("report", "render a report as json, csv or svg");
  report_cmd->add_option("--report", report_path)->required();
  report_cmd->add_option("--format", format, "json | csv | svg");
  report_cmd->add_option("--out", out_path, "file (json/csv) or directory (svg)");
  on(report_cmd, [&] {
    const auto report = read_report(report_path);
    switch (parse_report_format(format)) {
      case ReportFormat::json: emit(io, out_path, serialize_report(report)); break;
      case ReportFormat::csv: emit(io, out_path, report_csv(report)); break;
      case ReportFormat::svg:
        if (out_path.empty()) throw ValidationError("svg output needs --out DIR");
        for (const auto& name : report_svg(report, out_path)) io.out << name << "\n";
        break;
    }
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }
  try {
    if (action) action();
    return kOk;
  } catch (const CapabilityError& e) {
    err << "capability error: " << e.what() << "\n";
    return kCapability;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace ttk::cli
