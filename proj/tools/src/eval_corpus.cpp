#include <cmath>

#include "ttk/backend.hpp"
#include "ttk/cli/commands.hpp"
#include "ttk/corpus.hpp"
#include "ttk/error.hpp"
#include "ttk/features.hpp"
#include "ttk/shifts.hpp"
#include "ttk/text.hpp"

namespace ttk::cli {
namespace {

std::vector<std::string> read_text_lines(const Path& path) {
  const std::string bytes = text::read_file(path);
  std::vector<std::string> out;
  for (auto line : text::split_lines(bytes)) {
    if (!line.empty()) out.emplace_back(line);
  }
  return out;
}

ordered_json regression_json(const stats::RegressionReport& r) {
  ordered_json terms = ordered_json::array();
  const std::size_t offset = r.names.size() - r.vif.size();  // intercept has no VIF
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    ordered_json t;
    t["name"] = r.names[i];
    t["coefficient"] = number(r.coefficients[i]);
    t["std_error"] = number(r.std_errors[i]);
    t["t_value"] = number(r.t_values[i]);
    t["p_value"] = number(r.p_values[i]);
    t["vif"] = i >= offset ? number(r.vif[i - offset]) : ordered_json(nullptr);
    terms.push_back(t);
  }
  return {{"terms", terms}, {"r_squared", number(r.r_squared)}, {"n", r.n}, {"df_residual", r.df_residual}};
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

EvalReport cmd_corpus_stats(const CorpusStatsOptions& opt) {
  ConfigHash hash("corpus-stats");
  std::vector<std::string> low, high;
  if (opt.dataset) {
    if (opt.low_texts || opt.high_texts) throw ValidationError("give either --dataset or --low-texts/--high-texts");
    hash.file("dataset", *opt.dataset);
    const auto ds = corpus::load_dataset(*opt.dataset);
    for (const auto& t : ds.translations()) {
      if (t.condition == corpus::Condition::low) low.push_back(t.text);
      if (t.condition == corpus::Condition::high) high.push_back(t.text);
    }
  } else {
    if (!opt.low_texts || !opt.high_texts) throw ValidationError("give --dataset or both --low-texts and --high-texts");
    hash.file("low-texts", *opt.low_texts).file("high-texts", *opt.high_texts);
    low = read_text_lines(*opt.low_texts);
    high = read_text_lines(*opt.high_texts);
  }
  features::Lexicons lex;
  if (opt.lexicon_dir) {
    hash.flag("lexicon", opt.lexicon_dir->string());
    lex = features::load_lexicons(*opt.lexicon_dir);
  } else {
    lex = features::default_lexicons();
  }
  hash.flag("lexicon-hash", lex.hash);
  hash.flag("tokenize", opt.tokenize);
  const auto mode = features::parse_tokenize_mode(opt.tokenize);
  const auto cmp = features::corpus_compare(low, high, lex, mode);

  ordered_json rows = ordered_json::array();
  for (const auto& r : cmp.rows) {
    rows.push_back({{"feature", r.name},
                    {"low", number(r.low)},
                    {"high", number(r.high)},
                    {"t", number(r.t)},
                    {"p_value", number(r.p_value)},
                    {"expected", features::to_string(r.expected)},
                    {"observed", features::to_string(r.observed)},
                    {"agrees", r.agrees}});
  }
  ordered_json overlap = ordered_json::array();
  for (const auto& w : lex.pronoun_overlap()) overlap.push_back(w);
  EvalReport report;
  report.kind = ReportKind::corpus_stats;
  report.payload = {{"n_low", cmp.n_low},
                    {"n_high", cmp.n_high},
                    {"tokenize", opt.tokenize},
                    {"lexicon_hash", cmp.lexicon_hash},
                    {"pronoun_function_word_overlap", overlap},
                    {"rows", rows}};
  report.config_hash = hash.hex();
  return report;
}

EvalReport cmd_shifts(const ShiftsOptions& opt) {
  ConfigHash hash("shifts");
  hash.file("grid", opt.grid).flag("exclude-reference", opt.exclude_reference);
  const auto grid = shifts::read_grid_csv(opt.grid);
  const auto obs = shifts::compute_all_shifts(grid);
  const auto reg = shifts::shift_regression(obs, opt.exclude_reference);

  ordered_json observations = ordered_json::array();
  for (const auto& o : obs) {
    observations.push_back({{"model", shifts::to_string(o.model)},
                            {"data", shifts::to_string(o.data)},
                            {"o_shift", number(o.o_shift)},
                            {"g_shift", number(o.g_shift)},
                            {"a_shift", number(o.a_shift)},
                            {"t_shift", number(o.t_shift)}});
  }
  ordered_json payload;
  payload["n_observations"] = obs.size();
  payload["exclude_reference"] = opt.exclude_reference;
  payload["regression"] = regression_json(reg);

  // Only meaningful when the grid holds both low and high models.
  bool has_low = false, has_high = false;
  for (const auto& k : grid.model_keys()) {
    has_low |= k.condition == corpus::Condition::low;
    has_high |= k.condition == corpus::Condition::high;
  }
  if (has_low && has_high) {
    ordered_json cancel = ordered_json::array();
    for (const auto& c : shifts::cancellation_test(obs)) {
      cancel.push_back({{"component", c.component},
                        {"n", c.n},
                        {"mean_difference", number(c.mean_difference)},
                        {"perfectly_canceled", c.perfectly_canceled},
                        {"t", number(c.test.t)},
                        {"df", number(c.test.df)},
                        {"p", number(c.test.p)}});
    }
    payload["cancellation"] = cancel;
  } else {
    payload["cancellation"] = nullptr;
  }
  payload["observations"] = observations;

  EvalReport report;
  report.kind = ReportKind::shift_report;
  report.payload = payload;
  report.config_hash = hash.hex();
  return report;
}

std::string build_grid_csv(const Path& manifest) {
  const std::string bytes = text::read_file(manifest);
  const auto lines = text::split_lines(bytes);
  constexpr std::string_view kHeader = "model_genre,model_author,model_cond,data_genre,data_author,data_cond,dump";
  if (lines.empty() || lines.front() != kHeader) {
    throw ValidationError(manifest.string() + ": header must be \"" + std::string(kHeader) + "\"");
  }
  shifts::MllGrid grid;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split_commas(lines[i]);
    const auto where = manifest.string() + ": line " + std::to_string(i + 1) + ": ";
    if (f.size() != 7) throw ValidationError(where + "expected 7 columns");
    Path dump(f[6]);
    if (dump.is_relative()) dump = manifest.parent_path() / dump;
    try {
      shifts::MllCell cell;
      cell.model = {std::string(f[0]), std::string(f[1]), corpus::parse_condition(f[2])};
      cell.data = {std::string(f[3]), std::string(f[4]), corpus::parse_condition(f[5])};
      cell.mll = shifts::mll(backend::read_dump(dump));
      grid.add(cell);
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
  }
  return shifts::to_csv(grid);
}

}  // namespace ttk::cli
