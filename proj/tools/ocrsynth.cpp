// ocrsynth: learn OCR confusions, synthesize training corpora, evaluate correctors.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ocrsynth/confusion.hpp"
#include "ocrsynth/corrector.hpp"
#include "ocrsynth/dataset.hpp"
#include "ocrsynth/errorgen.hpp"
#include "ocrsynth/metrics.hpp"
#include "ocrsynth/text.hpp"

namespace fs = std::filesystem;
using namespace ocrsynth;

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string format = "jsonl";
  std::string out;
  std::string config;
  unsigned jobs = 1;
};

// Everything a subcommand reports back for the run manifest.
struct RunRecord {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

void add_global_options(CLI::App* sub, GlobalOptions& g, bool uses_seed) {
  if (uses_seed) sub->add_option("--seed", g.seed, "Random seed")->capture_default_str();
  sub->add_option("--format", g.format, "Corpus format: plain-dir, jsonl or tsv")
      ->capture_default_str();
  sub->add_option("--out", g.out, "Output directory (nothing is written outside it)")
      ->required();
  sub->add_option("--config", g.config, "key=value config file; command-line flags win");
  sub->add_option("--jobs", g.jobs, "Worker threads; output is identical for every value")
      ->capture_default_str()
      ->check(CLI::Range(1u, 1024u));
}

std::string corpus_ext(CorpusFormat f) {
  switch (f) {
    case CorpusFormat::Jsonl: return ".jsonl";
    case CorpusFormat::Tsv: return ".tsv";
    case CorpusFormat::PlainDir: return "";
  }
  return "";
}

std::string option_key(const CLI::Option* opt) { return opt->get_lnames().empty() ? "" : opt->get_lnames()[0]; }

bool is_flag(const CLI::Option* opt) { return opt->get_type_size() == 0; }

// Resolved value of every option of `sub`, defaults included.
std::map<std::string, std::string> resolved_parameters(const CLI::App* sub) {
  std::map<std::string, std::string> params;
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string key = option_key(opt);
    if (key.empty() || key == "help" || key == "config") continue;
    if (is_flag(opt)) {
      params[key] = opt->count() > 0 ? "true" : "false";
    } else if (opt->count() > 0) {
      params[key] = opt->as<std::string>();
    } else if (!opt->get_default_str().empty()) {
      params[key] = opt->get_default_str();
    }
  }
  return params;
}

void write_manifest(const CLI::App* sub, const GlobalOptions& g, const RunRecord& run,
                    const std::string& started_at) {
  const auto params = resolved_parameters(sub);
  nlohmann::ordered_json m;
  m["subcommand"] = sub->get_name();
  m["tool_version"] = kToolVersion;
  m["parameters"] = params;
  if (params.count("seed")) m["seed"] = g.seed;
  m["inputs"] = run.inputs;
  m["outputs"] = run.outputs;
  m["started_at"] = started_at;
  m["finished_at"] = utc_now();
  write_file(fs::path(g.out) / "manifest.json", m.dump(2) + "\n");

  // Same parameters as a config file: `ocrsynth <cmd> --config run.conf`
  // reproduces this run.
  std::string conf = "# " + sub->get_name() + " run, replay with --config\n";
  for (const auto& [k, v] : params) conf += k + " = " + v + "\n";
  write_file(fs::path(g.out) / "run.conf", conf);
}

// --- config file ----------------------------------------------------------

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Flat `key = value` lines; `#` starts a comment, `[section]` lines are
// ignored, values may be double-quoted. Returns (key, value) in file order.
std::vector<std::pair<std::string, std::string>> read_config(const fs::path& path) {
  std::vector<std::pair<std::string, std::string>> out;
  const std::string bytes = read_file_utf8(path);
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= bytes.size()) {
    auto eol = bytes.find('\n', start);
    if (eol == std::string::npos) eol = bytes.size();
    std::string line = trim(bytes.substr(start, eol - start));
    start = eol + 1;
    ++line_no;
    if (line.empty() || line[0] == '#' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    for (auto& c : key)
      if (c == '_') c = '-';
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

// Rewrites argv so that config values come before the command-line flags of
// the same subcommand; with TakeLast the command line then wins.
std::vector<std::string> expand_config(CLI::App& app, const std::vector<std::string>& args) {
  std::size_t sub_pos = 0;
  CLI::App* sub = nullptr;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (!args[i].empty() && args[i][0] == '-') break;
    sub = app.get_subcommand_no_throw(args[i]);
    sub_pos = i;
    break;
  }
  if (!sub) return args;
  std::string config;
  for (std::size_t i = sub_pos + 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config = args[i].substr(9);
  }
  if (config.empty()) return args;

  std::vector<std::string> out(args.begin(), args.begin() + static_cast<long>(sub_pos) + 1);
  for (const auto& [key, value] : read_config(config)) {
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt || key == "config" || key == "help")
      throw InputError("config key '" + key + "' is not an option of '" + sub->get_name() + "'");
    if (is_flag(opt)) {
      if (value == "true") out.push_back("--" + key);
      else if (value != "false")
        throw InputError("config key '" + key + "' expects true or false");
    } else {
      out.push_back("--" + key);
      out.push_back(value);
    }
  }
  out.insert(out.end(), args.begin() + static_cast<long>(sub_pos) + 1, args.end());
  return out;
}

// --- subcommands ----------------------------------------------------------

struct LearnArgs {
  std::string in;
  double fraction = 0.7;
  std::size_t top = 10;
  bool nfc = false;
};

void run_learn(const LearnArgs& a, const GlobalOptions& g, RunRecord& run) {
  const auto pairs = ingest_corpus(a.in, parse_corpus_format(g.format), a.nfc);
  LearnOptions opts;
  opts.learn_fraction = a.fraction;
  opts.seed = g.seed;
  opts.jobs = g.jobs;
  const auto result = learn_confusions(pairs, opts);
  if (result.skipped_empty)
    std::cerr << "learn: skipped " << result.skipped_empty << " pair(s) with an empty side\n";
  std::cerr << "learn: aligned " << result.pairs_used << " of " << pairs.size() << " pairs, "
            << result.table.total_substitutions() << " substitutions\n";
  const fs::path table_path = fs::path(g.out) / "confusions.tsv";
  save_table(result.table, table_path);
  run.inputs.push_back(a.in);
  run.outputs.push_back(table_path.string());

  std::cout << "Character\tFix\tFrequency\n";
  for (const auto& e : top_k(result.table, a.top))
    std::cout << encode_utf8(e.source) << '\t' << encode_utf8(e.target) << '\t' << e.count
              << '\n';
}

struct InjectArgs {
  std::string in;
  std::string table;
  std::string alphabet;
  bool nfc = false;
  InjectionConfig cfg;
};

void run_inject(InjectArgs a, const GlobalOptions& g, RunRecord& run) {
  const CorpusFormat fmt = parse_corpus_format(g.format);
  const auto docs = ingest_documents(a.in, fmt, a.nfc);
  if (docs.empty()) throw InputError("inject: input corpus is empty");
  ConfusionTable table;
  if (!a.table.empty()) {
    table = load_table(a.table);
    run.inputs.push_back(a.table);
  }
  a.cfg.seed = g.seed;
  if (!a.alphabet.empty()) {
    const auto chars = decode_utf8(a.alphabet);
    a.cfg.alphabet.assign(chars.begin(), chars.end());
    std::sort(a.cfg.alphabet.begin(), a.cfg.alphabet.end());
    a.cfg.alphabet.erase(std::unique(a.cfg.alphabet.begin(), a.cfg.alphabet.end()),
                         a.cfg.alphabet.end());
  }
  const auto ds = generate_dataset(docs, a.cfg, table, g.jobs);

  const fs::path out(g.out);
  std::vector<Document> corrupted;
  std::string log;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    corrupted.push_back({ds.pairs[d].ocred, docs[d].id});
    log += format_log_jsonl(ds.logs[d], docs[d].id);
  }
  const fs::path corrupted_path = out / ("corrupted" + corpus_ext(fmt));
  const fs::path pairs_path = out / ("pairs" + corpus_ext(fmt));
  write_documents(corrupted, corrupted_path, fmt);
  write_corpus(ds.pairs, pairs_path, fmt);
  write_file(out / "errors.jsonl", log);
  run.inputs.push_back(a.in);
  run.outputs = {corrupted_path.string(), pairs_path.string(), (out / "errors.jsonl").string()};

  std::cerr << "inject: " << docs.size() << " documents, " << ds.stats.clean_chars
            << " characters; deletions " << ds.stats.deletions << ", insertions "
            << ds.stats.insertions << ", swaps " << ds.stats.swaps << ", confusions "
            << ds.stats.confusions << '\n';
}

struct SplitArgs {
  std::string in;
  double fraction = 0.8;
  std::string to = "jsonl";
};

LinePairDataset load_split(const SplitArgs& a, const GlobalOptions& g) {
  const auto pairs = ingest_corpus(a.in, parse_corpus_format(g.format));
  auto ds = build_line_pairs(pairs);
  for (const auto& r : ds.rejections)
    std::cerr << "rejected document '" << r.doc_id << "': " << r.ocred_lines << " vs "
              << r.golden_lines << " lines\n";
  return split(std::move(ds), a.fraction, g.seed);
}

void run_split(const SplitArgs& a, const GlobalOptions& g, RunRecord& run) {
  const auto ds = load_split(a, g);
  std::map<std::string, SplitTag> tag;
  for (const auto& r : ds.records) tag[r.doc_id] = r.split;
  std::string out = "doc_id\tsplit\n";
  std::size_t train = 0;
  const auto docs = ds.documents();
  for (const auto& id : docs) {
    out += escape_field(id) + "\t" + std::string(split_tag_name(tag[id])) + "\n";
    train += tag[id] == SplitTag::Train;
  }
  const fs::path path = fs::path(g.out) / "split.tsv";
  write_file(path, out);
  run.inputs.push_back(a.in);
  run.outputs.push_back(path.string());
  std::cerr << "split: " << train << " train / " << docs.size() - train
            << " validation documents (" << ds.count(SplitTag::Train) << " / "
            << ds.count(SplitTag::Validation) << " lines)\n";
}

void run_export(const SplitArgs& a, const GlobalOptions& g, RunRecord& run) {
  const auto ds = load_split(a, g);
  const auto written = export_dataset(ds, parse_export_format(a.to), g.out);
  run.inputs.push_back(a.in);
  for (const auto& p : written) run.outputs.push_back(p.string());
  std::cerr << "export: " << ds.count(SplitTag::Train) << " train / "
            << ds.count(SplitTag::Validation) << " validation lines\n";
}

struct EvalArgs {
  std::string golden, ocred, fixed;
  std::string name = "corrector";
};

void run_eval(const EvalArgs& a, const GlobalOptions& g, RunRecord& run) {
  const CorpusFormat fmt = parse_corpus_format(g.format);
  const auto golden = ingest_documents(a.golden, fmt);
  const auto ocred = ingest_documents(a.ocred, fmt);
  const auto fixed = ingest_documents(a.fixed, fmt);
  if (golden.size() != ocred.size() || golden.size() != fixed.size())
    throw InputError("eval: golden, ocred and fixed corpora differ in document count");
  std::vector<EvalTriple> triples;
  for (std::size_t i = 0; i < golden.size(); ++i) {
    if (golden[i].id != ocred[i].id || golden[i].id != fixed[i].id)
      throw InputError("eval: document " + std::to_string(i) + " has mismatched ids ('" +
                       golden[i].id + "', '" + ocred[i].id + "', '" + fixed[i].id + "')");
    triples.push_back({golden[i].text, ocred[i].text, fixed[i].text, golden[i].id});
  }
  const auto summary = evaluate_corrector(triples, DelimiterSet(), g.jobs);
  for (const auto& id : summary.skipped_ids)
    std::cerr << "eval: skipped document '" << id << "' (no words)\n";
  const auto rows = summary_rows(summary, a.name);
  const fs::path out(g.out);
  write_file(out / "report.txt", render_table(rows));
  write_file(out / "report.json", render_json(rows));
  run.inputs = {a.golden, a.ocred, a.fixed};
  run.outputs = {(out / "report.txt").string(), (out / "report.json").string()};
  std::cout << render_table(rows);
}

struct LmArgs {
  std::string in;
  int order = 4;
  double k = CharLM::kDefaultK;
};

void run_lm_train(const LmArgs& a, const GlobalOptions& g, RunRecord& run) {
  const auto docs = ingest_documents(a.in, parse_corpus_format(g.format));
  std::vector<Text> texts;
  for (const auto& d : docs) texts.push_back(d.text);
  const auto lm = CharLM::train(texts, a.order, a.k);
  const fs::path path = fs::path(g.out) / "lm.tsv";
  lm.save(path);
  run.inputs.push_back(a.in);
  run.outputs.push_back(path.string());
  std::cerr << "lm-train: order " << a.order << ", alphabet " << lm.alphabet().size() << '\n';
}

struct CorrectArgs {
  std::string in, lm, table;
  std::size_t beam = kDefaultBeamWidth;
};

void run_correct(const CorrectArgs& a, const GlobalOptions& g, RunRecord& run) {
  const CorpusFormat fmt = parse_corpus_format(g.format);
  const auto docs = ingest_documents(a.in, fmt);
  const auto lm = CharLM::load(a.lm);
  const ChannelModel channel(load_table(a.table));
  const auto fixed = correct_documents(docs, lm, channel, a.beam, g.jobs);
  const fs::path path = fs::path(g.out) / ("fixed" + corpus_ext(fmt));
  write_documents(fixed, path, fmt);
  run.inputs = {a.in, a.lm, a.table};
  run.outputs.push_back(path.string());
}

int run(int argc, char** argv) {
  CLI::App app{"Learn OCR confusions, synthesize corrupted training corpora, evaluate correctors",
               "ocrsynth"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", kToolVersion);

  GlobalOptions g;

  LearnArgs learn;
  auto* learn_cmd = app.add_subcommand("learn", "Parallel corpus -> confusion table TSV");
  learn_cmd->add_option("--in", learn.in, "Parallel corpus")->required();
  learn_cmd->add_option("--fraction", learn.fraction, "Share of pairs to learn from")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  learn_cmd->add_option("--top", learn.top, "Rows printed to stdout")->capture_default_str();
  learn_cmd->add_flag("--nfc", learn.nfc, "Apply NFC normalization on input");
  add_global_options(learn_cmd, g, true);

  InjectArgs inject;
  auto* inject_cmd = app.add_subcommand("inject", "Clean corpus -> corrupted corpus + error log");
  inject_cmd->add_option("--in", inject.in, "Clean corpus (documents)")->required();
  inject_cmd->add_option("--table", inject.table, "Confusion table TSV");
  inject_cmd->add_option("--p-delete", inject.cfg.p_delete)->capture_default_str();
  inject_cmd->add_option("--p-insert", inject.cfg.p_insert)->capture_default_str();
  inject_cmd->add_option("--p-swap", inject.cfg.p_swap)->capture_default_str();
  inject_cmd->add_option("--p-confusion", inject.cfg.p_confusion)->capture_default_str();
  inject_cmd->add_option("--alphabet", inject.alphabet,
                         "Characters for random insertion (default: observed in corpus)");
  inject_cmd->add_flag("--nfc", inject.nfc, "Apply NFC normalization on input");
  add_global_options(inject_cmd, g, true);

  SplitArgs split_args;
  auto* split_cmd = app.add_subcommand("split", "Document-level train/validation assignment");
  split_cmd->add_option("--in", split_args.in, "Parallel corpus")->required();
  split_cmd->add_option("--fraction", split_args.fraction, "Train share of documents")
      ->capture_default_str();
  add_global_options(split_cmd, g, true);

  SplitArgs export_args;
  auto* export_cmd = app.add_subcommand("export", "Split line pairs and write trainer files");
  export_cmd->add_option("--in", export_args.in, "Parallel corpus")->required();
  export_cmd->add_option("--fraction", export_args.fraction, "Train share of documents")
      ->capture_default_str();
  export_cmd->add_option("--to", export_args.to, "jsonl, parallel-txt or tsv")
      ->capture_default_str();
  add_global_options(export_cmd, g, true);

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Golden + ocred + fixed -> accuracy report");
  eval_cmd->add_option("--golden", eval.golden)->required();
  eval_cmd->add_option("--ocred", eval.ocred)->required();
  eval_cmd->add_option("--fixed", eval.fixed)->required();
  eval_cmd->add_option("--name", eval.name, "Row label for the corrector")->capture_default_str();
  add_global_options(eval_cmd, g, false);

  LmArgs lm;
  auto* lm_cmd = app.add_subcommand("lm-train", "Clean corpus -> character n-gram LM");
  lm_cmd->add_option("--in", lm.in, "Clean corpus (documents)")->required();
  lm_cmd->add_option("--order", lm.order)->capture_default_str();
  lm_cmd->add_option("--k", lm.k, "Add-k smoothing constant")->capture_default_str();
  add_global_options(lm_cmd, g, false);

  CorrectArgs correct;
  auto* correct_cmd = app.add_subcommand("correct", "Noisy-channel correction of a corpus");
  correct_cmd->add_option("--in", correct.in, "OCRed corpus (documents)")->required();
  correct_cmd->add_option("--lm", correct.lm, "LM TSV from lm-train")->required();
  correct_cmd->add_option("--table", correct.table, "Confusion table TSV")->required();
  correct_cmd->add_option("--beam", correct.beam)->capture_default_str();
  add_global_options(correct_cmd, g, false);

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = expand_config(app, args);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::vector<char*> cargs;
  for (auto& s : args) cargs.push_back(s.data());

  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  const std::string started_at = utc_now();
  CLI::App* sub = app.get_subcommands().front();
  RunRecord record;
  try {
    {
      std::error_code ec;
      fs::create_directories(g.out, ec);
      if (!fs::is_directory(g.out)) throw InputError("cannot create output directory " + g.out);
    }
    if (sub == learn_cmd) run_learn(learn, g, record);
    else if (sub == inject_cmd) run_inject(inject, g, record);
    else if (sub == split_cmd) run_split(split_args, g, record);
    else if (sub == export_cmd) run_export(export_args, g, record);
    else if (sub == eval_cmd) run_eval(eval, g, record);
    else if (sub == lm_cmd) run_lm_train(lm, g, record);
    else if (sub == correct_cmd) run_correct(correct, g, record);
    write_manifest(sub, g, record, started_at);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
