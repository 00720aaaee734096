#include "tough/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "tough/cache.hpp"
#include "tough/data.hpp"
#include "tough/embeddings.hpp"
#include "tough/errors.hpp"
#include "tough/http_provider.hpp"
#include "tough/lime.hpp"
#include "tough/metrics.hpp"
#include "tough/parallel.hpp"
#include "tough/perturb.hpp"
#include "tough/rng.hpp"
#include "tough/toymodel.hpp"

namespace tough {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path);
  out << content;
  out.close();
  if (!out) throw Error("write failed: " + path);
}

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Common {
  std::uint64_t seed = 0;
  std::size_t jobs = default_jobs();
};

struct ModelOptions {
  std::string url;
  std::string kind;
  std::string toy_snapshot;
  std::string embeddings;
  std::size_t max_vocab = 0;
  int timeout_ms = 30000;
  int retries = 2;
  std::string cache = ".tough_cache.jsonl";
  bool no_cache = false;
};

// Reproducibility record written next to the primary output.
class Manifest {
 public:
  Manifest(std::string command, const Common& common)
      : command_(std::move(command)), seed_(common.seed), started_(utc_now()) {}

  void input(const std::string& role, const std::string& path) {
    if (path.empty()) return;
    inputs_.push_back({role, path, sha256_hex(read_file(path))});
  }
  const std::string& digest_of(const std::string& path) const {
    for (const auto& i : inputs_)
      if (i.path == path) return i.sha256;
    throw PreconditionError("no digest recorded for " + path);
  }
  void output(const std::string& path) { outputs_.push_back(path); }
  void model(std::string model_id, long requests, long cache_hits) {
    model_id_ = std::move(model_id);
    requests_ = requests;
    cache_hits_ = cache_hits;
  }

  void write(const std::string& primary_output, const std::string& config) const {
    Json j;
    j["tool"] = "tough";
    j["version"] = kVersion;
    j["command"] = command_;
    j["seed"] = seed_;
    j["config"] = config;
    j["inputs"] = Json::array();
    for (const auto& i : inputs_)
      j["inputs"].push_back(Json{{"role", i.role}, {"path", i.path}, {"sha256", i.sha256}});
    j["outputs"] = outputs_;
    if (model_id_) {
      j["model_id"] = *model_id_;
      j["model_requests"] = requests_;
      j["cache_hits"] = cache_hits_;
    }
    j["started_at"] = started_;
    j["finished_at"] = utc_now();
    write_file(primary_output + ".manifest.json", j.dump(2) + "\n");
  }

 private:
  struct Input {
    std::string role, path, sha256;
  };
  std::string command_;
  std::uint64_t seed_;
  std::string started_;
  std::vector<Input> inputs_;
  std::vector<std::string> outputs_;
  std::optional<std::string> model_id_;
  long requests_ = 0;
  long cache_hits_ = 0;
};

EmbeddingTable load_table(const std::string& path, std::size_t max_vocab) {
  LoadOptions opts;
  if (max_vocab) opts.max_vocab = max_vocab;
  return EmbeddingTable::load_file(path, opts);
}

struct LoadedModel {
  std::unique_ptr<EmbeddingTable> table;
  std::unique_ptr<AnswerProvider> base;
  std::unique_ptr<QueryCache> cache;
  std::unique_ptr<CachedProvider> cached;

  const AnswerProvider& provider() const { return *cached; }
};

LoadedModel build_model(const ModelOptions& o, Manifest& manifest, std::ostream& err) {
  LoadedModel m;
  if (!o.url.empty()) {
    ModelEndpointConfig cfg;
    cfg.url = o.url;
    cfg.timeout_ms = o.timeout_ms;
    cfg.retries = o.retries;
    m.base = std::make_unique<HttpProvider>(cfg);
  } else if (o.kind == "echo") {
    m.base = std::make_unique<EchoStub>();
  } else if (o.kind == "toy") {
    if (o.embeddings.empty()) throw ConfigError("--model toy needs --embeddings");
    manifest.input("embeddings", o.embeddings);
    m.table = std::make_unique<EmbeddingTable>(load_table(o.embeddings, o.max_vocab));
    ToyModelParams params = ToyModelParams::identity(m.table->dimension());
    if (!o.toy_snapshot.empty()) {
      manifest.input("toy_model", o.toy_snapshot);
      std::ifstream in(o.toy_snapshot, std::ios::binary);
      if (!in) throw ConfigError("cannot open " + o.toy_snapshot);
      params = load_params(in);
      if (params.dimension() != m.table->dimension())
        throw ConfigError("toy model dimension " + std::to_string(params.dimension()) +
                          " does not match the embeddings (" +
                          std::to_string(m.table->dimension()) + ")");
    }
    // Distinct parameters or tables must never share cache entries.
    std::ostringstream snapshot;
    save_params(snapshot, params);
    auto id = "toy-" + sha256_hex(snapshot.str() + manifest.digest_of(o.embeddings)).substr(0, 12);
    m.base = std::make_unique<ToyModel>(std::move(params), *m.table, id);
  } else if (o.kind.empty()) {
    throw ConfigError("no model: pass --model-url (or TOUGH_MODEL_URL) or --model toy|echo");
  } else {
    throw ConfigError("unknown --model '" + o.kind + "' (expected toy or echo)");
  }

  if (o.no_cache) {
    m.cache = std::make_unique<QueryCache>();
  } else {
    m.cache = std::make_unique<QueryCache>(o.cache);
    if (m.cache->bypassed()) err << "warning: " << m.cache->warning() << "\n";
  }
  m.cached = std::make_unique<CachedProvider>(*m.base, *m.cache);
  return m;
}

void record_model(Manifest& manifest, const LoadedModel& m) {
  manifest.model(m.cached->model_id(), m.cached->provider_calls(), m.cached->cache_hits());
}

std::vector<QAExample> load_dataset(const std::string& path, Manifest& manifest,
                                    std::ostream& err) {
  manifest.input("dataset", path);
  auto load = load_squad_file(path);
  if (!load.offset_mismatches.empty())
    err << "warning: " << load.offset_mismatches.size()
        << " example(s) have answer_start offsets that do not match the context (first: "
        << load.offset_mismatches.front() << ")\n";
  return std::move(load.examples);
}

void write_skips(const std::string& path, const std::vector<SkipRecord>& skips) {
  std::ostringstream ss;
  for (const auto& s : skips) {
    Json j;
    j["id"] = s.id;
    j["mode"] = std::string(to_string(s.mode));
    j["reason"] = s.reason;
    ss << j.dump() << '\n';
  }
  write_file(path, ss.str());
}

PerMode read_skip_counts(const std::string& path) {
  std::istringstream in(read_file(path));
  PerMode counts{};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto j = Json::parse(line);
      ++counts[mode_slot(parse_mode(j.at("mode").get<std::string>()))];
    } catch (const Json::exception& e) {
      throw FormatError(path + ": malformed skip record: " + e.what(), line_no);
    }
  }
  return counts;
}

std::vector<PerturbedDatasetRecord> read_records(const std::string& path) {
  std::istringstream in(read_file(path));
  return read_perturbed(in);
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Global seed; stage seeds are derived from it")
      ->capture_default_str();
  sub->add_option("--jobs", c.jobs, "Worker threads / in-flight model requests")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

void add_model(CLI::App* sub, ModelOptions& m) {
  sub->add_option("--model-url", m.url, "Base URL of a model server")->envname("TOUGH_MODEL_URL");
  sub->add_option("--model", m.kind, "Built-in model when no URL is given: toy or echo");
  sub->add_option("--toy-model", m.toy_snapshot, "Toy model snapshot (default: identity)")
      ->check(CLI::ExistingFile);
  sub->add_option("--embeddings", m.embeddings, "GloVe-format embeddings")
      ->check(CLI::ExistingFile);
  sub->add_option("--max-vocab", m.max_vocab, "Keep only the first N embedding rows (0 = all)");
  sub->add_option("--timeout-ms", m.timeout_ms, "Per-request timeout")->capture_default_str();
  sub->add_option("--retries", m.retries, "Retries on transport errors and 5xx")
      ->capture_default_str();
  sub->add_option("--cache", m.cache, "Persistent answer cache")
      ->envname("TOUGH_CACHE")
      ->capture_default_str();
  sub->add_flag("--no-cache", m.no_cache, "Do not read or write the persistent cache");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robustness validation for extractive question answering", "tough"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common common;
  ModelOptions model;

  // explain
  struct {
    std::string data, out;
    std::size_t samples = 1000, limit = 0;
    double sigma = 0.25, lambda = 1.0;
    bool absolute = false;
  } ex;
  auto* explain = app.add_subcommand("explain", "LIME keyword explanations for every question");
  explain->add_option("--data", ex.data, "SQuAD v1.1 JSON")->required()->check(CLI::ExistingFile);
  explain->add_option("--out", ex.out, "Explanations (JSONL)")->required();
  explain->add_option("--samples", ex.samples, "Masks per question")->capture_default_str();
  explain->add_option("--sigma", ex.sigma, "Kernel width")->capture_default_str();
  explain->add_option("--lambda", ex.lambda, "Ridge penalty")->capture_default_str();
  explain->add_option("--limit", ex.limit, "Only the first N questions (0 = all)");
  explain->add_flag("--absolute", ex.absolute, "Rank tokens by |coefficient|");
  add_common(explain, common);
  add_model(explain, model);

  // perturb
  struct {
    std::string data, explanations, embeddings, lexicon, out, review_csv, skips;
    std::string random_policy = "literal";
    std::vector<std::string> modes;
    std::size_t max_vocab = 0;
  } pt;
  auto* perturb = app.add_subcommand("perturb", "Swap each question's keyword");
  perturb->add_option("--data", pt.data, "SQuAD v1.1 JSON")->required()->check(CLI::ExistingFile);
  perturb->add_option("--explanations", pt.explanations, "Output of explain")
      ->required()
      ->check(CLI::ExistingFile);
  perturb->add_option("--mode", pt.modes, "synonym, numeric and/or random (default: all)");
  perturb->add_option("--embeddings", pt.embeddings, "GloVe-format embeddings")
      ->check(CLI::ExistingFile);
  perturb->add_option("--max-vocab", pt.max_vocab, "Keep only the first N embedding rows");
  perturb->add_option("--lexicon", pt.lexicon, "Synonym lexicon (TSV)")->check(CLI::ExistingFile);
  perturb->add_option("--random-policy", pt.random_policy, "literal or sampled")
      ->capture_default_str()
      ->check(CLI::IsMember({"literal", "sampled"}));
  perturb->add_option("--out", pt.out, "Perturbed records (JSONL)")->required();
  perturb->add_option("--review-csv", pt.review_csv, "Also write a review sheet");
  perturb->add_option("--skips", pt.skips, "Write skip records (JSONL)");
  add_common(perturb, common);

  // review-import
  struct {
    std::string perturbed, review_csv, out;
  } ri;
  auto* review = app.add_subcommand("review-import", "Apply a reviewed CSV to perturbed records");
  review->add_option("--perturbed", ri.perturbed, "Perturbed records (JSONL)")
      ->required()
      ->check(CLI::ExistingFile);
  review->add_option("--review-csv", ri.review_csv, "Reviewed sheet")
      ->required()
      ->check(CLI::ExistingFile);
  review->add_option("--out", ri.out, "Annotated records (JSONL)")->required();
  add_common(review, common);

  // eval
  struct {
    std::string data, out, markdown, label, correctness = "em";
    std::vector<std::string> perturbed, skips;
  } ev;
  auto* eval = app.add_subcommand("eval", "Evaluate a model on original and perturbed questions");
  eval->add_option("--data", ev.data, "SQuAD v1.1 JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--perturbed", ev.perturbed, "Perturbed records (JSONL), repeatable")
      ->check(CLI::ExistingFile);
  eval->add_option("--skips", ev.skips, "Skip records from perturb, repeatable")
      ->check(CLI::ExistingFile);
  eval->add_option("--correctness", ev.correctness, "em or f1:<threshold>")
      ->capture_default_str();
  eval->add_option("--label", ev.label, "Architecture name in the report (default: model id)");
  eval->add_option("--out", ev.out, "Report (JSON)")->required();
  eval->add_option("--markdown", ev.markdown, "Also write a Markdown table");
  add_common(eval, common);
  add_model(eval, model);

  // augment-rem
  struct {
    std::string data, out;
    std::size_t copies = 2;
  } ar;
  auto* augment = app.add_subcommand("augment-rem", "Add copies with one random word removed");
  augment->add_option("--data", ar.data, "SQuAD v1.1 JSON")->required()->check(CLI::ExistingFile);
  augment->add_option("--copies", ar.copies, "Variants per question")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  augment->add_option("--out", ar.out, "Augmented SQuAD JSON")->required();
  add_common(augment, common);

  // train-toy
  struct {
    std::string data, embeddings, init, out;
    std::size_t max_vocab = 0;
    TrainConfig train;
    ToyModelConfig model;
  } tt;
  auto* train_toy = app.add_subcommand("train-toy", "Train the built-in toy span scorer");
  train_toy->add_option("--data", tt.data, "SQuAD v1.1 JSON")
      ->required()
      ->check(CLI::ExistingFile);
  train_toy->add_option("--embeddings", tt.embeddings, "GloVe-format embeddings")
      ->required()
      ->check(CLI::ExistingFile);
  train_toy->add_option("--max-vocab", tt.max_vocab, "Keep only the first N embedding rows");
  train_toy->add_option("--init", tt.init, "Start from this snapshot")->check(CLI::ExistingFile);
  train_toy->add_option("--grad-top-k", tt.train.grad_top_k,
                        "Fine-tune embeddings of the K most frequent words (0 = frozen)")
      ->capture_default_str();
  train_toy->add_option("--epochs", tt.train.epochs)->capture_default_str();
  train_toy->add_option("--lr-interaction", tt.train.learning_rate_interaction)
      ->capture_default_str();
  train_toy->add_option("--lr-embeddings", tt.train.learning_rate_embeddings)
      ->capture_default_str();
  train_toy->add_option("--max-span-len", tt.model.max_span_len)->capture_default_str();
  train_toy->add_option("--max-context-tokens", tt.model.max_context_tokens)
      ->capture_default_str();
  train_toy->add_option("--out", tt.out, "Snapshot")->required();
  add_common(train_toy, common);

  // report
  struct {
    std::string report, baseline, out;
  } rp;
  auto* report = app.add_subcommand("report", "Render a report as a Markdown table");
  report->add_option("--report", rp.report, "Report (JSON)")->required()->check(CLI::ExistingFile);
  report->add_option("--baseline", rp.baseline, "Baseline report for signed deltas")
      ->check(CLI::ExistingFile);
  report->add_option("--out", rp.out, "Markdown output (default: stdout)");
  add_common(report, common);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  // Effective options of the selected subcommand, defaults included.
  const std::string config = app.get_subcommands().front()->config_to_str(true, false);
  try {
    if (*explain) {
      Manifest manifest("explain", common);
      auto data = load_dataset(ex.data, manifest, err);
      if (ex.limit && ex.limit < data.size()) data.resize(ex.limit);
      auto m = build_model(model, manifest, err);
      LimeConfig cfg;
      cfg.n_samples = ex.samples;
      cfg.sigma = ex.sigma;
      cfg.lambda = ex.lambda;
      cfg.absolute_importance = ex.absolute;
      cfg.max_in_flight = common.jobs;
      std::vector<ExplanationRecord> records;
      for (const auto& example : data) {
        cfg.seed = derive_seed(common.seed, "explain", example.id);
        try {
          records.push_back({example.id, example.question,
                             explain_question(m.provider(), example, cfg)});
        } catch (const NotExplainableError& e) {
          err << "skip: " << e.what() << "\n";
        }
      }
      std::ostringstream ss;
      write_explanations(ss, records);
      write_file(ex.out, ss.str());
      manifest.output(ex.out);
      record_model(manifest, m);
      manifest.write(ex.out, config);
      out << "explained " << records.size() << " of " << data.size() << " questions\n";
    } else if (*perturb) {
      Manifest manifest("perturb", common);
      auto data = load_dataset(pt.data, manifest, err);
      manifest.input("explanations", pt.explanations);
      std::map<std::string, ExplanationRecord> explanations;
      {
        std::istringstream in(read_file(pt.explanations));
        for (auto& r : read_explanations(in)) explanations.emplace(r.id, std::move(r));
      }
      std::vector<Mode> modes;
      if (pt.modes.empty()) {
        modes.assign(std::begin(kAllModes), std::end(kAllModes));
      } else {
        for (const auto& s : pt.modes) modes.push_back(parse_mode(s));
        std::sort(modes.begin(), modes.end(),
                  [](Mode a, Mode b) { return mode_slot(a) < mode_slot(b); });
        modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
      }
      const auto policy = pt.random_policy == "sampled" ? RandomPolicy::sampled
                                                         : RandomPolicy::literal;
      const bool needs_table =
          std::any_of(modes.begin(), modes.end(),
                      [&](Mode md) {
                        return md != Mode::random || policy == RandomPolicy::sampled;
                      });
      std::unique_ptr<EmbeddingTable> table;
      if (needs_table) {
        if (pt.embeddings.empty())
          throw ConfigError("--embeddings is required for the selected modes");
        manifest.input("embeddings", pt.embeddings);
        table = std::make_unique<EmbeddingTable>(load_table(pt.embeddings, pt.max_vocab));
      }
      std::optional<SynonymLexicon> lexicon;
      if (std::find(modes.begin(), modes.end(), Mode::synonym) != modes.end()) {
        if (pt.lexicon.empty()) throw ConfigError("--mode synonym needs --lexicon");
        manifest.input("lexicon", pt.lexicon);
        std::istringstream in(read_file(pt.lexicon));
        lexicon = SynonymLexicon::load(in);
      }

      std::vector<PerturbedExample> produced;
      std::vector<SkipRecord> skips;
      for (const auto& example : data) {
        auto it = explanations.find(example.id);
        for (Mode md : modes) {
          if (it == explanations.end()) {
            skips.push_back({example.id, md, "no explanation"});
            continue;
          }
          if (it->second.question != example.question)
            throw ValidationError("explanation for '" + example.id +
                                  "' was computed for a different question");
          const auto k = it->second.explanation.keyword_index;
          Generated g = md == Mode::numeric   ? gen_numeric(example, k, *table)
                        : md == Mode::synonym ? gen_synonym(example, k, *lexicon, *table)
                                              : gen_random(example, k, policy, table.get(),
                                                           derive_seed(common.seed, "perturb-random",
                                                                       example.id));
          if (auto* p = std::get_if<PerturbedExample>(&g)) produced.push_back(std::move(*p));
          else skips.push_back(std::get<SkipRecord>(g));
        }
      }
      std::vector<PerturbedDatasetRecord> records;
      for (const auto& p : produced) records.push_back(to_record(p));
      std::ostringstream ss;
      write_perturbed(ss, records);
      write_file(pt.out, ss.str());
      manifest.output(pt.out);
      if (!pt.review_csv.empty()) {
        std::ostringstream rs;
        export_review(produced, rs);
        write_file(pt.review_csv, rs.str());
        manifest.output(pt.review_csv);
      }
      if (!pt.skips.empty()) {
        write_skips(pt.skips, skips);
        manifest.output(pt.skips);
      }
      manifest.write(pt.out, config);
      out << "perturbed " << records.size() << " question(s), skipped " << skips.size() << "\n";
    } else if (*review) {
      Manifest manifest("review-import", common);
      manifest.input("perturbed", ri.perturbed);
      manifest.input("review", ri.review_csv);
      std::vector<PerturbedExample> originals;
      for (const auto& r : read_records(ri.perturbed)) originals.push_back(from_record(r));
      std::istringstream in(read_file(ri.review_csv));
      auto reviewed = import_review(in, originals);
      std::vector<PerturbedDatasetRecord> records;
      for (const auto& p : reviewed) records.push_back(to_record(p));
      std::ostringstream ss;
      write_perturbed(ss, records);
      write_file(ri.out, ss.str());
      manifest.output(ri.out);
      manifest.write(ri.out, config);
      out << "imported review for " << records.size() << " record(s)\n";
    } else if (*eval) {
      Manifest manifest("eval", common);
      const auto correctness = Correctness::parse(ev.correctness);
      auto data = load_dataset(ev.data, manifest, err);
      std::vector<PerturbedDatasetRecord> records;
      for (const auto& path : ev.perturbed) {
        manifest.input("perturbed", path);
        auto part = read_records(path);
        records.insert(records.end(), part.begin(), part.end());
      }
      PerMode generation_skips{};
      for (const auto& path : ev.skips) {
        manifest.input("skips", path);
        auto c = read_skip_counts(path);
        for (std::size_t k = 0; k < 3; ++k) generation_skips[k] += c[k];
      }
      auto m = build_model(model, manifest, err);
      const auto& provider = m.provider();

      std::vector<AnsweredOriginal> originals(data.size());
      parallel_for(data.size(), common.jobs, [&](std::size_t i) {
        originals[i] = {data[i], provider.answer(data[i].context, data[i].question)};
      });
      std::vector<AnsweredPerturbed> perturbed(records.size());
      parallel_for(records.size(), common.jobs, [&](std::size_t i) {
        auto p = from_record(records[i]);
        auto a = provider.answer(p.base.context, p.perturbed_question);
        perturbed[i] = {std::move(p), std::move(a)};
      });

      auto rep = evaluate(ev.label.empty() ? provider.model_id() : ev.label, originals,
                          perturbed, correctness, generation_skips);
      std::ostringstream js;
      write_report_json(js, rep);
      write_file(ev.out, js.str());
      manifest.output(ev.out);
      if (!ev.markdown.empty()) {
        std::ostringstream md;
        write_report_markdown(md, rep);
        write_file(ev.markdown, md.str());
        manifest.output(ev.markdown);
      }
      record_model(manifest, m);
      manifest.write(ev.out, config);
      out << "evaluated " << rep.counts.total << " question(s) with " << rep.model_id << "\n";
    } else if (*augment) {
      Manifest manifest("augment-rem", common);
      auto data = load_dataset(ar.data, manifest, err);
      auto augmented = augment_rem(data, ar.copies, common.seed);
      std::ostringstream ss;
      write_squad(ss, augmented);
      write_file(ar.out, ss.str());
      manifest.output(ar.out);
      manifest.write(ar.out, config);
      out << "wrote " << augmented.size() << " example(s)\n";
    } else if (*train_toy) {
      Manifest manifest("train-toy", common);
      auto data = load_dataset(tt.data, manifest, err);
      manifest.input("embeddings", tt.embeddings);
      auto table = load_table(tt.embeddings, tt.max_vocab);
      ToyModelParams params = ToyModelParams::identity(table.dimension(), tt.model);
      if (!tt.init.empty()) {
        manifest.input("init", tt.init);
        std::istringstream in(read_file(tt.init));
        params = load_params(in);
        if (params.dimension() != table.dimension())
          throw ConfigError("--init snapshot dimension does not match the embeddings");
      }
      tt.train.seed = derive_seed(common.seed, "train-toy", "");
      auto result = train(std::move(params), table, data, tt.train);
      for (std::size_t e = 0; e < result.epoch_mean_loss.size(); ++e) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "epoch %zu mean loss %.6f\n", e + 1,
                      result.epoch_mean_loss[e]);
        out << buf;
      }
      if (result.skipped_examples)
        err << "note: " << result.skipped_examples
            << " example(s) per epoch have no gold span in the context window\n";
      std::ostringstream ss;
      save_params(ss, result.params);
      write_file(tt.out, ss.str());
      manifest.output(tt.out);
      manifest.write(tt.out, config);
    } else if (*report) {
      std::istringstream rin(read_file(rp.report));
      auto rep = read_report_json(rin);
      std::optional<EvalReport> base;
      if (!rp.baseline.empty()) {
        std::istringstream bin(read_file(rp.baseline));
        base = read_report_json(bin);
      }
      std::ostringstream md;
      write_report_markdown(md, rep, base ? &*base : nullptr);
      if (rp.out.empty()) {
        out << md.str();
      } else {
        Manifest manifest("report", common);
        manifest.input("report", rp.report);
        manifest.input("baseline", rp.baseline);
        write_file(rp.out, md.str());
        manifest.output(rp.out);
        manifest.write(rp.out, config);
      }
    }
  } catch (const ProviderError& e) {
    err << "error: model request failed: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace tough
