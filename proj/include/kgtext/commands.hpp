#pragma once

// Command implementations behind the CLI.  Each cmd_* takes a plain args
// struct, performs the work, writes artifacts plus a manifest, and returns
// the process exit code (0 on success).  Failures are signalled with the
// exception types from common.hpp, which the CLI maps to exit codes.

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <iostream>

#include "kgtext/data.hpp"
#include "kgtext/decode.hpp"
#include "kgtext/manifest.hpp"
#include "kgtext/pos.hpp"
#include "kgtext/supervision.hpp"
#include "kgtext/synth.hpp"
#include "kgtext/train.hpp"
#include "kgtext/vocab.hpp"

namespace kgtext {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// convert: external dataset dumps -> canonical jsonl

struct ConvertArgs {
  std::string input;
  std::string format;  // webnlg | dart | jsonl
  std::string output;
};

inline int cmd_convert(const ConvertArgs& a, std::ostream& out = std::cout) {
  ParseResult res = parse_dataset(a.input, dataset_format_from_name(a.format));
  for (const RecordError& e : res.errors)
    out << "skipped " << e.where << ": " << e.message << "\n";
  write_jsonl(res.examples, a.output);

  RunManifest m;
  m.command = "convert";
  m.add_input("dataset", a.input);
  m.params["format"] = a.format;
  m.params["examples"] = std::to_string(res.examples.size());
  m.params["skipped"] = std::to_string(res.errors.size());
  m.outputs["dataset"] = a.output;
  m.save(a.output + ".manifest.json");

  out << "wrote " << res.examples.size() << " examples to " << a.output << " ("
      << res.errors.size() << " skipped)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// preprocess: canonical jsonl -> vocab + supervision sidecar + stats

struct PreprocessArgs {
  std::string input;
  std::string format = "jsonl";
  std::string output_dir;
  int n_slots = 8;
  std::string tagger = "lexicon";
  int min_count = 1;
  int max_vocab = 0;  // 0 = unbounded
  std::string oversize = "reject";
};

inline OversizePolicy oversize_policy_from_name(const std::string& name) {
  if (name == "reject") return OversizePolicy::kReject;
  if (name == "truncate") return OversizePolicy::kTruncate;
  throw UsageError("unknown oversize policy: " + name + " (expected reject|truncate)");
}

inline int cmd_preprocess(const PreprocessArgs& a, std::ostream& out = std::cout) {
  if (a.n_slots < 1) throw UsageError("--n-slots must be >= 1");
  OversizePolicy policy = oversize_policy_from_name(a.oversize);
  ParseResult res = parse_dataset(a.input, dataset_format_from_name(a.format));
  for (const RecordError& e : res.errors)
    out << "skipped " << e.where << ": " << e.message << "\n";

  std::vector<Example> kept;
  int oversize_dropped = 0;
  for (Example& ex : res.examples) {
    try {
      kept.push_back(apply_oversize_policy(std::move(ex), a.n_slots, policy));
    } catch (const DataError& e) {
      ++oversize_dropped;
      out << "dropped oversize graph: " << e.what() << "\n";
    }
  }
  if (kept.empty()) throw DataError("no usable examples in " + a.input);

  fs::create_directories(a.output_dir);

  // vocabulary over reference tokens plus linearized input tokens
  std::vector<std::vector<std::string>> corpus;
  for (const Example& ex : kept) {
    corpus.push_back(tokenize_lower(ex.reference));
    std::vector<std::string> graph_tokens;
    for (const Triplet& t : ex.graph.triplets) {
      for (const std::string& field : {t.head, t.relation, t.tail})
        for (const std::string& tok : tokenize_lower(field)) graph_tokens.push_back(tok);
    }
    corpus.push_back(std::move(graph_tokens));
  }
  Vocabulary vocab = build_vocab(corpus, a.min_count, a.max_vocab);

  SupervisionSet sup;
  sup.n_slots = a.n_slots;
  for (const Example& ex : kept) sup.records.push_back(extract_supervision(ex, a.n_slots, a.tagger));

  std::string data_path = (fs::path(a.output_dir) / "data.jsonl").string();
  std::string vocab_path = (fs::path(a.output_dir) / "vocab.txt").string();
  std::string sup_path = (fs::path(a.output_dir) / "supervision.jsonl").string();
  std::string stats_path = (fs::path(a.output_dir) / "stats.json").string();
  write_jsonl(kept, data_path);
  vocab.save(vocab_path);
  save_supervision(sup, sup_path);

  SupervisionStats stats = summarize_supervision(sup);
  nlohmann::json sj;
  sj["examples"] = kept.size();
  sj["skipped_parse"] = res.errors.size();
  sj["dropped_oversize"] = oversize_dropped;
  sj["vocab_size"] = vocab.size();
  sj["copy_rate"] = stats.copy_rate;
  for (auto& [size, count] : stats.size_histogram)
    sj["size_histogram"][std::to_string(size)] = count;
  sj["tag_counts"] = stats.tag_counts;
  {
    std::ofstream sout(stats_path);
    if (!sout) throw DataError("cannot write " + stats_path);
    sout << sj.dump(2) << "\n";
  }

  RunManifest m;
  m.command = "preprocess";
  m.add_input("dataset", a.input);
  m.params["format"] = a.format;
  m.params["n_slots"] = std::to_string(a.n_slots);
  m.params["tagger"] = a.tagger;
  m.params["min_count"] = std::to_string(a.min_count);
  m.params["max_vocab"] = std::to_string(a.max_vocab);
  m.params["oversize"] = a.oversize;
  m.outputs["data"] = data_path;
  m.outputs["vocab"] = vocab_path;
  m.outputs["supervision"] = sup_path;
  m.outputs["stats"] = stats_path;
  m.save((fs::path(a.output_dir) / "manifest.json").string());

  out << "preprocessed " << kept.size() << " examples; vocab " << vocab.size()
      << " tokens; copy rate " << stats.copy_rate << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// synth: built-in corpus generators -> jsonl

struct SynthArgs {
  std::string kind;         // sorting | fixture | ablation
  std::string output;       // jsonl path (training half for kind=ablation)
  std::string eval_output;  // ablation eval half; default <output stem>_eval.jsonl
  int n = 0;                // examples (0 = kind default)
  int n_eval = 60;          // ablation only
  int n_planted = 160;      // ablation only: size of the shared entity pool
  int n_slots = 8;          // sorting only
  long long seed = -1;      // < 0 = kind default
};

inline int cmd_synth(const SynthArgs& a, std::ostream& out = std::cout) {
  RunManifest m;
  m.command = "synth";
  m.params["kind"] = a.kind;

  if (a.kind == "sorting") {
    SortingCorpusConfig cfg;
    cfg.n_slots = a.n_slots;
    if (a.n > 0) cfg.n_graphs = a.n;
    if (a.seed >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed);
    std::vector<Example> corpus = make_sorting_corpus(cfg);
    write_jsonl(corpus, a.output);
    m.params["n"] = std::to_string(corpus.size());
    m.params["n_slots"] = std::to_string(cfg.n_slots);
    m.params["seed"] = std::to_string(cfg.seed);
    m.outputs["dataset"] = a.output;
    out << "wrote " << corpus.size() << " sorting examples to " << a.output << "\n";
  } else if (a.kind == "fixture") {
    FixtureCorpusConfig cfg;
    if (a.n > 0) cfg.n_examples = a.n;
    if (a.seed >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed);
    std::vector<Example> corpus = make_generation_fixture(cfg);
    write_jsonl(corpus, a.output);
    m.params["n"] = std::to_string(corpus.size());
    m.params["seed"] = std::to_string(cfg.seed);
    m.outputs["dataset"] = a.output;
    out << "wrote " << corpus.size() << " fixture examples to " << a.output << "\n";
  } else if (a.kind == "ablation") {
    AblationCorpusConfig cfg;
    if (a.n > 0) cfg.n_train = a.n;
    cfg.n_eval = a.n_eval;
    cfg.n_planted = a.n_planted;
    if (a.seed >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed);
    SplitCorpus sc = make_ablation_corpus(cfg);
    std::string eval_path = a.eval_output;
    if (eval_path.empty()) {
      fs::path p(a.output);
      eval_path = (p.parent_path() / (p.stem().string() + "_eval" + p.extension().string()))
                      .string();
    }
    write_jsonl(sc.train, a.output);
    write_jsonl(sc.eval, eval_path);
    m.params["n_train"] = std::to_string(sc.train.size());
    m.params["n_eval"] = std::to_string(sc.eval.size());
    m.params["n_planted"] = std::to_string(cfg.n_planted);
    m.params["seed"] = std::to_string(cfg.seed);
    m.outputs["train"] = a.output;
    m.outputs["eval"] = eval_path;
    out << "wrote " << sc.train.size() << " train + " << sc.eval.size()
        << " eval ablation examples to " << a.output << " / " << eval_path << "\n";
  } else {
    throw UsageError("unknown synth kind: " + a.kind + " (expected sorting|fixture|ablation)");
  }
  m.save(a.output + ".manifest.json");
  return 0;
}

// ---------------------------------------------------------------------------
// train: preprocessed directory + config -> run directory

// Three-section config {"model":…,"train":…,"sorter":…}; every section and
// every key is optional and falls back to the compiled defaults.
struct PipelineConfig {
  ModelConfig model;
  TrainConfig train;
  SorterConfig sorter;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["model"] = model.to_json();
    j["train"] = train.to_json();
    j["sorter"] = sorter.to_json();
    return j;
  }

  static PipelineConfig from_json(const nlohmann::json& j) {
    PipelineConfig c;
    if (j.contains("model")) c.model = ModelConfig::from_json(j.at("model"));
    if (j.contains("train")) c.train = TrainConfig::from_json(j.at("train"));
    if (j.contains("sorter")) c.sorter = SorterConfig::from_json(j.at("sorter"));
    return c;
  }

  static PipelineConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read config: " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DataError("malformed config " + path + ": " + e.what());
    }
    return from_json(j);
  }
};

struct TrainCmdArgs {
  std::string data_dir;  // cmd_preprocess output (data.jsonl, vocab.txt, supervision.jsonl)
  std::string config;    // optional config JSON path
  std::string run_dir;   // default <run root>/runs/run-seed<seed>

  // flag overrides on top of the config file; sentinel = keep config value
  int epochs = -1;
  int batch_size = -1;
  double lr = -1.0;
  long long seed = -1;
  int d_model = -1;
  int rel_window = -1;
  int window = -1;
  bool no_cp = false;
  bool no_pos = false;
  bool no_sc = false;
  bool no_fusion = false;
  std::string order_mode;  // empty = keep
  std::string pos_scope;   // empty = keep
};

// Loads the config file (when given) and applies the flag overrides.
inline PipelineConfig resolve_train_config(const TrainCmdArgs& a) {
  PipelineConfig cfg;
  if (!a.config.empty()) cfg = PipelineConfig::load(a.config);
  if (a.epochs > 0) cfg.train.epochs = a.epochs;
  if (a.batch_size > 0) cfg.train.batch_size = a.batch_size;
  if (a.lr > 0) cfg.train.lr = a.lr;
  if (a.seed >= 0) cfg.train.seed = static_cast<std::uint64_t>(a.seed);
  if (a.d_model > 0) cfg.model.d_model = a.d_model;
  if (a.rel_window > 0) cfg.model.rel_window = a.rel_window;
  if (a.window > 0) cfg.model.window = a.window;
  if (a.no_cp) cfg.train.no_cp = true;
  if (a.no_pos) cfg.train.no_pos = true;
  if (a.no_sc) cfg.train.no_sc = true;
  if (a.no_fusion) cfg.train.no_fusion = true;
  if (!a.order_mode.empty()) cfg.train.order_mode = a.order_mode;
  if (!a.pos_scope.empty()) cfg.train.pos_scope = a.pos_scope;
  return cfg;
}

// Loads the three artifacts a training or evaluation run needs.
struct LoadedData {
  std::vector<Example> examples;
  Vocabulary vocab;
  SupervisionSet sup;
};

inline LoadedData load_preprocessed(const std::string& dir) {
  LoadedData d;
  ParseResult res = parse_dataset((fs::path(dir) / "data.jsonl").string(), DatasetFormat::kJsonl);
  if (!res.errors.empty())
    throw DataError("preprocessed data has malformed records in " + dir);
  d.examples = std::move(res.examples);
  d.vocab = Vocabulary::load((fs::path(dir) / "vocab.txt").string());
  d.sup = load_supervision((fs::path(dir) / "supervision.jsonl").string());
  return d;
}

inline int cmd_train(const TrainCmdArgs& a, std::ostream& out = std::cout) {
  PipelineConfig cfg = resolve_train_config(a);
  cfg.train.validate();
  LoadedData data = load_preprocessed(a.data_dir);
  if (data.sup.n_slots != cfg.sorter.n_slots) {
    // keep the sorter consistent with how the data was preprocessed
    cfg.sorter.n_slots = data.sup.n_slots;
  }

  std::string run_dir = a.run_dir;
  if (run_dir.empty())
    run_dir = (fs::path(run_root()) / "runs" /
               ("run-seed" + std::to_string(cfg.train.seed)))
                  .string();
  fs::create_directories(run_dir);

  auto pipe = make_pipeline(cfg.model, cfg.train, cfg.sorter, data.vocab);
  std::vector<TrainSample> samples = prepare_samples(data.examples, data.sup, pipe->vocab);

  std::string log_path = (fs::path(run_dir) / "train_log.jsonl").string();
  std::ofstream log(log_path);
  if (!log) throw DataError("cannot write " + log_path);
  TrainResult result = train(*pipe, samples, &log);
  log.close();

  std::string ckpt_path = (fs::path(run_dir) / "checkpoint.bin").string();
  save_checkpoint(ckpt_path, *pipe);

  // resolved config snapshot; feeding it back via --config reproduces the run
  std::string cfg_path = (fs::path(run_dir) / "config.json").string();
  {
    std::ofstream cout_(cfg_path);
    if (!cout_) throw DataError("cannot write " + cfg_path);
    cout_ << cfg.to_json().dump(2) << "\n";
  }

  const EpochStats& last = result.epochs.back();
  nlohmann::json rj;
  rj["epochs"] = result.epochs.size();
  rj["steps"] = result.steps.size();
  rj["n_examples"] = samples.size();
  rj["vocab_size"] = pipe->vocab.size();
  rj["final"] = last.mean.to_json();
  rj["final_order_acc"] = last.order_acc;
  std::string result_path = (fs::path(run_dir) / "result.json").string();
  {
    std::ofstream rout(result_path);
    if (!rout) throw DataError("cannot write " + result_path);
    rout << rj.dump(2) << "\n";
  }

  RunManifest m;
  m.command = "train";
  m.add_input("data", (fs::path(a.data_dir) / "data.jsonl").string());
  m.add_input("vocab", (fs::path(a.data_dir) / "vocab.txt").string());
  m.add_input("supervision", (fs::path(a.data_dir) / "supervision.jsonl").string());
  if (!a.config.empty()) m.add_input("config", a.config);
  m.params["seed"] = std::to_string(cfg.train.seed);
  m.params["epochs"] = std::to_string(cfg.train.epochs);
  m.params["batch_size"] = std::to_string(cfg.train.batch_size);
  m.outputs["checkpoint"] = ckpt_path;
  m.outputs["config"] = cfg_path;
  m.outputs["train_log"] = log_path;
  m.outputs["result"] = result_path;
  m.save((fs::path(run_dir) / "manifest.json").string());

  out << "trained " << samples.size() << " examples for " << result.epochs.size()
      << " epochs; final l_total " << last.mean.l_total << ", order acc " << last.order_acc
      << "; checkpoint " << ckpt_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// generate: checkpoint + graphs -> hypotheses jsonl (+ optional decode traces)

struct GenerateArgs {
  std::string checkpoint;
  std::string input;        // dataset file with graphs (references optional)
  std::string format = "jsonl";
  std::string output;       // hypotheses jsonl
  std::string supervision;  // required for --order-mode gold
  std::string order_mode = "learned";
  int beam = 5;
  int max_len = 0;
  double threshold = -1.0;  // <0 = checkpoint's copy threshold
  long long seed = 1;       // random order mode
  bool trace = false;       // also emit per-step threshold-decode traces
};

inline int cmd_generate(const GenerateArgs& a, std::ostream& out = std::cout) {
  if (a.beam < 1) throw UsageError("--beam must be >= 1");
  OrderMode mode = order_mode_from_name(a.order_mode);
  std::unique_ptr<Pipeline> pipe = load_checkpoint(a.checkpoint);
  ParseResult res = parse_dataset(a.input, dataset_format_from_name(a.format));
  for (const RecordError& e : res.errors)
    out << "skipped " << e.where << ": " << e.message << "\n";
  if (res.examples.empty()) throw DataError("no usable examples in " + a.input);

  SupervisionSet sup;
  if (!a.supervision.empty()) sup = load_supervision(a.supervision);
  if (mode == OrderMode::kGold && a.supervision.empty())
    throw UsageError("--order-mode gold needs --supervision");

  DecodeConfig dcfg;
  dcfg.beam_width = a.beam;
  dcfg.max_len = a.max_len;
  dcfg.threshold = a.threshold;
  dcfg.seed = static_cast<std::uint64_t>(a.seed);

  std::ofstream hyp_out(a.output);
  if (!hyp_out) throw DataError("cannot write " + a.output);
  std::string trace_path = a.output + ".trace.jsonl";
  std::ofstream trace_out;
  if (a.trace) {
    trace_out.open(trace_path);
    if (!trace_out) throw DataError("cannot write " + trace_path);
  }

  long long copied = 0, emitted = 0;
  for (const Example& raw : res.examples) {
    Example ex = apply_oversize_policy(raw, pipe->n_slots(), OversizePolicy::kTruncate);
    const SupervisionRecord* rec = sup.find(ex.graph.id);
    OrderLabel order = order_for_mode(mode, ex.graph, pipe->n_slots(),
                                      rec ? &rec->order : nullptr,
                                      pipe->sorter ? &*pipe->sorter : nullptr,
                                      pipe->node_sorter ? &*pipe->node_sorter : nullptr,
                                      dcfg.seed);
    LinearizedKG lin = linearize(ex.graph, order, pipe->vocab);
    EncodedSource enc = pipe->gen->encode_source(lin);
    BeamResult best = beam_search(*pipe->gen, enc, pipe->vocab, dcfg);

    nlohmann::json j;
    j["id"] = ex.graph.id;
    j["text"] = best.text();
    j["score"] = best.score;
    j["normalized"] = best.normalized();
    j["steps"] = best.steps;
    j["n_copied"] = best.n_copied;
    j["finished"] = best.finished;
    j["order"] = order.listing();
    hyp_out << j.dump() << "\n";
    copied += best.n_copied;
    emitted += static_cast<long long>(best.surfaces.size());

    if (a.trace) {
      TraceResult tr = threshold_decode(*pipe->gen, enc, pipe->vocab, dcfg);
      nlohmann::json tj;
      tj["id"] = ex.graph.id;
      tj["text"] = tr.text();
      nlohmann::json steps = nlohmann::json::array();
      for (const CopyDecision& d : tr.decisions) {
        steps.push_back({{"token", d.token},
                         {"token_id", d.token_id},
                         {"copied", d.copied},
                         {"p_copy", d.p_copy},
                         {"x_sem", d.x_sem},
                         {"t_copy", d.t_copy},
                         {"source_index", d.source_index},
                         {"source_slot", d.source_slot},
                         {"fallback", d.fallback}});
      }
      tj["steps"] = std::move(steps);
      trace_out << tj.dump() << "\n";
    }
  }

  RunManifest m;
  m.command = "generate";
  m.add_input("checkpoint", a.checkpoint);
  m.add_input("dataset", a.input);
  if (!a.supervision.empty()) m.add_input("supervision", a.supervision);
  m.params["order_mode"] = a.order_mode;
  m.params["beam"] = std::to_string(a.beam);
  m.params["max_len"] = std::to_string(a.max_len);
  m.params["threshold"] = std::to_string(a.threshold);
  m.params["seed"] = std::to_string(a.seed);
  m.outputs["hypotheses"] = a.output;
  if (a.trace) m.outputs["traces"] = trace_path;
  m.save(a.output + ".manifest.json");

  out << "generated " << res.examples.size() << " hypotheses to " << a.output
      << "; copy rate "
      << (emitted > 0 ? static_cast<double>(copied) / static_cast<double>(emitted) : 0.0)
      << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate: checkpoint + split -> metrics report + per-example TSV + buckets

struct EvaluateArgs {
  std::string checkpoint;
  std::string input;        // dataset file with references
  std::string format = "jsonl";
  std::string supervision;  // optional; required for gold mode and order stats
  std::string output_dir;
  std::string order_mode = "learned";
  int beam = 5;
  int max_len = 0;
  double threshold = -1.0;
  long long seed = 1;
  std::string oversize = "truncate";
};

inline int cmd_evaluate(const EvaluateArgs& a, std::ostream& out = std::cout) {
  if (a.beam < 1) throw UsageError("--beam must be >= 1");
  OrderMode mode = order_mode_from_name(a.order_mode);
  std::unique_ptr<Pipeline> pipe = load_checkpoint(a.checkpoint);
  ParseResult res = parse_dataset(a.input, dataset_format_from_name(a.format));
  for (const RecordError& e : res.errors)
    out << "skipped " << e.where << ": " << e.message << "\n";
  if (res.examples.empty()) throw DataError("no usable examples in " + a.input);

  SupervisionSet sup;
  bool have_sup = !a.supervision.empty();
  if (have_sup) sup = load_supervision(a.supervision);
  if (mode == OrderMode::kGold && !have_sup)
    throw UsageError("--order-mode gold needs --supervision");

  EvalOptions opts;
  opts.order_mode = mode;
  opts.decode.beam_width = a.beam;
  opts.decode.max_len = a.max_len;
  opts.decode.threshold = a.threshold;
  opts.decode.seed = static_cast<std::uint64_t>(a.seed);
  opts.oversize = oversize_policy_from_name(a.oversize);

  EvalReport rep = evaluate(*pipe, res.examples, have_sup ? &sup : nullptr, opts);

  fs::create_directories(a.output_dir);
  nlohmann::json rj = rep.to_json();
  rj["order_mode"] = a.order_mode;
  rj["beam"] = a.beam;
  rj["max_len"] = a.max_len;
  rj["threshold"] = a.threshold;
  std::string report_path = (fs::path(a.output_dir) / "report.json").string();
  {
    std::ofstream rout(report_path);
    if (!rout) throw DataError("cannot write " + report_path);
    rout << rj.dump(2) << "\n";
  }

  std::map<std::string, std::string> refs;
  for (const Example& ex : res.examples)
    refs[ex.graph.id] = normalize_whitespace(ex.reference);
  std::string tsv_path = (fs::path(a.output_dir) / "per_example.tsv").string();
  {
    std::ofstream tout(tsv_path);
    if (!tout) throw DataError("cannot write " + tsv_path);
    tout << "id\thypothesis\treference\tsent_bleu\tcopy_rate\n";
    for (const ExampleEval& ee : rep.examples) {
      double copy_rate =
          ee.n_emitted > 0 ? static_cast<double>(ee.n_copied) / ee.n_emitted : 0.0;
      tout << ee.id << "\t" << ee.text << "\t" << refs[ee.id] << "\t" << ee.sent_bleu << "\t"
           << copy_rate << "\n";
    }
  }

  // KG-size sweep data for cmd_plot
  std::string buckets_path = (fs::path(a.output_dir) / "buckets.csv").string();
  {
    std::ofstream bout(buckets_path);
    if (!bout) throw DataError("cannot write " + buckets_path);
    bout << "bucket,count,bleu4\n";
    for (int b = 0; b < 3; ++b)
      bout << kg_size_bucket_name(b) << "," << rep.bucket_counts[static_cast<std::size_t>(b)]
           << "," << rep.bucket_bleu[static_cast<std::size_t>(b)] << "\n";
  }

  RunManifest m;
  m.command = "evaluate";
  m.add_input("checkpoint", a.checkpoint);
  m.add_input("dataset", a.input);
  if (have_sup) m.add_input("supervision", a.supervision);
  m.params["order_mode"] = a.order_mode;
  m.params["beam"] = std::to_string(a.beam);
  m.params["max_len"] = std::to_string(a.max_len);
  m.params["threshold"] = std::to_string(a.threshold);
  m.params["seed"] = std::to_string(a.seed);
  m.params["oversize"] = a.oversize;
  m.outputs["report"] = report_path;
  m.outputs["per_example"] = tsv_path;
  m.outputs["buckets"] = buckets_path;
  m.save((fs::path(a.output_dir) / "manifest.json").string());

  out << "evaluated " << rep.n_examples << " examples (" << a.order_mode << " order, beam "
      << a.beam << "): BLEU-4 " << rep.bleu4 << ", ROUGE-L " << rep.rouge_l << ", chrF++ "
      << rep.chrf_pp << ", CIDEr " << rep.cider << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// ablate: variant sweeps on the built-in synthetic corpus -> CSV + markdown
//
// Suites:
//   copy       full vs the copy/POS/semantic ablation variants (gold order so
//              every variant reads the identical input sequence)
//   order      one full model per seed evaluated under each inference-time
//              ordering (learned / node_level / random / gold)
//   window     copy-gate context window swept 1..5
//   pos_scope  local vs global POS tagging
//
// The main CSV has exactly one row per (variant, seed); per-variant seed
// means go to a second CSV and the markdown report, which also logs the
// expected-direction checks (full > no_cp, gold > random) per seed and on
// the means.  A direction failure is reported, not fatal.

struct AblateArgs {
  std::string suite;      // copy | order | window | pos_scope
  std::string output_dir;
  std::string config;     // optional config JSON overriding the built-in recipe
  std::string variants;   // optional comma-separated variant filter
  std::vector<long long> seeds = {1, 2, 3};
  int n_train = 240;
  int n_eval = 60;
  int n_planted = 160;    // shared planted-entity pool size
  long long corpus_seed = 23;
  int epochs = -1;        // override the recipe's epoch count
  int beam = 4;
};

// Training recipe sized so a two-variant, three-seed ablation finishes in
// minutes on one core while still separating the variants.
inline PipelineConfig ablation_recipe() {
  PipelineConfig cfg;
  cfg.model.d_model = 48;
  cfg.model.n_enc_layers = 1;
  cfg.model.n_dec_layers = 1;
  cfg.model.n_heads = 4;
  cfg.model.d_ff = 96;
  cfg.model.m_max = 96;
  cfg.model.k_max = 40;
  cfg.model.rel_window = 4;
  cfg.model.window = 3;
  cfg.train.lr = 3e-3;
  cfg.train.batch_size = 16;
  cfg.train.epochs = 150;
  cfg.sorter.n_slots = 4;
  return cfg;
}

namespace ablate_detail {

struct Row {
  std::string variant;
  std::string seed;  // number, or "mean"
  double bleu4 = 0, rouge_l = 0, chrf_pp = 0, cider = 0;
  double kendall = 0, order_exact = 0, copy_rate = 0;
};

inline Row row_from_report(const std::string& variant, const std::string& seed,
                           const EvalReport& rep) {
  Row r;
  r.variant = variant;
  r.seed = seed;
  r.bleu4 = rep.bleu4;
  r.rouge_l = rep.rouge_l;
  r.chrf_pp = rep.chrf_pp;
  r.cider = rep.cider;
  r.kendall = std::isfinite(rep.mean_kendall) ? rep.mean_kendall : 0.0;
  r.order_exact = std::isfinite(rep.order_exact_rate) ? rep.order_exact_rate : 0.0;
  r.copy_rate = rep.copy_token_rate;
  return r;
}

inline std::vector<Row> seed_means(const std::vector<Row>& rows,
                                   const std::vector<std::string>& variant_order) {
  std::vector<Row> means;
  for (const std::string& v : variant_order) {
    Row m;
    m.variant = v;
    m.seed = "mean";
    int n = 0;
    for (const Row& r : rows) {
      if (r.variant != v) continue;
      m.bleu4 += r.bleu4;
      m.rouge_l += r.rouge_l;
      m.chrf_pp += r.chrf_pp;
      m.cider += r.cider;
      m.kendall += r.kendall;
      m.order_exact += r.order_exact;
      m.copy_rate += r.copy_rate;
      ++n;
    }
    if (n == 0) continue;
    m.bleu4 /= n;
    m.rouge_l /= n;
    m.chrf_pp /= n;
    m.cider /= n;
    m.kendall /= n;
    m.order_exact /= n;
    m.copy_rate /= n;
    means.push_back(std::move(m));
  }
  return means;
}

inline void write_rows_csv(const std::string& path, const std::string& suite,
                           const std::vector<Row>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "suite,variant,seed,bleu4,rouge_l,chrf_pp,cider,mean_kendall,order_exact_rate,"
         "copy_token_rate\n";
  for (const Row& r : rows)
    out << suite << "," << r.variant << "," << r.seed << "," << r.bleu4 << "," << r.rouge_l
        << "," << r.chrf_pp << "," << r.cider << "," << r.kendall << "," << r.order_exact
        << "," << r.copy_rate << "\n";
}

inline void markdown_table(std::ostream& out, const std::vector<Row>& rows, bool with_seed) {
  out << "| variant |" << (with_seed ? " seed |" : "")
      << " BLEU-4 | ROUGE-L | chrF++ | CIDEr | Kendall | copy rate |\n";
  out << "|---|" << (with_seed ? "---|" : "") << "---|---|---|---|---|---|\n";
  out << std::fixed << std::setprecision(2);
  for (const Row& r : rows) {
    out << "| " << r.variant << " |";
    if (with_seed) out << " " << r.seed << " |";
    out << " " << r.bleu4 << " | " << r.rouge_l << " | " << r.chrf_pp << " | " << r.cider
        << " | " << r.kendall << " | " << r.copy_rate << " |\n";
  }
  out.unsetf(std::ios::fixed);
  out << std::setprecision(6);
}

// Logs whether hi_variant beat lo_variant per seed and on the means; returns
// whether the mean direction holds (or true when either variant is absent).
inline bool direction_check(std::ostream& out, const std::vector<Row>& rows,
                            const std::vector<Row>& means, const std::string& hi_variant,
                            const std::string& lo_variant) {
  auto find = [](const std::vector<Row>& rs, const std::string& v,
                 const std::string& s) -> const Row* {
    for (const Row& r : rs)
      if (r.variant == v && r.seed == s) return &r;
    return nullptr;
  };
  const Row* mh = find(means, hi_variant, "mean");
  const Row* ml = find(means, lo_variant, "mean");
  if (!mh || !ml) return true;
  out << std::fixed << std::setprecision(2);
  for (const Row& r : rows) {
    if (r.variant != hi_variant) continue;
    const Row* lo = find(rows, lo_variant, r.seed);
    if (!lo) continue;
    if (r.bleu4 > lo->bleu4) {
      out << "- seed " << r.seed << ": " << hi_variant << " (" << r.bleu4 << ") > "
          << lo_variant << " (" << lo->bleu4 << ")\n";
    } else {
      out << "- seed " << r.seed << ": " << hi_variant << " (" << r.bleu4 << ") <= "
          << lo_variant << " (" << lo->bleu4
          << ") — direction violated on this seed (acceptable when the mean holds)\n";
    }
  }
  bool holds = mh->bleu4 > ml->bleu4;
  out << "- mean: " << hi_variant << " (" << mh->bleu4 << ") "
      << (holds ? ">" : "<=") << " " << lo_variant << " (" << ml->bleu4 << ") — expected direction "
      << (holds ? "holds" : "VIOLATED") << "\n";
  out.unsetf(std::ios::fixed);
  out << std::setprecision(6);
  return holds;
}

}  // namespace ablate_detail

// Outcome of one ablate run, also returned to callers (acceptance checks).
struct AblateOutcome {
  std::vector<ablate_detail::Row> rows;   // variant x seed
  std::vector<ablate_detail::Row> means;  // one per variant
  bool directions_hold = true;            // mean-level expected directions

  const ablate_detail::Row* mean_of(const std::string& variant) const {
    for (const auto& r : means)
      if (r.variant == variant) return &r;
    return nullptr;
  }
};

inline AblateOutcome run_ablate(const AblateArgs& a, std::ostream& out = std::cout) {
  if (a.seeds.empty()) throw UsageError("--seeds must not be empty");
  const bool is_copy = a.suite == "copy";
  const bool is_order = a.suite == "order";
  const bool is_window = a.suite == "window";
  const bool is_pos = a.suite == "pos_scope";
  if (!is_copy && !is_order && !is_window && !is_pos)
    throw UsageError("unknown suite: " + a.suite +
                     " (expected copy|order|window|pos_scope)");

  PipelineConfig recipe = a.config.empty() ? ablation_recipe() : PipelineConfig::load(a.config);
  if (a.epochs > 0) recipe.train.epochs = a.epochs;

  AblationCorpusConfig ccfg;
  ccfg.n_train = a.n_train;
  ccfg.n_eval = a.n_eval;
  ccfg.n_planted = a.n_planted;
  ccfg.seed = static_cast<std::uint64_t>(a.corpus_seed);
  SplitCorpus corpus = make_ablation_corpus(ccfg);

  // vocabulary from the training half only, as a real split would have it
  std::vector<std::vector<std::string>> vocab_corpus;
  for (const Example& ex : corpus.train) {
    vocab_corpus.push_back(tokenize_lower(ex.reference));
    std::vector<std::string> graph_tokens;
    for (const Triplet& t : ex.graph.triplets)
      for (const std::string& field : {t.head, t.relation, t.tail})
        for (const std::string& tok : tokenize_lower(field)) graph_tokens.push_back(tok);
    vocab_corpus.push_back(std::move(graph_tokens));
  }
  Vocabulary vocab = build_vocab(vocab_corpus, 1, 0);

  SupervisionSet train_sup, eval_sup;
  train_sup.n_slots = eval_sup.n_slots = recipe.sorter.n_slots;
  for (const Example& ex : corpus.train)
    train_sup.records.push_back(extract_supervision(ex, recipe.sorter.n_slots, "lexicon"));
  for (const Example& ex : corpus.eval)
    eval_sup.records.push_back(extract_supervision(ex, recipe.sorter.n_slots, "lexicon"));

  struct VariantPlan {
    std::string name;
    bool no_cp = false, no_pos = false, no_sc = false;
    int window = 0;           // 0 = recipe default
    std::string pos_scope;    // empty = recipe default
  };
  std::vector<VariantPlan> plans;
  if (is_copy) {
    plans = {{"full"},
             {"no_cp", true, false, false},
             {"no_pos", false, true, false},
             {"no_sc", false, false, true},
             {"no_pos_sc", false, true, true}};
  } else if (is_order) {
    plans = {{"full"}};  // one training; four decode-time orderings
  } else if (is_window) {
    for (int w = 1; w <= 5; ++w) plans.push_back({"w" + std::to_string(w), false, false, false, w});
  } else {
    plans = {{"local"}, {"global"}};
    plans[0].pos_scope = "local";
    plans[1].pos_scope = "global";
  }
  if (!a.variants.empty()) {
    std::set<std::string> keep;
    std::stringstream ss(a.variants);
    std::string item;
    while (std::getline(ss, item, ',')) keep.insert(item);
    std::vector<VariantPlan> filtered;
    for (const VariantPlan& p : plans)
      if (keep.count(p.name)) filtered.push_back(p);
    if (filtered.empty()) throw UsageError("variant filter matches nothing: " + a.variants);
    plans = std::move(filtered);
  }

  const std::vector<OrderMode> order_modes =
      is_order ? std::vector<OrderMode>{OrderMode::kLearned, OrderMode::kNodeLevel,
                                        OrderMode::kRandom, OrderMode::kGold}
               : std::vector<OrderMode>{is_copy ? OrderMode::kGold : OrderMode::kLearned};

  std::vector<ablate_detail::Row> rows;
  std::vector<std::string> variant_order;
  for (long long seed : a.seeds) {
    for (const VariantPlan& plan : plans) {
      PipelineConfig cfg = recipe;
      cfg.train.seed = static_cast<std::uint64_t>(seed);
      cfg.train.no_cp = cfg.train.no_cp || plan.no_cp;
      cfg.train.no_pos = cfg.train.no_pos || plan.no_pos;
      cfg.train.no_sc = cfg.train.no_sc || plan.no_sc;
      if (plan.window > 0) cfg.model.window = plan.window;
      if (!plan.pos_scope.empty()) cfg.train.pos_scope = plan.pos_scope;

      auto t0 = std::chrono::steady_clock::now();
      auto pipe = make_pipeline(cfg.model, cfg.train, cfg.sorter, vocab);
      std::vector<TrainSample> samples = prepare_samples(corpus.train, train_sup, pipe->vocab);
      train(*pipe, samples, nullptr);
      double train_secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

      for (OrderMode mode : order_modes) {
        EvalOptions opts;
        opts.order_mode = mode;
        opts.decode.beam_width = a.beam;
        opts.decode.seed = static_cast<std::uint64_t>(seed);
        EvalReport rep = evaluate(*pipe, corpus.eval, &eval_sup, opts);
        std::string vname = is_order ? order_mode_name(mode) : plan.name;
        rows.push_back(
            ablate_detail::row_from_report(vname, std::to_string(seed), rep));
        if (std::find(variant_order.begin(), variant_order.end(), vname) ==
            variant_order.end())
          variant_order.push_back(vname);
        out << a.suite << "/" << vname << " seed " << seed << ": BLEU-4 " << rep.bleu4
            << " (train " << static_cast<int>(train_secs) << "s)\n";
        out.flush();
      }
    }
  }

  AblateOutcome oc;
  oc.rows = std::move(rows);
  oc.means = ablate_detail::seed_means(oc.rows, variant_order);
  return oc;
}

inline int cmd_ablate(const AblateArgs& a, std::ostream& out = std::cout) {
  AblateOutcome oc = run_ablate(a, out);
  PipelineConfig recipe = a.config.empty() ? ablation_recipe() : PipelineConfig::load(a.config);
  if (a.epochs > 0) recipe.train.epochs = a.epochs;

  fs::create_directories(a.output_dir);
  std::string csv_path = (fs::path(a.output_dir) / "ablate.csv").string();
  std::string means_path = (fs::path(a.output_dir) / "ablate_means.csv").string();
  std::string md_path = (fs::path(a.output_dir) / "ablate.md").string();
  std::string cfg_path = (fs::path(a.output_dir) / "config.json").string();
  ablate_detail::write_rows_csv(csv_path, a.suite, oc.rows);
  ablate_detail::write_rows_csv(means_path, a.suite, oc.means);
  {
    std::ofstream cfg_out(cfg_path);
    if (!cfg_out) throw DataError("cannot write " + cfg_path);
    cfg_out << recipe.to_json().dump(2) << "\n";
  }

  {
    std::ofstream md(md_path);
    if (!md) throw DataError("cannot write " + md_path);
    md << "# Ablation report — suite `" << a.suite << "`\n\n";
    md << "Corpus: " << a.n_train << " train / " << a.n_eval << " eval examples, "
       << a.n_planted << "-name shared entity pool, corpus seed " << a.corpus_seed << ".\n";
    md << "Recipe: d_model " << recipe.model.d_model << ", " << recipe.model.n_enc_layers
       << "+" << recipe.model.n_dec_layers << " layers, " << recipe.model.n_heads
       << " heads, " << recipe.train.epochs << " epochs, beam " << a.beam << ".\n";
    md << "Evaluation order: "
       << (a.suite == "copy" ? "gold (identical inputs across variants)"
                             : a.suite == "order" ? "per-variant" : "learned")
       << "; seeds:";
    for (long long s : a.seeds) md << " " << s;
    md << ".\n\n## Per-seed results\n\n";
    ablate_detail::markdown_table(md, oc.rows, true);
    md << "\n## Seed means\n\n";
    ablate_detail::markdown_table(md, oc.means, false);
    md << "\n## Direction checks\n\n";
    bool any_check = false;
    if (a.suite == "copy") {
      any_check = true;
      oc.directions_hold = ablate_detail::direction_check(md, oc.rows, oc.means, "full", "no_cp");
    } else if (a.suite == "order") {
      any_check = true;
      oc.directions_hold =
          ablate_detail::direction_check(md, oc.rows, oc.means, "gold", "random");
    }
    if (!any_check) md << "none for this suite\n";
  }

  RunManifest m;
  m.command = "ablate";
  if (!a.config.empty()) m.add_input("config", a.config);
  m.params["suite"] = a.suite;
  m.params["n_train"] = std::to_string(a.n_train);
  m.params["n_eval"] = std::to_string(a.n_eval);
  m.params["n_planted"] = std::to_string(a.n_planted);
  m.params["corpus_seed"] = std::to_string(a.corpus_seed);
  m.params["epochs"] = std::to_string(recipe.train.epochs);
  m.params["beam"] = std::to_string(a.beam);
  {
    std::string ss;
    for (long long s : a.seeds) ss += (ss.empty() ? "" : ",") + std::to_string(s);
    m.params["seeds"] = ss;
  }
  if (!a.variants.empty()) m.params["variants"] = a.variants;
  m.outputs["rows"] = csv_path;
  m.outputs["means"] = means_path;
  m.outputs["report"] = md_path;
  m.outputs["config"] = cfg_path;
  m.save((fs::path(a.output_dir) / "manifest.json").string());

  out << "ablation suite " << a.suite << ": " << oc.rows.size() << " rows -> " << csv_path
      << (oc.directions_hold ? "" : " (mean direction check VIOLATED, see report)") << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// plot: sweep CSVs -> static SVG charts
//
// Recognized inputs: the KG-size buckets.csv written by cmd_evaluate
// (bucket,count,bleu4 -> bar chart) and the ablate CSVs (bar chart of BLEU-4
// by variant; the window suite becomes a line chart over the window sizes).
// Our CSVs never quote or embed commas, so a plain split suffices.

struct PlotArgs {
  std::vector<std::string> inputs;
  std::string output_dir;
};

namespace plot_detail {

struct Series {
  std::string title;
  std::vector<std::string> labels;
  std::vector<double> values;
  bool as_line = false;
};

inline std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read csv: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  if (rows.size() < 2) throw DataError("csv has no data rows: " + path);
  return rows;
}

inline int column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

inline Series series_from_csv(const std::string& path) {
  auto rows = read_csv(path);
  const auto& header = rows.front();
  Series s;
  s.title = fs::path(path).stem().string();

  if (column(header, "bucket") == 0 && column(header, "bleu4") >= 0) {
    int yc = column(header, "bleu4");
    for (std::size_t r = 1; r < rows.size(); ++r) {
      s.labels.push_back(rows[r][0]);
      s.values.push_back(std::stod(rows[r][static_cast<std::size_t>(yc)]));
    }
    s.title += " — BLEU-4 by KG size";
    return s;
  }

  int vc = column(header, "variant"), sc = column(header, "seed"), yc = column(header, "bleu4");
  if (vc >= 0 && yc >= 0) {
    // prefer the seed-mean rows when both per-seed and mean rows are present
    bool has_mean = false;
    for (std::size_t r = 1; r < rows.size(); ++r)
      has_mean = has_mean || (sc >= 0 && rows[r][static_cast<std::size_t>(sc)] == "mean");
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (has_mean && rows[r][static_cast<std::size_t>(sc)] != "mean") continue;
      s.labels.push_back(rows[r][static_cast<std::size_t>(vc)]);
      s.values.push_back(std::stod(rows[r][static_cast<std::size_t>(yc)]));
    }
    s.as_line = !s.labels.empty() &&
                std::all_of(s.labels.begin(), s.labels.end(), [](const std::string& l) {
                  return l.size() >= 2 && l[0] == 'w' &&
                         std::all_of(l.begin() + 1, l.end(), ::isdigit);
                });
    s.title += s.as_line ? " — BLEU-4 by copy window" : " — BLEU-4 by variant";
    return s;
  }
  throw DataError("unrecognized csv layout in " + path);
}

inline void write_svg(const std::string& path, const Series& s) {
  if (s.values.empty()) throw DataError("nothing to plot for " + path);
  const double W = 640, H = 400, ml = 60, mr = 20, mt = 40, mb = 60;
  const double pw = W - ml - mr, ph = H - mt - mb;
  double ymax = *std::max_element(s.values.begin(), s.values.end());
  if (ymax <= 0) ymax = 1;
  ymax *= 1.1;

  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << std::fixed << std::setprecision(1);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\""
      << " font-size=\"15\">" << s.title << "</text>\n";
  // axes
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
      << mt + ph << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    double yv = ymax * t / 5.0, y = mt + ph - ph * t / 5.0;
    out << "<line x1=\"" << ml - 4 << "\" y1=\"" << y << "\" x2=\"" << ml << "\" y2=\"" << y
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << ml - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << yv
        << "</text>\n";
  }

  const std::size_t n = s.values.size();
  auto xc = [&](std::size_t i) {
    return ml + pw * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  };
  auto yc = [&](double v) { return mt + ph - ph * v / ymax; };

  if (s.as_line) {
    out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < n; ++i) out << xc(i) << "," << yc(s.values[i]) << " ";
    out << "\"/>\n";
    for (std::size_t i = 0; i < n; ++i)
      out << "<circle cx=\"" << xc(i) << "\" cy=\"" << yc(s.values[i])
          << "\" r=\"3.5\" fill=\"#1f77b4\"/>\n";
  } else {
    double bw = pw / static_cast<double>(n) * 0.6;
    for (std::size_t i = 0; i < n; ++i)
      out << "<rect x=\"" << xc(i) - bw / 2 << "\" y=\"" << yc(s.values[i]) << "\" width=\""
          << bw << "\" height=\"" << mt + ph - yc(s.values[i]) << "\" fill=\"#1f77b4\"/>\n";
  }
  for (std::size_t i = 0; i < n; ++i) {
    out << "<text x=\"" << xc(i) << "\" y=\"" << mt + ph + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << s.labels[i] << "</text>\n";
    out << "<text x=\"" << xc(i) << "\" y=\"" << yc(s.values[i]) - 6
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << s.values[i] << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace plot_detail

inline int cmd_plot(const PlotArgs& a, std::ostream& out = std::cout) {
  if (a.inputs.empty()) throw UsageError("plot needs at least one input csv");
  fs::create_directories(a.output_dir);
  RunManifest m;
  m.command = "plot";
  int idx = 0;
  for (const std::string& input : a.inputs) {
    plot_detail::Series s = plot_detail::series_from_csv(input);
    std::string svg_path =
        (fs::path(a.output_dir) / (fs::path(input).stem().string() + ".svg")).string();
    plot_detail::write_svg(svg_path, s);
    m.add_input("csv" + std::to_string(idx), input);
    m.outputs["svg" + std::to_string(idx)] = svg_path;
    ++idx;
    out << "plotted " << input << " -> " << svg_path << "\n";
  }
  m.save((fs::path(a.output_dir) / "plot.manifest.json").string());
  return 0;
}

}  // namespace kgtext
