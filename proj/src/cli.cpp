// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidret/cli.hpp"

#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vidret/composed.hpp"
#include "vidret/evaluation.hpp"
#include "vidret/formats.hpp"
#include "vidret/index.hpp"
#include "vidret/moment.hpp"
#include "vidret/pipeline.hpp"
#include "vidret/provider.hpp"
#include "vidret/store.hpp"
#include "vidret/trainer.hpp"

namespace vidret::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Option values shared by every subcommand.
struct Common {
  std::string provider = "synthetic";
  std::string endpoint;
  std::string index;
  int k = 10;
  std::uint64_t seed = 0;
  std::string config;
  std::string out;
  std::string format = "json";
  int jobs = 4;
  std::string store;    // file provider backing store
  std::string adapter;  // optional adapter JSON applied after the provider
};

// A flag that may also be supplied by the config file under `key`.
struct Binding {
  CLI::Option* option;
  std::string key;
  std::function<void(const json&)> assign;
};

class Command {
 public:
  Command(CLI::App& app, std::string name, std::string description)
      : sub_(app.add_subcommand(std::move(name), std::move(description))) {}

  CLI::App* app() const { return sub_; }

  template <typename T>
  CLI::Option* bind(const std::string& flag, T& target, const std::string& help) {
    auto* opt = sub_->add_option(flag, target, help);
    remember(opt, flag, target);
    return opt;
  }

  CLI::Option* flag(const std::string& flag, bool& target, const std::string& help) {
    auto* opt = sub_->add_flag(flag, target, help);
    remember(opt, flag, target);
    return opt;
  }

  void add_common(Common& c) {
    bind("--provider", c.provider, "Embedding provider")
        ->check(CLI::IsMember({"synthetic", "file", "remote"}));
    bind("--endpoint", c.endpoint, "Base URL of the remote service");
    bind("--index", c.index, "Index file");
    bind("--k", c.k, "Result list length")->check(CLI::PositiveNumber);
    bind("--seed", c.seed, "Seed for all randomized behavior");
    sub_->add_option("--config", c.config, "JSON config; flags override its keys");
    bind("--out", c.out, "Output path (default: standard output)");
    bind("--format", c.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    bind("--jobs", c.jobs, "Maximum concurrent provider requests")->check(CLI::PositiveNumber);
    bind("--store", c.store, "Embedding store backing the file provider");
    bind("--adapter", c.adapter, "Linear adapter JSON applied to provider output");
  }

  /// Fills options absent from the command line from `config`.
  void merge(const json& config) const {
    std::set<std::string> known{"world", "train", "moment", "pipeline", "miner", "weights", "remote"};
    for (const auto& b : bindings_) known.insert(b.key);
    for (const auto& [key, value] : config.items()) {
      if (!known.contains(key)) throw UsageError("unknown config key '" + key + "'");
    }
    for (const auto& b : bindings_) {
      if (b.option->count() > 0 || !config.contains(b.key)) continue;
      try {
        b.assign(config.at(b.key));
      } catch (const json::exception& e) {
        throw UsageError("config key '" + b.key + "': " + e.what());
      }
    }
  }

 private:
  template <typename T>
  void remember(CLI::Option* opt, const std::string& flag, T& target) {
    bindings_.push_back({opt, flag.substr(2), [&target](const json& j) { target = j.get<T>(); }});
  }

  CLI::App* sub_;
  std::vector<Binding> bindings_;
};

// ---------------------------------------------------------------------------
// Config sections

template <typename T>
void take(const json& section, const char* key, T& target, std::set<std::string>& seen) {
  seen.insert(key);
  if (!section.contains(key)) return;
  try {
    target = section.at(key).get<T>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("config key '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& section, const std::set<std::string>& seen, const char* name) {
  if (!section.is_object()) throw UsageError(std::string("config section '") + name + "' must be an object");
  for (const auto& [key, value] : section.items()) {
    if (!seen.contains(key)) throw UsageError(std::string("unknown key '") + key + "' in '" + name + "'");
  }
}

json section(const json& config, const char* name) {
  return config.contains(name) ? config.at(name) : json::object();
}

SyntheticWorld world_from(const json& j, std::uint64_t seed, const char* name = "world") {
  SyntheticWorld w;
  std::set<std::string> seen;
  take(j, "latent_dim", w.latent_dim, seen);
  take(j, "raw_dim", w.raw_dim, seen);
  take(j, "noise_sigma", w.noise_sigma, seen);
  take(j, "num_concepts", w.num_concepts, seen);
  take(j, "view_shift", w.view_shift, seen);
  take(j, "identity_maps", w.identity_maps, seen);
  take(j, "concept_offset", w.concept_offset, seen);
  reject_unknown(j, seen, name);
  w.seed = seed;
  w.validate();
  return w;
}

TrainConfig train_from(const json& config, std::uint64_t seed) {
  const json j = section(config, "train");
  TrainConfig t;
  std::set<std::string> seen;
  take(j, "epochs", t.epochs, seen);
  take(j, "batch_size", t.batch_size, seen);
  take(j, "step_size", t.step_size, seen);
  take(j, "emb_dim", t.emb_dim, seen);
  take(j, "temperature", t.temperature, seen);
  take(j, "train_fraction", t.train_fraction, seen);
  seen.insert("stage2_world");
  reject_unknown(j, seen, "train");
  if (j.contains("stage2_world")) t.stage2_world = world_from(j.at("stage2_world"), seed, "stage2_world");
  t.seed = seed;
  t.validate();
  return t;
}

MomentConfig moment_from(const json& config) {
  const json j = section(config, "moment");
  MomentConfig m;
  std::set<std::string> seen;
  take(j, "smooth_sigma", m.smooth_sigma, seen);
  take(j, "beta", m.beta, seen);
  take(j, "alpha", m.alpha, seen);
  take(j, "nms_iou", m.nms_iou, seen);
  take(j, "max_windows", m.max_windows, seen);
  take(j, "min_window_frames", m.min_window_frames, seen);
  reject_unknown(j, seen, "moment");
  m.validate();
  return m;
}

PipelineConfig pipeline_from(const json& config, int k) {
  const json j = section(config, "pipeline");
  PipelineConfig p;
  std::set<std::string> seen;
  take(j, "use_dual_softmax", p.use_dual_softmax, seen);
  take(j, "ds_temperature", p.ds_temperature, seen);
  reject_unknown(j, seen, "pipeline");
  p.k_candidates = k;
  p.validate();
  return p;
}

MinerConfig miner_from(const json& config, std::uint64_t seed) {
  const json j = section(config, "miner");
  MinerConfig m;
  std::set<std::string> seen;
  take(j, "k_top", m.k_top, seen);
  take(j, "low_rank", m.low_rank, seen);
  take(j, "high_rank", m.high_rank, seen);
  take(j, "n_rand", m.n_rand, seen);
  take(j, "n_hard_bce", m.n_hard_bce, seen);
  take(j, "n_hard_pb", m.n_hard_pb, seen);
  reject_unknown(j, seen, "miner");
  m.seed = seed;
  m.validate();
  return m;
}

JointLossWeights weights_from(const json& config) {
  const json j = section(config, "weights");
  JointLossWeights w;
  std::set<std::string> seen;
  take(j, "bce_rand", w.bce_rand, seen);
  take(j, "bce_hard", w.bce_hard, seen);
  take(j, "preference", w.preference, seen);
  reject_unknown(j, seen, "weights");
  w.validate();
  return w;
}

RemoteOptions remote_from(const json& config, const Common& c) {
  const json j = section(config, "remote");
  RemoteOptions r;
  int backoff_ms = static_cast<int>(r.backoff_base.count());
  int timeout_ms = static_cast<int>(r.timeout.count());
  std::set<std::string> seen;
  take(j, "batch_size", r.batch_size, seen);
  take(j, "attempts", r.attempts, seen);
  take(j, "backoff_ms", backoff_ms, seen);
  take(j, "timeout_ms", timeout_ms, seen);
  reject_unknown(j, seen, "remote");
  if (c.endpoint.empty()) throw UsageError("the remote backend needs --endpoint");
  r.endpoint = c.endpoint;
  r.max_in_flight = c.jobs;
  r.backoff_base = std::chrono::milliseconds(backoff_ms);
  r.timeout = std::chrono::milliseconds(timeout_ms);
  if (r.batch_size < 1 || r.attempts < 1) throw UsageError("remote batch_size and attempts must be >= 1");
  return r;
}

// ---------------------------------------------------------------------------
// Shared plumbing

struct ProviderStack {
  std::unique_ptr<EmbeddingProvider> base;
  std::unique_ptr<EmbeddingProvider> adapted;
  const EmbeddingProvider& get() const { return adapted ? *adapted : *base; }
};

ProviderStack make_provider(const Common& c, const json& config,
                            ComposeRule rule = ComposeRule::kFollow) {
  ProviderStack p;
  if (c.provider == "synthetic") {
    p.base = std::make_unique<SyntheticProvider>(world_from(section(config, "world"), c.seed), rule);
  } else if (c.provider == "file") {
    if (c.store.empty()) throw UsageError("the file provider needs --store");
    p.base = std::make_unique<FileProvider>(read_store(c.store));
  } else {
    p.base = std::make_unique<RemoteProvider>(remote_from(config, c));
  }
  if (!c.adapter.empty()) {
    p.adapted = std::make_unique<AdaptedProvider>(
        *p.base, adapter_from_json(json::parse(read_text_file(c.adapter))));
  }
  return p;
}

DenseIndex load_index(const Common& c) {
  if (c.index.empty()) throw UsageError("missing --index");
  return build_index(read_store(c.index));
}

void emit(const Common& c, std::ostream& out, const std::string& bytes) {
  if (c.out.empty()) {
    out << bytes;
  } else {
    write_text_file(c.out, bytes);
  }
}

std::vector<NamedQuery> named_queries(const std::vector<ManifestEntry>& manifest) {
  std::vector<NamedQuery> out;
  out.reserve(manifest.size());
  for (const auto& e : manifest) out.push_back({e.id, e.spec});
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string part;
  while (std::getline(in, part, ',')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_embed(const Common& c, const json& config, const std::string& manifest_path, std::ostream& out) {
  if (manifest_path.empty()) throw UsageError("embed needs --manifest");
  const auto manifest = parse_manifest(read_text_file(manifest_path));
  if (manifest.empty()) throw Error(ErrorCode::kEmptyInput, "manifest has no entries");
  const auto provider = make_provider(c, config);

  // One request per prompt, keeping manifest order in the output.
  std::map<std::string, std::vector<std::size_t>> by_prompt;
  for (std::size_t i = 0; i < manifest.size(); ++i) by_prompt[manifest[i].prompt_id].push_back(i);
  std::vector<std::optional<EmbeddingVector>> vectors(manifest.size());
  for (const auto& [prompt, positions] : by_prompt) {
    EmbedRequest request{{}, prompt};
    for (auto i : positions) request.items.push_back(manifest[i].spec);
    auto got = provider.get().embed(request);
    for (std::size_t k = 0; k < positions.size(); ++k) vectors[positions[k]] = std::move(got[k]);
  }
  std::vector<CorpusItem> items;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    items.push_back({manifest[i].id, manifest[i].item_kind, std::move(*vectors[i])});
  }
  emit(c, out, encode_store(items));
  return kExitOk;
}

int cmd_build_index(const Common& c, const std::string& input, std::ostream& out) {
  if (input.empty()) throw UsageError("build-index needs --input");
  const auto index = build_index(read_store(input));
  std::vector<CorpusItem> rows;
  for (std::size_t i = 0; i < index.size(); ++i) {
    rows.push_back({index.ids()[i], ItemKind::kVideo, index.embedding(i)});
  }
  emit(c, out, encode_store(rows));
  return kExitOk;
}

struct SearchArgs {
  std::vector<std::string> query_texts;
  std::string queries;
  std::string query_store;
};

int cmd_search(const Common& c, const json& config, const SearchArgs& a, std::ostream& out) {
  const int sources = !a.query_texts.empty() + !a.queries.empty() + !a.query_store.empty();
  if (sources != 1) throw UsageError("search needs exactly one of --query-text, --queries, --query-store");
  const auto index = load_index(c);
  const auto cfg = pipeline_from(config, c.k);

  std::vector<RankedList> results;
  if (!a.query_store.empty()) {
    const auto stored = read_store(a.query_store, ItemKind::kText);
    std::vector<NamedQuery> queries;
    std::vector<EmbeddingVector> embeddings;
    for (const auto& item : stored) {
      queries.push_back({item.id, QuerySpec::from_text(item.id)});
      embeddings.push_back(item.embedding);
    }
    results = retrieve_batch(index, queries, embeddings, cfg);
  } else {
    std::vector<NamedQuery> queries;
    if (!a.queries.empty()) {
      queries = named_queries(parse_manifest(read_text_file(a.queries)));
    } else {
      for (std::size_t i = 0; i < a.query_texts.size(); ++i) {
        queries.push_back({"q" + std::to_string(i), QuerySpec::from_text(a.query_texts[i])});
      }
    }
    const auto provider = make_provider(c, config);
    results = retrieve_batch(index, queries, provider.get(), cfg);
  }
  emit(c, out, format_rankings(results));
  return kExitOk;
}

struct RerankArgs {
  std::string rankings;
  std::string queries;
  std::string scorer = "toy";
  std::string scorer_model;
};

int cmd_rerank(const Common& c, const json& config, const RerankArgs& a, std::ostream& out) {
  if (a.rankings.empty() || a.queries.empty()) throw UsageError("rerank needs --rankings and --queries");
  const auto rankings = parse_rankings(read_text_file(a.rankings));
  std::map<std::string, QuerySpec> specs;
  for (const auto& e : parse_manifest(read_text_file(a.queries))) specs.insert_or_assign(e.id, e.spec);

  std::unique_ptr<Scorer> scorer;
  std::optional<DenseIndex> items;
  std::optional<ProviderStack> provider;
  if (a.scorer == "remote") {
    scorer = std::make_unique<RemoteScorer>(remote_from(config, c));
  } else {
    if (a.scorer_model.empty()) throw UsageError("the toy scorer needs --scorer-model");
    items.emplace(load_index(c));
    provider.emplace(make_provider(c, config));
    scorer = std::make_unique<ToyScorerAdapter>(
        scorer_from_json(json::parse(read_text_file(a.scorer_model))), *items, provider->get());
  }
  std::vector<RankedList> results;
  for (const auto& r : rankings) {
    const auto it = specs.find(r.query_id);
    if (it == specs.end()) throw Error(ErrorCode::kInvalidArgument, "no query spec for '" + r.query_id + "'");
    results.push_back(rerank(r, it->second, *scorer));
  }
  emit(c, out, format_rankings(results));
  return kExitOk;
}

int cmd_localize(const Common& c, const json& config, const std::string& queries_path,
                 const std::string& videos_path, std::ostream& out) {
  if (queries_path.empty() || videos_path.empty()) throw UsageError("localize needs --queries and --videos");
  const auto cfg = moment_from(config);
  std::map<std::string, EmbeddingVector> queries;
  for (auto& item : read_store(queries_path, ItemKind::kText)) queries.emplace(item.id, std::move(item.embedding));

  const fs::path base = fs::path(videos_path).parent_path();
  std::vector<std::pair<std::string, std::vector<MomentWindow>>> rows;
  std::istringstream lines(read_text_file(videos_path));
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string id, frames;
    double hop = 0.0, duration = 0.0;
    try {
      const auto j = json::parse(line);
      id = j.at("query_id").get<std::string>();
      frames = j.at("frames").get<std::string>();
      hop = j.at("frame_hop_s").get<double>();
      duration = j.at("duration_s").get<double>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument, "videos line " + std::to_string(lineno) + ": " + e.what());
    }
    const auto q = queries.find(id);
    if (q == queries.end()) throw Error(ErrorCode::kInvalidArgument, "no query embedding for '" + id + "'");
    std::vector<EmbeddingVector> frame_vectors;
    for (auto& f : read_store(base / frames, ItemKind::kFrame)) frame_vectors.push_back(std::move(f.embedding));
    rows.emplace_back(id, localize(q->second, frame_vectors, hop, duration, cfg));
  }
  emit(c, out, format_moments(rows));
  return kExitOk;
}

struct ComposeArgs {
  std::string queries;
  std::vector<std::string> source_frames;
  std::string modification;
  bool ablate = false;
};

int cmd_compose(const Common& c, const json& config, const ComposeArgs& a, std::ostream& out) {
  std::vector<NamedQuery> queries;
  if (!a.queries.empty()) {
    if (!a.source_frames.empty()) throw UsageError("use either --queries or --source-frames");
    queries = named_queries(parse_manifest(read_text_file(a.queries)));
  } else {
    if (a.source_frames.empty()) throw UsageError("compose needs --queries or --source-frames");
    queries.push_back({"q0", build_composed_spec(a.source_frames, a.modification)});
  }
  if (a.ablate && c.provider != "synthetic") throw UsageError("--ablate-modification needs the synthetic provider");
  const auto index = load_index(c);
  const auto provider =
      make_provider(c, config, a.ablate ? ComposeRule::kIgnoreModification : ComposeRule::kFollow);
  std::vector<RankedList> results;
  for (const auto& q : queries) results.push_back(composed_retrieve(index, q.spec, provider.get(), c.k, q.id));
  emit(c, out, format_rankings(results));
  return kExitOk;
}

struct TrainArgs {
  std::string adapter_out;
  std::string scorer_out;
};

int cmd_train_toy(const Common& c, const json& config, const TrainArgs& a, std::ostream& out,
                  std::ostream& err) {
  const auto world = world_from(section(config, "world"), c.seed);
  const auto cfg = train_from(config, c.seed);
  const auto trained = train_embedder(world, cfg);

  std::string history;
  for (const auto& h : trained.history) {
    nlohmann::ordered_json j;
    j["epoch"] = h.epoch;
    j["loss"] = h.loss;
    if (h.r_at_1) j["r_at_1"] = *h.r_at_1;
    history += j.dump() + "\n";
  }
  err << "train-toy: final loss " << format_double(trained.history.back().loss) << ", held-out R@1 "
      << format_double(trained.history.back().r_at_1.value_or(0.0)) << "\n";
  if (!a.adapter_out.empty()) write_text_file(a.adapter_out, to_json(trained.adapter).dump() + "\n");

  if (!a.scorer_out.empty()) {
    const SyntheticGenerator gen(world);
    const auto split = split_concepts(world, cfg);
    std::vector<CorpusItem> corpus;
    RerankExamples examples;
    for (int i = split.train_begin; i < split.train_end; ++i) {
      const auto id = "c" + std::to_string(i);
      corpus.push_back({id, ItemKind::kVideo, trained.adapter.apply(gen.view(i, View::kCandidate))});
      examples.queries.push_back(trained.adapter.apply(gen.view(i, View::kQuery)));
      examples.gt_ids.push_back(id);
    }
    const auto scorer = train_reranker(examples, build_index(corpus), miner_from(config, c.seed),
                                       weights_from(config), cfg);
    write_text_file(a.scorer_out, to_json(scorer.scorer).dump() + "\n");
  }
  emit(c, out, history);
  return kExitOk;
}

struct EvalArgs {
  std::string task = "retrieval";
  std::string predictions;
  std::string gt;
  std::string ks = "1,5,10";
  std::string thresholds = "0.3,0.5,0.7";
};

int cmd_eval(const Common& c, const EvalArgs& a, std::ostream& out) {
  if (a.predictions.empty() || a.gt.empty()) throw UsageError("eval needs --predictions and --gt");
  std::vector<int> ks;
  std::vector<double> thresholds;
  try {
    for (const auto& s : split_list(a.ks)) ks.push_back(std::stoi(s));
    for (const auto& s : split_list(a.thresholds)) thresholds.push_back(std::stod(s));
  } catch (const std::exception&) {
    throw UsageError("--ks and --thresholds take comma-separated numbers");
  }
  std::vector<MetricValue> metrics;
  if (a.task == "retrieval") {
    const auto rankings = parse_rankings(read_text_file(a.predictions));
    const auto gt = parse_retrieval_gt(read_text_file(a.gt));
    for (int k : ks) metrics.push_back({a.task, "recall", k, std::nullopt, recall_at_k(rankings, gt, k)});
  } else {
    const auto predictions = parse_moments(read_text_file(a.predictions));
    const auto gt = parse_moment_gt(read_text_file(a.gt));
    for (int k : ks) {
      for (double t : thresholds) {
        metrics.push_back({a.task, "recall", k, t, moment_recall(predictions, gt, t, k)});
      }
    }
    metrics.push_back({a.task, "miou", std::nullopt, std::nullopt, mean_iou(predictions, gt)});
  }
  emit(c, out, emit_report(metrics, parse_report_format(c.format)));
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dense video retrieval toolkit", "vidret"};
  app.require_subcommand(1);
  Common common;

  Command embed(app, "embed", "Embed a JSONL manifest into an embedding store");
  std::string manifest;
  embed.bind("--manifest", manifest, "Input manifest (JSONL)");

  Command build(app, "build-index", "Normalize and validate a store into an index file");
  std::string build_input;
  build.bind("--input", build_input, "Embedding store to index");

  Command search(app, "search", "Top-k retrieval against an index");
  SearchArgs search_args;
  search.bind("--query-text", search_args.query_texts, "Text query (repeatable)");
  search.bind("--queries", search_args.queries, "Query manifest (JSONL)");
  search.bind("--query-store", search_args.query_store, "Precomputed query embeddings");

  Command rerank(app, "rerank", "Reorder rankings with a pointwise scorer");
  RerankArgs rerank_args;
  rerank.bind("--rankings", rerank_args.rankings, "Rankings JSONL to rerank");
  rerank.bind("--queries", rerank_args.queries, "Query manifest (JSONL)");
  rerank.bind("--scorer", rerank_args.scorer, "Scorer backend")->check(CLI::IsMember({"toy", "remote"}));
  rerank.bind("--scorer-model", rerank_args.scorer_model, "Toy scorer JSON");

  Command localize_cmd(app, "localize", "Predict moment windows from frame embeddings");
  std::string loc_queries, loc_videos;
  localize_cmd.bind("--queries", loc_queries, "Query embedding store");
  localize_cmd.bind("--videos", loc_videos, "Videos JSONL: query_id, frames, frame_hop_s, duration_s");

  Command compose(app, "compose", "Composed video retrieval");
  ComposeArgs compose_args;
  compose.bind("--queries", compose_args.queries, "Composed query manifest (JSONL)");
  compose.bind("--source-frames", compose_args.source_frames, "Source video frame references");
  compose.bind("--modification", compose_args.modification, "Modification text");
  compose.flag("--ablate-modification", compose_args.ablate, "Synthetic provider ignores the modification");

  Command train(app, "train-toy", "Train the toy adapter (and optionally the scorer)");
  TrainArgs train_args;
  train.bind("--adapter-out", train_args.adapter_out, "Write the trained adapter JSON");
  train.bind("--scorer-out", train_args.scorer_out, "Also train the scorer and write its JSON");

  Command eval(app, "eval", "Compute retrieval or moment metrics");
  EvalArgs eval_args;
  eval.bind("--task", eval_args.task, "Task")->check(CLI::IsMember({"retrieval", "moment"}));
  eval.bind("--predictions", eval_args.predictions, "Rankings or moments JSONL");
  eval.bind("--gt", eval_args.gt, "Ground truth JSONL");
  eval.bind("--ks", eval_args.ks, "Comma-separated k values");
  eval.bind("--thresholds", eval_args.thresholds, "Comma-separated IoU thresholds (moment)");

  std::vector<Command*> commands{&embed, &build, &search, &rerank, &localize_cmd, &compose, &train, &eval};
  for (auto* cmd : commands) cmd->add_common(common);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "vidret: " << e.what() << "\n";
    return kExitUsage;
  }
  // CLI11 reports subcommand --help through the subcommand's own exception
  // path; handled above. Identify the chosen subcommand.
  Command* active = nullptr;
  for (auto* cmd : commands) {
    if (cmd->app()->parsed()) active = cmd;
  }

  try {
    json config = json::object();
    if (!common.config.empty()) {
      try {
        config = json::parse(read_text_file(common.config));
      } catch (const json::exception& e) {
        throw UsageError("cannot parse config: " + std::string(e.what()));
      }
      if (!config.is_object()) throw UsageError("config must be a JSON object");
      active->merge(config);
    }
    if (active == &embed) return cmd_embed(common, config, manifest, out);
    if (active == &build) return cmd_build_index(common, build_input, out);
    if (active == &search) return cmd_search(common, config, search_args, out);
    if (active == &rerank) return cmd_rerank(common, config, rerank_args, out);
    if (active == &localize_cmd) return cmd_localize(common, config, loc_queries, loc_videos, out);
    if (active == &compose) return cmd_compose(common, config, compose_args, out);
    if (active == &train) return cmd_train_toy(common, config, train_args, out, err);
    return cmd_eval(common, eval_args, out);
  } catch (const UsageError& e) {
    err << "vidret: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "vidret: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace vidret::cli
