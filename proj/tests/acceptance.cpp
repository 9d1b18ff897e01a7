// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>

#include "test_util.hpp"
#include "vidret/cli.hpp"
#include "vidret/composed.hpp"
#include "vidret/fixtures.hpp"
#include "vidret/formats.hpp"
#include "vidret/moment.hpp"
#include "vidret/objectives.hpp"
#include "vidret/store.hpp"
#include "vidret/trainer.hpp"

namespace vidret {
namespace {

// Pinned tolerances and limits.
constexpr double kGradTol = 1e-5;
constexpr double kGradSeconds = 5.0;
constexpr double kLogNTol = 1e-9;
constexpr double kLn2Tol = 1e-12;
constexpr double kSearchSeconds = 10.0;
constexpr double kTrainRecall = 0.95;
constexpr double kTrainSeconds = 60.0;
constexpr double kRerankOrdering = 0.90;
constexpr double kChi2Alpha = 0.01;
constexpr double kMomentRecall = 0.90;
constexpr double kMomentMiou = 0.70;
constexpr double kMomentBoundaryFrames = 1.0;
constexpr double kMomentSeconds = 30.0;
constexpr int kPropertyCases = 100;

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

double rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
}

double chi2_pvalue(const std::vector<int>& counts) {
  double total = 0;
  for (int c : counts) total += c;
  const double expected = total / counts.size();
  double stat = 0;
  for (int c : counts) stat += (c - expected) * (c - expected) / expected;
  boost::math::chi_squared_distribution<double> dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

// Shared acceptance world.
SyntheticWorld acceptance_world() {
  SyntheticWorld w;
  w.seed = 1;
  w.latent_dim = 16;
  w.raw_dim = 32;
  w.noise_sigma = 0.1;
  w.num_concepts = 256;
  return w;
}

TrainConfig acceptance_train() {
  TrainConfig c;
  c.seed = 1;
  c.epochs = 30;
  c.batch_size = 32;
  return c;
}

// 1 ------------------------------------------------------------------------
Outcome gradients() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  const double h = 1e-6;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(derive_seed(1, "acceptance-grad", seed));
    const std::size_t n = 2 + rng.uniform_index(7);
    const std::size_t dim = 2 + rng.uniform_index(15);
    InfoNceBatch b;
    b.temperature = rng.uniform(0.05, 1.0);
    for (std::size_t i = 0; i < n; ++i) b.queries.emplace_back(testing::random_vector(rng, dim));
    for (std::size_t i = 0; i < n; ++i) b.candidates.emplace_back(testing::random_vector(rng, dim));
    const auto r = infonce_grad(b);
    std::vector<double> ana, num;
    for (int side = 0; side < 2; ++side) {
      auto& vs = side == 0 ? b.queries : b.candidates;
      const auto& gs = side == 0 ? r.d_queries : r.d_candidates;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < dim; ++d) {
          const auto saved = vs[i];
          std::vector<double> x(saved.values().begin(), saved.values().end());
          x[d] += h;
          vs[i] = EmbeddingVector(x);
          const double up = infonce_loss(b);
          x[d] -= 2 * h;
          vs[i] = EmbeddingVector(x);
          const double down = infonce_loss(b);
          vs[i] = saved;
          num.push_back((up - down) / (2 * h));
          ana.push_back(gs[i][d]);
        }
      }
    }
    worst = std::max(worst, rel_error(ana, num));

    const double s = rng.uniform(0.01, 0.99), sn = rng.uniform(0.01, 0.99);
    for (int y : {0, 1}) {
      const double fd = (bce_loss(s + h, y) - bce_loss(s - h, y)) / (2 * h);
      worst = std::max(worst, rel_error({bce_grad(s, y)}, {fd}));
    }
    const double fg = (preference_loss(s + h, sn) - preference_loss(s - h, sn)) / (2 * h);
    const double fn = (preference_loss(s, sn + h) - preference_loss(s, sn - h)) / (2 * h);
    const double g = preference_grad(s, sn);
    worst = std::max(worst, rel_error({g, -g}, {fg, fn}));
  }
  const double t = seconds_since(t0);
  return {worst <= kGradTol && t < kGradSeconds,
          fmt("max rel err %.2e", worst) + fmt(" (tol %.0e)", kGradTol) + fmt(", %.2f s", t) +
              fmt(" (limit %.0f s)", kGradSeconds)};
}

// 2 ------------------------------------------------------------------------
Outcome loss_values() {
  double worst_logn = 0.0;
  for (std::size_t n : {1u, 2u, 5u, 8u, 32u}) {
    InfoNceBatch b;
    for (std::size_t i = 0; i < n; ++i) {
      b.queries.emplace_back(std::vector<double>{0.5, -1.0, 2.0, 0.25});
      b.candidates.emplace_back(std::vector<double>{0.5, -1.0, 2.0, 0.25});
    }
    worst_logn = std::max(worst_logn, std::abs(infonce_loss(b) - std::log(static_cast<double>(n))));
  }
  double worst_ln2 = 0.0;
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(-5, 5);
    worst_ln2 = std::max(worst_ln2, std::abs(preference_loss(x, x) - std::log(2.0)));
  }
  bool joint_exact = true;
  const JointLossWeights w{0.5, 0.2, 0.3};
  for (int i = 0; i < 100; ++i) {
    const double a = rng.uniform(0, 10), b = rng.uniform(0, 10), c = rng.uniform(0, 10);
    joint_exact = joint_exact && joint_loss(w, a, b, c) == 0.5 * a + 0.2 * b + 0.3 * c;
  }
  return {worst_logn <= kLogNTol && worst_ln2 <= kLn2Tol && joint_exact,
          fmt("|L - ln N| %.1e", worst_logn) + fmt(" (tol %.0e)", kLogNTol) +
              fmt(", |pref(x,x) - ln 2| %.1e", worst_ln2) + fmt(" (tol %.0e)", kLn2Tol) +
              ", joint weighted sum " + (joint_exact ? "exact" : "INEXACT")};
}

// 3 ------------------------------------------------------------------------
Outcome search_exactness() {
  const auto t0 = Clock::now();
  int matched = 0;
  Rng rng(3);
  for (std::uint64_t c = 0; c < 50; ++c) {
    const std::size_t n = c == 0 ? 1000 : 1 + rng.uniform_index(1000);
    const std::size_t dim = c == 0 ? 64 : 1 + rng.uniform_index(64);
    const auto corpus = testing::random_corpus(derive_seed(3, "corpus", c), n, dim);
    const auto index = build_index(corpus);
    const auto q = testing::random_vector(rng, dim);
    const int k = 1 + static_cast<int>(rng.uniform_index(std::min<std::size_t>(n, 100)));
    matched += testing::ids_of(search(index, EmbeddingVector(q), k)) ==
               testing::brute_force_ids(corpus, q, static_cast<std::size_t>(k));
  }
  const double t = seconds_since(t0);
  return {matched == 50 && t < kSearchSeconds,
          std::to_string(matched) + "/50 corpora match the full-sort oracle" + fmt(", %.2f s", t) +
              fmt(" (limit %.0f s)", kSearchSeconds)};
}

// 4 ------------------------------------------------------------------------
struct Trained {
  EmbedderTraining embedder;
  double seconds = 0.0;
};

const Trained& trained_embedder() {
  static const Trained t = [] {
    const auto t0 = Clock::now();
    Trained out{train_embedder(acceptance_world(), acceptance_train())};
    out.seconds = seconds_since(t0);
    return out;
  }();
  return t;
}

Outcome toy_training() {
  const auto& t = trained_embedder();
  const auto& h = t.embedder.history;
  const double r1 = h.back().r_at_1.value_or(0.0);
  const bool ok = r1 >= kTrainRecall && h.back().loss <= h.front().loss && t.seconds < kTrainSeconds;
  return {ok, fmt("held-out R@1 %.4f", r1) + fmt(" (min %.2f)", kTrainRecall) +
                  fmt(", loss %.4f", h.front().loss) + fmt(" -> %.4f", h.back().loss) +
                  fmt(", %.2f s", t.seconds) + fmt(" (limit %.0f s)", kTrainSeconds)};
}

// 5 ------------------------------------------------------------------------
Outcome reranker() {
  const auto world = acceptance_world();
  const auto cfg = acceptance_train();
  const auto& adapter = trained_embedder().embedder.adapter;
  const SyntheticGenerator gen(world);
  const auto split = split_concepts(world, cfg);

  std::vector<CorpusItem> corpus;
  for (int i = 0; i < world.num_concepts; ++i) {
    corpus.push_back({"c" + std::to_string(i), ItemKind::kVideo, adapter.apply(gen.view(i, View::kCandidate))});
  }
  const auto index = build_index(corpus);
  RerankExamples examples;
  for (int i = split.train_begin; i < split.train_end; ++i) {
    examples.queries.push_back(adapter.apply(gen.view(i, View::kQuery)));
    examples.gt_ids.push_back("c" + std::to_string(i));
  }
  MinerConfig miner;
  miner.seed = cfg.seed;
  const auto trained = train_reranker(examples, index, miner, JointLossWeights{}, cfg);

  // Held-out triplets: (query, gt, hard negative) and (query, gt, random negative).
  const SyntheticProvider base(world);
  const AdaptedProvider provider(base, adapter);
  const ToyScorerAdapter scorer(trained.scorer, index, provider);
  Rng neg_rng(derive_seed(cfg.seed, "acceptance-triplets"));
  int ordered = 0, triplets = 0;
  PipelineConfig embed_only;
  embed_only.k_candidates = miner.k_top;
  PipelineConfig reranked = embed_only;
  reranked.scorer = ScorerKind::kToy;
  int hits_embed = 0, hits_rerank = 0;
  for (int i = split.held_begin; i < split.held_end; ++i) {
    const auto spec = QuerySpec::from_text(concept_label(i, View::kQuery));
    const std::string gt = "c" + std::to_string(i);
    const auto top = retrieve(index, spec, provider, embed_only);
    const auto negs = std::vector<std::string>{mine_hard_negative(top, gt, miner, neg_rng),
                                               sample_random_negative(index.ids(), gt, neg_rng)};
    const auto s_gt = scorer.score(spec, {gt})[0];
    for (const auto& n : negs) {
      ++triplets;
      ordered += s_gt > scorer.score(spec, {n})[0];
    }
    hits_embed += top.entries[0].item_id == gt;
    hits_rerank += retrieve(index, spec, provider, reranked, &scorer).entries[0].item_id == gt;
  }
  const double held = split.held_end - split.held_begin;
  const double frac = static_cast<double>(ordered) / triplets;
  const double r_embed = hits_embed / held, r_rerank = hits_rerank / held;
  return {frac >= kRerankOrdering && r_rerank >= r_embed,
          fmt("gt above negatives on %.4f", frac) + fmt(" of held-out triplets (min %.2f)", kRerankOrdering) +
              fmt(", R@1 embedding-only %.4f", r_embed) + fmt(" vs reranked %.4f", r_rerank) +
              " (reranked must not be lower)"};
}

// 6 ------------------------------------------------------------------------
Outcome miner() {
  RankedList ranked;
  for (int i = 1; i <= 50; ++i) ranked.entries.push_back({"r" + std::to_string(i), 1.0 - 0.01 * i});
  const MinerConfig cfg;  // range [5, 50]
  std::vector<int> outside(46, 0), inside(46, 0);
  bool in_range = true, never_gt = true;
  for (std::uint64_t d = 0; d < 10000; ++d) {
    Rng a(derive_seed(6, "miner-outside", d));
    const int r = mine_hard_negative_rank(ranked, "r1", cfg, a);
    in_range = in_range && r >= 5 && r <= 50;
    if (r >= 5 && r <= 50) ++outside[r - 5];
    Rng b(derive_seed(6, "miner-inside", d));
    const auto id = mine_hard_negative(ranked, "r17", cfg, b);
    never_gt = never_gt && id != "r17";
    const int rank = std::stoi(id.substr(1));
    in_range = in_range && rank >= 5 && rank <= 50;
    if (rank >= 5 && rank <= 50) ++inside[rank - 5];
  }
  inside.erase(inside.begin() + (17 - 5));
  const double p_out = chi2_pvalue(outside), p_in = chi2_pvalue(inside);
  return {p_out > kChi2Alpha && p_in > kChi2Alpha && in_range && never_gt,
          fmt("chi2 p %.3f", p_out) + fmt(" (gt outside range), %.3f", p_in) +
              fmt(" (gt inside range), min %.2f", kChi2Alpha) + ", ranks in [5,50]: " +
              (in_range ? "yes" : "NO") + ", gt returned: " + (never_gt ? "never" : "YES")};
}

// 7 ------------------------------------------------------------------------
Outcome moments() {
  const auto t0 = Clock::now();
  const MomentConfig cfg;
  auto predict = [&](const MomentFixture& f) {
    MomentPredictions p;
    for (const auto& c : f.cases) p[c.query_id] = localize(c.query, c.frames, f.frame_hop_s, f.duration_s, cfg);
    return p;
  };
  const auto noisy = gen_moment_fixture(7, 200, 100, SegmentSpec{}, 3.0);
  const auto p = predict(noisy);
  const double r = moment_recall(p, noisy.gt, 0.5, 1);
  const double miou = mean_iou(p, noisy.gt);

  const auto clean = gen_moment_fixture(7, 200, 100, SegmentSpec{}, std::numeric_limits<double>::infinity());
  const auto pc = predict(clean);
  double worst = 0.0;
  for (const auto& [id, gt] : clean.gt) {
    const auto& ws = pc.at(id);
    if (ws.empty()) {
      worst = std::numeric_limits<double>::infinity();
      continue;
    }
    worst = std::max({worst, std::abs(ws[0].start_s - gt.start_s) / clean.frame_hop_s,
                      std::abs(ws[0].end_s - gt.end_s) / clean.frame_hop_s});
  }
  const double t = seconds_since(t0);
  return {r >= kMomentRecall && miou >= kMomentMiou && worst <= kMomentBoundaryFrames && t < kMomentSeconds,
          fmt("R@1 IoU0.5 %.3f", r) + fmt(" (min %.2f)", kMomentRecall) + fmt(", mIoU %.3f", miou) +
              fmt(" (min %.2f)", kMomentMiou) + fmt(", noiseless boundary error %.0f", worst) +
              fmt(" frames (max %.0f)", kMomentBoundaryFrames) + fmt(", %.2f s", t) +
              fmt(" (limit %.0f s)", kMomentSeconds)};
}

// 8 ------------------------------------------------------------------------
class HashScorer : public Scorer {
 public:
  std::vector<double> score(const QuerySpec& q, const std::vector<std::string>& ids) const override {
    std::vector<double> out;
    for (const auto& id : ids) out.push_back(static_cast<double>(fnv1a64(*q.text + id) % 7) / 6.0);
    return out;
  }
};

Outcome invariants() {
  Rng rng(8);
  int perm = 0, argmax = 0, mono = 0, nms = 0;
  const HashScorer scorer;
  for (int c = 0; c < kPropertyCases; ++c) {
    // rerank permutation
    RankedList in{"q", {}};
    const std::size_t n = 1 + rng.uniform_index(50);
    for (std::size_t i = 0; i < n; ++i) in.entries.push_back({"i" + std::to_string(i), rng.uniform01()});
    auto out = testing::ids_of(rerank(in, QuerySpec::from_text("q" + std::to_string(c)), scorer));
    auto ids = testing::ids_of(in);
    std::sort(out.begin(), out.end());
    std::sort(ids.begin(), ids.end());
    perm += out == ids;

    // dual-softmax row argmax on diagonal-dominant matrices
    const std::size_t m = 2 + rng.uniform_index(10);
    Matrix s(m, m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) s(i, j) = rng.uniform(-1, 0.4);
      s(i, i) = rng.uniform(0.45, 1);
    }
    const auto d = dual_softmax(s, rng.uniform(1, 200));
    bool ok = true;
    for (std::size_t i = 0; i < m; ++i) {
      const auto row = d.row(i);
      ok = ok && static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()) == i;
    }
    argmax += ok;

    // expand_window monotone in alpha at a detected peak
    TemporalSignal sig;
    const int T = 20 + static_cast<int>(rng.uniform_index(80));
    for (int t = 0; t < T; ++t) sig.values.push_back(rng.uniform(-1, 1));
    sig.duration_s = T;
    const auto sm = gaussian_smooth(sig, 2.0);
    auto peaks = detect_peaks(sm, 0.0);
    bool mono_ok = true;
    if (peaks.empty()) peaks.push_back(static_cast<int>(std::max_element(sm.values.begin(), sm.values.end()) -
                                                        sm.values.begin()));
    double a1 = rng.uniform(0.01, 1), a2 = rng.uniform(0.01, 1);
    if (a1 > a2) std::swap(a1, a2);
    for (int tp : peaks) {
      const auto w1 = expand_window(sm, tp, a1), w2 = expand_window(sm, tp, a2);
      mono_ok = mono_ok && w1.first <= w2.first && w1.second >= w2.second;
    }
    mono += mono_ok;

    // NMS pairwise IoU
    std::vector<MomentWindow> ws;
    const int k = 1 + static_cast<int>(rng.uniform_index(20));
    for (int i = 0; i < k; ++i) {
      const double st = rng.uniform(0, 50);
      ws.emplace_back(st, st + rng.uniform(0.5, 20), rng.uniform01());
    }
    const double thr = rng.uniform(0.05, 0.95);
    const auto kept = temporal_nms(ws, thr, 10);
    bool nms_ok = true;
    for (std::size_t i = 0; i < kept.size(); ++i) {
      for (std::size_t j = i + 1; j < kept.size(); ++j) nms_ok = nms_ok && interval_iou(kept[i], kept[j]) <= thr;
    }
    nms += nms_ok;
  }
  const bool ok = perm == kPropertyCases && argmax == kPropertyCases && mono == kPropertyCases &&
                  nms == kPropertyCases;
  const auto of = "/" + std::to_string(kPropertyCases);
  return {ok, "rerank permutation " + std::to_string(perm) + of + ", dual-softmax argmax " +
                  std::to_string(argmax) + of + ", alpha monotone " + std::to_string(mono) + of +
                  ", NMS pairwise IoU " + std::to_string(nms) + of};
}

// 9 ------------------------------------------------------------------------
std::string cli_bytes(const std::vector<std::string>& args, const std::filesystem::path& out) {
  std::ostringstream o, e;
  auto full = args;
  full.push_back("--out");
  full.push_back(out.string());
  if (cli::run(full, o, e) != cli::kExitOk) return "<exit " + e.str() + ">";
  return read_text_file(out);
}

Outcome io_exactness() {
  int round_trips = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng rng(s);
    std::vector<CorpusItem> items;
    const std::size_t n = rng.uniform_index(20), dim = 1 + rng.uniform_index(64);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> v(dim);
      for (double& x : v) x = static_cast<float>(rng.normal());
      items.push_back({"id-" + std::to_string(rng.next_u64()), ItemKind::kVideo, EmbeddingVector(v)});
    }
    round_trips += decode_store(encode_store(items)) == items;
  }

  testing::TempDir dir;
  std::string manifest;
  for (int i = 0; i < 20; ++i) {
    manifest += "{\"id\":\"v" + std::to_string(i) + "\",\"kind\":\"video\",\"frame_paths\":[\"" +
                concept_label(i, View::kCandidate) + "\"]}\n";
  }
  write_text_file(dir / "m.jsonl", manifest);
  write_text_file(dir / "cfg.json", R"({"world":{"num_concepts":64},"train":{"epochs":3}})");
  const std::vector<std::vector<std::string>> commands{
      {"embed", "--seed", "9", "--manifest", (dir / "m.jsonl").string()},
      {"search", "--seed", "9", "--index", (dir / "index.bin").string(), "--query-text", "concept:3/view:q",
       "--query-text", "a boat"},
      {"compose", "--seed", "9", "--index", (dir / "index.bin").string(), "--source-frames", "f1",
       "--source-frames", "f2", "--modification", "at night"},
      {"train-toy", "--seed", "9", "--config", (dir / "cfg.json").string()},
  };
  int identical = 0;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    const auto a = cli_bytes(commands[c], dir / ("a" + std::to_string(c)));
    if (c == 0) write_text_file(dir / "index.bin", a);
    const auto b = cli_bytes(commands[c], dir / ("b" + std::to_string(c)));
    identical += a == b && !a.empty() && a[0] != '<';
  }
  const int nc = static_cast<int>(commands.size());
  return {round_trips == 50 && identical == nc,
          "store round-trips " + std::to_string(round_trips) + "/50, identical CLI artifacts " +
              std::to_string(identical) + "/" + std::to_string(nc)};
}

// 10 -----------------------------------------------------------------------
Outcome composed() {
  const auto f = gen_composed_fixture(10, 100);
  const auto index = build_index(f.corpus);
  const SyntheticProvider follow(f.world, ComposeRule::kFollow);
  const SyntheticProvider ablated(f.world, ComposeRule::kIgnoreModification);
  std::vector<RankedList> good, bad;
  for (const auto& q : f.queries) {
    good.push_back(composed_retrieve(index, q.spec, follow, 10, q.id));
    bad.push_back(composed_retrieve(index, q.spec, ablated, 10, q.id));
  }
  const double r_good = recall_at_k(good, f.gt, 1), r_bad = recall_at_k(bad, f.gt, 1);
  return {r_good == 1.0 && r_bad < r_good,
          fmt("R@1 rule-following %.3f", r_good) + " (must be 1)" + fmt(", modification ablated %.3f", r_bad) +
              " (must be lower)"};
}

}  // namespace
}  // namespace vidret

int main() {
  using vidret::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"gradient correctness", vidret::gradients},
      {"loss values", vidret::loss_values},
      {"search exactness", vidret::search_exactness},
      {"toy contrastive training", vidret::toy_training},
      {"reranker training", vidret::reranker},
      {"negative miner", vidret::miner},
      {"moment pipeline", vidret::moments},
      {"pipeline invariants", vidret::invariants},
      {"I/O bit-exactness", vidret::io_exactness},
      {"composed retrieval", vidret::composed},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
