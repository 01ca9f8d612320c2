// Acceptance suite: one pass/fail line per criterion, everything pinned.
// Runs on one CPU core; --jobs N parallelizes independent sweep arms.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iostream>
#include <sstream>
#include <vector>

#include "glunet/bench.hpp"
#include "glunet/checkpoint.hpp"
#include "glunet/corpus.hpp"
#include "glunet/gradsuite.hpp"
#include "glunet/presets.hpp"
#include "glunet/sweeps.hpp"
#include "glunet/train.hpp"

namespace glunet {
namespace {

struct CriterionResult {
  int number = 0;
  bool pass = false;
  std::string detail;
};

struct DeskCorpus {
  Vocabulary vocab;
  std::vector<std::vector<int>> train;
  std::vector<std::vector<int>> valid;
};

DeskCorpus make_desk_corpus(std::uint64_t seed) {
  CorpusOptions opts;
  opts.seed = seed;
  opts.min_bytes = 250 * 1024;
  const std::string text = generate_corpus(opts);
  DeskCorpus d;
  d.vocab = Vocabulary::build(tokenize_whitespace(text), 1);
  const auto seqs = encode_lines(text, d.vocab, SequenceMode::Sentence);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    if (i % 10 == 9) d.valid.push_back(seqs[i]);
    else d.train.push_back(seqs[i]);
  }
  return d;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

// --- 1 -----------------------------------------------------------------

CriterionResult criterion_gradients() {
  CriterionResult r{1};
  const auto entries = run_gradcheck_suites(7);
  double worst = 0;
  std::string worst_name;
  for (const auto& e : entries) {
    if (e.max_rel_err > worst) {
      worst = e.max_rel_err;
      worst_name = e.name;
    }
  }
  r.pass = worst < 1e-4 && !entries.empty();
  r.detail = "finite-difference suite over " + std::to_string(entries.size()) +
             " operations, worst rel err " + fmt(worst) + " (" + worst_name + "), limit 1e-4";
  return r;
}

// --- 2 -----------------------------------------------------------------

CriterionResult criterion_gating_identities() {
  CriterionResult r{2};
  Rng rng(11);
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const TensorD X = uniform_tensor<double>(rng, {6, 5}, -4, 4);
    {
      GraphD g;
      const int x = g.leaf(X);
      g.backward(sum(g, mul(g, x, sigmoid(g, x))));
      for (std::size_t i = 0; i < X.data.size(); ++i) {
        const double s = 1.0 / (1.0 + std::exp(-X.data[i]));
        worst = std::max(worst, std::abs(g.grad(x).data[i] - (s + X.data[i] * s * (1 - s))));
      }
    }
    {
      GraphD g;
      const int x = g.leaf(X);
      g.backward(sum(g, mul(g, tanh(g, x), sigmoid(g, x))));
      for (std::size_t i = 0; i < X.data.size(); ++i) {
        const double t = std::tanh(X.data[i]);
        const double s = 1.0 / (1.0 + std::exp(-X.data[i]));
        worst = std::max(worst, std::abs(g.grad(x).data[i] - ((1 - t * t) * s + s * (1 - s) * t)));
      }
    }
  }
  r.pass = worst <= 1e-10;
  r.detail = "closed-form gating gradients vs autodiff, worst abs err " + fmt(worst) + ", limit 1e-10";
  return r;
}

// --- 3 -----------------------------------------------------------------

CriterionResult criterion_causality() {
  CriterionResult r{3};
  const std::vector<GateKind> gates = {GateKind::GLU, GateKind::GTU, GateKind::ReLU,
                                       GateKind::Tanh, GateKind::Linear, GateKind::Bilinear};
  const std::vector<std::string> presets = {"gcnn8-tiny", "gcnn8b-tiny", "gcnnsweep-train"};
  const int rows = 32;
  long checks = 0;
  bool ok = true;
  Rng seq_rng(21);
  for (const auto& preset : presets) {
    for (GateKind gate : gates) {
      ArchSpec arch = load_arch(preset);
      arch.gate = gate;
      Rng rng(31);
      ModelF model(arch, 90, rng, true);
      std::vector<int> tokens(rows);
      for (auto& t : tokens) t = static_cast<int>(seq_rng() % 90);
      GraphF g0;
      g0.grad_enabled = false;
      ParamBinder<float> b0(g0);
      const TensorF base = g0.value(model.forward_states(g0, b0, tokens));
      for (int j : {1, rows / 2, rows - 1}) {
        std::vector<int> perturbed = tokens;
        perturbed[j] = (tokens[j] + 7) % 90;
        GraphF g1;
        g1.grad_enabled = false;
        ParamBinder<float> b1(g1);
        const TensorF out = g1.value(model.forward_states(g1, b1, perturbed));
        for (int i = 0; i < j && ok; ++i) {
          for (int c = 0; c < base.dim(1); ++c) {
            if (base.at(i, c) != out.at(i, c)) {
              ok = false;
              r.detail = "leak at preset " + preset + " gate " + std::string(to_string(gate)) +
                         " row " + std::to_string(i) + " after perturbing " + std::to_string(j);
              break;
            }
          }
        }
        ++checks;
      }
    }
  }
  r.pass = ok;
  if (ok) {
    r.detail = "6 gate kinds x 3 presets x 3 perturbation sites (" + std::to_string(checks) +
               " probes), outputs before the perturbed position bit-identical";
  }
  return r;
}

// --- 4 -----------------------------------------------------------------

CriterionResult criterion_softmax_oracles() {
  CriterionResult r{4};
  Rng rng(41);
  const int d = 32, V = 1000, N = 8;
  auto head = AdaptiveSoftmaxHeadT<float>::init(d, AdaptiveCutoffs::for_vocab({100, 400, 1000}, V), 4,
                                                rng, true);
  const TensorF H = uniform_tensor<float>(rng, {N, d}, -2, 2);
  std::vector<double> mass(N, 0.0);
  for (int w = 0; w < V; ++w) {
    GraphF g;
    g.grad_enabled = false;
    ParamBinder<float> binder(g);
    const int lp = head.logprob(g, binder, g.leaf(H), std::vector<int>(N, w));
    for (int i = 0; i < N; ++i) mass[i] += std::exp(static_cast<double>(g.value(lp).at(i)));
  }
  double worst_mass = 0;
  for (double m : mass) worst_mass = std::max(worst_mass, std::abs(m - 1.0));

  // degenerate single cluster vs full softmax with shared parameters
  auto full = FullSoftmaxHeadT<float>::init(d, V, rng, false);
  auto single = AdaptiveSoftmaxHeadT<float>::init(d, AdaptiveCutoffs{{V}}, 4, rng, false);
  single.head_weight.v = full.weight.v;
  single.head_bias.v = full.bias.v;
  std::vector<int> targets(N);
  for (auto& t : targets) t = static_cast<int>(rng() % V);
  GraphF g1, g2;
  ParamBinder<float> b1(g1), b2(g2);
  const auto& lp_full = g1.value(full.logprob(g1, b1, g1.leaf(H), targets));
  const auto& lp_single = g2.value(single.logprob(g2, b2, g2.leaf(H), targets));
  double worst_single = 0;
  for (int i = 0; i < N; ++i) {
    worst_single = std::max(worst_single, std::abs(static_cast<double>(lp_full.at(i) - lp_single.at(i))));
  }

  r.pass = worst_mass <= 1e-5 && worst_single <= 1e-6;
  r.detail = "|V|=1000 cutoffs 100/400/1000: enumerated mass off by " + fmt(worst_mass) +
             " (limit 1e-5); single-cluster vs full softmax off by " + fmt(worst_single) + " (limit 1e-6)";
  return r;
}

// --- 5 -----------------------------------------------------------------

CriterionResult criterion_perplexity_sanity() {
  CriterionResult r{5};
  // forced-uniform model over a 100-word vocabulary
  std::vector<std::string> words;
  for (int i = 0; i < 97; ++i) words.push_back("w" + std::to_string(i));
  std::vector<std::string> corpus;
  for (int rep = 0; rep < 3; ++rep) corpus.insert(corpus.end(), words.begin(), words.end());
  const Vocabulary vocab = Vocabulary::build(corpus, 1);
  Rng rng(51);
  ModelF uniform_model(parse_arch("embed=8\nconv=[3,8]x1\ngate=glu\n"), vocab.size(), rng, false);
  auto& head = std::get<FullSoftmaxHeadT<float>>(uniform_model.head);
  for (auto& x : head.weight.v.data) x = 0.0f;
  for (auto& x : head.bias.v.data) x = 0.0f;
  const auto seqs = encode_lines("w1 w2 w3 w4 w5\nw6 w7 w8", vocab, SequenceMode::Sentence);
  const double uniform_ppl = perplexity(uniform_model, seqs, SequenceMode::Sentence);
  const double uniform_err = std::abs(uniform_ppl - 100.0);

  // batched vs unbatched agreement on a real model
  DeskCorpus desk = make_desk_corpus(5);
  Rng rng2(52);
  ModelF model(load_arch("gcnnsweep-train"), desk.vocab.size(), rng2, true);
  const double whole = perplexity_whole_stream(model, concat_stream(desk.valid));
  const double lanes = perplexity(model, desk.valid, SequenceMode::Paragraph, 4, 16);
  const double sent_a = perplexity(model, desk.valid, SequenceMode::Sentence, 4);
  const double sent_b = perplexity(model, desk.valid, SequenceMode::Sentence, 64);
  const double rel1 = std::abs(lanes - whole) / whole;
  const double rel2 = std::abs(sent_a - sent_b) / sent_a;

  r.pass = uniform_err <= 1e-4 && rel1 <= 1e-4 && rel2 <= 1e-4;
  r.detail = "uniform head PPL " + fmt(uniform_ppl) + " (want 100 +- 1e-6: off " + fmt(uniform_err) +
             "); contiguous-vs-whole rel " + fmt(rel1) + ", batch-size rel " + fmt(rel2) + " (limit 1e-4)";
  // the uniform tolerance in the spec is 1e-6 on a value of 100
  r.pass = std::abs(uniform_ppl - 100.0) <= 1e-6 * 100.0 && rel1 <= 1e-4 && rel2 <= 1e-4;
  return r;
}

// --- 6/7 -----------------------------------------------------------------

SweepOptions sweep_options(std::uint64_t seed, int jobs, long steps) {
  SweepOptions sw;
  sw.steps = steps;
  sw.batch_size = 16;
  sw.seeds = 3;
  sw.first_seed = seed;
  sw.jobs = jobs;
  sw.embed = 48;
  sw.width = 48;
  sw.depth = 5;
  sw.kernel = 4;
  sw.eval_every = -1;  // final perplexity only; curves are not asserted here
  return sw;
}

CriterionResult criterion_gating_ordering(const DeskCorpus& desk, int jobs) {
  CriterionResult r{6};
  const auto sw = sweep_options(1, jobs, 300);
  const auto report = gating_sweep(desk.train, desk.valid, desk.vocab.size(),
                                   {GateKind::GLU, GateKind::GTU, GateKind::Tanh}, sw);
  // parameter audit: matched within 5%
  std::int64_t pmin = std::numeric_limits<std::int64_t>::max(), pmax = 0;
  for (const auto& arm : report.arms) {
    pmin = std::min(pmin, arm.params);
    pmax = std::max(pmax, arm.params);
  }
  const double spread = static_cast<double>(pmax - pmin) / static_cast<double>(pmax);
  const double glu = report.median_ppl("glu");
  const double gtu = report.median_ppl("gtu");
  const double tanh_ppl = report.median_ppl("tanh");
  r.pass = spread <= 0.05 && glu <= gtu && glu <= tanh_ppl && gtu < tanh_ppl;
  r.detail = "median-of-3 final PPL: glu " + fmt(glu) + ", gtu " + fmt(gtu) + ", tanh " + fmt(tanh_ppl) +
             "; params matched within " + fmt(100 * spread) + "% (limit 5%)";
  return r;
}

CriterionResult criterion_nonlinearity_ordering(const DeskCorpus& desk, int jobs) {
  CriterionResult r{7};
  const auto sw = sweep_options(1, jobs, 300);
  const auto report = nonlinearity_sweep(desk.train, desk.valid, desk.vocab.size(), sw);
  const double glu = report.median_ppl("glu");
  const double bilinear = report.median_ppl("bilinear");
  const double linear = report.median_ppl("linear");

  // linear-stack collapse oracle
  Rng rng(71);
  ModelF linear_model(parse_arch("embed=12\nconv=[3,12]x2\nconv=[2,20]x1\ngate=linear\n"),
                      desk.vocab.size(), rng, true);
  const LinearAffineMap map = collapse_linear_model(linear_model);
  Rng seq_rng(72);
  std::vector<int> tokens(24);
  for (auto& t : tokens) t = static_cast<int>(seq_rng() % desk.vocab.size());
  GraphF g;
  g.grad_enabled = false;
  ParamBinder<float> binder(g);
  const TensorF H = g.value(linear_model.forward_states(g, binder, tokens));
  TensorF E({24, 12});
  for (int i = 0; i < 24; ++i) {
    for (int c = 0; c < 12; ++c) E.at(i, c) = linear_model.embedding.v.at(tokens[i], c);
  }
  const TensorF collapsed = apply_affine(map, E);
  double worst_rel = 0;
  for (int i = linear_model.receptive_field() - 1; i < 24; ++i) {
    for (int c = 0; c < collapsed.dim(1); ++c) {
      const double rel = std::abs(collapsed.at(i, c) - H.at(i, c)) /
                         std::max(1.0, std::abs(static_cast<double>(collapsed.at(i, c))));
      worst_rel = std::max(worst_rel, rel);
    }
  }

  r.pass = glu < bilinear && bilinear < linear && worst_rel <= 1e-4;
  r.detail = "median-of-3 final PPL: glu " + fmt(glu) + " < bilinear " + fmt(bilinear) + " < linear " +
             fmt(linear) + "; collapse oracle rel err " + fmt(worst_rel) + " (limit 1e-4)";
  return r;
}

// --- 8 -----------------------------------------------------------------

CriterionResult criterion_training_ablation(const DeskCorpus& desk, int jobs) {
  CriterionResult r{8};
  SweepOptions sw = sweep_options(1, jobs, 0);
  sw.eval_every = -1;
  const auto report = training_ablation(desk.train, desk.valid, desk.vocab.size(), sw);

  // per configuration, pick the best learning rate by median final NLL
  struct Best {
    double nll = std::numeric_limits<double>::infinity();
    double lr = 0;
  };
  auto best_for = [&](const std::string& label) {
    Best best;
    for (double lr : {0.01, 0.1, 1.0}) {
      std::vector<double> finals;
      for (const auto& arm : report.arms) {
        if (arm.label == label && arm.learning_rate == lr) finals.push_back(arm.final_nll);
      }
      std::sort(finals.begin(), finals.end());
      const double med = finals[finals.size() / 2];
      if (med < best.nll) {
        best.nll = med;
        best.lr = lr;
      }
    }
    return best;
  };
  const Best on = best_for("clip+wn");
  const Best off = best_for("noclip+nown");

  // tokens the tuned clip+wn arms need to reach the tuned baseline's final
  // NLL, as a fraction of the baseline's token budget (median over seeds)
  std::vector<double> fractions;
  for (const auto& arm : report.arms) {
    if (arm.label != "clip+wn" || arm.learning_rate != on.lr || arm.diverged) continue;
    const long reached = tokens_to_reach_nll(arm.log, off.nll);
    long budget = 0;
    for (const auto& base : report.arms) {
      if (base.label == "noclip+nown" && base.learning_rate == off.lr && base.seed == arm.seed) {
        budget = base.log.records.empty() ? 0 : base.log.records.back().tokens;
      }
    }
    fractions.push_back(reached < 0 || budget == 0 ? 1.0 : static_cast<double>(reached) / budget);
  }
  std::sort(fractions.begin(), fractions.end());
  const double med_fraction = fractions.empty() ? 1.0 : fractions[fractions.size() / 2];

  // weight norm supports lr 1.0 without divergence
  bool wn_lr1_ok = false, divergence_recorded = false;
  for (const auto& arm : report.arms) {
    if (arm.label == "clip+wn" && arm.learning_rate == 1.0 && !arm.diverged) wn_lr1_ok = true;
    if (arm.diverged) divergence_recorded = true;
  }

  r.pass = med_fraction < 0.5 && wn_lr1_ok;
  r.detail = "clip+wn (lr " + fmt(on.lr) + ") reaches the no-trick final NLL " + fmt(off.nll) + " (lr " +
             fmt(off.lr) + ") using " + fmt(100 * med_fraction) + "% of its tokens (limit 50%)" +
             (divergence_recorded ? "; divergent arms recorded as inf" : "");
  return r;
}

// --- 9 -----------------------------------------------------------------

CriterionResult criterion_context_trend(const DeskCorpus& desk, int jobs) {
  CriterionResult r{9};
  SweepOptions sw = sweep_options(1, jobs, 300);
  const std::vector<int> windows = {3, 10, 25};
  const auto report = context_sweep(desk.train, desk.valid, desk.vocab.size(), windows, sw);
  const double p3 = report.median_ppl("window=3");
  const double p10 = report.median_ppl("window=10");
  const double p25 = report.median_ppl("window=25");
  r.pass = p3 >= p10 && p10 >= p25;
  r.detail = "median-of-3 best PPL by window: 3 -> " + fmt(p3) + ", 10 -> " + fmt(p10) + ", 25 -> " +
             fmt(p25) + " (non-increasing required)";
  return r;
}

// --- 10 ----------------------------------------------------------------

CriterionResult criterion_clipping_contract(const DeskCorpus& desk) {
  CriterionResult r{10};
  // every training step keeps the post-clip norm under the threshold
  Rng rng(101);
  ModelF model(load_arch("gcnnsweep-train"), desk.vocab.size(), rng, true);
  auto params = model.parameters();
  const auto batches = batch_sentences(desk.train, 16, 3);
  OptimizerConfig cfg;
  double worst_post = 0;
  int steps = 0;
  for (const auto& batch : batches) {
    if (steps >= 40) break;
    GraphF g;
    ParamBinder<float> binder(g);
    std::vector<int> hrows;
    for (int row = 0; row < batch.rows; ++row) {
      std::vector<int> tokens(batch.inputs.begin() + static_cast<std::ptrdiff_t>(row) * batch.cols,
                              batch.inputs.begin() + static_cast<std::ptrdiff_t>(row + 1) * batch.cols);
      hrows.push_back(model.forward_states(g, binder, tokens));
    }
    const int h = batch.rows == 1 ? hrows[0] : vconcat(g, hrows);
    const int lp = head_logprob(model.head, g, binder, h, batch.targets);
    const TensorF mask({batch.rows * batch.cols}, std::vector<float>(batch.mask));
    g.backward(scale(g, nll_masked(g, lp, mask), 1.0 / batch.unmasked()));
    for (auto* p : params) p->zero_grad();
    binder.pull_grads();
    clip_global(params, cfg.clip_threshold);
    worst_post = std::max(worst_post, global_grad_norm(params));
    nesterov_step(params, cfg);
    ++steps;
  }

  // idempotence and direction preservation on random gradients
  Rng grng(102);
  bool idempotent = true;
  double worst_cosine = 1.0;
  for (int trial = 0; trial < 50; ++trial) {
    auto p = ParameterD::plain("p", TensorD({32}));
    p.grad_v = uniform_tensor<double>(grng, {32}, -3, 3);
    const TensorD before = p.grad_v;
    clip_global<double>({&p}, 0.1);
    const TensorD once = p.grad_v;
    clip_global<double>({&p}, 0.1);
    idempotent = idempotent && once.data == p.grad_v.data;
    double dot = 0, na = 0, nb = 0;
    for (int i = 0; i < 32; ++i) {
      dot += before.data[i] * once.data[i];
      na += before.data[i] * before.data[i];
      nb += once.data[i] * once.data[i];
    }
    worst_cosine = std::min(worst_cosine, dot / std::sqrt(na * nb));
  }

  r.pass = worst_post <= 0.1 + 1e-6 && idempotent && worst_cosine >= 1.0 - 1e-7;
  r.detail = "post-clip norm <= " + fmt(worst_post) + " over " + std::to_string(steps) +
             " steps (threshold 0.1); idempotent=" + (idempotent ? "yes" : "no") +
             "; worst direction cosine " + fmt(worst_cosine);
  return r;
}

// --- 11 ----------------------------------------------------------------

CriterionResult criterion_bench(const DeskCorpus& desk) {
  CriterionResult r{11};
  Rng rng(111);
  ModelF model(load_arch("gcnn8b-tiny"), desk.vocab.size(), rng, true);

  const std::vector<int> stream = random_token_stream(model.vocab, 10050, 7);
  const std::vector<int> probe(stream.begin(), stream.begin() + 300);
  const std::vector<float> inc = incremental_scores(model, probe);
  const std::vector<float> full = full_forward_scores(model, probe);
  double worst_rel = 0;
  for (std::size_t i = 0; i < inc.size(); ++i) {
    worst_rel = std::max(worst_rel, std::abs(inc[i] - full[i]) /
                                        std::max(1e-9, std::abs(static_cast<double>(full[i]))));
  }

  const double early = per_token_latency(model, stream, 100, 9);
  const double late = per_token_latency(model, stream, 10000, 9);
  const double latency_ratio = std::max(late / early, early / late);

  const double throughput = measure_throughput(model, 750, 20, 5, 2, 9);
  const double responsiveness = measure_responsiveness(model, 3000, 9);

  r.pass = worst_rel <= 1e-5 && latency_ratio < 2.0 && throughput >= responsiveness;
  r.detail = "incremental vs full rel err " + fmt(worst_rel) + " (limit 1e-5); latency ratio @100 vs @10000 " +
             fmt(latency_ratio) + " (limit 2x); throughput(750x20) " + fmt(throughput) +
             " tok/s >= responsiveness " + fmt(responsiveness) + " tok/s";
  return r;
}

// --- 12 ----------------------------------------------------------------

CriterionResult criterion_checkpoint(const DeskCorpus& desk) {
  CriterionResult r{12};
  Rng rng(121);
  ModelF model(load_arch("gcnn8-tiny"), desk.vocab.size(), rng, true);
  TrainOptions opts;
  opts.budget = TrainBudget::steps(5);
  opts.eval_every = -1;
  train_model(model, desk.train, nullptr, opts);

  const std::string path = "acceptance_roundtrip.ckpt";
  save_checkpoint(path, model, desk.vocab);
  Checkpoint loaded = load_checkpoint(path);
  std::remove(path.c_str());

  const std::vector<int> stream = concat_stream(desk.valid);
  const std::vector<int> probe(stream.begin(), stream.begin() + 200);
  const std::vector<float> a = full_forward_scores(model, probe);
  const std::vector<float> b = full_forward_scores(loaded.model, probe);
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < a.size(); ++i) mismatches += a[i] != b[i];

  r.pass = mismatches == 0 && loaded.vocab.hash() == desk.vocab.hash();
  r.detail = "save/load round trip: " + std::to_string(a.size()) + " logprobs compared, " +
             std::to_string(mismatches) + " bit mismatches";
  return r;
}

}  // namespace
}  // namespace glunet

int main(int argc, char** argv) {
  using namespace glunet;
  int jobs = 1;
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--jobs") == 0 && i + 1 < argc) {
      jobs = std::atoi(argv[++i]);
    } else if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string item;
      while (std::getline(ss, item, ',')) only.push_back(std::stoi(item));
    } else {
      std::cerr << "usage: glunet_acceptance [--jobs N] [--only 1,2,...]\n";
      return 2;
    }
  }
  auto wanted = [&](int n) { return only.empty() || std::find(only.begin(), only.end(), n) != only.end(); };

  std::cout << "building desk corpus (synthetic, 250 KiB, planted dependencies)...\n";
  const DeskCorpus desk = make_desk_corpus(1);
  std::cout << "vocab " << desk.vocab.size() << ", " << desk.train.size() << " train / "
            << desk.valid.size() << " valid sequences\n\n";

  std::vector<CriterionResult> results;
  auto run = [&](int n, auto&& fn) {
    if (!wanted(n)) return;
    CriterionResult r = fn();
    results.push_back(r);
    std::cout << "[" << (n < 10 ? " " : "") << n << "] " << (r.pass ? "PASS" : "FAIL") << "  " << r.detail
              << "\n"
              << std::flush;
  };

  run(1, [] { return criterion_gradients(); });
  run(2, [] { return criterion_gating_identities(); });
  run(3, [] { return criterion_causality(); });
  run(4, [] { return criterion_softmax_oracles(); });
  run(5, [] { return criterion_perplexity_sanity(); });
  run(6, [&] { return criterion_gating_ordering(desk, jobs); });
  run(7, [&] { return criterion_nonlinearity_ordering(desk, jobs); });
  run(8, [&] { return criterion_training_ablation(desk, jobs); });
  run(9, [&] { return criterion_context_trend(desk, jobs); });
  run(10, [&] { return criterion_clipping_contract(desk); });
  run(11, [&] { return criterion_bench(desk); });
  run(12, [&] { return criterion_checkpoint(desk); });

  int passed = 0;
  for (const auto& r : results) passed += r.pass;
  std::cout << "\ncriteria passed: " << passed << "/" << results.size() << "\n";
  return passed == static_cast<int>(results.size()) ? 0 : 1;
}
