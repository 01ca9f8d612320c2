#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "glunet/bench.hpp"
#include "glunet/checkpoint.hpp"
#include "glunet/corpus.hpp"
#include "glunet/gradsuite.hpp"
#include "glunet/presets.hpp"
#include "glunet/sweeps.hpp"
#include "glunet/train.hpp"

namespace {

using namespace glunet;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::vector<int> parse_int_csv(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

/// Deterministic hold-out: every tenth sequence becomes validation.
void split_sequences(const std::vector<std::vector<int>>& all, std::vector<std::vector<int>>& train,
                     std::vector<std::vector<int>>& valid) {
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (i % 10 == 9) valid.push_back(all[i]);
    else train.push_back(all[i]);
  }
  if (valid.empty()) valid = train;
}

struct CorpusArgs {
  std::string corpus;
  std::string valid;
  std::string vocab;
  std::string mode = "sentence";
  int min_count = 1;
};

void add_corpus_args(CLI::App* cmd, CorpusArgs& args, bool need_valid_split) {
  cmd->add_option("--corpus", args.corpus, "training text, UTF-8")->required();
  if (need_valid_split) cmd->add_option("--valid", args.valid, "validation text (default: 1/10 hold-out)");
  cmd->add_option("--vocab", args.vocab, "vocabulary file (default: built from the corpus)");
  cmd->add_option("--mode", args.mode, "sentence|paragraph")->check(CLI::IsMember({"sentence", "paragraph"}));
  cmd->add_option("--min-count", args.min_count, "replace rarer tokens with <unk>");
}

struct LoadedCorpus {
  Vocabulary vocab;
  std::vector<std::vector<int>> train;
  std::vector<std::vector<int>> valid;
  SequenceMode mode = SequenceMode::Sentence;
};

LoadedCorpus load_corpus(const CorpusArgs& args, bool want_valid) {
  LoadedCorpus out;
  out.mode = sequence_mode_from_string(args.mode);
  const std::string text = read_file(args.corpus);
  if (!args.vocab.empty()) {
    out.vocab = Vocabulary::load(args.vocab);
  } else {
    out.vocab = Vocabulary::build(tokenize_whitespace(text), args.min_count);
  }
  auto seqs = encode_lines(text, out.vocab, out.mode);
  if (!want_valid) {
    out.train = std::move(seqs);
    return out;
  }
  if (!args.valid.empty()) {
    out.train = std::move(seqs);
    out.valid = encode_lines(read_file(args.valid), out.vocab, out.mode);
  } else {
    split_sequences(seqs, out.train, out.valid);
  }
  return out;
}

void write_sweep_outputs(const SweepReport& report, const std::string& out_path) {
  if (!out_path.empty()) write_file(out_path, report.to_csv());
  for (const auto& label : report.labels()) {
    std::cout << label << ": median final ppl = " << report.median_ppl(label) << "\n";
  }
}

int run_app(int argc, char** argv) {
  CLI::App app{"gated convolutional language modeling toolkit"};
  app.require_subcommand(1);
  // route options like a trailing --seed up to the app scope
  app.fallthrough();
  std::uint64_t seed = 1;
  app.add_option("--seed", seed, "seed for every random choice")->capture_default_str();

  // ---- build-vocab ----
  auto* cmd_vocab = app.add_subcommand("build-vocab", "count tokens and write a vocabulary file");
  std::string bv_corpus, bv_out;
  int bv_min_count = 3;
  cmd_vocab->add_option("--corpus", bv_corpus)->required();
  cmd_vocab->add_option("--out", bv_out)->required();
  cmd_vocab->add_option("--min-count", bv_min_count)->capture_default_str();
  cmd_vocab->callback([&]() {
    const Vocabulary v = Vocabulary::build(tokenize_whitespace(read_file(bv_corpus)), bv_min_count);
    v.save(bv_out);
    std::cout << "vocab size=" << v.size() << " hash=" << v.hash() << " -> " << bv_out << "\n";
  });

  // ---- train ----
  auto* cmd_train = app.add_subcommand("train", "train a model and write a checkpoint");
  CorpusArgs tr_corpus;
  add_corpus_args(cmd_train, tr_corpus, true);
  std::string tr_arch = "gcnn8-tiny", tr_ckpt, tr_metrics, tr_preset;
  long tr_steps = -1;
  int tr_epochs = -1;
  double tr_seconds = -1;
  int tr_batch = 16, tr_unroll = 32, tr_eval_every = 0;
  double tr_lr = 1.0, tr_momentum = 0.99, tr_clip = 0.1;
  bool tr_no_clip = false, tr_no_wn = false;
  cmd_train->add_option("--arch", tr_arch, "preset name or config path")->capture_default_str();
  cmd_train->add_option("--preset", tr_preset, "alias for --arch restricted to preset names");
  cmd_train->add_option("--steps", tr_steps, "step budget");
  cmd_train->add_option("--epochs", tr_epochs, "epoch budget");
  cmd_train->add_option("--seconds", tr_seconds, "wall-clock budget");
  cmd_train->add_option("--batch", tr_batch)->capture_default_str();
  cmd_train->add_option("--unroll", tr_unroll)->capture_default_str();
  cmd_train->add_option("--lr", tr_lr)->capture_default_str();
  cmd_train->add_option("--momentum", tr_momentum)->capture_default_str();
  cmd_train->add_option("--clip", tr_clip)->capture_default_str();
  cmd_train->add_flag("--no-clip", tr_no_clip, "disable gradient clipping");
  cmd_train->add_flag("--no-weight-norm", tr_no_wn, "train plain weights");
  cmd_train->add_option("--eval-every", tr_eval_every, "steps between evals (0=auto, -1=never)");
  cmd_train->add_option("--checkpoint-out", tr_ckpt);
  cmd_train->add_option("--metrics-out", tr_metrics);
  cmd_train->callback([&]() {
    const ArchSpec arch = load_arch(!tr_preset.empty() ? tr_preset : tr_arch);
    LoadedCorpus data = load_corpus(tr_corpus, true);
    Rng rng(seed);
    ModelF model(arch, data.vocab.size(), rng, !tr_no_wn);
    TrainOptions opts;
    opts.optim.learning_rate = tr_lr;
    opts.optim.momentum = tr_momentum;
    opts.optim.clip_threshold = tr_clip;
    opts.clip = !tr_no_clip;
    opts.batch_size = tr_batch;
    opts.unroll = tr_unroll;
    opts.mode = data.mode;
    opts.seed = seed;
    opts.eval_every = tr_eval_every;
    if (tr_steps >= 0) opts.budget = TrainBudget::steps(tr_steps);
    else if (tr_epochs >= 0) opts.budget = TrainBudget::epochs(tr_epochs);
    else if (tr_seconds >= 0) opts.budget = TrainBudget::seconds(tr_seconds);
    else throw ConfigError("train: give one of --steps, --epochs, --seconds");
    const TrainResult res = train_model(model, data.train, data.valid.empty() ? nullptr : &data.valid, opts);
    if (!tr_metrics.empty()) res.log.save_csv(tr_metrics);
    if (!tr_ckpt.empty()) save_checkpoint(tr_ckpt, model, data.vocab);
    std::cout << "steps=" << res.steps << " tokens=" << res.tokens << " train_nll=" << res.final_train_nll
              << " val_ppl=" << res.final_val_ppl << "\n";
  });

  // ---- eval ----
  auto* cmd_eval = app.add_subcommand("eval", "perplexity of a checkpoint on a text");
  std::string ev_model, ev_text, ev_mode = "sentence", ev_vocab;
  int ev_batch = 16, ev_unroll = 64, ev_window = 0;
  bool ev_whole = false;
  cmd_eval->add_option("--model", ev_model)->required();
  cmd_eval->add_option("--text", ev_text)->required();
  cmd_eval->add_option("--mode", ev_mode)->check(CLI::IsMember({"sentence", "paragraph"}));
  cmd_eval->add_option("--vocab", ev_vocab, "cross-check the vocabulary hash");
  cmd_eval->add_option("--batch", ev_batch)->capture_default_str();
  cmd_eval->add_option("--unroll", ev_unroll)->capture_default_str();
  cmd_eval->add_option("--window", ev_window, "context-window truncation probe");
  cmd_eval->add_flag("--whole", ev_whole, "single-graph whole-stream evaluation");
  cmd_eval->callback([&]() {
    Checkpoint ck = load_checkpoint(ev_model);
    if (!ev_vocab.empty()) {
      const Vocabulary external = Vocabulary::load(ev_vocab);
      if (external.hash() != ck.vocab.hash()) {
        throw std::runtime_error("vocabulary hash mismatch between --vocab and the checkpoint");
      }
    }
    const SequenceMode mode = sequence_mode_from_string(ev_mode);
    const auto seqs = encode_lines(read_file(ev_text), ck.vocab, mode);
    if (seqs.empty()) throw ContractError("eval: no sequences in text");
    int window = ev_window;
    if (window == 0 && ck.model.arch.context_window) window = *ck.model.arch.context_window;
    double ppl;
    if (window > 0) {
      ppl = perplexity_windowed(ck.model, concat_stream(seqs), window);
    } else if (ev_whole) {
      ppl = perplexity_whole_stream(ck.model, concat_stream(seqs));
    } else {
      ppl = perplexity(ck.model, seqs, mode, ev_batch, ev_unroll);
    }
    std::cout << "ppl=" << ppl << "\n";
  });

  // ---- sweeps ----
  SweepOptions sw;
  CorpusArgs sw_corpus;
  std::string sw_out, sw_gates = "glu,gtu,tanh,relu", sw_windows = "3,10,25";
  auto add_sweep_args = [&](CLI::App* cmd) {
    add_corpus_args(cmd, sw_corpus, true);
    cmd->add_option("--steps", sw.steps)->capture_default_str();
    cmd->add_option("--batch", sw.batch_size)->capture_default_str();
    cmd->add_option("--seeds", sw.seeds)->capture_default_str();
    cmd->add_option("--jobs", sw.jobs, "parallel arms")->capture_default_str();
    cmd->add_option("--width", sw.width)->capture_default_str();
    cmd->add_option("--depth", sw.depth)->capture_default_str();
    cmd->add_option("--embed", sw.embed)->capture_default_str();
    cmd->add_option("--lr", sw.optim.learning_rate)->capture_default_str();
    cmd->add_option("--out", sw_out, "arm-by-arm CSV report");
  };

  auto* cmd_gating = app.add_subcommand("sweep-gating", "gate-kind comparison at matched parameter counts");
  add_sweep_args(cmd_gating);
  cmd_gating->add_option("--gates", sw_gates)->capture_default_str();
  cmd_gating->callback([&]() {
    LoadedCorpus data = load_corpus(sw_corpus, true);
    sw.mode = data.mode;
    sw.first_seed = seed;
    std::vector<GateKind> gates;
    std::stringstream ss(sw_gates);
    std::string item;
    while (std::getline(ss, item, ',')) gates.push_back(gate_from_string(item));
    const auto report = gating_sweep(data.train, data.valid, data.vocab.size(), gates, sw);
    write_sweep_outputs(report, sw_out);
  });

  auto* cmd_nonlin = app.add_subcommand("sweep-nonlinearity", "glu vs bilinear vs linear");
  add_sweep_args(cmd_nonlin);
  cmd_nonlin->callback([&]() {
    LoadedCorpus data = load_corpus(sw_corpus, true);
    sw.mode = data.mode;
    sw.first_seed = seed;
    const auto report = nonlinearity_sweep(data.train, data.valid, data.vocab.size(), sw);
    write_sweep_outputs(report, sw_out);
  });

  auto* cmd_context = app.add_subcommand("sweep-context", "perplexity as a function of receptive field");
  add_sweep_args(cmd_context);
  cmd_context->add_option("--windows", sw_windows)->capture_default_str();
  cmd_context->callback([&]() {
    LoadedCorpus data = load_corpus(sw_corpus, true);
    sw.mode = data.mode;
    sw.first_seed = seed;
    const auto report = context_sweep(data.train, data.valid, data.vocab.size(), parse_int_csv(sw_windows), sw);
    write_sweep_outputs(report, sw_out);
  });

  auto* cmd_ablate = app.add_subcommand("sweep-training", "clipping / weight-norm ablation, one epoch each");
  add_sweep_args(cmd_ablate);
  cmd_ablate->callback([&]() {
    LoadedCorpus data = load_corpus(sw_corpus, true);
    sw.mode = data.mode;
    sw.first_seed = seed;
    const auto report = training_ablation(data.train, data.valid, data.vocab.size(), sw);
    write_sweep_outputs(report, sw_out);
  });

  // ---- bench ----
  auto* cmd_bench = app.add_subcommand("bench", "throughput and responsiveness of a model");
  std::string bn_model, bn_arch, bn_out;
  int bn_vocab_size = 0;
  BenchOptions bn;
  cmd_bench->add_option("--model", bn_model, "checkpoint to load");
  cmd_bench->add_option("--arch", bn_arch, "bench a randomly initialized arch instead");
  cmd_bench->add_option("--vocab-size", bn_vocab_size, "vocabulary size for --arch");
  cmd_bench->add_option("--batch", bn.batch)->capture_default_str();
  cmd_bench->add_option("--length", bn.length)->capture_default_str();
  cmd_bench->add_option("--stream", bn.stream_length)->capture_default_str();
  cmd_bench->add_option("--iters", bn.iterations)->capture_default_str();
  cmd_bench->add_option("--out", bn_out, "CSV report");
  cmd_bench->callback([&]() {
    bn.seed = seed;
    ModelF model;
    if (!bn_model.empty()) {
      model = std::move(load_checkpoint(bn_model).model);
    } else if (!bn_arch.empty() && bn_vocab_size > 0) {
      Rng rng(seed);
      model = ModelF(load_arch(bn_arch), bn_vocab_size, rng, true);
    } else {
      throw ConfigError("bench: give --model, or --arch with --vocab-size");
    }
    const BenchReport report = run_bench(model, bn);
    std::cout << report.summary() << "\n";
    if (!bn_out.empty()) write_file(bn_out, report.csv_header() + "\n" + report.csv_row() + "\n");
  });

  // ---- gradcheck ----
  auto* cmd_grad = app.add_subcommand("gradcheck", "finite-difference suite over every operation");
  cmd_grad->callback([&]() {
    const auto entries = run_gradcheck_suites(seed);
    bool ok = true;
    for (const auto& e : entries) {
      std::cout << e.name << ": max rel err " << e.max_rel_err << "\n";
      ok = ok && e.max_rel_err < kGradTolerance;
    }
    std::cout << (ok ? "gradcheck passed" : "gradcheck FAILED") << " (tolerance " << kGradTolerance << ")\n";
    if (!ok) throw std::runtime_error("gradient check failed");
  });

  // ---- make-corpus ----
  auto* cmd_corpus = app.add_subcommand("make-corpus", "deterministic synthetic corpus with planted dependencies");
  std::string mc_out;
  CorpusOptions mc;
  cmd_corpus->add_option("--out", mc_out)->required();
  cmd_corpus->add_option("--bytes", mc.min_bytes)->capture_default_str();
  cmd_corpus->add_option("--word-types", mc.word_types)->capture_default_str();
  cmd_corpus->add_option("--marker-kinds", mc.marker_kinds)->capture_default_str();
  cmd_corpus->add_option("--short-span", mc.short_span)->capture_default_str();
  cmd_corpus->add_option("--long-span", mc.long_span)->capture_default_str();
  bool mc_plain = false;
  cmd_corpus->add_flag("--no-markers", mc_plain, "plain order-3 text, no planted dependencies");
  cmd_corpus->callback([&]() {
    mc.seed = seed;
    mc.plant_markers = !mc_plain;
    const std::string text = generate_corpus(mc);
    write_file(mc_out, text);
    std::cout << "wrote " << text.size() << " bytes to " << mc_out << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_app(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
