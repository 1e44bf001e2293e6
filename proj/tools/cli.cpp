#include "courtesy/service/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "courtesy/corpus/dataset.hpp"
#include "courtesy/corpus/embeddings.hpp"
#include "courtesy/corpus/synthetic.hpp"
#include "courtesy/errors.hpp"
#include "courtesy/evalkit/evalkit.hpp"
#include "courtesy/service/api.hpp"
#include "courtesy/service/checkpoint.hpp"
#include "courtesy/service/config.hpp"

namespace courtesy::service {

namespace {

using nlohmann::json;
using numerics::Rng;
namespace fs = std::filesystem;

const std::string kDefaultProfanity = RunConfig{}.profanity;

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

RunConfig make_config(const Common& common) {
  RunConfig cfg = resolve_config(common.config_path);
  for (const auto& kv : common.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (common.seed) cfg.seed = *common.seed;
  cfg.validate();
  return cfg;
}

void log_run(const std::string& command, const RunConfig& cfg) {
  spdlog::info("{}: seed={} config_hash={}", command, cfg.seed, cfg.hash());
}

// The stored hash covers only the sections that shape the artifact, so
// equivalent runs (train-rl with beta 0 vs train-dialogue) match byte for byte.
Provenance provenance(const RunConfig& cfg, std::vector<std::string> sections) {
  sections.insert(sections.begin(), "run");
  return {cfg.seed, cfg.hash(sections)};
}

std::vector<std::string> profanity(const RunConfig& cfg) {
  if (cfg.profanity.empty()) return {};
  if (!fs::exists(cfg.profanity)) {
    if (cfg.profanity == kDefaultProfanity) {
      spdlog::warn("profanity list {} not found; no words masked", cfg.profanity);
      return {};
    }
    throw UsageError("profanity list not found: " + cfg.profanity);
  }
  return corpus::load_word_list(cfg.profanity);
}

void require_file(const std::string& path, const char* what) {
  if (!fs::exists(path)) throw UsageError(std::string(what) + " not found: " + path);
}

std::unique_ptr<numerics::Matrix<float>> embeddings(const RunConfig& cfg, const corpus::Vocab& vocab,
                                                    numerics::Index dim, Rng& rng) {
  if (cfg.embeddings.empty()) return nullptr;
  require_file(cfg.embeddings, "embedding file");
  return std::make_unique<numerics::Matrix<float>>(corpus::load_pretrained_embeddings(cfg.embeddings, vocab, dim, rng));
}

Checkpoint read_ckpt(const std::string& path, ModelKind kind) {
  require_file(path, "checkpoint");
  auto ckpt = load_checkpoint(path);
  if (kind_of(ckpt) != kind) {
    throw UsageError(path + " is a " + to_string(kind_of(ckpt)) + " checkpoint, expected " + to_string(kind));
  }
  return ckpt;
}

void write_ckpt(const std::string& path, const Checkpoint& ckpt) {
  if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  save_checkpoint(path, ckpt);
  spdlog::info("wrote {}", path);
}

// ---- dialogue data

struct DialogueData {
  corpus::Vocab vocab;
  std::vector<std::string> words;  // profanity
  dialogue::TokenMask mask;
  std::vector<dialogue::TrainExample> examples;
};

struct DialogueArgs {
  std::string data;
  std::string politeness;  // extra vocabulary source
  std::string vocab_from;
  std::string init;
};

void add_dialogue_args(CLI::App* cmd, DialogueArgs& a) {
  cmd->add_option("--data", a.data, "training triples (JSONL)")->required();
  cmd->add_option("--politeness", a.politeness, "politeness JSONL whose tokens join the vocabulary");
  cmd->add_option("--vocab-from", a.vocab_from, "reuse the vocabulary of this checkpoint");
  cmd->add_option("--init", a.init, "start from this seq2seq checkpoint");
}

DialogueData dialogue_data(const RunConfig& cfg, const DialogueArgs& a, const corpus::Vocab* fixed) {
  require_file(a.data, "data file");
  const auto triples = corpus::load_triples(a.data);
  DialogueData d;
  if (fixed != nullptr) {
    d.vocab = *fixed;
  } else if (!a.vocab_from.empty()) {
    require_file(a.vocab_from, "checkpoint");
    d.vocab = vocab_of(load_checkpoint(a.vocab_from));
  } else {
    auto seqs = corpus::all_sequences(triples);
    if (!a.politeness.empty()) {
      require_file(a.politeness, "politeness file");
      for (auto& s : corpus::all_sequences(corpus::load_politeness(a.politeness))) seqs.push_back(std::move(s));
    }
    d.vocab = corpus::Vocab::build(seqs, cfg.max_vocab);
  }
  d.words = profanity(cfg);
  d.mask = dialogue::loss_mask(d.vocab, d.words);
  d.examples = dialogue::scoped_examples(d.vocab, triples, d.mask, cfg.train_scope, cfg.dialogue.max_len);
  spdlog::info("{} examples, vocabulary {}", d.examples.size(), d.vocab.size());
  return d;
}

// Fresh model from the run seed, or the weights of --init with this run's
// training options.
dialogue::Seq2seq initial_seq2seq(const RunConfig& cfg, const DialogueArgs& a, corpus::Vocab* vocab_out) {
  if (!a.init.empty()) {
    auto ckpt = read_ckpt(a.init, ModelKind::seq2seq);
    ckpt.metadata["config"]["train"] = to_json(cfg.dialogue.train);
    auto model = unpack_seq2seq(ckpt);
    *vocab_out = model.vocab();
    return model;
  }
  return {};
}

dialogue::Seq2seq fresh_seq2seq(const RunConfig& cfg, const corpus::Vocab& vocab) {
  Rng init = Rng(cfg.seed).fork(10);
  auto emb = embeddings(cfg, vocab, cfg.dialogue.embedding_dim, init);
  return dialogue::Seq2seq(cfg.dialogue, vocab, init, emb.get());
}

void log_train(const dialogue::TrainLog& log) {
  for (std::size_t e = 0; e < log.epoch_losses.size(); ++e) spdlog::info("epoch {} loss {:.4f}", e + 1, log.epoch_losses[e]);
}

// ---- commands

int cmd_gen_synth(const RunConfig& cfg, const std::string& out, std::optional<std::size_t> n,
                  std::optional<std::uint64_t> grammar_seed) {
  log_run("gen-synth", cfg);
  Rng rng(cfg.seed);
  const auto count = n.value_or(cfg.synth_n);
  auto data = corpus::gen_synthetic(corpus::default_markers(), grammar_seed.value_or(cfg.grammar_seed), count, rng);
  fs::create_directories(out);
  const auto order = corpus::shuffled_order(data.triples.size(), cfg.seed);
  const auto n_test = static_cast<std::size_t>(std::llround(cfg.test_fraction * static_cast<double>(order.size())));
  std::vector<corpus::DialogueTriple> train, test;
  for (std::size_t k = 0; k < order.size(); ++k) (k < n_test ? test : train).push_back(data.triples[order[k]]);
  std::vector<corpus::TokenSeq> polite;
  for (const auto& u : data.politeness) {
    if (u.label == corpus::Politeness::polite) polite.push_back(u.text);
  }
  corpus::save_triples(fs::path(out) / "triples-train.jsonl", train);
  corpus::save_triples(fs::path(out) / "triples-test.jsonl", test);
  corpus::save_politeness(fs::path(out) / "politeness.jsonl", data.politeness);
  corpus::save_lm_text(fs::path(out) / "polite.txt", polite);
  spdlog::info("wrote {} train / {} test triples and {} politeness utterances to {}", train.size(), test.size(),
               data.politeness.size(), out);
  return 0;
}

int cmd_train_classifier(const RunConfig& cfg, const std::string& data_path, const std::string& out,
                         const std::string& extra) {
  log_run("train-classifier", cfg);
  require_file(data_path, "data file");
  const auto data = corpus::load_politeness(data_path);
  auto seqs = corpus::all_sequences(data);
  if (!extra.empty()) {
    require_file(extra, "triples file");
    for (auto& s : corpus::all_sequences(corpus::load_triples(extra))) seqs.push_back(std::move(s));
  }
  const auto vocab = corpus::Vocab::build(seqs, cfg.max_vocab);
  const auto split = classifier::split_712(data, cfg.seed);
  Rng rng(cfg.seed);
  Rng emb_rng = rng.fork(10);
  auto emb = embeddings(cfg, vocab, cfg.classifier.embedding_dim, emb_rng);
  classifier::TrainReport report;
  auto model = classifier::train_classifier(split.train, cfg.classifier, vocab, rng, &report, emb.get());
  for (std::size_t e = 0; e < report.epoch_losses.size(); ++e) spdlog::info("epoch {} loss {:.4f}", e + 1, report.epoch_losses[e]);
  json acc = {{"train", report.train_accuracy}};
  if (!split.validation.empty()) acc["validation"] = classifier::accuracy(model, split.validation);
  if (!split.test.empty()) acc["test"] = classifier::accuracy(model, split.test);
  spdlog::info("accuracy {}", acc.dump());
  auto ckpt = pack(model, provenance(cfg, {"classifier"}));
  ckpt.metadata["accuracy"] = acc;
  write_ckpt(out, ckpt);
  return 0;
}

int cmd_train_dialogue(const RunConfig& cfg, const DialogueArgs& a, const std::string& out) {
  log_run("train-dialogue", cfg);
  corpus::Vocab init_vocab;
  auto model = initial_seq2seq(cfg, a, &init_vocab);
  auto d = dialogue_data(cfg, a, a.init.empty() ? nullptr : &init_vocab);
  if (a.init.empty()) model = fresh_seq2seq(cfg, d.vocab);
  dialogue::TrainLog log;
  model = dialogue::train_dialogue(std::move(model), d.examples, Rng(cfg.seed), &log);
  log_train(log);
  write_ckpt(out, pack(model, base_strategy(), d.words, provenance(cfg, {"dialogue"})));
  return 0;
}

int cmd_train_lft(const RunConfig& cfg, const DialogueArgs& a, const std::string& clf_path, const std::string& out) {
  log_run("train-lft", cfg);
  const auto clf = unpack_classifier(read_ckpt(clf_path, ModelKind::classifier));
  corpus::Vocab init_vocab;
  auto model = initial_seq2seq(cfg, a, &init_vocab);
  auto d = dialogue_data(cfg, a, a.init.empty() ? nullptr : &init_vocab);
  if (a.init.empty()) model = fresh_seq2seq(cfg, d.vocab);
  std::vector<dialogue::TrainExample> labelled;
  labelled.reserve(d.examples.size());
  for (const auto& ex : d.examples) labelled.push_back(style::lft_prepare(ex, clf, d.vocab, cfg.lft));
  dialogue::TrainLog log;
  model = dialogue::train_dialogue(std::move(model), labelled, Rng(cfg.seed), &log);
  log_train(log);
  write_ckpt(out, pack(model, lft_strategy(cfg.lft), d.words, provenance(cfg, {"dialogue", "lft"})));
  return 0;
}

int cmd_train_rl(const RunConfig& cfg, const DialogueArgs& a, const std::string& clf_path, const std::string& out,
                 const std::string& reward_log) {
  log_run("train-rl", cfg);
  const auto clf = unpack_classifier(read_ckpt(clf_path, ModelKind::classifier));
  corpus::Vocab init_vocab;
  auto model = initial_seq2seq(cfg, a, &init_vocab);
  auto d = dialogue_data(cfg, a, a.init.empty() ? nullptr : &init_vocab);
  if (a.init.empty()) model = fresh_seq2seq(cfg, d.vocab);
  style::RlLog log;
  model = style::train_rl(std::move(model), d.examples, clf, cfg.rl, d.mask, Rng(cfg.seed), &log);
  log_train(log.train);
  if (!log.batch_reward.empty()) {
    const std::size_t k = std::max<std::size_t>(1, log.batch_reward.size() / 10);
    auto mean = [&](std::size_t from, std::size_t to) {
      double s = 0;
      for (std::size_t i = from; i < to; ++i) s += log.batch_reward[i];
      return s / static_cast<double>(to - from);
    };
    spdlog::info("reward first 10% {:.4f}, last 10% {:.4f}", mean(0, k),
                 mean(log.batch_reward.size() - k, log.batch_reward.size()));
  }
  if (!reward_log.empty()) {
    std::ofstream f(reward_log);
    f << json{{"reward", log.batch_reward}, {"score", log.batch_score}, {"loss", log.train.step_losses}}.dump()
      << "\n";
  }
  // With beta = 0 the objective is plain MLE, so the strategy says base.
  if (cfg.rl.beta == 0) {
    write_ckpt(out, pack(model, base_strategy(), d.words, provenance(cfg, {"dialogue"})));
  } else {
    write_ckpt(out, pack(model, rl_strategy(cfg.rl), d.words, provenance(cfg, {"dialogue", "rl"})));
  }
  return 0;
}

int cmd_train_lm(const RunConfig& cfg, const std::string& data_path, const std::string& format,
                 const std::string& vocab_from, const std::string& out) {
  log_run("train-lm", cfg);
  require_file(data_path, "data file");
  std::vector<corpus::TokenSeq> utterances;
  if (format == "lm-text") {
    utterances = corpus::load_lm_text(data_path);
  } else if (format == "politeness-jsonl") {
    for (const auto& u : corpus::load_politeness(data_path)) {
      if (u.label == corpus::Politeness::polite) utterances.push_back(u.text);
    }
  } else {
    throw UsageError("--format must be lm-text or politeness-jsonl");
  }
  const auto vocab = vocab_from.empty() ? corpus::Vocab::build(utterances, cfg.max_vocab)
                                        : vocab_of(load_checkpoint(vocab_from));
  const auto words = profanity(cfg);
  dialogue::LmReport report;
  auto lm = dialogue::train_lm(utterances, vocab, cfg.lm, dialogue::loss_mask(vocab, words), Rng(cfg.seed), &report);
  for (std::size_t e = 0; e < report.dev_perplexity.size(); ++e) {
    spdlog::info("epoch {} dev perplexity {:.3f}", e + 1, report.dev_perplexity[e]);
  }
  spdlog::info("best epoch {}", report.best_epoch + 1);
  write_ckpt(out, pack(lm, words, provenance(cfg, {"lm"})));
  return 0;
}

int cmd_retrieve_build(const RunConfig& cfg, const std::string& candidates, const std::string& clf_path,
                       const std::string& out, const std::string& export_path) {
  log_run("retrieve-build", cfg);
  require_file(candidates, "candidate file");
  std::vector<corpus::TokenSeq> texts;
  std::set<corpus::TokenSeq> seen;
  for (const auto& t : corpus::load_triples(candidates)) {
    if (!t.u3.empty() && seen.insert(t.u3).second) texts.push_back(t.u3);
  }
  std::optional<classifier::Classifier> clf;
  if (!clf_path.empty()) clf = unpack_classifier(read_ckpt(clf_path, ModelKind::classifier));
  const auto index = retrieval::build_index(texts, clf ? &*clf : nullptr, cfg.retrieval_threshold);
  spdlog::info("{} of {} candidates kept", index.size(), texts.size());
  json filter = clf ? json{{"classifier", fs::path(clf_path).stem().string()}, {"threshold", cfg.retrieval_threshold}}
                    : json(nullptr);
  write_ckpt(out, pack(index, filter, provenance(cfg, {"retrieval"})));
  if (!export_path.empty()) {
    std::ofstream f(export_path);
    for (const auto& c : index.candidates()) f << json{{"text", corpus::join(c)}}.dump() << "\n";
  }
  return 0;
}

struct EvalArgs {
  std::vector<std::string> models;
  std::string test;
  std::string classifier;
  std::string lm;
  std::optional<double> alpha;
  bool generic10 = false;
  std::string out;
  std::string hyps_dir;
  std::optional<double> style_score;
  std::size_t limit = 0;
};

void dump_hyps(const std::string& dir, const std::string& id, const std::vector<corpus::DialogueTriple>& triples,
               const std::vector<corpus::TokenSeq>& hyps) {
  if (dir.empty()) return;
  fs::create_directories(dir);
  std::ofstream f(fs::path(dir) / (id + ".jsonl"));
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    const auto src = corpus::join(triples[i].u1) + " <sep> " + corpus::join(triples[i].u2);
    f << json{{"source", src}, {"response", corpus::join(hyps[i])}}.dump() << "\n";
  }
}

int cmd_evaluate(const RunConfig& cfg, const EvalArgs& a) {
  log_run("evaluate", cfg);
  require_file(a.test, "test file");
  auto triples = corpus::load_triples(a.test);
  if (a.limit > 0 && triples.size() > a.limit) triples.resize(a.limit);
  if (triples.empty()) throw UsageError("test file has no triples");
  const auto clf = unpack_classifier(read_ckpt(a.classifier, ModelKind::classifier));
  std::optional<dialogue::LanguageModel> lm;
  if (!a.lm.empty()) lm = unpack_lm(read_ckpt(a.lm, ModelKind::lm));
  if (a.alpha && !lm) throw UsageError("--alpha needs --lm");

  std::vector<corpus::TokenSeq> refs;
  for (const auto& t : triples) refs.push_back(t.u3);

  evalkit::EvalReport report;
  report.seed = cfg.seed;
  report.dataset = a.test;
  auto add_row = [&](const std::string& id, const std::vector<corpus::TokenSeq>& hyps) -> evalkit::ModelRow& {
    dump_hyps(a.hyps_dir, id, triples, hyps);
    evalkit::ModelRow row;
    row.id = id;
    const auto mp = evalkit::mean_politeness(clf, hyps);
    row.politeness = {mp.mean, mp.count};
    row.bleu4 = {evalkit::bleu4(hyps, refs), hyps.size()};
    report.models.push_back(row);
    return report.models.back();
  };

  for (const auto& path : a.models) {
    const auto ckpt = [&] {
      require_file(path, "checkpoint");
      return load_checkpoint(path);
    }();
    const auto id = fs::path(path).stem().string();
    report.checkpoints.push_back(path);
    const auto kind = kind_of(ckpt);
    if (kind == ModelKind::retrieval) {
      const auto index = unpack_index(ckpt);
      std::vector<corpus::TokenSeq> hyps;
      for (const auto& t : triples) hyps.push_back(index.retrieve(retrieval::context_document(t.u1, t.u2)).response);
      add_row(id, hyps);
      continue;
    }
    if (kind != ModelKind::seq2seq) throw UsageError(path + ": only seq2seq and retrieval checkpoints can be evaluated");
    const auto model = unpack_seq2seq(ckpt);
    const auto& vocab = model.vocab();
    const auto mask = dialogue::loss_mask(vocab, profanity_of(ckpt));
    dialogue::DecodeOptions opts;
    opts.max_len = model.config().max_len;
    opts.mask = mask;
    const bool lft = strategy_name(ckpt) == "lft";
    const auto lft_cfg = lft ? lft_config(ckpt.metadata["strategy"]) : style::LftConfig{};
    const double target = a.style_score.value_or(lft_cfg.test_score);
    auto source_of = [&](const corpus::DialogueTriple& t) {
      auto src = dialogue::make_example(vocab, t, mask, model.config().max_len).source;
      return lft ? style::label_source(src, target, lft_cfg) : src;
    };
    std::vector<corpus::TokenSeq> hyps;
    for (const auto& t : triples) hyps.push_back(vocab.decode(dialogue::decode(model, source_of(t), opts).tokens));
    auto& row = add_row(id, hyps);
    if (!lft) {
      const auto all = dialogue::scoped_examples(vocab, triples, mask, dialogue::Scope::all_turns, model.config().max_len);
      const auto last = dialogue::scoped_examples(vocab, triples, mask, dialogue::Scope::last_turn, model.config().max_len);
      const auto p_all = dialogue::perplexity(model, all);
      const auto p_last = dialogue::perplexity(model, last);
      const auto w_all = dialogue::wer(model, all, opts);
      const auto w_last = dialogue::wer(model, last, opts);
      row.ppl = evalkit::Scored{p_all.perplexity, p_all.tokens};
      row.ppl_last = evalkit::Scored{p_last.perplexity, p_last.tokens};
      row.wer = evalkit::Scored{w_all.value, all.size() - w_all.skipped};
      row.wer_last = evalkit::Scored{w_last.value, last.size() - w_last.skipped};
    }
    if (a.alpha) {
      std::vector<corpus::TokenSeq> fused;
      for (const auto& t : triples) {
        fused.push_back(vocab.decode(style::fusion_decode(model, *lm, source_of(t), {*a.alpha}, opts).tokens));
      }
      add_row(id + "+fusion", fused);
    }
  }
  if (a.generic10) {
    const auto index = retrieval::generic10_index();
    std::vector<corpus::TokenSeq> hyps;
    for (const auto& t : triples) hyps.push_back(index.retrieve(retrieval::context_document(t.u1, t.u2)).response);
    add_row("generic10", hyps);
  }
  const auto j = report.to_json();
  if (!a.out.empty()) {
    std::ofstream f(a.out);
    f << j.dump(2) << "\n";
    spdlog::info("wrote {}", a.out);
  } else {
    std::cout << j.dump(2) << "\n";
  }
  std::cerr << report.to_text();
  return 0;
}

ModelRegistry registry_from(const std::vector<std::string>& paths) {
  ModelRegistry reg;
  for (const auto& p : paths) reg.add_file(p);
  return reg;
}

int cmd_chat(const RunConfig& cfg, const std::string& model, const std::vector<std::string>& extra,
             const json& base_request, const std::string& once) {
  log_run("chat", cfg);
  std::vector<std::string> paths = extra;
  paths.insert(paths.begin(), model);
  const Api api(std::make_shared<const ModelRegistry>(registry_from(paths)));
  json request = base_request;
  request["model_id"] = fs::path(model).stem().string();
  std::vector<std::string> history;
  auto turn = [&](const std::string& line) {
    history.push_back(line);
    request["history"] = history;
    const auto res = api.chat(request);
    if (res.status != 200) throw UsageError(res.body["error"]["message"].get<std::string>());
    const auto response = res.body["response"].get<std::string>();
    std::cout << response;
    if (!res.body["politeness_score"].is_null()) std::cout << "\t[politeness " << res.body["politeness_score"].get<double>() << "]";
    std::cout << std::endl;
    history.push_back(response);
  };
  if (!once.empty()) {
    turn(once);
    return 0;
  }
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    turn(line);
  }
  return 0;
}

int cmd_saliency(const RunConfig& cfg, const std::string& clf_path, const std::string& text) {
  log_run("saliency", cfg);
  const auto clf = unpack_classifier(read_ckpt(clf_path, ModelKind::classifier));
  const auto tokens = corpus::tokenize(text);
  if (tokens.empty()) throw UsageError("--text has no tokens");
  std::cout << json{{"tokens", tokens},
                    {"weights", classifier::saliency(clf, tokens)},
                    {"polite_prob", classifier::score(clf, tokens).value()}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_serve(const RunConfig& cfg, const std::vector<std::string>& models) {
  log_run("serve", cfg);
  if (models.empty()) throw UsageError("serve needs at least one checkpoint");
  const Api api(std::make_shared<const ModelRegistry>(registry_from(models)));
  HttpServer server(api);
  const int port = server.bind(cfg.host, cfg.port);
  spdlog::info("serving {} models on http://{}:{}", api.registry().models().size(), cfg.host, port);
  server.listen();
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"courtesy: politeness-controllable dialogue toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--config", common.config_path, std::string("INI config file (default: $") + kConfigEnv + ")");
  app.add_option("--set", common.overrides, "override a config key, e.g. --set rl.beta=0")->take_all();
  app.add_option("--seed", common.seed, "run seed (overrides run.seed)");
  app.add_flag("-q,--quiet", common.quiet, "only log warnings");

  std::function<int(const RunConfig&)> action;
  auto on = [&](CLI::App* cmd, std::function<int(const RunConfig&)> f) {
    cmd->callback([&action, f] { action = f; });
  };

  // gen-synth
  auto* gen = app.add_subcommand("gen-synth", "write a synthetic marker-style corpus");
  std::string gen_out;
  std::optional<std::size_t> gen_n;
  std::optional<std::uint64_t> gen_grammar;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--n", gen_n, "number of triples and of politeness utterances");
  gen->add_option("--grammar-seed", gen_grammar, "seed of the topic grammar");
  on(gen, [&](const RunConfig& c) { return cmd_gen_synth(c, gen_out, gen_n, gen_grammar); });

  // train-classifier
  std::string clf_data, clf_out, clf_extra;
  auto* tc = app.add_subcommand("train-classifier", "train the politeness classifier");
  tc->add_option("--data", clf_data, "politeness JSONL")->required();
  tc->add_option("--out", clf_out, "output checkpoint")->required();
  tc->add_option("--triples", clf_extra, "triples JSONL whose tokens join the vocabulary");
  on(tc, [&](const RunConfig& c) { return cmd_train_classifier(c, clf_data, clf_out, clf_extra); });

  // train-dialogue
  DialogueArgs td_args;
  std::string td_out;
  auto* td = app.add_subcommand("train-dialogue", "train the base seq2seq model");
  add_dialogue_args(td, td_args);
  td->add_option("--out", td_out, "output checkpoint")->required();
  on(td, [&](const RunConfig& c) { return cmd_train_dialogue(c, td_args, td_out); });

  // train-lm
  std::string lm_data, lm_format = "lm-text", lm_vocab, lm_out;
  auto* tl = app.add_subcommand("train-lm", "train the language model used for fusion");
  tl->add_option("--data", lm_data, "utterances")->required();
  tl->add_option("--format", lm_format, "lm-text | politeness-jsonl (polite rows only)");
  tl->add_option("--vocab-from", lm_vocab, "reuse the vocabulary of this checkpoint (needed for fusion)");
  tl->add_option("--out", lm_out, "output checkpoint")->required();
  on(tl, [&](const RunConfig& c) { return cmd_train_lm(c, lm_data, lm_format, lm_vocab, lm_out); });

  // train-lft
  DialogueArgs lft_args;
  std::string lft_clf, lft_out, lft_mode;
  auto* tf = app.add_subcommand("train-lft", "label-fine-tune a seq2seq model with classifier scores");
  add_dialogue_args(tf, lft_args);
  tf->add_option("--classifier", lft_clf, "classifier checkpoint")->required();
  tf->add_option("--mode", lft_mode, "continuous | discrete");
  tf->add_option("--out", lft_out, "output checkpoint")->required();
  on(tf, [&](const RunConfig& c0) {
    RunConfig c = c0;
    if (!lft_mode.empty()) c.set("lft.mode", lft_mode);
    return cmd_train_lft(c, lft_args, lft_clf, lft_out);
  });

  // train-rl
  DialogueArgs rl_args;
  std::string rl_clf, rl_out, rl_sign, rl_log;
  std::optional<double> rl_beta, rl_baseline;
  auto* tr = app.add_subcommand("train-rl", "train with the mixed MLE + policy-gradient politeness objective");
  add_dialogue_args(tr, rl_args);
  tr->add_option("--classifier", rl_clf, "classifier checkpoint")->required();
  tr->add_option("--beta", rl_beta, "weight of the policy-gradient term");
  tr->add_option("--baseline", rl_baseline, "reward baseline");
  tr->add_option("--sign", rl_sign, "encourage-polite | encourage-rude");
  tr->add_option("--reward-log", rl_log, "write per-step rewards as JSON");
  tr->add_option("--out", rl_out, "output checkpoint")->required();
  on(tr, [&](const RunConfig& c0) {
    RunConfig c = c0;
    if (rl_beta) c.rl.beta = *rl_beta;
    if (rl_baseline) c.rl.baseline = *rl_baseline;
    if (!rl_sign.empty()) c.set("rl.sign", rl_sign);
    c.validate();
    return cmd_train_rl(c, rl_args, rl_clf, rl_out, rl_log);
  });

  // evaluate
  EvalArgs ev;
  auto* e = app.add_subcommand("evaluate", "BLEU-4, politeness, PPL and WER report");
  e->add_option("--models", ev.models, "seq2seq or retrieval checkpoints")->required();
  e->add_option("--test", ev.test, "test triples JSONL")->required();
  e->add_option("--classifier", ev.classifier, "classifier checkpoint for politeness scores")->required();
  e->add_option("--lm", ev.lm, "language model checkpoint for fusion rows");
  e->add_option("--alpha", ev.alpha, "fusion weight; adds a fusion row per seq2seq model");
  e->add_flag("--generic10", ev.generic10, "add the Generic-10 retrieval row");
  e->add_option("--style-score", ev.style_score, "target score for LFT models");
  e->add_option("--hyps", ev.hyps_dir, "directory for JSONL hypothesis dumps");
  e->add_option("--limit", ev.limit, "evaluate only the first N triples");
  e->add_option("--out", ev.out, "report JSON path (default stdout)");
  on(e, [&](const RunConfig& c) {
    if (ev.style_score && !(*ev.style_score >= 0 && *ev.style_score <= 1)) throw UsageError("--style-score must lie in [0, 1]");
    if (ev.alpha && !(*ev.alpha >= 0 && *ev.alpha <= 1)) throw UsageError("--alpha must lie in [0, 1]");
    return cmd_evaluate(c, ev);
  });

  // retrieve-build
  std::string rb_cand, rb_clf, rb_out, rb_export;
  std::optional<double> rb_threshold;
  auto* rb = app.add_subcommand("retrieve-build", "build a TF-IDF retrieval index over training responses");
  rb->add_option("--candidates", rb_cand, "triples JSONL; third turns become candidates")->required();
  rb->add_option("--classifier", rb_clf, "keep only candidates scoring above the threshold");
  rb->add_option("--threshold", rb_threshold, "politeness threshold");
  rb->add_option("--export", rb_export, "write kept candidates as JSONL");
  rb->add_option("--out", rb_out, "output checkpoint")->required();
  on(rb, [&](const RunConfig& c0) {
    RunConfig c = c0;
    if (rb_threshold) c.retrieval_threshold = *rb_threshold;
    c.validate();
    return cmd_retrieve_build(c, rb_cand, rb_clf, rb_out, rb_export);
  });

  // chat
  std::string chat_model, chat_mode, chat_once;
  std::vector<std::string> chat_extra;
  std::optional<double> chat_score, chat_alpha;
  std::optional<std::uint64_t> chat_seed;
  auto* ch = app.add_subcommand("chat", "talk to a seq2seq model on stdin");
  ch->add_option("--model", chat_model, "seq2seq checkpoint")->required();
  ch->add_option("--with", chat_extra, "extra checkpoints (classifier, language model)");
  ch->add_option("--style-score", chat_score, "LFT target score");
  ch->add_option("--alpha", chat_alpha, "fusion weight (needs a language model in --with)");
  ch->add_option("--mode", chat_mode, "greedy | sample");
  ch->add_option("--sample-seed", chat_seed, "sampling seed");
  ch->add_option("--once", chat_once, "answer one line and exit");
  on(ch, [&](const RunConfig& c) {
    json req = json::object();
    if (chat_score) req["style_score"] = *chat_score;
    if (chat_alpha) req["alpha"] = *chat_alpha;
    if (!chat_mode.empty()) req["mode"] = chat_mode;
    if (chat_seed) req["seed"] = *chat_seed;
    return cmd_chat(c, chat_model, chat_extra, req, chat_once);
  });

  // saliency
  std::string sal_clf, sal_text;
  auto* sa = app.add_subcommand("saliency", "per-token saliency of the politeness score");
  sa->add_option("--classifier", sal_clf, "classifier checkpoint")->required();
  sa->add_option("--text", sal_text, "sentence")->required();
  on(sa, [&](const RunConfig& c) { return cmd_saliency(c, sal_clf, sal_text); });

  // serve
  std::vector<std::string> serve_models;
  std::string serve_host;
  std::optional<int> serve_port;
  auto* sv = app.add_subcommand("serve", "HTTP JSON inference service");
  sv->add_option("--models", serve_models, "checkpoints to load")->required();
  sv->add_option("--host", serve_host, "bind address");
  sv->add_option("--port", serve_port, "port");
  on(sv, [&](const RunConfig& c0) {
    RunConfig c = c0;
    if (!serve_host.empty()) c.host = serve_host;
    if (serve_port) c.port = *serve_port;
    c.validate();
    return cmd_serve(c, serve_models);
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }
  spdlog::set_level(common.quiet ? spdlog::level::warn : spdlog::level::info);
  try {
    const RunConfig cfg = make_config(common);
    return action(cfg);
  } catch (const UsageError& err) {
    spdlog::error("{}", err.what());
    return 2;
  } catch (const std::exception& err) {
    spdlog::error("{}", err.what());
    return 1;
  }
}

}  // namespace courtesy::service
