// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "trelab/bpe/vocab.hpp"
#include "trelab/data/assembly.hpp"
#include "trelab/data/dataset.hpp"
#include "trelab/error.hpp"
#include "trelab/eval/curve.hpp"
#include "trelab/eval/scoring.hpp"
#include "trelab/model/checkpoint.hpp"
#include "trelab/training/config.hpp"
#include "trelab/training/loops.hpp"

namespace trelab::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string read_text(const fs::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(std::string("cannot read ") + what + " " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw InputError("cannot write " + path.string());
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::istringstream in(read_text(path, "corpus"));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

fs::path with_suffix(const fs::path& path, const std::string& suffix) { return fs::path(path.string() + suffix); }

ordered_json score_json(const eval::ScoreReport& r) {
  return ordered_json::parse(eval::to_json(r));
}

struct TrainBpe {
  std::string corpus, out;
  std::size_t vocab_size = 0;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("train-bpe", "Learn a sub-word vocabulary from a text corpus (one sentence per line)");
    c->add_option("--corpus", corpus, "Corpus file")->required();
    c->add_option("--vocab-size", vocab_size, "Target vocabulary size")->required();
    c->add_option("--out", out, "Vocabulary output file")->required();
  }

  void run(std::ostream& os) const {
    const bpe::Vocab vocab = bpe::train_bpe(read_lines(corpus), vocab_size);
    bpe::save_vocab(vocab, out);
    os << "vocabulary size: " << vocab.size() << "\nfingerprint: " << vocab.fingerprint() << '\n';
  }
};

struct Pretrain {
  std::string corpus, vocab, config, out, metrics, resume;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("pretrain", "Train the language model on a text corpus");
    c->add_option("--corpus", corpus, "Corpus file, one sentence per line")->required();
    c->add_option("--vocab", vocab, "Vocabulary from train-bpe")->required();
    c->add_option("--config", config, "Training config (JSON)")->required();
    c->add_option("--out", out, "Checkpoint output")->required();
    c->add_option("--metrics", metrics, "Per-step metrics log (default: <out>.metrics.jsonl)");
    c->add_option("--resume", resume, "Continue from a checkpoint of the same run");
  }

  void run(std::ostream& os) const {
    const training::TrainConfig cfg = training::load_train_config(config);
    const bpe::Vocab v = bpe::load_vocab(vocab);
    std::optional<model::Checkpoint> from;
    if (!resume.empty()) from = model::read_checkpoint(resume);
    model::Model m = from ? model::restore_model(*from) : training::make_model(cfg, {}, v.size());
    if (static_cast<std::size_t>(m.config().vocab_size) != v.size()) {
      throw ConfigError("checkpoint and vocabulary sizes differ");
    }
    const auto sentences = read_lines(corpus);
    const auto encoded = data::encode_corpus(sentences, v, static_cast<std::size_t>(m.config().max_positions));

    const fs::path log_path = metrics.empty() ? with_suffix(out, ".metrics.jsonl") : fs::path(metrics);
    std::ofstream log(log_path, from ? std::ios::app : std::ios::trunc);
    if (!log) throw InputError("cannot write " + log_path.string());
    training::Hooks hooks;
    hooks.on_step = [&](const training::StepMetrics& s) { log << training::to_json_line(s) << '\n'; };
    hooks.on_checkpoint = [&](const model::Checkpoint& ck, long step) {
      model::write_checkpoint(ck, with_suffix(out, ".step" + std::to_string(step)));
    };
    const model::Checkpoint ck = training::pretrain(m, encoded, v, cfg, hooks, from ? &*from : nullptr);
    model::write_checkpoint(ck, out);
    os << "sequences: " << encoded.size() << "\nfinal step: " << *ck.meta("optim.step") << '\n';
  }
};

// Options shared by finetune and curve.
struct FinetuneOptions {
  std::string data, valid, format = "tacred", masking, init, vocab, config;
  bool no_pretrained_bpe = false;
  bool no_pretrained_lm = false;

  void add(CLI::App* c) {
    c->add_option("--data", data, "Training data")->required();
    c->add_option("--valid", valid, "Validation data (default: the training data)");
    c->add_option("--format", format, "Dataset format")->check(CLI::IsMember({"tacred", "semeval"}));
    c->add_option("--masking", masking, "Entity masking: none|unk|ne|gr|ne_gr (overrides the config)");
    c->add_option("--init", init, "Pre-trained checkpoint, or 'random'")->required();
    c->add_option("--vocab", vocab, "Vocabulary (required with --init random)");
    c->add_option("--config", config, "Training config (JSON)");
    c->add_flag("--no-pretrained-bpe", no_pretrained_bpe, "Random token embeddings, vocabulary kept");
    c->add_flag("--no-pretrained-lm", no_pretrained_lm, "Random transformer weights");
  }

  struct Prepared {
    training::TrainConfig config;
    data::DatasetFormat format;
    bpe::Vocab vocab;
    std::optional<model::Checkpoint> init;
    data::Dataset train;
    std::optional<data::Dataset> valid;
  };

  // Resolves and validates every input before any training starts.
  Prepared prepare() const {
    Prepared p;
    p.format = data::parse_format(format);
    p.config = training::default_config(p.format);
    if (!config.empty()) p.config = training::load_train_config(config, p.config);
    if (!masking.empty()) p.config.masking = data::parse_masking(masking);
    if (no_pretrained_bpe) p.config.use_pretrained_bpe_embeddings = false;
    if (no_pretrained_lm) p.config.use_pretrained_lm = false;
    if (p.format == data::DatasetFormat::kSemEval && data::needs_entity_types(p.config.masking)) {
      throw StrategyError("masking '" + std::string(data::to_string(p.config.masking)) +
                          "' needs entity types, which SemEval nominals do not have");
    }
    if (init == "random") {
      if (vocab.empty()) throw ConfigError("--init random needs --vocab");
      p.vocab = bpe::load_vocab(vocab);
    } else {
      p.init = model::read_checkpoint(init);
      p.vocab = vocab.empty() ? training::checkpoint_vocab(*p.init) : bpe::load_vocab(vocab);
    }
    p.train = data::load_dataset(data, p.format);
    if (!valid.empty()) p.valid = data::load_dataset(valid, p.format);
    return p;
  }
};

struct Finetune {
  FinetuneOptions opts;
  std::string out, report, metrics;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("finetune", "Train a relation classifier");
    opts.add(c);
    c->add_option("--out", out, "Checkpoint output")->required();
    c->add_option("--report", report, "Report output (default: <out>.report.json)");
    c->add_option("--metrics", metrics, "Per-step metrics log (default: <out>.metrics.jsonl)");
  }

  void run(std::ostream& os) const {
    FinetuneOptions::Prepared p = opts.prepare();
    const fs::path log_path = metrics.empty() ? with_suffix(out, ".metrics.jsonl") : fs::path(metrics);
    std::ofstream log(log_path, std::ios::trunc);
    if (!log) throw InputError("cannot write " + log_path.string());
    training::Hooks hooks;
    hooks.on_step = [&](const training::StepMetrics& s) { log << training::to_json_line(s) << '\n'; };
    hooks.on_epoch = [&](const training::EpochReport& r) {
      os << "epoch " << r.epoch << ": train loss " << r.train_loss << ", validation P/R/F1 " << r.validation.precision
         << " / " << r.validation.recall << " / " << r.validation.f1 << '\n';
    };
    const training::FinetuneResult result = training::finetune(p.init ? &*p.init : nullptr, p.vocab, p.train,
                                                               p.valid ? &*p.valid : nullptr, p.config, {}, hooks);
    model::write_checkpoint(result.checkpoint, out);

    ordered_json j;
    j["config"] = ordered_json::parse(training::to_json(p.config));
    j["format"] = std::string(data::to_string(p.format));
    j["init"] = p.init ? "checkpoint" : "random";
    ordered_json epochs = ordered_json::array();
    for (const auto& e : result.epochs) {
      ordered_json row = score_json(e.validation);
      row.erase("per_class");
      row["epoch"] = e.epoch;
      row["train_loss"] = e.train_loss;
      epochs.push_back(std::move(row));
    }
    j["epochs"] = std::move(epochs);
    j["final"] = score_json(result.epochs.back().validation);
    write_text(report.empty() ? with_suffix(out, ".report.json") : fs::path(report), j.dump(2) + "\n");
  }
};

struct Evaluate {
  std::string model_path, data, format = "tacred", out, predictions;

  void add(CLI::App& app, const char* name, const char* help) {
    auto* c = app.add_subcommand(name, help);
    c->add_option("--model", model_path, "Fine-tuned checkpoint")->required();
    c->add_option("--data", data, "Dataset to label")->required();
    c->add_option("--format", format, "Dataset format")->check(CLI::IsMember({"tacred", "semeval"}));
    c->add_option("--out", out, "Output file")->required();
    if (std::string(name) == "evaluate") {
      c->add_option("--predictions", predictions, "gold<TAB>pred lines (default: <out>.predictions.tsv)");
    }
  }

  void run_evaluate(std::ostream& os) const {
    training::Classifier c = training::load_classifier(model::read_checkpoint(model_path));
    const data::Dataset ds = data::load_dataset(data, data::parse_format(format));
    if (ds.empty()) throw InputError("dataset " + data + " is empty");
    std::vector<std::string> pred;
    const eval::ScoreReport r = c.score(ds, &pred);
    std::vector<std::string> gold;
    for (const auto& inst : ds.instances) gold.push_back(inst.label);
    write_text(out, eval::to_json(r) + "\n");
    write_text(predictions.empty() ? with_suffix(out, ".predictions.tsv") : fs::path(predictions),
               eval::format_predictions(gold, pred));
    os << "P " << r.precision << "  R " << r.recall << "  F1 " << r.f1 << '\n';
  }

  void run_predict(std::ostream& os) const {
    training::Classifier c = training::load_classifier(model::read_checkpoint(model_path));
    const data::Dataset ds = data::load_dataset(data, data::parse_format(format));
    const std::vector<std::string> pred = c.predict_labels(ds);
    std::string text;
    for (std::size_t i = 0; i < pred.size(); ++i) text += ds.instances[i].id + '\t' + pred[i] + '\n';
    write_text(out, text);
    os << "labeled " << pred.size() << " instances\n";
  }
};

struct Curve {
  FinetuneOptions opts;
  std::string ratios = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0";
  std::size_t seeds = 5;
  std::string out;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("curve", "Validation F1 against the fraction of training data used");
    opts.add(c);
    c->add_option("--ratios", ratios, "Comma-separated, strictly ascending ratios in (0, 1]");
    c->add_option("--seeds", seeds, "Runs per ratio");
    c->add_option("--out", out, "Output directory")->required();
  }

  void run(std::ostream& os) const {
    const std::vector<double> r = eval::parse_ratios(ratios);
    if (seeds == 0) throw ConfigError("--seeds must be >= 1");
    FinetuneOptions::Prepared p = opts.prepare();
    const data::Dataset& valid = p.valid ? *p.valid : p.train;
    const auto points = eval::sample_efficiency_curve(
        p.train, r, seeds, p.config.seed, [&](const data::Dataset& subsample, std::uint64_t seed) {
          training::TrainConfig cfg = p.config;
          cfg.seed = seed;
          const auto result = training::finetune(p.init ? &*p.init : nullptr, p.vocab, subsample, &valid, cfg);
          os << "run seed " << seed << ", " << subsample.size() << " examples" << ": F1 " << result.epochs.back().validation.f1 << '\n';
          return result.epochs.back().validation.f1;
        });
    write_text(fs::path(out) / "curve.csv", eval::curve_csv(points));
    write_text(fs::path(out) / "curve.svg", eval::curve_svg(points));
    for (const auto& m : eval::curve_means(points)) os << "ratio " << m.ratio << ": mean F1 " << m.mean_f1 << '\n';
  }
};

struct Inspect {
  std::string model_path;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("inspect-checkpoint", "Print a checkpoint's header as JSON");
    c->add_option("--model", model_path, "Checkpoint")->required();
  }

  void run(std::ostream& os) const {
    const model::Checkpoint ck = model::read_checkpoint(model_path);
    ordered_json j;
    j["vocab_fingerprint"] = ck.vocab_fingerprint;
    ordered_json cfg;
    cfg["n_layers"] = ck.config.n_layers;
    cfg["n_heads"] = ck.config.n_heads;
    cfg["d_model"] = ck.config.d_model;
    cfg["d_ff"] = ck.config.d_ff;
    cfg["vocab_size"] = ck.config.vocab_size;
    cfg["max_positions"] = ck.config.max_positions;
    cfg["n_relations"] = ck.config.n_relations;
    j["config"] = std::move(cfg);
    ordered_json meta = ordered_json::object();
    for (const auto& [k, v] : ck.metadata) meta[k] = k == "vocab" ? "<" + std::to_string(v.size()) + " bytes>" : v;
    j["metadata"] = std::move(meta);
    ordered_json tensors = ordered_json::array();
    std::size_t count = 0;
    for (const auto& t : ck.tensors) {
      tensors.push_back({{"name", t.name}, {"shape", t.value.shape()}});
      if (t.name.rfind("optim.", 0) != 0) count += t.value.size();
    }
    j["tensors"] = std::move(tensors);
    j["parameter_count"] = count;
    os << j.dump(2) << '\n';
  }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Relation extraction with a fine-tuned transformer language model", "trelab"};
  app.require_subcommand(1);
  TrainBpe train_bpe;
  Pretrain pretrain;
  Finetune finetune;
  Evaluate evaluate;
  Evaluate predict;
  Curve curve;
  Inspect inspect;
  train_bpe.add(app);
  pretrain.add(app);
  finetune.add(app);
  evaluate.add(app, "evaluate", "Score a fine-tuned model; writes a report and a predictions file");
  predict.add(app, "predict", "Label a dataset with a fine-tuned model");
  curve.add(app);
  inspect.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("train-bpe")) train_bpe.run(out);
    else if (app.got_subcommand("pretrain")) pretrain.run(out);
    else if (app.got_subcommand("finetune")) finetune.run(out);
    else if (app.got_subcommand("evaluate")) evaluate.run_evaluate(out);
    else if (app.got_subcommand("predict")) predict.run_predict(out);
    else if (app.got_subcommand("curve")) curve.run(out);
    else if (app.got_subcommand("inspect-checkpoint")) inspect.run(out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.is_user_error() ? 2 : 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace trelab::cli
