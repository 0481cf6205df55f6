#include "lcner/cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lcner/advisor.hpp"
#include "lcner/checkpoint.hpp"
#include "lcner/corpus.hpp"
#include "lcner/crf.hpp"
#include "lcner/decode.hpp"
#include "lcner/emission.hpp"
#include "lcner/error.hpp"
#include "lcner/grid.hpp"
#include "lcner/labelspace.hpp"
#include "lcner/logits_io.hpp"
#include "lcner/parallel.hpp"
#include "lcner/segment.hpp"

namespace lcner::cli {

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

/// Writes to `path`, or to `fallback` when the path is empty or "-".
void emit(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& write) {
  if (path.empty() || path == "-") {
    write(fallback);
    return;
  }
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  write(f);
  if (!f) throw IoError("failed writing '" + path + "'");
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> arm_names() {
  std::vector<std::string> out;
  for (Arm a : kAllArms) out.emplace_back(arm_name(a));
  return out;
}

struct Common {
  unsigned threads = 1;
};

// segment

struct SegmentOptions {
  std::string input;
  std::string output = "-";
  std::string profile = "c";
};

void cmd_segment(const SegmentOptions& o, std::ostream& out) {
  const auto profile = SegmentationProfile::by_name(o.profile);
  std::ifstream in(o.input, std::ios::binary);
  if (!in) throw IoError("cannot open '" + o.input + "'");
  std::vector<std::string> segments;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    for (auto& s : segment(line, profile)) segments.push_back(std::move(s));
  }
  emit(o.output, out, [&](std::ostream& os) {
    for (const auto& s : segments) os << s << '\n';
  });
}

// vocab

struct VocabOptions {
  std::vector<std::string> types;
  std::string output = "-";
};

void cmd_vocab(const VocabOptions& o, std::ostream& out) {
  const auto labels = build_label_set(o.types);
  emit(o.output, out, [&](std::ostream& os) { write_vocabulary(os, labels); });
}

// train

struct TrainOptions {
  std::string corpus;
  std::string labels;
  std::string arm = "lc";
  std::string output;
  FeatureEncoder encoder;
  EmissionTrainConfig emission;
  CrfTrainConfig crf;
  std::string crf_init = "zeros";
};

double decoded_accuracy(std::span<const EncodedSentence> corpus, const LinearProjection& proj,
                        const std::optional<CrfParams>& crf, Arm arm, const ConstraintMatrix& cm,
                        unsigned threads) {
  std::vector<std::size_t> right(corpus.size(), 0);
  parallel_for(corpus.size(), threads, [&](std::size_t i) {
    const auto logits = project(corpus[i].features, proj);
    LabelSequence y;
    switch (arm) {
      case Arm::Baseline: y = argmax_decode(logits); break;
      case Arm::Lc: y = lc_decode(logits, cm); break;
      case Arm::Crf: y = crf_decode(logits, *crf); break;
      case Arm::CrfLc: y = crf_decode(logits, *crf, &cm); break;
    }
    for (std::size_t t = 0; t < y.size(); ++t) right[i] += y[t] == corpus[i].gold[t];
  });
  std::size_t hits = 0, total = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    hits += right[i];
    total += corpus[i].gold.size();
  }
  return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

void cmd_train(TrainOptions o, const Common& common, std::ostream& out) {
  const auto labels = read_vocabulary_file(o.labels);
  const auto cm = build_constraint_matrix(labels);
  const auto sentences = read_corpus_file(o.corpus, labels);
  const auto encoded = encode_corpus(sentences, o.encoder, labels.size());
  const Arm arm = parse_arm(o.arm);

  auto emission = train_emission(encoded, labels.size(), o.encoder.dim, o.emission);
  for (std::size_t e = 0; e < emission.epoch_losses.size(); ++e)
    out << "emission epoch " << e + 1 << " loss " << emission.epoch_losses[e] << '\n';

  Checkpoint ckpt;
  ckpt.k = labels.size();
  ckpt.vocabulary_hash = labels.fingerprint_hex();
  ckpt.encoder = o.encoder;
  ckpt.projection = std::move(emission.projection);
  if (arm_uses_crf(arm)) {
    o.crf.init = o.crf_init == "constrained" ? TransitionInit::Constrained : TransitionInit::Zeros;
    auto crf = train_crf(encoded, ckpt.projection, o.crf, &cm);
    for (std::size_t e = 0; e < crf.epoch_losses.size(); ++e)
      out << "crf epoch " << e + 1 << " nll " << crf.epoch_losses[e] << '\n';
    ckpt.projection = std::move(crf.model.projection);
    ckpt.crf = std::move(crf.model.params);
  }
  out << "token_accuracy " << decoded_accuracy(encoded, ckpt.projection, ckpt.crf, arm, cm, common.threads)
      << '\n';
  write_checkpoint_file(o.output, ckpt);
}

// decode

struct DecodeOptions {
  std::string labels;
  std::string arm = "lc";
  std::string logits;
  std::string checkpoint;
  std::string corpus;
  std::string text;
  std::string output = "-";
};

void cmd_decode(const DecodeOptions& o, const Common& common, std::ostream& out) {
  const auto labels = read_vocabulary_file(o.labels);
  const auto cm = build_constraint_matrix(labels);
  const Arm arm = parse_arm(o.arm);

  std::optional<Checkpoint> ckpt;
  if (!o.checkpoint.empty()) {
    ckpt = read_checkpoint_file(o.checkpoint);
    check_compatible(*ckpt, labels);
  }
  if (arm_uses_crf(arm) && !(ckpt && ckpt->crf))
    throw CompatibilityError("arm '" + o.arm + "' needs a checkpoint with CRF parameters");

  std::vector<Sentence> sentences;
  std::vector<LogitsSequence> logits;
  if (!o.logits.empty()) {
    for (auto& rec : read_logits_file(o.logits, labels.size())) {
      sentences.push_back({std::move(rec.tokens), std::nullopt});
      logits.push_back(std::move(rec.logits));
    }
  } else {
    if (!ckpt) throw UsageError("decode needs --logits or --checkpoint");
    if (!o.corpus.empty()) {
      sentences = read_corpus_file(o.corpus, labels);
    } else if (!o.text.empty()) {
      std::istringstream in(slurp(o.text));
      std::string line;
      while (std::getline(in, line)) {
        auto tokens = tokenize(line);
        if (!tokens.empty()) sentences.push_back({std::move(tokens), std::nullopt});
      }
    } else {
      throw UsageError("decode with --checkpoint needs --corpus or --text");
    }
    logits.resize(sentences.size());
    parallel_for(sentences.size(), common.threads, [&](std::size_t i) {
      logits[i] = project(encode(sentences[i].tokens, ckpt->encoder), ckpt->projection);
    });
  }

  std::vector<LabelSequence> pred;
  switch (arm) {
    case Arm::Baseline: pred = decode_batch(logits, Decoder::Argmax, cm, {}, common.threads); break;
    case Arm::Lc: pred = decode_batch(logits, Decoder::Lc, cm, {}, common.threads); break;
    case Arm::Crf:
    case Arm::CrfLc:
      pred.resize(logits.size());
      parallel_for(logits.size(), common.threads, [&](std::size_t i) {
        pred[i] = crf_decode(logits[i], *ckpt->crf, arm == Arm::CrfLc ? &cm : nullptr);
      });
      break;
  }
  emit(o.output, out, [&](std::ostream& os) { write_corpus(os, sentences, labels, pred); });
}

// score

struct ScoreOptions {
  std::string gold;
  std::string pred;
  std::string labels;
  std::string output = "-";
};

void cmd_score(const ScoreOptions& o, std::ostream& out) {
  const auto labels = read_vocabulary_file(o.labels);
  const auto gold = read_corpus_file(o.gold, labels);
  const auto pred = read_corpus_file(o.pred, labels);
  if (gold.size() != pred.size())
    throw InvalidInput("gold has " + std::to_string(gold.size()) + " sentences, predictions have " +
                       std::to_string(pred.size()));
  std::vector<LabelSequence> seqs;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].tokens != gold[i].tokens)
      throw InvalidInput("sentence " + std::to_string(i + 1) + ": prediction tokens differ from gold");
    seqs.push_back(*pred[i].gold);
  }
  const auto report = score(labels, gold, seqs);
  emit(o.output, out, [&](std::ostream& os) { os << score_report_json(report) << '\n'; });
}

// grid

struct GridOptions {
  GridConfig config;
  std::vector<std::string> arms = arm_names();
  std::string train;
  std::string test;
  std::string labels;
  std::string output = "-";
};

void cmd_grid(GridOptions o, const Common& common, std::ostream& out) {
  o.config.threads = common.threads;
  o.config.arms.clear();
  for (const auto& a : o.arms) o.config.arms.push_back(parse_arm(a));
  GridResult result;
  if (!o.train.empty()) {
    if (o.test.empty() || o.labels.empty()) throw UsageError("grid --train needs --test and --labels");
    const auto labels = read_vocabulary_file(o.labels);
    const auto train = read_corpus_file(o.train, labels);
    const auto test = read_corpus_file(o.test, labels);
    result = run_grid(labels, train, test, o.config);
  } else {
    result = run_grid(o.config);
  }
  emit(o.output, out, [&](std::ostream& os) { os << format_grid_table(result); });
}

// advise

struct AdviseOptions {
  std::optional<std::uint64_t> labels;
  std::optional<std::uint64_t> sentences;
  std::string input;
  advisor::Params params;
  std::string output = "-";
};

void cmd_advise(const AdviseOptions& o, std::ostream& out) {
  advisor::DatasetProfile profile;
  if (!o.input.empty()) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(slurp(o.input));
      profile.labels = j.at("L").get<std::uint64_t>();
      profile.sentences = j.at("N").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(o.input + ": expected {\"L\": int, \"N\": int}: " + e.what());
    }
  } else {
    if (!o.labels || !o.sentences) throw UsageError("advise needs --L and --N, or --input");
    profile = {*o.labels, *o.sentences};
  }
  const auto rec = advisor::recommend(profile, o.params);
  nlohmann::ordered_json j;
  j["recommendation"] = std::string(advisor::to_string(rec));
  j["threshold"] = advisor::threshold(profile, o.params);
  emit(o.output, out, [&](std::ostream& os) { os << j.dump() << '\n'; });
}

// relabel

struct RelabelOptions {
  std::string corpus;
  std::string source;
  std::string target;
  std::vector<std::string> map;
  std::string output;
};

void cmd_relabel(const RelabelOptions& o, std::ostream& out) {
  const auto source = read_vocabulary_file(o.source);
  const auto target = read_vocabulary_file(o.target);
  std::map<std::string, std::optional<std::string>> mapping;
  for (const auto& m : o.map) {
    const auto eq = m.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == m.size())
      throw UsageError("--map entries look like SRC=DST or SRC=-, got '" + m + "'");
    const std::string to = m.substr(eq + 1);
    mapping[m.substr(0, eq)] = to == "-" ? std::nullopt : std::optional<std::string>(to);
  }
  const auto sentences = read_corpus_file(o.corpus, source);
  const auto result = relabel_subset(sentences, source, target, mapping);
  write_corpus_file(o.output, result.sentences, target);
  out << "sentences " << result.stats.sentences << "\nkept_spans " << result.stats.kept_spans
      << "\ndropped_spans " << result.stats.dropped_spans << "\nlabels " << result.stats.target_labels
      << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Constrained decoding toolkit for BMES sequence labeling", "lcner"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML or INI file with option defaults");

  Common common;
  app.add_option("--threads", common.threads, "Worker threads for per-sentence work")
      ->check(CLI::Range(1u, 1024u));

  SegmentOptions seg;
  auto* seg_cmd = app.add_subcommand("segment", "Split text into sentences, one per output line");
  seg_cmd->add_option("input", seg.input, "UTF-8 text file")->required();
  seg_cmd->add_option("-o,--output", seg.output, "Output file (default stdout)");
  seg_cmd->add_option("--profile", seg.profile, "Rule set: c (terminals only) or ab (terminals and closers)")
      ->check(CLI::IsMember({"ab", "c"}))
      ->capture_default_str();

  VocabOptions vocab;
  auto* vocab_cmd = app.add_subcommand("vocab", "Write the BMES label vocabulary for entity types");
  vocab_cmd->add_option("types", vocab.types, "Entity type names")->required();
  vocab_cmd->add_option("-o,--output", vocab.output, "Output file (default stdout)");

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train an emission model, and a CRF for crf arms");
  train_cmd->add_option("--corpus", train.corpus, "Two-column training corpus")->required();
  train_cmd->add_option("--labels", train.labels, "Label vocabulary file")->required();
  train_cmd->add_option("--arm", train.arm, "baseline, lc, crf or crf+lc")
      ->check(CLI::IsMember(arm_names()))
      ->capture_default_str();
  train_cmd->add_option("-o,--output", train.output, "Checkpoint file")->required();
  train_cmd->add_option("--epochs", train.emission.epochs, "Emission epochs")->capture_default_str();
  train_cmd->add_option("--lr", train.emission.learning_rate, "Emission learning rate")->capture_default_str();
  train_cmd->add_option("--batch-size", train.emission.batch_size, "Sentences per batch")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--seed", train.emission.seed, "Shuffling seed")->capture_default_str();
  train_cmd->add_option("--dim", train.encoder.dim, "Hashed feature dimension")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--window", train.encoder.window, "Context window radius")->capture_default_str();
  train_cmd->add_option("--hash-seed", train.encoder.seed, "Feature hash seed")->capture_default_str();
  train_cmd->add_option("--crf-epochs", train.crf.epochs, "CRF epochs")->capture_default_str();
  train_cmd->add_option("--crf-lr", train.crf.learning_rate, "CRF learning rate")->capture_default_str();
  train_cmd->add_option("--crf-init", train.crf_init, "zeros or constrained")
      ->check(CLI::IsMember({"zeros", "constrained"}))
      ->capture_default_str();
  train_cmd->callback([&] {
    train.crf.batch_size = train.emission.batch_size;
    train.crf.seed = train.emission.seed;
  });

  DecodeOptions dec;
  auto* dec_cmd = app.add_subcommand("decode", "Decode logits or a checkpoint into predicted labels");
  dec_cmd->add_option("--labels", dec.labels, "Label vocabulary file")->required();
  dec_cmd->add_option("--arm", dec.arm, "baseline, lc, crf or crf+lc")
      ->check(CLI::IsMember(arm_names()))
      ->capture_default_str();
  auto* logits_opt = dec_cmd->add_option("--logits", dec.logits, "JSON-lines logits file");
  dec_cmd->add_option("--checkpoint", dec.checkpoint, "Checkpoint from `lcner train`");
  auto* corpus_opt = dec_cmd->add_option("--corpus", dec.corpus, "Two-column corpus to label");
  auto* text_opt = dec_cmd->add_option("--text", dec.text, "Plain text, one sentence per line");
  logits_opt->excludes(corpus_opt)->excludes(text_opt);
  corpus_opt->excludes(text_opt);
  dec_cmd->add_option("-o,--output", dec.output, "Predictions file (default stdout)");

  ScoreOptions sc;
  auto* score_cmd = app.add_subcommand("score", "Entity-level precision, recall and F1 as JSON");
  score_cmd->add_option("--gold", sc.gold, "Gold two-column file")->required();
  score_cmd->add_option("--pred", sc.pred, "Predicted two-column file")->required();
  score_cmd->add_option("--labels", sc.labels, "Label vocabulary file")->required();
  score_cmd->add_option("-o,--output", sc.output, "Report file (default stdout)");

  GridOptions grid;
  grid.config.synth.entity_types = 6;
  grid.config.synth.sentences = 3000;
  grid.config.synth.noise_rate = 0.3;
  auto* grid_cmd = app.add_subcommand("grid", "Compare baseline, lc, crf and crf+lc over seeds");
  grid_cmd->add_option("--types", grid.config.synth.entity_types, "Synthetic entity types")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  grid_cmd->add_option("--sentences", grid.config.synth.sentences, "Synthetic training sentences")
      ->capture_default_str();
  grid_cmd->add_option("--noise", grid.config.synth.noise_rate, "Synthetic noise rate")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  grid_cmd->add_option("--test-sentences", grid.config.test_sentences, "Synthetic test sentences")
      ->capture_default_str();
  grid_cmd->add_option("--seeds", grid.config.seeds, "Comma-separated seeds")
      ->delimiter(',')
      ->capture_default_str();
  grid_cmd->add_option("--arms", grid.arms, "Comma-separated arms")
      ->delimiter(',')
      ->check(CLI::IsMember(arm_names()));
  grid_cmd->add_option("--epochs", grid.config.emission.epochs, "Emission epochs")->capture_default_str();
  grid_cmd->add_option("--lr", grid.config.emission.learning_rate, "Emission learning rate")
      ->capture_default_str();
  grid_cmd->add_option("--crf-epochs", grid.config.crf.epochs, "CRF epochs")->capture_default_str();
  grid_cmd->add_option("--crf-lr", grid.config.crf.learning_rate, "CRF learning rate")->capture_default_str();
  grid_cmd->add_option("--dim", grid.config.encoder.dim, "Hashed feature dimension")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  grid_cmd->add_option("--window", grid.config.encoder.window, "Context window radius")->capture_default_str();
  grid_cmd->add_option("--train", grid.train, "Fixed training corpus instead of synthetic data");
  grid_cmd->add_option("--test", grid.test, "Fixed test corpus");
  grid_cmd->add_option("--labels", grid.labels, "Label vocabulary for --train/--test");
  grid_cmd->add_option("-o,--output", grid.output, "Table file (default stdout)");

  AdviseOptions adv;
  auto* adv_cmd = app.add_subcommand("advise", "Recommend LC_ONLY or CRF_PLUS_LC for a dataset");
  adv_cmd->add_option("--L", adv.labels, "Label cardinality including O");
  adv_cmd->add_option("--N", adv.sentences, "Sentence count");
  adv_cmd->add_option("--input", adv.input, "JSON file {\"L\": int, \"N\": int}");
  adv_cmd->add_option("--alpha", adv.params.alpha, "Threshold coefficient")->capture_default_str();
  adv_cmd->add_option("--beta", adv.params.beta, "Threshold exponent")->capture_default_str();
  adv_cmd->add_option("-o,--output", adv.output, "Output file (default stdout)");

  RelabelOptions rel;
  auto* rel_cmd = app.add_subcommand("relabel", "Map a corpus onto another label vocabulary");
  rel_cmd->add_option("--corpus", rel.corpus, "Two-column corpus")->required();
  rel_cmd->add_option("--source-labels", rel.source, "Vocabulary of the corpus")->required();
  rel_cmd->add_option("--target-labels", rel.target, "Target vocabulary")->required();
  rel_cmd->add_option("--map", rel.map, "SRC=DST or SRC=- (drop), comma-separated")
      ->delimiter(',')
      ->required();
  rel_cmd->add_option("-o,--output", rel.output, "Relabeled corpus")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*seg_cmd) cmd_segment(seg, out);
    else if (*vocab_cmd) cmd_vocab(vocab, out);
    else if (*train_cmd) cmd_train(train, common, out);
    else if (*dec_cmd) cmd_decode(dec, common, out);
    else if (*score_cmd) cmd_score(sc, out);
    else if (*grid_cmd) cmd_grid(grid, common, out);
    else if (*adv_cmd) cmd_advise(adv, out);
    else if (*rel_cmd) cmd_relabel(rel, out);
    return kExitOk;
  } catch (const UsageError& e) {
    err << "lcner: " << e.what() << "\nRun with --help for more information.\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "lcner: " << e.what() << '\n';
    return kExitIo;
  } catch (const InvalidInput& e) {
    err << "lcner: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericalFailure& e) {
    err << "lcner: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const CompatibilityError& e) {
    err << "lcner: " << e.what() << '\n';
    return kExitCompatibility;
  } catch (const std::exception& e) {
    err << "lcner: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace lcner::cli
