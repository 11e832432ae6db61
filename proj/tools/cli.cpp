#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sitsent/corpus.hpp"
#include "sitsent/error.hpp"
#include "sitsent/features.hpp"
#include "sitsent/learners.hpp"
#include "sitsent/pipeline.hpp"
#include "sitsent/scorer.hpp"
#include "sitsent/synth.hpp"

namespace sitsent {

namespace {

namespace fs = std::filesystem;

// Bad flag values detected after CLI11 has accepted the command line.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::string command;
  std::string corpus;
  std::string ref;
  std::vector<std::string> sys;
  std::string translations;
  std::string model;
  std::string spec;
  std::string embeddings;
  std::string lexicon;
  std::string out_dir = "out";
  std::string variant = "model_iib";
  std::string features;
  std::string loss = "hinge";
  std::string grid;
  std::string system_id;
  std::uint64_t seed = 42;
  bool seed_given = false;
  std::size_t k_outer = 10;
  std::size_t k_inner = 10;
  std::size_t iterations = 10000;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class RunDir {
 public:
  explicit RunDir(std::string dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string content) {
    files_.emplace_back(name, std::move(content));
  }
  void log(const std::string& line) { log_ += line + "\n"; }

  // Everything is buffered and written once the command has finished.
  void flush() {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error("cannot create '" + dir_ + "': " + ec.message());
    files_.emplace_back("log.txt", log_);
    for (const auto& [name, content] : files_) {
      const fs::path p = fs::path(dir_) / name;
      std::ofstream out(p, std::ios::binary);
      out << content;
      if (!out) throw Error("cannot write '" + p.string() + "'");
    }
  }

 private:
  std::string dir_;
  std::string log_;
  std::vector<std::pair<std::string, std::string>> files_;
};

PipelineConfig make_config(const RunOptions& o) {
  PipelineConfig cfg;
  try {
    cfg.variant = parse_variant(o.variant);
    cfg.loss = parse_loss_kind(o.loss);
    cfg.blocks = o.features.empty() ? default_blocks(cfg.variant)
                                    : parse_feature_blocks(o.features);
    Hyper base;
    base.seed = o.seed;
    cfg.grid = o.grid.empty() ? default_grid(base) : parse_grid(o.grid, base);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (o.k_outer < 2) throw UsageError("--k-outer must be at least 2");
  if (o.k_inner < 2) throw UsageError("--k-inner must be at least 2");
  cfg.k_inner = o.k_inner;
  cfg.seed = o.seed;
  cfg.system_id = o.system_id;
  return cfg;
}

std::string config_echo(const RunOptions& o) {
  std::string grid = o.grid;
  std::string features = o.features;
  try {
    const PipelineConfig cfg = make_config(o);
    std::vector<std::string> lambdas;
    for (const Hyper& h : cfg.grid) lambdas.push_back(format_number(h.lambda));
    grid = join(lambdas, ',');
    features = format_feature_blocks(cfg.blocks);
  } catch (const UsageError&) {
    // Left as typed; the command reports the error itself.
  }
  std::ostringstream s;
  s << "command=" << o.command << "\n"
    << "corpus=" << o.corpus << "\n"
    << "ref=" << o.ref << "\n"
    << "sys=" << join(o.sys, ',') << "\n"
    << "translations=" << o.translations << "\n"
    << "model=" << o.model << "\n"
    << "spec=" << o.spec << "\n"
    << "embeddings=" << o.embeddings << "\n"
    << "lexicon=" << o.lexicon << "\n"
    << "variant=" << o.variant << "\n"
    << "features=" << features << "\n"
    << "loss=" << o.loss << "\n"
    << "grid=" << grid << "\n"
    << "seed=" << o.seed << "\n"
    << "k_outer=" << o.k_outer << "\n"
    << "k_inner=" << o.k_inner << "\n"
    << "iterations=" << o.iterations << "\n"
    << "system_id=" << o.system_id << "\n";
  return s.str();
}

Corpus load_corpus(const RunOptions& o) {
  if (o.corpus.empty()) throw UsageError("--corpus is required");
  return parse_corpus(read_file(o.corpus));
}

PipelineResources load_resources(const RunOptions& o) {
  PipelineResources res;
  if (!o.embeddings.empty()) {
    res.embeddings =
        std::make_shared<const EmbeddingTable>(load_embeddings(read_file(o.embeddings)));
  }
  if (!o.lexicon.empty()) {
    res.lexicon = std::make_shared<const Lexicon>(load_lexicon(read_file(o.lexicon)));
  }
  return res;
}

AgreementPartition load_partition(const RunOptions& o) {
  if (o.ref.empty()) throw UsageError("--ref is required");
  const ReferenceSet ref = parse_reference(read_file(o.ref));
  if (ref.annotators.empty() || ref.annotators.size() > 2) {
    throw ConfigError("reference must declare one or two annotators, found " +
                      std::to_string(ref.annotators.size()));
  }
  auto list = [&ref](std::size_t i) {
    auto it = ref.by_annotator.find(ref.annotators[i]);
    return it == ref.by_annotator.end() ? std::vector<SentimentAnnotation>{}
                                        : it->second;
  };
  return compute_agreement(list(0), ref.annotators.size() == 2
                                        ? list(1)
                                        : std::vector<SentimentAnnotation>{});
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

int run_validate(const RunOptions& o, RunDir& run, std::ostream& out) {
  const Corpus c = load_corpus(o);
  const std::vector<Violation> v = validate_corpus(c);
  std::string vt = "record_id\trule\tdetail\n";
  for (const auto& x : v) {
    vt += escape_field(x.record_id) + "\t" + x.rule + "\t" + escape_field(x.detail) + "\n";
  }
  std::string ct = "language\tdocuments\tsegments\tframes\tannotations\tpercent_negative\n";
  for (const auto& [lang, n] : count_by_language(c)) {
    ct += lang + "\t" + std::to_string(n.documents) + "\t" + std::to_string(n.segments) +
          "\t" + std::to_string(n.frames) + "\t" + std::to_string(n.annotations) + "\t" +
          fixed6(n.percent_negative) + "\n";
  }
  run.add("violations.tsv", vt);
  run.add("counts.tsv", ct);
  const std::string msg = std::to_string(v.size()) + " violation(s)";
  run.log(msg);
  out << msg << "\n";
  return v.empty() ? 0 : 1;
}

int run_translate_merge(const RunOptions& o, RunDir& run, std::ostream& out) {
  if (o.translations.empty()) throw UsageError("--translations is required");
  const Corpus c = load_corpus(o);
  const auto t = parse_translations(read_file(o.translations));
  const Corpus merged = merge_translations(c, t);
  run.add("corpus.tsv", serialize_corpus(merged));
  const std::string msg = "merged " + std::to_string(t.size()) + " translation(s); " +
                          std::to_string(merged.documents().size()) + " documents";
  run.log(msg);
  out << msg << "\n";
  return 0;
}

int run_pairs(const RunOptions& o, RunDir& run, std::ostream& out) {
  const Corpus c = load_corpus(o);
  const auto pairs = build_pairs(c);
  std::string t = "doc_id\tsegment_id\tsegment_index\tframe_id\ttweet\tlabel\n";
  std::size_t positives = 0;
  for (const auto& p : pairs) {
    t += p.doc_id + "\t" + p.segment_id + "\t" + std::to_string(p.segment_index) + "\t" +
         p.frame_id + "\t" + (p.tweet ? "1" : "0") + "\t" + std::to_string(p.label) + "\n";
    positives += p.label == 1;
  }
  run.add("pairs.tsv", t);
  const std::string msg = std::to_string(pairs.size()) + " pairs, " +
                          std::to_string(positives) + " positive";
  run.log(msg);
  out << msg << "\n";
  return 0;
}

int run_cv(const RunOptions& o, RunDir& run, std::ostream& out) {
  const PipelineConfig cfg = make_config(o);
  const Corpus c = load_corpus(o);
  const CvReport r = cross_validate(c, cfg, load_resources(o), o.k_outer);
  std::ostringstream s;
  s << "variant=" << to_string(cfg.variant) << "\n";
  write_cv_report(s, r);
  run.add("cv_report.txt", s.str());
  const std::string msg = "pooled f1=" + fixed6(r.pooled.f1) +
                          " mean f1=" + fixed6(r.mean.f1);
  run.log(msg);
  out << msg << "\n";
  return 0;
}

int run_train(const RunOptions& o, RunDir& run, std::ostream& out) {
  const PipelineConfig cfg = make_config(o);
  const Corpus c = load_corpus(o);
  const TrainedPipeline tp = train_pipeline(c, cfg, load_resources(o));
  std::ostringstream s;
  tp.save(s);
  run.add("model.txt", s.str());
  run.log("trained " + std::string(to_string(cfg.variant)));
  out << "trained " << to_string(cfg.variant) << "\n";
  return 0;
}

int run_predict(const RunOptions& o, RunDir& run, std::ostream& out) {
  const Corpus c = load_corpus(o);
  const PipelineResources res = load_resources(o);
  std::optional<TrainedPipeline> tp;
  if (!o.model.empty()) {
    std::istringstream in(read_file(o.model));
    tp.emplace(TrainedPipeline::load(in, res));
  } else {
    tp.emplace(train_pipeline(c, make_config(o), res));
  }
  const auto outputs = tp->predict(c, res);
  for (const auto& w : tp->warnings()) {
    run.log("warning: " + w);
  }
  std::ostringstream s;
  write_predictions(s, tp->config().effective_system_id(), outputs);
  run.add("predictions.tsv", s.str());
  const std::string msg = std::to_string(outputs.size()) + " output(s)";
  run.log(msg);
  out << msg << "\n";
  return 0;
}

int run_import(const RunOptions& o, RunDir& run, std::ostream& out) {
  if (o.sys.size() != 1) throw UsageError("import-predictions takes one --sys file");
  const Corpus c = load_corpus(o);
  const std::string text = read_file(o.sys[0]);
  const PredictionSet set = parse_predictions(text);
  const auto outputs = import_external_predictions(text, c);
  std::ostringstream s;
  write_predictions(s, set.system_id, outputs);
  run.add("predictions.tsv", s.str());
  const std::string msg = "imported " + std::to_string(outputs.size()) + " output(s)";
  run.log(msg);
  out << msg << "\n";
  return 0;
}

int run_score(const RunOptions& o, RunDir& run, std::ostream& out) {
  if (o.sys.size() != 1) throw UsageError("score takes one --sys file");
  const AgreementPartition p = load_partition(o);
  const PredictionSet set = parse_predictions(read_file(o.sys[0]));
  const ScoreReport r = score(set.outputs, p);
  std::ostringstream s;
  s << "system_id=" << set.system_id << "\n";
  write_score_report(s, r);
  run.add("score_report.txt", s.str());
  const std::string msg = "precision=" + fixed6(r.precision) + " recall=" +
                          fixed6(r.recall) + " f1=" + fixed6(r.f1);
  run.log(msg);
  out << msg << "\n";
  return 0;
}

int run_perm_test(const RunOptions& o, RunDir& run, std::ostream& out) {
  if (o.sys.size() != 2) throw UsageError("perm-test takes exactly two --sys files");
  if (o.iterations == 0) throw UsageError("--iterations must be positive");
  const AgreementPartition p = load_partition(o);
  const PredictionSet a = parse_predictions(read_file(o.sys[0]));
  const PredictionSet b = parse_predictions(read_file(o.sys[1]));
  const PermutationResult r =
      permutation_test(a.outputs, b.outputs, p, o.iterations, o.seed);
  std::ostringstream s;
  s << "system_a=" << a.system_id << "\n"
    << "system_b=" << b.system_id << "\n"
    << "seed=" << o.seed << "\n";
  write_permutation_report(s, r);
  run.add("perm_report.txt", s.str());
  const std::string msg = "p=" + format_number(r.p_value);
  run.log(msg);
  out << msg << "\n";
  return 0;
}

int run_synth(const RunOptions& o, RunDir& run, std::ostream& out) {
  SynthSpec spec = o.spec.empty() ? SynthSpec{} : parse_synth_spec(read_file(o.spec));
  if (o.seed_given) spec.seed = o.seed;
  const SynthOutput s = generate_synthetic(spec);
  run.add("spec.txt", format_synth_spec(spec));
  run.add("corpus.tsv", s.corpus_text);
  run.add("reference.tsv", s.reference_text);
  run.add("manifest.txt", format_manifest(s.manifest));
  const std::string msg = std::to_string(s.manifest.documents) + " documents, " +
                          std::to_string(s.manifest.pairs_total) + " pairs";
  run.log(msg);
  out << msg << "\n";
  return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out,
                 std::ostream& err) {
  CLI::App app{"Situational sentiment pipeline and scorer", "sitsent"};
  app.require_subcommand(1);
  RunOptions o;

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const RunOptions&, RunDir&, std::ostream&);
  };
  const std::vector<Command> commands = {
      {"validate", "Lint a corpus and report counts", run_validate},
      {"translate-merge", "Merge translated documents into a corpus",
       run_translate_merge},
      {"pairs", "Emit the (segment, frame) pair dataset", run_pairs},
      {"cv", "Document-grouped nested cross-validation report", run_cv},
      {"train", "Train a pipeline and save the model", run_train},
      {"predict", "Predict sentiment outputs for a corpus", run_predict},
      {"import-predictions", "Check and normalise an external predictions file",
       run_import},
      {"score", "Agreement-weighted precision, recall and F1", run_score},
      {"perm-test", "Paired permutation test between two systems", run_perm_test},
      {"synth", "Generate a synthetic dual-annotated corpus", run_synth},
  };

  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    CLI::App* sc = app.add_subcommand(c.name, c.help);
    sc->add_option("--corpus", o.corpus, "Corpus file");
    sc->add_option("--ref", o.ref, "Reference file");
    sc->add_option("--sys", o.sys, "Predictions file (repeat for perm-test)");
    sc->add_option("--translations", o.translations, "Translation file");
    sc->add_option("--model", o.model, "Saved pipeline model");
    sc->add_option("--spec", o.spec, "Synthetic corpus spec");
    sc->add_option("--embeddings", o.embeddings, "Word embedding file");
    sc->add_option("--lexicon", o.lexicon, "Lexicon file");
    sc->add_option("--out-dir", o.out_dir, "Run output directory")->capture_default_str();
    sc->add_option("--variant", o.variant, "Pipeline variant")->capture_default_str();
    sc->add_option("--features", o.features, "Feature blocks, e.g. tfidf,lexicon");
    sc->add_option("--loss", o.loss, "hinge or logistic")->capture_default_str();
    sc->add_option("--grid", o.grid, "Comma-separated lambda grid");
    sc->add_option("--system-id", o.system_id, "System id for predictions");
    sc->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    sc->add_option("--k-outer", o.k_outer, "Outer CV folds")->capture_default_str();
    sc->add_option("--k-inner", o.k_inner, "Inner CV folds")->capture_default_str();
    sc->add_option("--iterations", o.iterations, "Permutation iterations")
        ->capture_default_str();
    subs.push_back(sc);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  }

  std::size_t which = 0;
  while (!subs[which]->parsed()) ++which;
  o.command = commands[which].name;
  o.seed_given = subs[which]->count("--seed") > 0;

  RunDir run(o.out_dir);
  run.add("run_config.txt", config_echo(o));
  try {
    const int status = commands[which].run(o, run, out);
    run.flush();
    return status;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cli_dispatch(int argc, const char* const* argv) {
  return cli_dispatch(argc, argv, std::cout, std::cerr);
}

}  // namespace sitsent
