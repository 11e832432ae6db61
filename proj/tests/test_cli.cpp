#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "sitsent/synth.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int status = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "sitsent");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  Result r;
  r.status = sitsent::cli_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("sitsent_cli_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

// A synthetic corpus written through the CLI itself.
void make_synth(const TempDir& t) {
  spit(t / "spec.txt", "seed=5\ntweet=6\nnews_article=6\npositive_rate=0.1\n");
  const Result r = run({"synth", "--spec", t / "spec.txt", "--out-dir", t / "syn"});
  REQUIRE(r.status == 0);
}

}  // namespace

TEST_CASE("usage errors exit with status 2") {
  CHECK(run({}).status == 2);
  CHECK(run({"frobnicate"}).status == 2);
  CHECK(run({"validate"}).status == 2);
  CHECK(run({"validate", "--bogus", "x"}).status == 2);
  CHECK(run({"cv", "--corpus", "x", "--variant", "model_iv"}).status == 2);
  CHECK(run({"cv", "--corpus", "x", "--k-outer", "1"}).status == 2);
  CHECK(run({"perm-test", "--ref", "r", "--sys", "a"}).status == 2);
  CHECK(run({"score", "--ref", "r"}).status == 2);
  const Result help = run({"--help"});
  CHECK(help.status == 0);
  CHECK(help.out.find("perm-test") != std::string::npos);
}

TEST_CASE("runtime failures exit with status 1") {
  TempDir t;
  const Result r = run({"validate", "--corpus", t / "missing.tsv", "--out-dir", t / "o"});
  CHECK(r.status == 1);
  CHECK_FALSE(r.err.empty());
  CHECK_FALSE(fs::exists(t.path / "o" / "run_config.txt"));

  spit(t / "bad.tsv", "DOC\td1\teng\n");
  CHECK(run({"validate", "--corpus", t / "bad.tsv", "--out-dir", t / "o"}).status == 1);
}

TEST_CASE("validate reports violations") {
  TempDir t;
  spit(t / "c.tsv",
       "DOC\td1\teng\ttweet\n"
       "SEG\td1\ts0\t0\tone\n"
       "SEG\td1\ts1\t1\ttwo\n");
  const Result r = run({"validate", "--corpus", t / "c.tsv", "--out-dir", t / "o"});
  CHECK(r.status == 1);
  CHECK(slurp(t.path / "o" / "violations.tsv").find("tweet_single_segment") !=
        std::string::npos);
  CHECK(fs::exists(t.path / "o" / "counts.tsv"));
}

TEST_CASE("synth, pairs and validate agree") {
  TempDir t;
  make_synth(t);
  const fs::path syn = t.path / "syn";
  for (const char* f : {"spec.txt", "corpus.tsv", "reference.tsv", "manifest.txt",
                        "run_config.txt", "log.txt"}) {
    CHECK(fs::exists(syn / f));
  }
  const auto manifest = sitsent::parse_manifest(slurp(syn / "manifest.txt"));
  CHECK(manifest.seed == 5);
  CHECK(manifest.documents == 12);

  CHECK(run({"validate", "--corpus", (syn / "corpus.tsv").string(), "--out-dir", t / "v"})
            .status == 0);
  REQUIRE(run({"pairs", "--corpus", (syn / "corpus.tsv").string(), "--out-dir", t / "p"})
              .status == 0);
  std::istringstream pairs(slurp(t.path / "p" / "pairs.tsv"));
  std::string line;
  std::size_t rows = 0;
  std::size_t positives = 0;
  std::getline(pairs, line);
  CHECK(line == "doc_id\tsegment_id\tsegment_index\tframe_id\ttweet\tlabel");
  while (std::getline(pairs, line)) {
    ++rows;
    positives += line.back() == '1';
  }
  CHECK(rows == manifest.pairs_total);
  CHECK(positives == manifest.pairs_positive);

  const Result reseeded =
      run({"synth", "--spec", t / "spec.txt", "--seed", "6", "--out-dir", t / "syn6"});
  CHECK(reseeded.status == 0);
  CHECK(sitsent::parse_manifest(slurp(t.path / "syn6" / "manifest.txt")).seed == 6);
}

TEST_CASE("score and perm-test from files") {
  TempDir t;
  make_synth(t);
  const std::string ref = (t.path / "syn" / "reference.tsv").string();
  const std::string corpus = (t.path / "syn" / "corpus.tsv").string();

  // Every annotation of the first annotator, as a system.
  std::istringstream in(slurp(ref));
  std::ostringstream perfect;
  perfect << "SYS\tperfect\n";
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("ANN\tann_a\t", 0) != 0) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string x; std::getline(ls, x, '\t');) f.push_back(x);
    perfect << "OUT\t" << f[2] << "\t" << f[3] << "\t"
            << (f[4][0] == '-' ? "neg" : "pos") << "\t\t" << f[6] << "\t" << f[7] << "\n";
  }
  spit(t / "perfect.tsv", perfect.str());
  spit(t / "empty.tsv", "SYS\tempty\n");

  const Result s = run({"score", "--ref", ref, "--sys", t / "perfect.tsv", "--out-dir", t / "s"});
  REQUIRE(s.status == 0);
  const std::string report = slurp(t.path / "s" / "score_report.txt");
  CHECK(report.find("unmatched=0\n") != std::string::npos);
  CHECK(report.find("precision=1.000000\n") != std::string::npos);

  spit(t / "both.tsv", perfect.str());
  const Result same = run({"score", "--ref", ref, "--sys", t / "both.tsv", "--out-dir", t / "s2"});
  CHECK(slurp(t.path / "s2" / "score_report.txt") == report);

  const Result imported = run({"import-predictions", "--corpus", corpus, "--sys",
                               t / "perfect.tsv", "--out-dir", t / "i"});
  CHECK(imported.status == 0);
  CHECK(slurp(t.path / "i" / "predictions.tsv") == perfect.str());

  const Result p = run({"perm-test", "--ref", ref, "--sys", t / "perfect.tsv", "--sys",
                        t / "perfect.tsv", "--iterations", "200", "--out-dir", t / "pt"});
  REQUIRE(p.status == 0);
  CHECK(slurp(t.path / "pt" / "perm_report.txt").find("p_value=1\n") != std::string::npos);
}

TEST_CASE("train, predict and cv") {
  TempDir t;
  make_synth(t);
  const std::string corpus = (t.path / "syn" / "corpus.tsv").string();
  const std::string before = slurp(corpus);

  REQUIRE(run({"train", "--corpus", corpus, "--grid", "0.01,1", "--k-inner", "3",
               "--out-dir", t / "m"})
              .status == 0);
  const std::string model = (t.path / "m" / "model.txt").string();
  REQUIRE(run({"predict", "--corpus", corpus, "--model", model, "--out-dir", t / "p1"})
              .status == 0);
  REQUIRE(run({"predict", "--corpus", corpus, "--grid", "0.01,1", "--k-inner", "3",
               "--out-dir", t / "p2"})
              .status == 0);
  CHECK(slurp(t.path / "p1" / "predictions.tsv") == slurp(t.path / "p2" / "predictions.tsv"));

  REQUIRE(run({"cv", "--corpus", corpus, "--variant", "minority", "--k-outer", "3",
               "--out-dir", t / "cv"})
              .status == 0);
  const std::string cv = slurp(t.path / "cv" / "cv_report.txt");
  CHECK(cv.find("variant=minority") != std::string::npos);
  const std::string echo = slurp(t.path / "cv" / "run_config.txt");
  CHECK(echo.find("command=cv\n") != std::string::npos);
  CHECK(echo.find("k_outer=3\n") != std::string::npos);
  CHECK(echo.find("out_dir") == std::string::npos);

  CHECK(slurp(corpus) == before);
}
