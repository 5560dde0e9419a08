#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string env_or_fail(const char* name) {
  const char* value = std::getenv(name);
  REQUIRE_MESSAGE(value != nullptr, name << " must be set to run CLI tests");
  return value;
}

const std::string& bin() {
  static const std::string path = env_or_fail("MARKOVLM_BIN");
  return path;
}

const std::string& tmp_dir() {
  static const std::string path = env_or_fail("MARKOVLM_TMP");
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  REQUIRE(out.good());
}

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args) {
  static int invocation = 0;
  const std::string out_path =
      tmp_dir() + "/cli_stdout_" + std::to_string(invocation) + ".txt";
  const std::string err_path =
      tmp_dir() + "/cli_stderr_" + std::to_string(invocation) + ".txt";
  ++invocation;

  const std::string command = "\"" + bin() + "\" " + args + " > \"" +
                              out_path + "\" 2> \"" + err_path + "\"";
  const int status = std::system(command.c_str());
  REQUIRE(status != -1);
  CliResult result;
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  return result;
}

// Frequencies chosen so the displayed probabilities are 7/13, 5/13, 1/13.
std::string spanish_corpus() {
  std::string text;
  for (int i = 0; i < 7; ++i) text += "los estados unidos de norteamérica .\n";
  for (int i = 0; i < 5; ++i) text += "los estados unidos de américa .\n";
  text += "ir a los estados unidos de trabajar .\n";
  return text;
}

struct Fixture {
  std::string corpus_path = tmp_dir() + "/cli_corpus.txt";
  std::string model_path = tmp_dir() + "/cli_model.mlm";

  Fixture() {
    spit(corpus_path, spanish_corpus());
    const CliResult train = run_cli("train --corpus \"" + corpus_path +
                                    "\" --k 2 --out \"" + model_path + "\"");
    REQUIRE(train.code == 0);
  }
};

}  // namespace

TEST_CASE("train reports corpus statistics") {
  Fixture fx;
  const CliResult train = run_cli("train --corpus \"" + fx.corpus_path +
                                  "\" --k 2 --out \"" + fx.model_path + "\"");
  CHECK(train.code == 0);
  CHECK(train.out.find("total_tokens=") != std::string::npos);
  CHECK(train.out.find("vocab_size=") != std::string::npos);
  CHECK(train.out.find("distinct_contexts=") != std::string::npos);
  CHECK(slurp(fx.model_path).rfind("MARKOVLM v1\n", 0) == 0);
}

TEST_CASE("training twice produces byte-identical model files") {
  Fixture fx;
  const std::string second_path = tmp_dir() + "/cli_model_second.mlm";
  const CliResult again = run_cli("train --corpus \"" + fx.corpus_path +
                                  "\" --k 2 --out \"" + second_path + "\"");
  CHECK(again.code == 0);
  CHECK(slurp(fx.model_path) == slurp(second_path));
}

TEST_CASE("inspect prints the continuation table of a context") {
  Fixture fx;
  const CliResult result =
      run_cli("inspect --model \"" + fx.model_path + "\" unidos de");
  CHECK(result.code == 0);
  CHECK(result.out ==
        "norteamérica\t7\t0.5385\n"
        "américa\t5\t0.3846\n"
        "trabajar\t1\t0.0769\n");
}

TEST_CASE("inspect rejects contexts it cannot answer") {
  Fixture fx;

  const CliResult unknown =
      run_cli("inspect --model \"" + fx.model_path + "\" unidos zanahoria");
  CHECK(unknown.code == 3);
  CHECK(unknown.out.empty());
  CHECK_FALSE(unknown.err.empty());

  // Both words occur in the corpus, never adjacent in this order.
  const CliResult unseen =
      run_cli("inspect --model \"" + fx.model_path + "\" de estados");
  CHECK(unseen.code == 3);
  CHECK(unseen.out.empty());

  const CliResult arity =
      run_cli("inspect --model \"" + fx.model_path + "\" unidos");
  CHECK(arity.code == 1);

  const CliResult missing =
      run_cli("inspect --model \"" + tmp_dir() + "/cli_absent.mlm\" unidos de");
  CHECK(missing.code == 2);
}

TEST_CASE("generate is deterministic per seed and honors length zero") {
  Fixture fx;
  const std::string args = "generate --model \"" + fx.model_path +
                           "\" --length 8 --rng-seed 123";
  const CliResult first = run_cli(args);
  const CliResult second = run_cli(args);
  CHECK(first.code == 0);
  CHECK(first.out == second.out);
  CHECK_FALSE(first.out.empty());

  const CliResult other = run_cli("generate --model \"" + fx.model_path +
                                  "\" --length 8 --rng-seed 124");
  CHECK(other.code == 0);

  const CliResult seed_only =
      run_cli("generate --model \"" + fx.model_path +
              "\" --length 0 --seed-text \"unidos de\"");
  CHECK(seed_only.code == 0);
  CHECK(seed_only.out == "unidos de\n");
}

TEST_CASE("generation that runs out of data exits distinctly") {
  const std::string corpus_path = tmp_dir() + "/cli_tiny.txt";
  const std::string model_path = tmp_dir() + "/cli_tiny.mlm";
  spit(corpus_path, "uno dos tres\n");
  REQUIRE(run_cli("train --corpus \"" + corpus_path + "\" --k 2 --out \"" +
                  model_path + "\"")
              .code == 0);
  const CliResult result =
      run_cli("generate --model \"" + model_path +
              "\" --length 5 --seed-text \"dos tres\"");
  CHECK(result.code == 4);
  CHECK(result.out == "dos tres\n");
}

TEST_CASE("usage errors exit with code one") {
  Fixture fx;
  CHECK(run_cli("train --corpus \"" + fx.corpus_path +
                "\" --k 0 --out \"" + tmp_dir() + "/x.mlm\"")
            .code == 1);
  CHECK(run_cli("train --corpus \"" + fx.corpus_path + "\"").code == 1);
  CHECK(run_cli("nonsense").code == 1);
  CHECK(run_cli("generate --model \"" + fx.model_path +
                "\" --temperature 0 --length 3")
            .code == 1);
  CHECK(run_cli("generate --model \"" + fx.model_path +
                "\" --seed-text \"unidos\" --length 3")
            .code == 1);
  CHECK(run_cli("generate --model \"" + fx.model_path +
                "\" --smoothing backoff --length 3")
            .code == 1);
}

TEST_CASE("io and data errors are distinguished") {
  const CliResult io =
      run_cli("train --corpus \"" + tmp_dir() +
              "/cli_missing.txt\" --k 2 --out \"" + tmp_dir() + "/x.mlm\"");
  CHECK(io.code == 2);

  const std::string bad_model = tmp_dir() + "/cli_bad.mlm";
  spit(bad_model, "not a model\n");
  CHECK(run_cli("generate --model \"" + bad_model + "\" --length 3").code ==
        3);

  const std::string bad_utf8 = tmp_dir() + "/cli_bad_utf8.txt";
  spit(bad_utf8, "hola \xff mundo\n");
  CHECK(run_cli("train --corpus \"" + bad_utf8 + "\" --k 1 --out \"" +
                tmp_dir() + "/x.mlm\"")
            .code == 3);
}

TEST_CASE("eval prints four decimals or a named undefined position") {
  Fixture fx;
  const CliResult self = run_cli("eval --model \"" + fx.model_path +
                                 "\" --heldout \"" + fx.corpus_path + "\"");
  CHECK(self.code == 0);
  REQUIRE(self.out.size() > 5);
  CHECK(self.out.find('.') != std::string::npos);
  CHECK(self.out.substr(self.out.find('.') + 1).size() == 5);  // 4 digits + \n

  const std::string oov = tmp_dir() + "/cli_oov.txt";
  spit(oov, "palabras completamente desconocidas\n");
  const CliResult undefined =
      run_cli("eval --model \"" + fx.model_path + "\" --heldout \"" + oov +
              "\"");
  CHECK(undefined.code == 3);
  CHECK(undefined.out.rfind("undefined (position ", 0) == 0);

  // Smoothing by flag without the corpus counts is a usage error for the
  // stack methods, fine for add-alpha.
  const CliResult smoothed =
      run_cli("eval --model \"" + fx.model_path + "\" --heldout \"" + oov +
              "\" --smoothing add_alpha --alpha 0.5");
  CHECK(smoothed.code == 3);  // oov token still unscorable
  const CliResult in_vocab =
      run_cli("eval --model \"" + fx.model_path + "\" --heldout \"" +
              fx.corpus_path + "\" --smoothing add_alpha --alpha 0.5");
  CHECK(in_vocab.code == 0);
  CHECK(run_cli("eval --model \"" + fx.model_path + "\" --heldout \"" +
                fx.corpus_path + "\" --smoothing interpolation")
            .code == 1);
}

TEST_CASE("stack smoothing works when the corpus is supplied") {
  Fixture fx;
  const CliResult gen = run_cli(
      "generate --model \"" + fx.model_path + "\" --corpus \"" +
      fx.corpus_path +
      "\" --smoothing backoff --discount 0.4 --length 10 --rng-seed 5");
  CHECK(gen.code == 0);
  CHECK_FALSE(gen.out.empty());

  const CliResult eval = run_cli("eval --model \"" + fx.model_path +
                                 "\" --corpus \"" + fx.corpus_path +
                                 "\" --heldout \"" + fx.corpus_path +
                                 "\" --smoothing interpolation");
  CHECK(eval.code == 0);

  // A corpus that does not match the model vocabulary is a data error.
  const std::string other = tmp_dir() + "/cli_other_corpus.txt";
  spit(other, "texto distinto por completo\n");
  const CliResult mismatch = run_cli(
      "generate --model \"" + fx.model_path + "\" --corpus \"" + other +
      "\" --smoothing backoff --length 5");
  CHECK(mismatch.code == 3);
}

TEST_CASE("analyze emits a tab-separated table or records") {
  Fixture fx;
  const CliResult tsv = run_cli("analyze --corpus \"" + fx.corpus_path +
                                "\" --ks 1,2 --runs 3 --length 20");
  CHECK(tsv.code == 0);
  std::istringstream lines(tsv.out);
  std::string header;
  std::getline(lines, header);
  CHECK(header ==
        "k\tcoverage_fraction\tlongest_copy_ratio\t"
        "unique_continuation_fraction\tmean_branching\tdistinct_contexts\t"
        "perplexity\truns");
  std::string row;
  int rows = 0;
  while (std::getline(lines, row)) {
    if (row.empty()) continue;
    ++rows;
    CHECK(row.find('\t') != std::string::npos);
  }
  CHECK(rows == 2);

  const CliResult records =
      run_cli("analyze --corpus \"" + fx.corpus_path +
              "\" --ks 1 --runs 2 --length 10 --format records");
  CHECK(records.code == 0);
  CHECK(records.out.rfind("k=1 ", 0) == 0);

  const CliResult impossible = run_cli(
      "analyze --corpus \"" + fx.corpus_path + "\" --ks 5000 --runs 1");
  CHECK(impossible.code == 3);
}

TEST_CASE("bpe models train and generate through the cli") {
  Fixture fx;
  const std::string model_path = tmp_dir() + "/cli_bpe.mlm";
  const CliResult train =
      run_cli("train --corpus \"" + fx.corpus_path + "\" --k 2 --out \"" +
              model_path + "\" --tokenizer bpe --bpe-merges 40");
  CHECK(train.code == 0);
  const CliResult gen = run_cli("generate --model \"" + model_path +
                                "\" --length 10 --rng-seed 9");
  CHECK(gen.code == 0);
  CHECK_FALSE(gen.out.empty());
}
