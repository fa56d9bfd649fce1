// Drives the installed binaries end to end through a shell, checking exit
// codes, stdout/stderr split, JSON output and tree-level determinism.
// Binary paths arrive as argv[1] (pinsynth) and argv[2] (pinsynth-mkcorpus).

#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "testutil.hpp"

namespace fs = std::filesystem;
using testutil::TempDir;

namespace {

std::string g_cli;
std::string g_mkcorpus;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string shell_quote(const std::string& arg) {
  std::string quoted = "'";
  for (const char c : arg) {
    if (c == '\'') {
      quoted += "'\\''";
    } else {
      quoted += c;
    }
  }
  quoted += "'";
  return quoted;
}

RunResult run(const std::string& binary, const std::vector<std::string>& args) {
  static TempDir scratch("pinsynth-cli-io");
  static int counter = 0;
  const fs::path err_file = scratch / ("stderr." + std::to_string(counter++));

  std::string command = shell_quote(binary);
  for (const auto& arg : args) command += " " + shell_quote(arg);
  command += " 2>" + shell_quote(err_file.string());

  RunResult result;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE_NE(pipe, nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) result.out.append(buf, n);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.err = testutil::slurp(err_file);
  return result;
}

std::string path_arg(const fs::path& p) { return p.string(); }

// mkcorpus + build-db into fresh directories; returns the db path.
fs::path make_db(const TempDir& tmp) {
  const fs::path corpus = tmp / "corpus";
  const fs::path db = tmp / "db";
  RunResult made = run(g_mkcorpus, {"--out", path_arg(corpus)});
  REQUIRE_EQ(made.exit_code, 0);
  RunResult built = run(g_cli, {"build-db", "--align", path_arg(corpus / "align.txt"),
                                "--audio-dir", path_arg(corpus / "wav"), "--pinyin-table",
                                path_arg(corpus / "pinyin_table.tsv"), "--out", path_arg(db)});
  REQUIRE_EQ(built.exit_code, 0);
  return db;
}

}  // namespace

TEST_CASE("usage errors exit 1, help exits 0") {
  const RunResult bare = run(g_cli, {});
  CHECK_EQ(bare.exit_code, 1);
  CHECK_FALSE(bare.err.empty());

  const RunResult help = run(g_cli, {"--help"});
  CHECK_EQ(help.exit_code, 0);
  CHECK(help.out.find("build-db") != std::string::npos);
  CHECK(help.out.find("synth") != std::string::npos);

  const RunResult unknown = run(g_cli, {"synth", "--no-such-flag"});
  CHECK_EQ(unknown.exit_code, 1);

  const RunResult missing_seed =
      run(g_cli, {"synth", "--db", "x", "--text", "y", "--out", "z"});
  CHECK_EQ(missing_seed.exit_code, 1);
  CHECK(missing_seed.err.find("--seed") != std::string::npos);
}

TEST_CASE("data errors exit 2 and report on stderr") {
  TempDir tmp;
  const RunResult result =
      run(g_cli, {"build-db", "--align", path_arg(tmp / "absent.txt"), "--audio-dir",
                  path_arg(tmp / "wav"), "--pinyin-table", path_arg(tmp / "t.tsv"),
                  "--out", path_arg(tmp / "db")});
  CHECK_EQ(result.exit_code, 2);
  CHECK(result.err.find("error:") != std::string::npos);
  CHECK(result.out.empty());
}

TEST_CASE("demo corpus to database: reports, stats, validation, coverage") {
  TempDir tmp;
  const fs::path corpus = tmp / "corpus";
  const RunResult made = run(g_mkcorpus, {"--out", path_arg(corpus)});
  REQUIRE_EQ(made.exit_code, 0);
  CHECK(fs::exists(corpus / "wav/u01.wav"));
  CHECK(fs::exists(corpus / "align.txt"));
  CHECK(fs::exists(corpus / "pinyin_table.tsv"));
  CHECK(fs::exists(corpus / "texts.tsv"));

  const fs::path db = tmp / "db";
  const RunResult built =
      run(g_cli, {"build-db", "--align", path_arg(corpus / "align.txt"), "--audio-dir",
                  path_arg(corpus / "wav"), "--pinyin-table",
                  path_arg(corpus / "pinyin_table.tsv"), "--out", path_arg(db)});
  REQUIRE_EQ(built.exit_code, 0);
  CHECK(built.out.find("fragments kept") != std::string::npos);
  CHECK(built.out.find("40") != std::string::npos);
  CHECK(fs::exists(db / "build-report.json"));

  const RunResult stats = run(g_cli, {"stats", "--db", path_arg(db), "--json"});
  REQUIRE_EQ(stats.exit_code, 0);
  const auto parsed = nlohmann::json::parse(stats.out);
  CHECK_EQ(parsed.at("total_fragments").get<int>(), 40);
  CHECK_EQ(parsed.at("distinct_keys").get<int>(), 9);

  const RunResult human_stats = run(g_cli, {"stats", "--db", path_arg(db)});
  CHECK_EQ(human_stats.exit_code, 0);
  CHECK(human_stats.out.find("distinct keys") != std::string::npos);

  const RunResult valid = run(g_cli, {"validate", "--db", path_arg(db), "--json"});
  CHECK_EQ(valid.exit_code, 0);
  CHECK(nlohmann::json::parse(valid.out).at("ok").get<bool>());

  const RunResult coverage =
      run(g_cli, {"coverage", "--db", path_arg(db), "--text",
                  path_arg(corpus / "texts.tsv"), "--json"});
  CHECK_EQ(coverage.exit_code, 0);
  const auto cov = nlohmann::json::parse(coverage.out);
  CHECK(cov.at("complete").get<bool>());
  CHECK_EQ(cov.at("missing").size(), 0);
}

TEST_CASE("synthesis through the binary: manifests, determinism, force") {
  TempDir tmp;
  const fs::path db = make_db(tmp);
  const fs::path texts = tmp / "corpus" / "texts.tsv";

  const fs::path s1 = tmp / "s1";
  const RunResult first =
      run(g_cli, {"synth", "--db", path_arg(db), "--text", path_arg(texts), "--out",
                  path_arg(s1), "--seed", "42", "--variants", "2", "--gap-ms", "10"});
  REQUIRE_EQ(first.exit_code, 0);
  CHECK(fs::exists(s1 / "manifest.tsv"));
  CHECK(fs::exists(s1 / "report.json"));
  const std::string manifest = testutil::slurp(s1 / "manifest.tsv");
  std::size_t rows = 0;
  for (const char c : manifest) rows += c == '\n';
  CHECK_EQ(rows, 200);  // 100 texts x 2 variants

  // Same job, fresh directory: byte-identical tree.
  const fs::path s2 = tmp / "s2";
  REQUIRE_EQ(run(g_cli, {"synth", "--db", path_arg(db), "--text", path_arg(texts),
                         "--out", path_arg(s2), "--seed", "42", "--variants", "2",
                         "--gap-ms", "10"})
                 .exit_code,
             0);
  std::string why;
  CHECK_MESSAGE(testutil::same_tree(s1, s2, &why), why);

  // Thread count must not show in the bytes.
  const fs::path j1 = tmp / "j1";
  const fs::path j8 = tmp / "j8";
  REQUIRE_EQ(run(g_cli, {"synth", "--db", path_arg(db), "--text", path_arg(texts),
                         "--out", path_arg(j1), "--seed", "7", "--jobs", "1"})
                 .exit_code,
             0);
  REQUIRE_EQ(run(g_cli, {"synth", "--db", path_arg(db), "--text", path_arg(texts),
                         "--out", path_arg(j8), "--seed", "7", "--jobs", "8"})
                 .exit_code,
             0);
  CHECK_MESSAGE(testutil::same_tree(j1, j8, &why), why);

  // Occupied output directory: refuse with a hint, proceed under --force.
  const RunResult blocked =
      run(g_cli, {"synth", "--db", path_arg(db), "--text", path_arg(texts), "--out",
                  path_arg(s1), "--seed", "42"});
  CHECK_EQ(blocked.exit_code, 2);
  CHECK(blocked.err.find("--force") != std::string::npos);
  CHECK_EQ(run(g_cli, {"synth", "--db", path_arg(db), "--text", path_arg(texts),
                       "--out", path_arg(s1), "--seed", "42", "--variants", "2",
                       "--gap-ms", "10", "--force"})
               .exit_code,
           0);
  CHECK_MESSAGE(testutil::same_tree(s1, s2, &why), why);
}

TEST_CASE("validate exits 3 when fragments fail") {
  TempDir tmp;
  const fs::path db = make_db(tmp);

  // Corrupt the first indexed fragment's payload.
  const std::string index = testutil::slurp(db / "index.jsonl");
  const auto record = nlohmann::json::parse(index.substr(0, index.find('\n')));
  const fs::path victim = db / record.at("path").get<std::string>();
  std::string bytes = testutil::slurp(victim);
  bytes[bytes.size() / 2] ^= 0x55;
  testutil::spit(victim, bytes);

  const RunResult result = run(g_cli, {"validate", "--db", path_arg(db), "--json"});
  CHECK_EQ(result.exit_code, 3);
  const auto parsed = nlohmann::json::parse(result.out);
  CHECK_FALSE(parsed.at("ok").get<bool>());
  CHECK_EQ(parsed.at("failures").size(), 1);
  CHECK_EQ(parsed.at("failures")[0].at("frag_id").get<std::string>(),
           record.at("frag_id").get<std::string>());
}

TEST_CASE("merge through the binary, including an empty side") {
  TempDir tmp;
  const fs::path db = make_db(tmp);

  // An empty alignment builds a valid empty database.
  testutil::spit(tmp / "empty_align.txt", "# nothing\n");
  const fs::path empty_db = tmp / "empty_db";
  const RunResult built_empty =
      run(g_cli, {"build-db", "--align", path_arg(tmp / "empty_align.txt"), "--audio-dir",
                  path_arg(tmp / "corpus" / "wav"), "--pinyin-table",
                  path_arg(tmp / "corpus" / "pinyin_table.tsv"), "--out",
                  path_arg(empty_db)});
  REQUIRE_EQ(built_empty.exit_code, 0);

  const fs::path merged = tmp / "merged";
  const RunResult merge =
      run(g_cli, {"merge", "--db-a", path_arg(db), "--db-b", path_arg(empty_db), "--out",
                  path_arg(merged), "--json"});
  REQUIRE_EQ(merge.exit_code, 0);
  const auto parsed = nlohmann::json::parse(merge.out);
  CHECK_EQ(parsed.at("fragments").get<int>(), 40);
  CHECK_EQ(parsed.at("distinct_keys").get<int>(), 9);

  const RunResult valid = run(g_cli, {"validate", "--db", path_arg(merged)});
  CHECK_EQ(valid.exit_code, 0);
}

TEST_CASE("flags can come from a config file") {
  TempDir tmp;
  const fs::path db = make_db(tmp);
  const fs::path texts = tmp / "corpus" / "texts.tsv";

  testutil::spit(tmp / "job.ini",
                 "[synth]\n"
                 "seed=42\n"
                 "variants=2\n"
                 "gap-ms=10\n");

  const fs::path from_config = tmp / "from_config";
  const RunResult result =
      run(g_cli, {"--config", path_arg(tmp / "job.ini"), "synth", "--db", path_arg(db),
                  "--text", path_arg(texts), "--out", path_arg(from_config)});
  REQUIRE_EQ(result.exit_code, 0);

  const fs::path from_flags = tmp / "from_flags";
  REQUIRE_EQ(run(g_cli, {"synth", "--db", path_arg(db), "--text", path_arg(texts),
                         "--out", path_arg(from_flags), "--seed", "42", "--variants", "2",
                         "--gap-ms", "10"})
                 .exit_code,
             0);
  std::string why;
  CHECK_MESSAGE(testutil::same_tree(from_config, from_flags, &why), why);
}

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: cli_tests <pinsynth-binary> <mkcorpus-binary>\n");
    return 2;
  }
  g_cli = argv[1];
  g_mkcorpus = argv[2];
  doctest::Context context;
  context.applyCommandLine(1, argv);
  return context.run();
}
