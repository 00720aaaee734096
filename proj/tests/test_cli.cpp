#include <catch_amalgamated.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tough/cli.hpp"
#include "tough/data.hpp"
#include "stub_server.hpp"

using namespace tough;
namespace fs = std::filesystem;

namespace {

const std::string kMini = std::string(TOUGH_SOURCE_DIR) + "/data/mini/";

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("tough-cli-" +
            std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::vector<std::string> toy(const TempDir& d) {
  return {"--model", "toy", "--embeddings", kMini + "mini_glove.txt", "--cache", d / "cache.jsonl"};
}

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("full pipeline on the mini corpus") {
  TempDir d;
  auto explain = cat({"explain", "--data", kMini + "mini_squad.json", "--out", d / "expl.jsonl",
                      "--samples", "300", "--seed", "5"},
                     toy(d));
  auto r = run(explain);
  INFO(r.err);
  REQUIRE(r.code == 0);
  REQUIRE(r.out.find("explained 10 of 10") != std::string::npos);

  auto manifest = Json::parse(slurp(d / "expl.jsonl.manifest.json"));
  REQUIRE(manifest["tool"] == "tough");
  REQUIRE(manifest["command"] == "explain");
  REQUIRE(manifest["seed"] == 5);
  REQUIRE(manifest["inputs"][0]["sha256"].get<std::string>().size() == 64);
  REQUIRE(manifest["model_id"].get<std::string>().rfind("toy-", 0) == 0);
  REQUIRE(manifest["model_requests"].get<long>() > 0);

  r = run({"perturb", "--data", kMini + "mini_squad.json", "--explanations", d / "expl.jsonl",
           "--embeddings", kMini + "mini_glove.txt", "--lexicon", kMini + "mini_lexicon.tsv",
           "--out", d / "pert.jsonl", "--skips", d / "skips.jsonl", "--review-csv",
           d / "review.csv"});
  INFO(r.err);
  REQUIRE(r.code == 0);
  std::istringstream pert(slurp(d / "pert.jsonl"));
  auto records = read_perturbed(pert);
  REQUIRE_FALSE(records.empty());
  bool saw_random = false;
  for (const auto& rec : records) {
    REQUIRE_NOTHROW(validate_record(rec));
    if (rec.mode == Mode::random) {
      saw_random = true;
      REQUIRE(rec.replacement == "random");
    }
  }
  REQUIRE(saw_random);

  r = run({"review-import", "--perturbed", d / "pert.jsonl", "--review-csv", d / "review.csv",
           "--out", d / "reviewed.jsonl"});
  REQUIRE(r.code == 0);
  REQUIRE(slurp(d / "reviewed.jsonl") == slurp(d / "pert.jsonl"));

  auto eval = cat({"eval", "--data", kMini + "mini_squad.json", "--perturbed", d / "pert.jsonl",
                   "--skips", d / "skips.jsonl", "--out", d / "report.json", "--markdown",
                   d / "report.md", "--label", "toy"},
                  toy(d));
  r = run(eval);
  INFO(r.err);
  REQUIRE(r.code == 0);
  std::istringstream rep_in(slurp(d / "report.json"));
  auto rep = read_report_json(rep_in);
  REQUIRE(rep.model_id == "toy");
  REQUIRE(rep.counts.total == 10);
  for (auto m : kAllModes) {
    auto k = mode_slot(m);
    REQUIRE(rep.counts.evaluated_per_mode[k] + rep.counts.skipped_per_mode[k] == 10);
  }
  REQUIRE(slurp(d / "report.md").rfind("| Architecture |", 0) == 0);

  SECTION("a second run is answered from the cache") {
    auto again = run(cat(eval, {"--jobs", "3"}));
    REQUIRE(again.code == 0);
    auto m2 = Json::parse(slurp(d / "report.json.manifest.json"));
    REQUIRE(m2["model_requests"] == 0);
    REQUIRE(m2["cache_hits"].get<long>() > 0);
    std::istringstream in2(slurp(d / "report.json"));
    REQUIRE(read_report_json(in2) == rep);
  }
  SECTION("report renders to stdout") {
    auto md = run({"report", "--report", d / "report.json", "--baseline", d / "report.json"});
    REQUIRE(md.code == 0);
    REQUIRE(md.out.find("(+0.00)") != std::string::npos);
  }
}

TEST_CASE("explanations are deterministic for a fixed seed") {
  TempDir a, b;
  auto args = [&](const TempDir& d, const std::string& jobs) {
    return cat({"explain", "--data", kMini + "mini_squad.json", "--out", d / "e.jsonl",
                "--samples", "200", "--seed", "9", "--jobs", jobs, "--limit", "4"},
               toy(d));
  };
  REQUIRE(run(args(a, "1")).code == 0);
  REQUIRE(run(args(b, "4")).code == 0);
  REQUIRE(slurp(a / "e.jsonl") == slurp(b / "e.jsonl"));
}

TEST_CASE("HTTP model backend") {
  testing::StubServer server;
  TempDir d;
  auto r = run({"eval", "--data", kMini + "mini_squad.json", "--out", d / "r.json",
                "--model-url", server.url(), "--no-cache"});
  INFO(r.err);
  REQUIRE(r.code == 0);
  REQUIRE(server.request_count() >= 11);  // health + one per question
  auto manifest = Json::parse(slurp(d / "r.json.manifest.json"));
  REQUIRE(manifest["model_id"] == "stub-echo-v1");
  REQUIRE_FALSE(fs::exists(d / "cache.jsonl"));
}

TEST_CASE("exit codes") {
  TempDir d;
  int port = 0;
  {
    testing::StubServer closed;
    port = closed.port();
  }
  auto down = run({"eval", "--data", kMini + "mini_squad.json", "--out", d / "r.json",
                   "--model-url", "http://127.0.0.1:" + std::to_string(port), "--retries", "0",
                   "--cache", d / "c.jsonl"});
  REQUIRE(down.code == 2);
  REQUIRE(down.err.find("error:") != std::string::npos);

  auto unknown = run({"eval", "--bogus"});
  REQUIRE(unknown.code == 1);
  REQUIRE(unknown.err.rfind("error:", 0) == 0);

  auto missing = run({"explain", "--data", d / "nope.json", "--out", d / "e"});
  REQUIRE(missing.code == 1);

  auto no_model = run({"eval", "--data", kMini + "mini_squad.json", "--out", d / "r.json"});
  REQUIRE(no_model.code == 1);
  REQUIRE(no_model.err.find("--model") != std::string::npos);

  REQUIRE(run({"--version"}).code == 0);
  REQUIRE(run({"--help"}).code == 0);
}

TEST_CASE("augment and train") {
  TempDir d;
  auto r = run({"augment-rem", "--data", kMini + "mini_squad.json", "--copies", "2", "--out",
                d / "aug.json", "--seed", "1"});
  REQUIRE(r.code == 0);
  REQUIRE(load_squad_file(d / "aug.json").examples.size() == 30);

  r = run({"train-toy", "--data", d / "aug.json", "--embeddings", kMini + "mini_glove.txt",
           "--epochs", "2", "--out", d / "toy.snap"});
  INFO(r.err);
  REQUIRE(r.code == 0);
  REQUIRE(r.out.find("epoch 2 mean loss") != std::string::npos);

  r = run(cat({"eval", "--data", kMini + "mini_squad.json", "--out", d / "r.json",
               "--toy-model", d / "toy.snap"},
              toy(d)));
  INFO(r.err);
  REQUIRE(r.code == 0);
}
