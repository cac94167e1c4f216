#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "adq/byte_io.hpp"
#include "adq/dataset.hpp"
#include "adq/qds_format.hpp"
#include "cli.hpp"

namespace fs = std::filesystem;
using adq::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path root;
  explicit TempDir(const std::string& name) : root(fs::path(ADQ_TEST_TMPDIR) / name) {
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~TempDir() { fs::remove_all(root); }
  std::string operator/(const std::string& file) const { return (root / file).string(); }
};

double value_of(const std::string& text, const std::string& key) {
  const auto pos = text.find(key + "=");
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + key.size() + 1));
}

}  // namespace

TEST_CASE("ingest is deterministic") {
  TempDir t("ingest");
  REQUIRE(invoke({"ingest", "--synth", "3,8,30,1.0", "--seed", "5", "--out", t / "a.adqd"}).code == 0);
  REQUIRE(invoke({"ingest", "--synth", "3,8,30,1.0", "--seed", "5", "--out", t / "b.adqd"}).code == 0);
  CHECK(adq::read_file(t / "a.adqd") == adq::read_file(t / "b.adqd"));
  CHECK(adq::load_dataset(t / "a.adqd").size() == 30);
  CHECK(!fs::exists(t / "a.adqd.tmp"));
}

TEST_CASE("raw ingest") {
  TempDir t("raw");
  const std::vector<float> values{1, 2, 3, 4, 5, 6};
  const std::vector<std::uint32_t> labels{0, 1, 1};
  adq::write_file_atomic(t / "v.f32", std::as_bytes(std::span(values)));
  adq::write_file_atomic(t / "l.u32", std::as_bytes(std::span(labels)));
  const auto r = invoke({"ingest", "--raw", t / "v.f32", t / "l.u32", "--shape", "1x1x2", "--classes", "2",
                         "--out", t / "d.adqd"});
  REQUIRE(r.code == 0);
  const auto d = adq::load_dataset(t / "d.adqd");
  CHECK(d.size() == 3);
  CHECK(d[2].values == std::vector<float>{5, 6});
  CHECK(invoke({"ingest", "--raw", t / "v.f32", t / "l.u32", "--shape", "1x1x4", "--classes", "2", "--out",
                t / "e.adqd"})
            .code == 2);
  CHECK(!fs::exists(t / "e.adqd"));
}

TEST_CASE("exit codes") {
  TempDir t("codes");
  CHECK(invoke({"ingest", "--cifar", t / "missing.bin", "--out", t / "x.adqd"}).code == 1);
  CHECK(invoke({"stats", t / "missing.qds"}).code == 1);
  CHECK(invoke({"ingest", "--synth", "3,8,31,1.0", "--out", t / "x.adqd"}).code == 2);
  CHECK(invoke({"ingest", "--out", t / "x.adqd"}).code == 2);
  CHECK(invoke({"frobnicate"}).code == 2);
  CHECK(invoke({}).code == 2);
  CHECK(!fs::exists(t / "x.adqd"));

  adq::write_file_atomic(t / "bad.qds", std::string("not a qds file at all, definitely not"));
  const auto r = invoke({"stats", t / "bad.qds"});
  CHECK(r.code == 2);
  CHECK(r.err.find("magic") != std::string::npos);
}

TEST_CASE("allocation budget is reported") {
  TempDir t("alloc");
  REQUIRE(invoke({"ingest", "--synth", "2,4,20,1.0", "--out", t / "d.adqd"}).code == 0);
  REQUIRE(invoke({"score", "--dataset", t / "d.adqd", "--out", t / "s.tsv"}).code == 0);

  const auto adaptive = invoke({"allocate", "--scores", t / "s.tsv", "--bits", "8,0", "--out", t / "p.plan"});
  REQUIRE(adaptive.code == 0);
  CHECK(value_of(adaptive.out, "b_avg") == 4.0);
  CHECK(value_of(adaptive.out, "ratio") == 0.875);
  CHECK(value_of(adaptive.out, "dropped") == 10.0);

  const auto fixed = invoke(
      {"allocate", "--scores", t / "s.tsv", "--bits", "4", "--strategy", "fixed", "--out", t / "f.plan"});
  REQUIRE(fixed.code == 0);
  CHECK(value_of(fixed.out, "b_avg") == 4.0);
  CHECK(value_of(fixed.out, "ratio") == 0.875);

  CHECK(invoke({"allocate", "--scores", t / "s.tsv", "--bits", "0,8", "--out", t / "x.plan"}).code == 2);
  CHECK(invoke({"allocate", "--scores", t / "s.tsv", "--bits", "8,0", "--groups", "3", "--out", t / "x.plan"})
            .code == 2);
  CHECK(invoke({"allocate", "--scores", t / "s.tsv", "--bits", "8,4", "--fractions", "0.5,0.6", "--out",
                t / "x.plan"})
            .code == 2);
  CHECK(invoke({"allocate", "--scores", t / "s.tsv", "--bits", "1", "--strategy", "fixed", "--out",
                t / "x.plan"})
            .code == 2);
  CHECK(!fs::exists(t / "x.plan"));

  REQUIRE(invoke({"ingest", "--synth", "2,4,10,1.0", "--out", t / "small.adqd"}).code == 0);
  CHECK(invoke({"quantize", "--dataset", t / "small.adqd", "--plan", t / "p.plan", "--out", t / "x.qds"}).code ==
        2);
  CHECK(!fs::exists(t / "x.qds"));
}

TEST_CASE("full pipeline at 16 bits") {
  TempDir t("pipeline");
  REQUIRE(invoke({"ingest", "--synth", "3,16,300,1.5", "--seed", "3", "--out", t / "d.adqd"}).code == 0);
  REQUIRE(invoke({"score", "--dataset", t / "d.adqd", "--out", t / "s.tsv", "--probe-bits", "4"}).code == 0);
  REQUIRE(invoke({"allocate", "--scores", t / "s.tsv", "--bits", "16,16", "--out", t / "p.plan"}).code == 0);

  const auto q = invoke({"--porcelain", "quantize", "--dataset", t / "d.adqd", "--plan", t / "p.plan", "--out",
                         t / "d.qds"});
  REQUIRE(q.code == 0);
  CHECK(value_of(q.out, "total_bytes") == static_cast<double>(fs::file_size(t / "d.qds")));

  const auto stats = invoke({"--porcelain", "stats", t / "d.qds"});
  REQUIRE(stats.code == 0);
  CHECK(stats.out == q.out);

  const auto cmp = invoke({"--porcelain", "compare", "--dataset", t / "d.adqd", "--qds", t / "d.qds", "--epochs",
                           "10", "--csv", t / "curve.csv"});
  REQUIRE(cmp.code == 0);
  CHECK(std::fabs(value_of(cmp.out, "accuracy_delta")) <= 0.01);
  CHECK(fs::exists(t / "curve.csv"));

  REQUIRE(invoke({"materialize", "--qds", t / "d.qds", "--out", t / "m.adqd"}).code == 0);
  CHECK(adq::load_dataset(t / "m.adqd").size() == 300);

  CHECK(invoke({"compare", "--dataset", t / "d.adqd", "--qds", t / "d.qds", "--lr", "-1"}).code == 2);
}
