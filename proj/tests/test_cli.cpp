#include "support.hpp"

#include "cli.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include <unistd.h>

using namespace a3kit;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("a3kit_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "a3kit");
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& content) const { write_atomic(dir_ / name, content); }
  json last_error() const {
    std::string text = err_.str();
    const auto at = text.rfind("{\"error\"");
    return json::parse(text.substr(at, text.find('\n', at) - at));
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

std::string corpus() { return (a3test::fixtures() / "corpus").string(); }
std::string train() { return (a3test::fixtures() / "train").string(); }

} // namespace

TEST(Config, ParsesKeysSectionsAndComments) {
  const auto c = parse_config("# c\nseed = 7\nmask_ratio = 0.5\nbeam_width=2\nattempts = 30\n"
                              "ngram_order = 4\nmax_len = 10\n[paths]\ninput = \"in dir\"\n");
  EXPECT_EQ(c.seed, 7);
  EXPECT_DOUBLE_EQ(c.mask_ratio, 0.5);
  EXPECT_EQ(c.beam_width, 2u);
  EXPECT_EQ(c.attempts, 30u);
  EXPECT_EQ(c.ngram_order, 4u);
  EXPECT_EQ(c.max_len, 10u);
  EXPECT_EQ(c.paths.at("input"), "in dir");
}

TEST(Config, Defaults) {
  const PipelineConfig c;
  EXPECT_DOUBLE_EQ(c.mask_ratio, 0.2);
  EXPECT_EQ(c.beam_width, 4u);
  EXPECT_EQ(c.attempts, 1u);
  EXPECT_EQ(c.ngram_order, 3u);
}

TEST(Config, Errors) {
  for (const char* bad : {"seed = x", "nokey", "unknown = 1", "[other]", "mask_ratio = 2", "beam_width = 0",
                          "ngram_order = 1", "attempts = -1"}) {
    try {
      parse_config(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), "config_format") << bad;
    }
  }
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}), cli::kUsage);
  EXPECT_EQ(run({"bogus"}), cli::kUsage);
  EXPECT_EQ(run({"extract"}), cli::kUsage);
  EXPECT_EQ(last_error()["error"], "usage");
  EXPECT_EQ(run({"generate", "--input", "x", "--beam", "NaN"}), cli::kUsage);
  EXPECT_EQ(run({"--help"}), cli::kOk);
}

TEST_F(CliTest, MissingInputIsInputError) {
  EXPECT_EQ(run({"verify", "--input", path("nope.jsonl"), "--output", path("o.jsonl")}), cli::kInputFormat);
  EXPECT_EQ(last_error()["error"], "input_missing");
  write("bad.jsonl", "{broken\n");
  EXPECT_EQ(run({"verify", "--input", path("bad.jsonl"), "--output", path("o.jsonl")}), cli::kInputFormat);
}

TEST_F(CliTest, VerifyEmptyInput) {
  write("empty.jsonl", "");
  ASSERT_EQ(run({"verify", "--input", path("empty.jsonl"), "--output", path("v.jsonl")}), cli::kOk) << err_.str();
  EXPECT_TRUE(from_jsonl<TestCase>(read_file(path("v.jsonl")), "v").empty());
  EXPECT_TRUE(fs::exists(path("v.repairs.jsonl")));
}

TEST_F(CliTest, VerifyRepairsAndSidecar) {
  const std::vector<TestCase> tests{a3test::make_test("@Test void isLenient(){", "a#1"),
                                    a3test::make_test("@Test public void testOk(){}", "b#1")};
  write("c.jsonl", to_jsonl(tests));
  ASSERT_EQ(run({"verify", "--input", path("c.jsonl"), "--output", path("v.jsonl"), "--sidecar", path("r.jsonl")}),
            cli::kOk);
  const auto v = from_jsonl<TestCase>(read_file(path("v.jsonl")), "v");
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].text, "@Test public void testisLenient(){}");
  const auto r = from_jsonl<RepairReport>(read_file(path("r.jsonl")), "r");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].applied.size(), 3u);
  EXPECT_TRUE(r[1].applied.empty());
}

TEST_F(CliTest, EvaluateUnknownTestIdExitsTwo) {
  ASSERT_EQ(run({"extract", "--input", corpus(), "--output", path("focal.jsonl")}), cli::kOk);
  const auto focal = from_jsonl<FocalMethod>(read_file(path("focal.jsonl")), "f");
  TestCase t = a3test::make_test("@Test public void testX() {}", "known#1");
  t.focal_id = focal[0].id;
  write("tests.jsonl", to_jsonl(std::vector<TestCase>{t}));
  write("report.jsonl", to_jsonl(std::vector<RunRecord>{{"unknown#1", RunStatus::Pass, {}}}));
  EXPECT_EQ(run({"evaluate", "--focal", path("focal.jsonl"), "--tests", path("tests.jsonl"), "--report",
                 path("report.jsonl")}),
            cli::kInputFormat);
  EXPECT_EQ(last_error()["error"], "unknown_test_id");
  EXPECT_EQ(last_error()["exit_code"], 2);
}

TEST_F(CliTest, EvaluateWithReport) {
  ASSERT_EQ(run({"extract", "--input", corpus(), "--output", path("focal.jsonl")}), cli::kOk);
  const auto focal = from_jsonl<FocalMethod>(read_file(path("focal.jsonl")), "f");
  TestCase t = a3test::make_test("@Test public void testX() {}", "known#1");
  t.focal_id = focal[0].id;
  write("tests.jsonl", to_jsonl(std::vector<TestCase>{t}));
  write("report.jsonl", to_jsonl(std::vector<RunRecord>{{"known#1", RunStatus::Pass, {focal[0].id}}}));
  ASSERT_EQ(run({"evaluate", "--focal", path("focal.jsonl"), "--input", path("tests.jsonl"), "--report",
                 path("report.jsonl"), "--output", path("m.json")}),
            cli::kOk)
      << err_.str();
  const auto m = json::parse(read_file(path("m.json")));
  EXPECT_EQ(m["totals"]["correct_pct"], 100.0);
  EXPECT_EQ(m["totals"]["n_focal"], 70);
  EXPECT_EQ(m["schema_version"], 1);
}

TEST_F(CliTest, ExtractSortedAndProjectsFromDirectories) {
  ASSERT_EQ(run({"extract", "--input", corpus(), "--output", path("focal.jsonl")}), cli::kOk);
  const auto focal = from_jsonl<FocalMethod>(read_file(path("focal.jsonl")), "f");
  ASSERT_EQ(focal.size(), 70u);
  EXPECT_TRUE(std::is_sorted(focal.begin(), focal.end(), [](auto& a, auto& b) { return a.id < b.id; }));
  std::set<std::string> projects;
  for (const auto& f : focal) projects.insert(f.project);
  EXPECT_EQ(projects, (std::set<std::string>{"collect", "numeric", "strutil", "textio"}));
  ASSERT_EQ(run({"extract", "--input", corpus() + "/numeric/Calculator.java", "--project", "calc", "--output",
                 path("one.jsonl")}),
            cli::kOk);
  EXPECT_EQ(from_jsonl<FocalMethod>(read_file(path("one.jsonl")), "f")[0].id, "calc/Calculator/Sum(double,double)");
}

TEST_F(CliTest, PrepMaskDeterministic) {
  std::vector<AssertPair> pairs{{"public int size() { return n; }", "assertEquals(0, s.size());"},
                                {"public void push(int v) { data[n++] = v; }", "assertTrue(s.isEmpty());"}};
  write("pairs.jsonl", to_jsonl(pairs));
  ASSERT_EQ(run({"prep-mask", "--input", path("pairs.jsonl"), "--output", path("m1.jsonl"), "--seed", "3"}), cli::kOk);
  ASSERT_EQ(run({"prep-mask", "--input", path("pairs.jsonl"), "--output", path("m2.jsonl"), "--seed", "3"}), cli::kOk);
  EXPECT_EQ(read_file(path("m1.jsonl")), read_file(path("m2.jsonl")));
  const auto m = from_jsonl<MaskedPair>(read_file(path("m1.jsonl")), "m");
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].seed, 3);
  EXPECT_EQ(m[1].seed, 4);
  EXPECT_EQ(run({"prep-mask", "--input", path("pairs.jsonl"), "--output", path("m3.jsonl"), "--mask-ratio", "0"}),
            cli::kUsage);
}

TEST_F(CliTest, PrepSplit) {
  std::string rows = "{\"schema_version\":1}\n";
  for (int i = 0; i < 7; ++i) rows += "{\"id\":\"r" + std::to_string(i) + "\"}\n";
  write("ids.jsonl", rows);
  ASSERT_EQ(run({"prep-split", "--input", path("ids.jsonl"), "--output", path("split.json")}), cli::kOk);
  const auto m = json::parse(read_file(path("split.json"))).get<SplitManifest>();
  EXPECT_EQ(m.train_ids.size(), 5u);
  EXPECT_EQ(m.valid_ids.size(), 0u);
  EXPECT_EQ(m.holdout_ids.size(), 2u);
  write("noid.jsonl", "{\"x\":1}\n");
  EXPECT_EQ(run({"prep-split", "--input", path("noid.jsonl"), "--output", path("s2.json")}), cli::kInputFormat);
}

TEST_F(CliTest, GenerateWithExecGeneratorRecordsErrors) {
  std::vector<FocalMethod> focal{a3test::dummy_focal("sum"), a3test::dummy_focal("failHard")};
  write("focal.jsonl", to_jsonl(focal));
  const std::string gen = "exec:python3 " + (a3test::fixtures() / "stubs" / "focal_echo.py").string();
  ASSERT_EQ(run({"generate", "--input", path("focal.jsonl"), "--output", path("cand.jsonl"), "--generator", gen}),
            cli::kOk)
      << err_.str();
  const auto c = from_jsonl<TestCase>(read_file(path("cand.jsonl")), "c");
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].text, "@Test void sumWorks() { x.sum(); ");
  const auto errors = parse_jsonl(read_file(path("cand.errors.jsonl")), "e");
  ASSERT_EQ(errors.size(), 1u);
  EXPECT_EQ(errors[0]["focal_id"], focal[1].id);
}

TEST_F(CliTest, GenerateNgramNeedsTraining) {
  write("focal.jsonl", to_jsonl(std::vector<FocalMethod>{a3test::dummy_focal()}));
  EXPECT_EQ(run({"generate", "--input", path("focal.jsonl"), "--output", path("c.jsonl")}), cli::kUsage);
  EXPECT_EQ(run({"generate", "--input", path("focal.jsonl"), "--output", path("c.jsonl"), "--generator", "magic"}),
            cli::kUsage);
  ASSERT_EQ(run({"generate", "--input", path("focal.jsonl"), "--output", path("c.jsonl"), "--train", train(),
                 "--attempts", "3"}),
            cli::kOk);
  const auto c = from_jsonl<TestCase>(read_file(path("c.jsonl")), "c");
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[2].id, "p/C/sum()#3");
  EXPECT_GE(*c[0].logprob, *c[1].logprob);
}

TEST_F(CliTest, PipelineWithConfigAndExecGenerator) {
  write("run.conf", "seed = 1\n[paths]\ninput = " + corpus() + "\n");
  const std::string gen = "exec:python3 " + (a3test::fixtures() / "stubs" / "focal_echo.py").string();
  ASSERT_EQ(run({"pipeline", "--config", path("run.conf"), "--output", path("out"), "--generator", gen}), cli::kOk)
      << err_.str();
  for (const char* f : {"focal.jsonl", "candidates.jsonl", "verified.jsonl", "repairs.jsonl", "runreport.jsonl",
                        "metrics.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
  }
  // The stub's tests only compile and pass after verification.
  const auto m = json::parse(read_file(path("out/metrics.json")));
  EXPECT_EQ(m["totals"]["correct_pct"], 100.0);
  ASSERT_EQ(run({"pipeline", "--config", path("run.conf"), "--output", path("raw"), "--generator", gen, "--no-verify"}),
            cli::kOk);
  EXPECT_EQ(json::parse(read_file(path("raw/metrics.json")))["totals"]["correct_pct"], 0.0);
  EXPECT_FALSE(fs::exists(dir_ / "raw" / "verified.jsonl"));
}

TEST_F(CliTest, ConvertReport) {
  write("focal.jsonl", to_jsonl(std::vector<FocalMethod>{a3test::dummy_focal()}));
  write("junit.xml", "<testsuite><testcase name=\"p/C/sum()#1\"/></testsuite>");
  write("jacoco.xml", "<report><sessioninfo id=\"p/C/sum()#1\"/><package><class name=\"C\"><method name=\"sum\" "
                      "desc=\"()I\"><counter type=\"METHOD\" covered=\"1\" missed=\"0\"/></method></class></package></report>");
  ASSERT_EQ(run({"convert-report", "--junit", path("junit.xml"), "--jacoco", path("jacoco.xml"), "--focal",
                 path("focal.jsonl"), "--output", path("r.jsonl")}),
            cli::kOk)
      << err_.str();
  const auto r = report_from_jsonl(read_file(path("r.jsonl")), "r");
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].covered_focal_ids, (std::vector<std::string>{"p/C/sum()"}));
  write("bad.xml", "<testsuite>");
  EXPECT_EQ(run({"convert-report", "--junit", path("bad.xml"), "--output", path("r2.jsonl")}), cli::kInputFormat);
}

TEST_F(CliTest, AtomicWriteLeavesNoTemporaries) {
  write_atomic(dir_ / "x.txt", "one");
  write_atomic(dir_ / "x.txt", "two");
  EXPECT_EQ(read_file(dir_ / "x.txt"), "two");
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir_)) {
    (void)e;
    ++files;
  }
  EXPECT_EQ(files, 1u);
  EXPECT_EQ(detail::g_pending_temp[0], '\0');
}

TEST(Workers, DeterministicOrderAndErrors) {
  std::vector<int> out(100);
  parallel_for(out.size(), 8, [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], static_cast<int>(i * i));
  EXPECT_THROW(parallel_for(10, 4, [](std::size_t i) {
                 if (i == 7) throw Error("boom", "x");
               }),
               Error);
}
