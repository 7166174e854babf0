#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <sys/wait.h>

#include "corhorn/chc.hpp"
#include "corhorn/translate.hpp"

using namespace corhorn;

namespace {

class CliTest : public ::testing::Test {
protected:
  struct Result {
    int code = -1;
    std::string out;
  };

  static Result run(const std::string& args) {
    Result r;
    std::string cmd = std::string(CORHORN_CLI) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    std::array<char, 4096> buf;
    for (std::size_t n; (n = std::fread(buf.data(), 1, buf.size(), p)) > 0;) r.out.append(buf.data(), n);
    int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
  }

  static std::string corpus(const std::string& f) { return std::string(CORHORN_CORPUS_DIR) + "/" + f; }
};

TEST_F(CliTest, CheckAcceptsCorpusProgram) {
  Result r = run("check " + corpus("inc_max.cor"));
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("ok"), std::string::npos);
  Result j = run("check " + corpus("inc_max.cor") + " --dump-contexts json");
  EXPECT_EQ(j.code, 0);
  EXPECT_NE(j.out.find("\"take_max\""), std::string::npos);
}

TEST_F(CliTest, TranslatePrintsTakeMaxListing) {
  Result r = run("translate " + corpus("inc_max.cor") + " --format internal");
  ASSERT_EQ(r.code, 0);
  ChcSystem got = parseSystem(r.out);
  ChcSystem want = loadSystem(std::string(CORHORN_FIXTURE_DIR) + "/take_max.chc");
  std::vector<Clause> section;
  for (const auto& c : got.clauses)
    if (c.head && c.head->pred.rfind("take_max!", 0) == 0) section.push_back(c);
  ASSERT_EQ(section.size(), 9u);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_TRUE(clauseAlphaEqual(section[i], want.clauses[i])) << i;
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run("solve missing.cor").code, 2);
  EXPECT_EQ(run("solve missing.cor --goal \"f returns true\"").code, 2);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("run " + corpus("inc_max.cor") + " --fn inc_max --args \"<4>, <3>\"").code, 0);
  EXPECT_EQ(run("run " + corpus("inc_max.cor") + " --fn nope").code, 2);
  EXPECT_EQ(run("solve " + corpus("inc_max.cor") + " --goal \"inc_max returns true\" --solver-cmd /nonexistent").code,
            2);
}

TEST_F(CliTest, JsonOutputIsVersioned) {
  Result r = run("run " + corpus("inc_max.cor") + " --fn inc_max --args \"box(4), box(3)\" --json");
  ASSERT_EQ(r.code, 0);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["schema"], "corhorn-cli/1");
  EXPECT_EQ(j["value"], "<inj1 ()>");
  Result c = run("corpus-list --json");
  ASSERT_EQ(c.code, 0);
  EXPECT_EQ(nlohmann::json::parse(c.out)["programs"].size(), 10u);
}

TEST_F(CliTest, HarnessCommands) {
  Result b = run("bisim " + corpus("inc_max.cor") + " --fn inc_max --runs 20 --range 3 --mu-depth 1 --json");
  ASSERT_EQ(b.code, 0) << b.out;
  auto j = nlohmann::json::parse(b.out);
  EXPECT_EQ(j["cos-aos"]["linked"], 20);
  EXPECT_EQ(j["aos-sldc"]["linked"], 20);
  Result o = run("oracle " + corpus("inc_max.cor") + " --fn inc_max --range 2 --depth 64 --mu-depth 1");
  EXPECT_EQ(o.code, 0) << o.out;
}

TEST_F(CliTest, SolveWithZ3) {
  if (std::system("command -v z3 >/dev/null 2>&1") != 0) GTEST_SKIP() << "z3 not on PATH";
  EXPECT_EQ(run("solve " + corpus("just_rec.cor") + " --goal \"main returns true\" --solver-cmd z3").code, 0);
  EXPECT_EQ(run("solve " + corpus("just_rec_unsafe.cor") + " --goal \"main returns true\" --solver-cmd z3").code, 1);
}

}  // namespace
