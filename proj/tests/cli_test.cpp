#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

fs::path write_input(const std::string& name, const std::string& text) {
  auto p = fs::temp_directory_path() / ("lambfence_cli_" + std::to_string(::getpid()) + "_" + name);
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

// Runs the CLI, capturing stdout; stderr is folded in when asked.
Outcome run(const std::string& args, bool with_stderr = false) {
  std::string cmd = std::string(LAMBFENCE_CLI) + " " + args + (with_stderr ? " 2>&1" : " 2>/dev/null");
  Outcome o;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return o;
  std::array<char, 4096> buf{};
  while (auto n = std::fread(buf.data(), 1, buf.size(), pipe)) o.out.append(buf.data(), n);
  int status = ::pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string spec(const std::string& name) { return std::string(LAMBFENCE_SPECS) + "/" + name + ".lf"; }

}  // namespace

TEST(Cli, ScanPrintsLexicalGraphJson) {
  auto in = write_input("price.txt", "5.2 $ 8.4");
  auto o = run("scan " + spec("product") + " " + in.string());
  ASSERT_EQ(o.code, 0);
  auto j = nlohmann::json::parse(o.out);
  EXPECT_EQ(j["tokens"].size(), 9u);
  EXPECT_EQ(j["summary"]["path_count"], 4);
}

TEST(Cli, ScanDot) {
  auto in = write_input("price_dot.txt", "5.2 $ 8.4");
  auto o = run("scan --format dot " + spec("product") + " " + in.string());
  ASSERT_EQ(o.code, 0);
  EXPECT_EQ(o.out.rfind("digraph la {", 0), 0u);
}

TEST(Cli, EmptyInputScansCleanly) {
  auto in = write_input("empty.txt", "");
  auto o = run("scan " + spec("product") + " " + in.string());
  EXPECT_EQ(o.code, 0);
  EXPECT_EQ(nlohmann::json::parse(o.out)["tokens"].size(), 0u);
}

TEST(Cli, UnscannableInputExitsTwo) {
  auto in = write_input("abc.txt", "abc");
  auto o = run("scan " + spec("product") + " " + in.string(), true);
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.out.find("position 0"), std::string::npos) << o.out;
}

TEST(Cli, ParseCountsTrees) {
  auto price = write_input("price_parse.txt", "5.2 $ 8.4");
  auto sum = write_input("sum.txt", "1+2+3");
  EXPECT_EQ(run("parse --count-trees " + spec("product") + " " + price.string()).out, "1\n");
  EXPECT_EQ(run("parse --count-trees " + spec("expression") + " " + sum.string()).out, "2\n");
  EXPECT_EQ(run("parse --count-trees " + spec("expression_left") + " " + sum.string()).out, "1\n");
}

TEST(Cli, ParseJsonCarriesReport) {
  auto in = write_input("price_json.txt", "5.2 $ 8.4");
  auto o = run("parse " + spec("product") + " " + in.string());
  ASSERT_EQ(o.code, 0);
  auto j = nlohmann::json::parse(o.out);
  EXPECT_EQ(j["tree_count"], 1);
  EXPECT_EQ(j["report"]["token_count"], 9);
  for (const char* phase : {"scan", "ela", "chart", "enforce"}) EXPECT_TRUE(j["report"]["elapsed_ms"].contains(phase));
}

TEST(Cli, SpecErrorsExitOne) {
  auto in = write_input("x.txt", "1");
  auto bad = write_input("bad.lf", "%tokens\nA /a(/\n");
  EXPECT_EQ(run("scan " + bad.string() + " " + in.string()).code, 1);
  EXPECT_EQ(run("scan /nonexistent/spec.lf " + in.string()).code, 1);
}

TEST(Cli, NoParseExitsThree) {
  auto in = write_input("partial.txt", "5.2");
  auto o = run("parse " + spec("product") + " " + in.string(), true);
  EXPECT_EQ(o.code, 3);
  EXPECT_NE(o.out.find("no parse"), std::string::npos);
}
