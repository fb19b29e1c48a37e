#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;  // stdout
  std::string err;  // stderr
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mebface_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream(dir_ / "tiny.cfg") << "# tiny network for fast runs\n"
                                        "working-size=16\ncrop-size=14\n"
                                        "conv1-maps=2\nconv1-filter=3\nconv2-maps=2\nconv2-filter=3\n"
                                        "fc1-units=16\nfc2-units=16\nbits=16\n"
                                        "epochs=2\nbatch=8\nlr=0.003\n"
                                        "users=3\nsamples=4\nquiet=true\n";
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliRun run(const std::string& args) {
    const auto out = dir_ / "stdout.txt";
    const auto err = dir_ / "stderr.txt";
    const std::string cmd = "cd '" + dir_.string() + "' && '" MEBFACE_CLI_PATH "' " + args + " >'" +
                            out.string() + "' 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  }

  CliRun tiny(const std::string& args) { return run("--config tiny.cfg " + args); }

  void prepare_enrolled_system() {
    ASSERT_EQ(tiny("synth-data --out data").code, 0);
    ASSERT_EQ(tiny("gen-codes --dataset data --codes codes.txt --code-seed 4").code, 0);
    ASSERT_EQ(tiny("train --dataset data --codes codes.txt --params net.bin").code, 0);
    ASSERT_EQ(tiny("enroll --codes codes.txt --vault vault.txt").code, 0);
  }

  fs::path dir_;
};

bool single_error_line(const std::string& err) {
  return err.rfind("error: ", 0) == 0 && err.find('\n') == err.size() - 1;
}

TEST_F(Cli, GradientCheckPasses) {
  const auto r = run("gradient-check --seed 7");
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  std::smatch m;
  ASSERT_TRUE(std::regex_search(r.out, m, std::regex("max_relative_error ([0-9.e+-]+)")));
  EXPECT_LT(std::stod(m[1]), 1e-4);
}

TEST_F(Cli, HelpListsAllFlags) {
  const auto r = run("--help");
  EXPECT_EQ(r.code, 0);
  for (const char* flag : {"--config", "--dataset", "--codes", "--params", "--vault", "--image", "--bits", "--crop-size",
                           "--working-size", "--no-flip", "--epochs", "--lr", "--momentum", "--splits", "--seed",
                           "--code-seed", "--train-seed", "--attack-seed", "--noise", "--threshold", "--keep-codes"}) {
    EXPECT_NE(r.out.find(flag), std::string::npos) << flag;
  }
  for (const char* sub : {"synth-data", "gen-codes", "train", "enroll", "verify", "identify", "evaluate",
                          "attack-sim", "gradient-check"}) {
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
  }
}

TEST_F(Cli, ErrorClassesHaveDistinctCodes) {
  const auto unknown = run("frobnicate");
  EXPECT_EQ(unknown.code, 2);
  EXPECT_TRUE(single_error_line(unknown.err)) << unknown.err;
  EXPECT_NE(unknown.err.find("unknown subcommand"), std::string::npos);

  const auto bad = run("gradient-check --cases many");
  EXPECT_EQ(bad.code, 3);
  EXPECT_TRUE(single_error_line(bad.err)) << bad.err;

  const auto bad_bits = tiny("gen-codes --dataset . --codes c.txt --bits 12");
  EXPECT_EQ(bad_bits.code, 3) << bad_bits.err;

  const auto missing = run("verify --params none.bin --vault none.txt --user a --image none.pgm");
  EXPECT_EQ(missing.code, 4);
  EXPECT_TRUE(single_error_line(missing.err)) << missing.err;

  const auto missing_cfg = run("--config absent.cfg gradient-check");
  EXPECT_EQ(missing_cfg.code, 4);
}

TEST_F(Cli, WorkflowEndToEnd) {
  prepare_enrolled_system();
  EXPECT_FALSE(fs::exists(dir_ / "codes.txt")) << "enroll must purge the codebook";
  EXPECT_TRUE(fs::exists(dir_ / "vault.txt"));

  const auto v = tiny("verify --params net.bin --vault vault.txt --user u001 --image data/u001/000.pgm");
  EXPECT_EQ(v.code, 0) << v.err;
  EXPECT_TRUE(std::regex_search(v.out, std::regex(R"(score [0-9]+/18 \([0-9.]+\) threshold [0-9.]+ (accept|reject))")))
      << v.out;

  const auto u = tiny("verify --params net.bin --vault vault.txt --user u999 --image data/u001/000.pgm");
  EXPECT_EQ(u.code, 6);
  EXPECT_NE(u.err.find("unknown user"), std::string::npos);
  EXPECT_TRUE(single_error_line(u.err));

  const auto id = tiny("identify --params net.bin --vault vault.txt --image data/u002/001.pgm --top 2");
  EXPECT_EQ(id.code, 0) << id.err;
  EXPECT_EQ(std::count(id.out.begin(), id.out.end(), '\n'), 2);

  const auto a = tiny("attack-sim --params net.bin --vault vault.txt --noise 4");
  EXPECT_EQ(a.code, 0) << a.err;
  EXPECT_NE(a.out.find("pairs 12"), std::string::npos) << a.out;
}

TEST_F(Cli, EnrollKeepsCodesOnRequestAndRefusesDuplicates) {
  ASSERT_EQ(tiny("synth-data --out data").code, 0);
  ASSERT_EQ(tiny("gen-codes --dataset data --codes codes.txt").code, 0);
  ASSERT_EQ(tiny("enroll --codes codes.txt --vault vault.txt --keep-codes").code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "codes.txt"));
  const auto dup = tiny("enroll --codes codes.txt --vault vault.txt --keep-codes");
  EXPECT_EQ(dup.code, 7);
  EXPECT_EQ(tiny("enroll --codes codes.txt --vault vault.txt --overwrite").code, 0);
  EXPECT_NE(slurp(dir_ / "vault.txt").find("\t2\t"), std::string::npos);
}

TEST_F(Cli, CorruptVaultIsAFormatError) {
  prepare_enrolled_system();
  auto text = slurp(dir_ / "vault.txt");
  text[15] = text[15] == 'x' ? 'y' : 'x';
  std::ofstream(dir_ / "vault.txt", std::ios::binary) << text;
  const auto r = tiny("verify --params net.bin --vault vault.txt --user u001 --image data/u001/000.pgm");
  EXPECT_EQ(r.code, 5);
  EXPECT_TRUE(single_error_line(r.err)) << r.err;
}

TEST_F(Cli, FlagsOverrideConfig) {
  ASSERT_EQ(tiny("synth-data --out data").code, 0);
  ASSERT_EQ(tiny("gen-codes --dataset data --codes codes.txt").code, 0);
  const auto from_cfg = tiny("train --dataset data --codes codes.txt --params a.bin");
  const auto flagged = tiny("train --dataset data --codes codes.txt --params b.bin --epochs 1");
  ASSERT_EQ(from_cfg.code, 0);
  ASSERT_EQ(flagged.code, 0);
  EXPECT_NE(from_cfg.out.find("epoch 2 "), std::string::npos);
  EXPECT_EQ(flagged.out.find("epoch 2 "), std::string::npos);
  // Same seed, same data: identical parameter files for identical settings.
  ASSERT_EQ(tiny("train --dataset data --codes codes.txt --params c.bin").code, 0);
  EXPECT_EQ(slurp(dir_ / "a.bin"), slurp(dir_ / "c.bin"));
}

TEST_F(Cli, EvaluateIsByteIdentical) {
  const auto a = tiny("evaluate --splits 1 --seed 3 --train-per-user 2 --report rep_a");
  const auto b = tiny("evaluate --splits 1 --seed 3 --train-per-user 2 --report rep_b");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(slurp(dir_ / "rep_a" / "report.txt"), slurp(dir_ / "rep_b" / "report.txt"));
  EXPECT_EQ(slurp(dir_ / "rep_a" / "scores.csv"), slurp(dir_ / "rep_b" / "scores.csv"));
  EXPECT_NE(a.out.find("GAR@0FAR"), std::string::npos);
}

}  // namespace
