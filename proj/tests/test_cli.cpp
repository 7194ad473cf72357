#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fockbench/fockbench.hpp"

using namespace fockbench;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int status = -1;
  std::string out;
};

// stderr is folded into the captured stream when `merge` is set
RunResult run(const std::string& args, bool merge = false) {
  const std::string cmd = std::string(FOCKBENCH_CLI) + " " + args + (merge ? " 2>&1" : " 2>/dev/null");
  RunResult r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), got);
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class TempDir {
public:
  TempDir() : path_(fs::temp_directory_path() / ("fockbench_cli_" + std::to_string(::getpid()) + "_" +
                                                 std::to_string(counter_++))) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

private:
  static inline int counter_ = 0;
  fs::path path_;
};

std::string trim_lines(const std::string& s) {
  std::istringstream in(s);
  std::string line, out;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.pop_back();
    out += line + "\n";
  }
  return out;
}

}  // namespace

TEST(Cli, DimsExample) {
  const auto r = run("dims --d 3 --n-max 4");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "sector dimensions (d = 3, n_max = 4): 1,3,6,10,15\ntotal: 35\n");
}

TEST(Cli, DimsFromModel) {
  const auto r = run("dims --model boson --n-max 2");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("1,4,10"), std::string::npos);
}

TEST(Cli, VerifyTrilinearIsNonCompliant) {
  const auto r = run("verify --model h3 --n-max 28 --n-range 4:24");
  ASSERT_EQ(r.status, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["verdict"], "non-compliant");
  EXPECT_NEAR(j["fit"]["slope"].get<double>(), 0.5, 0.15);
  EXPECT_EQ(j["header"]["basis_ordering"], kBasisOrderingTag);
  EXPECT_EQ(j["header"]["model_hash"].get<std::string>().rfind("sha256:", 0), 0u);
}

TEST(Cli, BoundsExampleHasNoViolations) {
  const auto r = run("bounds --model boson-demo --bound eq36 --n 3 --samples 1000 --seed 42");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("eq36,3,1000,"), std::string::npos);
  EXPECT_NE(r.out.find("# violations 0"), std::string::npos);
}

TEST(Cli, BoundsRejectsForeignFamily) { EXPECT_EQ(run("bounds --model h3 --bound eq36 --n 1").status, 3); }

TEST(Cli, CcrPasses) {
  const auto r = run("ccr --d 2 --n-max 6 --trials 10");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("max_deviation: "), std::string::npos);
}

TEST(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(run("").status, 2);
  EXPECT_EQ(run("frobnicate").status, 2);
  EXPECT_EQ(run("verify --model h3 --no-such-flag").status, 2);
  EXPECT_EQ(run("verify").status, 2);
  EXPECT_EQ(run("verify --model h3 --variant cubic").status, 2);
  EXPECT_EQ(run("dims").status, 2);
}

TEST(Cli, ValidationErrorsExitWithThree) {
  EXPECT_EQ(run("verify --model no-such-model").status, 3);
  EXPECT_EQ(run("verify --model h3 --n-range 4:30").status, 3);
  EXPECT_EQ(run("verify --model h3 --n-range 4-8").status, 3);
  EXPECT_EQ(run("spectrum --model nelson").status, 3);
}

TEST(Cli, JsonErrorsAreOneLine) {
  const auto r = run("--json verify --model h3 --n-range 4:30", true);
  EXPECT_EQ(r.status, 3);
  ASSERT_FALSE(r.out.empty());
  EXPECT_EQ(r.out.find('\n'), r.out.size() - 1);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["error"], "validation");
  EXPECT_EQ(j["field"], "n_range");
  EXPECT_EQ(j["exit_code"], 3);
  // the flag may also follow the subcommand
  const auto u = run("verify --json --model h3 --bogus", true);
  EXPECT_EQ(u.status, 2);
  EXPECT_EQ(nlohmann::json::parse(u.out)["error"], "usage");
}

TEST(Cli, VerifyWritesBothFormatsDeterministically) {
  TempDir dir;
  const std::string a = (dir.path() / "a").string(), b = (dir.path() / "b").string();
  const std::string flags = "verify --model boson --modes 2 --n-max 10 --format both --with-bounds --samples 50";
  ASSERT_EQ(run(flags + " --out " + a).status, 0);
  ASSERT_EQ(run(flags + " --out " + b).status, 0);
  EXPECT_EQ(slurp(a + ".json"), slurp(b + ".json"));
  EXPECT_EQ(slurp(a + ".csv"), slurp(b + ".csv"));
  const auto j = nlohmann::json::parse(slurp(a + ".json"));
  EXPECT_FALSE(j["inequalities"].empty());
  const std::string csv = slurp(a + ".csv");
  EXPECT_EQ(csv.rfind("# fockbench ", 0), 0u);
  EXPECT_NE(csv.find("\nn,gamma,gamma2,C_n\n"), std::string::npos);
  EXPECT_FALSE(fs::exists(a + ".json.tmp"));
}

TEST(Cli, ModelFileAndPresetHashAgree) {
  TempDir dir;
  const fs::path file = dir.path() / "h3.json";
  std::ofstream(file) << model_to_json(build_toy(ToyKind::H3)).dump(4);
  const auto from_file = nlohmann::json::parse(run("verify --model " + file.string() + " --n-max 10").out);
  const auto preset = nlohmann::json::parse(run("verify --model h3 --n-max 10").out);
  EXPECT_EQ(from_file["header"]["model_hash"], preset["header"]["model_hash"]);
  EXPECT_EQ(from_file["gamma"], preset["gamma"]);
  EXPECT_EQ(run("verify --model " + file.string() + " --grid 8").status, 3);
}

TEST(Cli, BuildWritesReadableMatrices) {
  TempDir dir;
  ASSERT_EQ(run("build --model boson --modes 2 --n-max 4 --out-dir " + dir.path().string()).status, 0);
  const ModelSpec m = boson_preset(2);
  const CompiledModel c = compile(m, make_space(2, 4));
  const std::pair<const char*, const BlockBandedOperator*> parts[] = {
      {"H0", &c.H0}, {"HI", &c.HI}, {"Hdiag", &c.Hdiag}, {"H2", &c.H2}};
  for (const auto& [name, op] : parts) {
    const MarketMatrix mm = read_matrix_market(dir.path() / (std::string(name) + ".mtx"));
    EXPECT_EQ(mm.hermitian, op->hermitian()) << name;
    EXPECT_EQ((to_dense(mm) - op->to_dense()).max_abs(), 0.0) << name;
  }
}

TEST(Cli, SpectrumIsLabeledAsIndicator) {
  const auto r = run("spectrum --model h3 --cutoffs 6,8 --levels 2");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("not a self-adjointness verdict"), std::string::npos);
  EXPECT_NE(r.out.find("n_max,level,value,drift\n"), std::string::npos);
}

TEST(Cli, ScalingAndRelboundTables) {
  const auto s = run("scaling --model h3 --n-max 12 --n-range 2:9");
  EXPECT_EQ(s.status, 0);
  EXPECT_NE(s.out.find("# slope "), std::string::npos);
  const auto r = run("relbound --model boson --modes 2 --n-max 6 --samples 50");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("epsilon,C_half,C_full,stable\n"), std::string::npos);
  const auto scan = run("relbound --model boson --modes 2 --cutoffs 4,6 --samples 50");
  EXPECT_EQ(scan.status, 0);
  EXPECT_NE(scan.out.find("n_max,C\n"), std::string::npos);
}

TEST(Cli, HelpMatchesDocs) {
  const std::string docs = slurp(FOCKBENCH_CLI_DOC);
  ASSERT_FALSE(docs.empty());
  for (const char* sub : {"", "dims", "build", "ccr", "verify", "scaling", "bounds", "relbound", "spectrum"}) {
    const auto r = run(std::string(sub) + " --help");
    EXPECT_EQ(r.status, 0) << sub;
    EXPECT_NE(docs.find("```text\n" + trim_lines(r.out) + "```"), std::string::npos)
        << "help for '" << sub << "' is out of date in docs/cli.md";
  }
}

TEST(Cli, ExampleModelsLoad) {
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(FOCKBENCH_MODELS_DIR)) {
    if (entry.path().extension() != ".json") continue;
    ++count;
    const ModelSpec m = load_model_file(entry.path().string());
    const auto r = run("verify --model " + entry.path().string() + " --n-max 8");
    EXPECT_EQ(r.status, 0) << entry.path();
    EXPECT_EQ(nlohmann::json::parse(r.out)["model"], m.name);
  }
  EXPECT_EQ(count, 3u);
  const std::string dir = FOCKBENCH_MODELS_DIR;
  const auto spec = run("spectrum --model " + dir + "/displaced_oscillator.json --cutoffs 12 --levels 1");
  EXPECT_NE(spec.out.find("12,0,-0.0400000000000000"), std::string::npos) << spec.out;
  EXPECT_EQ(run("bounds --model " + dir + "/spin_boson.json").status, 3);
  EXPECT_EQ(run("bounds --model " + dir + "/two_mode_pairing.json --samples 100").status, 0);
}

TEST(MatrixMarket, RoundTripGeneralAndHermitian) {
  const auto sp = make_space(2, 3);
  CMatrix h(2, 2);
  h(0, 0) = 1.0;
  h(0, 1) = Complex(0.1, 0.7);
  h(1, 0) = Complex(0.1, -0.7);
  h(1, 1) = 1.0 / 3.0;
  const auto herm = second_quantization(sp, h);
  const std::vector<Complex> f{Complex(0.3, -0.2), 1.0 / 7.0};
  const auto gen = creation_matrix(sp, f);
  for (const auto* op : {&herm, &gen}) {
    std::istringstream in(to_matrix_market(*op));
    const MarketMatrix mm = parse_matrix_market(in);
    EXPECT_EQ(mm.hermitian, op->hermitian());
    EXPECT_EQ(mm.rows, sp->dimension());
    EXPECT_EQ((to_dense(mm) - op->to_dense()).max_abs(), 0.0);
  }
}

TEST(MatrixMarket, HeaderAndRejections) {
  const auto sp = make_space(1, 2);
  const std::string text = to_matrix_market(number_operator(sp), {"note"});
  EXPECT_EQ(text.rfind("%%MatrixMarket matrix coordinate complex hermitian\n", 0), 0u);
  EXPECT_NE(text.find(std::string("% basis_ordering ") + kBasisOrderingTag + "\n"), std::string::npos);
  EXPECT_NE(text.find("% note\n"), std::string::npos);
  std::istringstream real("%%MatrixMarket matrix coordinate real general\n1 1 0\n");
  EXPECT_THROW(parse_matrix_market(real), ValidationError);
  std::istringstream truncated("%%MatrixMarket matrix coordinate complex general\n2 2 3\n1 1 1 0\n");
  EXPECT_THROW(parse_matrix_market(truncated), ValidationError);
}
