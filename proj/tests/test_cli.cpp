#include "xsd/io.hpp"
#include "xsd/manifest.hpp"
#include "xsd/synth.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

namespace fs = std::filesystem;

namespace xsd {
namespace {

const fs::path kWork = fs::temp_directory_path() / "xsd_cli_test";

int run(const std::string& args, const std::string& log = "log.txt") {
  const std::string cmd = std::string(XSD_CLI_PATH) + " " + args + " > " + (kWork / log).string() + " 2>&1";
  return std::system(cmd.c_str());
}

std::string output(const std::string& log = "log.txt") { return read_file(kWork / log); }

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
    ASSERT_EQ(run("synth --subjects 4 --trials 36 --dim 6 --gamma 0.3 --tau 0.3 --seed 2 --out " +
                  (kWork / "data").string()),
              0)
        << output();
  }
  static void TearDownTestSuite() { fs::remove_all(kWork); }
};

TEST_F(Cli, SynthWritesDatasetAndParams) {
  const auto loaded = load_dataset(kWork / "data");
  EXPECT_EQ(loaded.data.size(), 4u);
  EXPECT_TRUE(loaded.fingerprint_ok);
  EXPECT_NE(output().find("# resolved configuration"), std::string::npos);
}

TEST_F(Cli, EvaluateCsvHeaderAndDeterminism) {
  const std::string base = "evaluate --data " + (kWork / "data").string() + " --seed 4 --out-csv ";
  ASSERT_EQ(run(base + (kWork / "a.csv").string()), 0) << output();
  ASSERT_EQ(run(base + (kWork / "b.csv").string()), 0) << output();
  const auto a = read_file(kWork / "a.csv");
  EXPECT_EQ(a.substr(0, a.find('\n')), "subject,single,pool,sg,sg_cs");
  EXPECT_EQ(a, read_file(kWork / "b.csv"));
  EXPECT_NE(output().find("fingerprint"), std::string::npos);
}

TEST_F(Cli, WeightsForCopiedSubjectAreNearOne) {
  const auto loaded = load_dataset(kWork / "data");
  const auto& s = loaded.data.subjects()[0];
  save_dataset(MultiSubjectDataset({s, SubjectDataset(9, s.features(), s.labels())}), kWork / "twins");
  for (std::string space : {"second_level", "original"}) {
    const auto csv = kWork / ("w-" + space + ".csv");
    ASSERT_EQ(run("weights --data " + (kWork / "twins").string() + " --target-subject 9 --shift-space " +
                  space + " --out " + csv.string()),
              0)
        << output();
    const auto lines = split(read_file(csv), '\n');
    EXPECT_EQ(lines[0], "trial_index,weight");
    std::size_t n = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      const double w = parse_double(split(lines[i], ',')[1]);
      EXPECT_GE(w, 0.5);
      EXPECT_LE(w, 2.0);
      ++n;
    }
    EXPECT_EQ(n, s.size());
  }
}

TEST_F(Cli, PermcheckReportsNullMean) {
  ASSERT_EQ(run("permcheck --data " + (kWork / "data").string() + " --method pool --n-perm 3"), 0) << output();
  EXPECT_NE(output().find("null mean"), std::string::npos);
}

TEST_F(Cli, IngestVectorizesTensors) {
  EpochedTensor t;
  t.subject_id = 5;
  t.trials = 4;
  t.channels = 3;
  t.timepoints = 6;
  for (std::size_t i = 0; i < 72; ++i) t.data.push_back(static_cast<double>(i));
  t.labels = {0, 1, 0, 1};
  write_epoched(t, kWork / "tensors");
  ASSERT_EQ(run("ingest --tensor-dir " + (kWork / "tensors").string() + " --decimate 4 --window 0-500ms --out " +
                (kWork / "ingested").string()),
            0)
      << output();
  const auto loaded = load_dataset(kWork / "ingested");
  EXPECT_EQ(loaded.data.dim(), 3u);
  EXPECT_EQ(loaded.manifest.get("timepoints"), "1");
  // six timepoints with decimate 4 drop two; the CLI warns about it
  EXPECT_NE(output().find("warning"), std::string::npos);
}

TEST_F(Cli, ErrorsExitNonZeroWithMessage) {
  EXPECT_NE(run("evaluate --data " + (kWork / "data").string() + " --methods svm"), 0);
  EXPECT_NE(output().find("error:"), std::string::npos);
  EXPECT_NE(run("bogus"), 0);
  EXPECT_NE(run("weights --data " + (kWork / "data").string() + " --target-subject 77"), 0);
}

}  // namespace
}  // namespace xsd
