// Copyright 2026 The rdonet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "gtest/gtest.h"
#include "json.hpp"
#include "rdonet/container.h"
#include "rdonet/image_io.h"
#include "rdonet/latent.h"
#include "rdonet/status.h"
#include "test_util.h"

namespace rdonet {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(::testing::TempDir()) /
           ("rdonet_cli_" + std::string(::testing::UnitTest::GetInstance()
                                            ->current_test_info()
                                            ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string P(const std::string& name) const { return (dir_ / name).string(); }

  Result Run(const std::string& args, const std::string& env = "") const {
    const std::string cmd = "env -u RDONET_SEED " + env + " '" + RDONET_CLI +
                            "' " + args + " >'" + P("stdout") + "' 2>'" +
                            P("stderr") + "'";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = Slurp(P("stdout"));
    r.err = Slurp(P("stderr"));
    return r;
  }

  std::string Arch(const std::string& name = "rdonet-tiny.arch") const {
    return " --arch '" + testing::ConfigPath(name) + "'";
  }

  std::string WriteNoise(const std::string& name, int h, int w, uint32_t seed) {
    std::mt19937 rng(seed);
    WriteImage(testing::NoiseImage(rng, h, w), P(name));
    return P(name);
  }

  fs::path dir_;
};

TEST_F(CliTest, EncodeDecodeVerify) {
  const std::string img = WriteNoise("in.ppm", 70, 100, 1);
  Result e = Run("encode " + img + Arch() + " --lambda 0.01 --out " + P("s.rdon") +
                 " --report " + P("enc.json") + " --recon " + P("recon.ppm"));
  ASSERT_EQ(e.code, 0) << e.err;
  const json rep = json::parse(Slurp(P("enc.json")));
  EXPECT_EQ(rep["width"], 100);
  EXPECT_EQ(rep["height"], 70);
  const size_t bytes = fs::file_size(P("s.rdon"));
  EXPECT_EQ(rep["file_bytes"], bytes);
  EXPECT_DOUBLE_EQ(rep["bpp"].get<double>(), 8.0 * bytes / (70 * 100));
  size_t payload = 0;
  for (const auto& s : rep["segments"]) payload += s["bytes"].get<size_t>();
  EXPECT_EQ(bytes, kHeaderBytes + 2 + 16 + payload);  // 4x4 mask
  const double est = rep["estimated_payload_bits"];
  EXPECT_LE(std::fabs(8.0 * payload - est), 0.01 * 8.0 * payload + 64 * 8);

  Result d = Run("decode " + P("s.rdon") + Arch() + " --out " + P("dec.ppm") +
                 " --verify " + P("enc.json") + " --report " + P("dec.json"));
  ASSERT_EQ(d.code, 0) << d.err;
  EXPECT_EQ(Slurp(P("dec.ppm")), Slurp(P("recon.ppm")));
  const FeatureMap decoded = ReadImage(P("dec.ppm"));
  EXPECT_EQ(decoded.shape(), (Shape{3, 70, 100}));
  const json drep = json::parse(Slurp(P("dec.json")));
  EXPECT_EQ(drep["reconstruction_fnv1a64"], rep["reconstruction_fnv1a64"]);

  Result i = Run("inspect " + P("s.rdon"));
  ASSERT_EQ(i.code, 0) << i.err;
  const json ins = json::parse(i.out);
  EXPECT_EQ(ins["op_point"]["index"], rep["op_point"]["index"]);
  EXPECT_EQ(ins["mask"], rep["mask"]);
  EXPECT_EQ(ins["padded_width"], 128);
}

TEST_F(CliTest, VerifyFailsWithOtherWeights) {
  const std::string img = WriteNoise("in.ppm", 64, 64, 2);
  ASSERT_EQ(Run("encode " + img + Arch() + " --op-point 1:0.5 --out " + P("s.rdon") +
                " --report " + P("enc.json")).code, 0);
  ASSERT_EQ(Run("gen-weights" + Arch() + " --out " + P("w.txt"), "RDONET_SEED=99").code,
            0);
  const Result d = Run("decode " + P("s.rdon") + Arch() + " --weights " + P("w.txt") +
                       " --out " + P("d.ppm") + " --verify " + P("enc.json"));
  // Either the payload no longer parses or the reconstruction differs.
  EXPECT_EQ(d.code, 22) << d.err;
}

TEST_F(CliTest, GenWeightsIsDeterministic) {
  ASSERT_EQ(Run("gen-weights" + Arch() + " --out " + P("a.txt"), "RDONET_SEED=5").code, 0);
  ASSERT_EQ(Run("gen-weights" + Arch() + " --out " + P("b.txt"), "RDONET_SEED=5").code, 0);
  ASSERT_EQ(Run("gen-weights" + Arch() + " --out " + P("c.txt"), "RDONET_SEED=6").code, 0);
  ASSERT_EQ(Run("gen-weights" + Arch() + " --out " + P("d.txt")).code, 0);
  EXPECT_EQ(Slurp(P("a.bin")), Slurp(P("b.bin")));
  EXPECT_NE(Slurp(P("a.bin")), Slurp(P("c.bin")));
  EXPECT_NE(Slurp(P("d.bin")), Slurp(P("c.bin")));
  EXPECT_EQ(Run("gen-weights" + Arch() + " --out " + P("e.txt"), "RDONET_SEED=x").code,
            11);
  EXPECT_EQ(Run("gen-weights" + Arch() + " --out " + P("f.bin")).code, 11);

  // Default weights equal an explicit manifest of the default seed.
  const std::string img = WriteNoise("in.ppm", 64, 64, 3);
  ASSERT_EQ(Run("encode " + img + Arch() + " --lambda 0.02 --out " + P("1.rdon")).code, 0);
  ASSERT_EQ(Run("encode " + img + Arch() + " --weights " + P("d.txt") +
                " --lambda 0.02 --out " + P("2.rdon")).code, 0);
  EXPECT_EQ(Slurp(P("1.rdon")), Slurp(P("2.rdon")));
}

TEST_F(CliTest, GenGains) {
  ASSERT_EQ(Run("gen-gains" + Arch() + " --base 1.5 --out " + P("g.txt")).code, 0);
  const GainTable g = ReadGainTable(P("g.txt"));
  EXPECT_EQ(g.channels, 8);
  EXPECT_FLOAT_EQ(g.points[0][0].encoder[0], 1.5f);
  const std::string img = WriteNoise("in.ppm", 64, 64, 4);
  EXPECT_EQ(Run("encode " + img + Arch() + " --gains " + P("g.txt") +
                " --lambda 0.01 --out " + P("s.rdon")).code, 0);
  EXPECT_EQ(Run("decode " + P("s.rdon") + Arch() + " --gains " + P("g.txt") +
                " --out " + P("d.ppm")).code, 0);
}

TEST_F(CliTest, FlatImageCodesAllLow) {
  WriteImage(FeatureMap(3, 256, 256, 0.5f), P("gray.png"));
  const Result e = Run("encode " + P("gray.png") + Arch() + " --lambda 0.01 --out " +
                       P("s.rdon"));
  ASSERT_EQ(e.code, 0) << e.err;
  const json rep = json::parse(e.out);
  EXPECT_EQ(rep["alpha"], 0.0);
  EXPECT_EQ(rep["segments"][3]["bytes"], 0);
  EXPECT_EQ(rep["mask"].get<std::string>().find('H'), std::string::npos);
  EXPECT_EQ(rep["complexity"]["measured"]["ctx_per_pixel"],
            rep["complexity"]["analytic"]["ctx_per_pixel"]);
}

TEST_F(CliTest, MaskModesAndSearch) {
  const std::string img = WriteNoise("in.ppm", 64, 64, 5);
  Result s = Run("encode " + img + Arch() + " --mask search --lambda 0.01 --out " +
                 P("s.rdon"));
  ASSERT_EQ(s.code, 0) << s.err;
  const Result high = Run("encode " + img + Arch() + " --mask high --lambda 0.01 --out " +
                          P("h.rdon"));
  EXPECT_EQ(json::parse(high.out)["mask"], "HH/HH");
  const Result low = Run("encode " + img + Arch() + " --mask low --lambda 0.01 --out " +
                         P("l.rdon"));
  EXPECT_EQ(json::parse(low.out)["mask"], "LL/LL");
  const std::string big = WriteNoise("big.ppm", 160, 128, 6);
  const Result r = Run("encode " + big + Arch() + " --mask search --lambda 0.01 --out " +
                       P("b.rdon"));
  EXPECT_EQ(r.code, 10 + static_cast<int>(ErrorCode::kRefused));
  EXPECT_NE(r.err.find("refused"), std::string::npos);
  EXPECT_NE(Run("encode " + img + Arch() + " --lambda 0.01 --op-point 1 --out " +
                P("x.rdon")).code, 0);
}

TEST_F(CliTest, OddSizedImages) {
  const std::string img = WriteNoise("odd.png", 333, 500, 7);
  ASSERT_EQ(Run("encode " + img + Arch() + " --lambda 0.005 --out " + P("s.rdon")).code,
            0);
  ASSERT_EQ(Run("decode " + P("s.rdon") + Arch() + " --out " + P("d.png")).code, 0);
  const FeatureMap d = ReadImage(P("d.png"));
  EXPECT_EQ(d.width(), 500);
  EXPECT_EQ(d.height(), 333);
}

TEST_F(CliTest, StreamErrorsMapToExitCodes) {
  const std::string img = WriteNoise("in.ppm", 64, 64, 8);
  ASSERT_EQ(Run("encode " + img + Arch() + " --mask high --lambda 0.01 --out " +
                P("s.rdon")).code, 0);
  const std::string good = Slurp(P("s.rdon"));
  auto write = [&](const std::string& name, const std::string& data) {
    std::ofstream(P(name), std::ios::binary) << data;
    return P(name);
  };
  Result r = Run("inspect " + write("t.rdon", good.substr(0, good.size() - 3)));
  EXPECT_EQ(r.code, 19);
  EXPECT_NE(r.err.find("error[truncated][segment 4]"), std::string::npos) << r.err;
  EXPECT_EQ(Run("inspect " + write("x.rdon", good + "x")).code, 21);
  EXPECT_EQ(Run("inspect " + write("m.rdon", "PNG" + good)).code, 16);
  std::string v = good;
  v[4] = 9;
  EXPECT_EQ(Run("inspect " + write("v.rdon", v)).code, 17);
  // Payload damage only shows up when decoding.
  Stream st = ReadStream(std::span(reinterpret_cast<const uint8_t*>(good.data()),
                                   good.size()));
  st.segments[kLatent1].push_back(0);
  const std::vector<uint8_t> grown = WriteStream(st);
  r = Run("decode " + write("g.rdon", std::string(grown.begin(), grown.end())) +
          Arch() + " --out " + P("d.ppm"));
  EXPECT_EQ(r.code, 22);
  EXPECT_NE(r.err.find("error[corrupt][segment 4]"), std::string::npos) << r.err;
  EXPECT_EQ(Run("decode " + P("nope.rdon") + Arch() + " --out " + P("d.ppm")).code, 12);
  EXPECT_NE(Run("decode" + Arch()).code, 0);
}

TEST_F(CliTest, EvalAndComplexity) {
  const std::string a = WriteNoise("a.png", 200, 200, 9);
  Result e = Run("eval --original " + a + " --decoded " + a);
  ASSERT_EQ(e.code, 0) << e.err;
  json j = json::parse(e.out);
  EXPECT_EQ(j["psnr_db"], "inf");
  EXPECT_EQ(j["ms_ssim"], 1.0);

  std::ofstream(P("anchor.csv")) << "rate,quality\n0.1,30\n0.25,33.1\n0.5,35.8\n1.0,38.9\n1.6,40.7\n";
  std::ofstream(P("test.csv")) << "rate,quality\n0.2,30\n0.5,33.1\n1.0,35.8\n2.0,38.9\n3.2,40.7\n";
  e = Run("eval --anchor " + P("anchor.csv") + " --test " + P("test.csv"));
  ASSERT_EQ(e.code, 0) << e.err;
  j = json::parse(e.out);
  EXPECT_NEAR(j["bd_rate_percent"].get<double>(), 100.0, 1e-6);

  Result c = Run("complexity" + Arch("rdonet-192.arch") + " --sweep 0.5");
  ASSERT_EQ(c.code, 0) << c.err;
  std::istringstream lines(c.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line.rfind("mode,alpha,mac_per_pixel", 0), 0u);
  std::getline(lines, line);
  EXPECT_EQ(line.rfind("analytic,0,950573.25", 0), 0u) << line;
  int rows = 1;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 3);

  const std::string small = WriteNoise("s.ppm", 64, 64, 10);
  c = Run("complexity" + Arch() + " --width 64 --height 64 --image " + small);
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_NE(c.out.find("measured,1,"), std::string::npos) << c.out;
}

}  // namespace
}  // namespace rdonet
