#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "csiae/checkpoint.hpp"
#include "csiae/container.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string output;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" CSIAE_CLI_PATH "\" " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), p)) r.output += buf.data();
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

fs::path tmp(const std::string& name) {
  const fs::path dir = fs::path(CSIAE_TEST_TMP);
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream f(p);
  std::string line;
  while (std::getline(f, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

// Minimal .npy reader for the float64 dumps written by `eval --dump`.
std::vector<double> read_npy(const fs::path& p, std::vector<std::size_t>& shape) {
  const std::string raw = slurp(p);
  REQUIRE(raw.compare(0, 6, "\x93NUMPY") == 0);
  const std::size_t hlen = static_cast<unsigned char>(raw[8]) | (static_cast<unsigned char>(raw[9]) << 8);
  const std::string header = raw.substr(10, hlen);
  REQUIRE(header.find("'<f8'") != std::string::npos);
  const auto open = header.find('(', header.find("shape"));
  const auto close = header.find(')', open);
  std::stringstream dims(header.substr(open + 1, close - open - 1));
  std::string tok;
  shape.clear();
  while (std::getline(dims, tok, ',')) {
    if (tok.find_first_not_of(' ') != std::string::npos) shape.push_back(std::stoull(tok));
  }
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  std::vector<double> v(n);
  REQUIRE(raw.size() == 10 + hlen + n * sizeof(double));
  std::memcpy(v.data(), raw.data() + 10 + hlen, n * sizeof(double));
  return v;
}

const fs::path& small_cat4_data() {
  static const fs::path p = [] {
    const fs::path out = tmp("cat4.csit");
    const auto r = run("gen --profile epa,eva --k 128 --nbs 2 --nue 2 --snr 20 --samples 20 --seed 3 --out " +
                       out.string());
    REQUIRE(r.status == 0);
    return out;
  }();
  return p;
}

const fs::path& small_cat1_data() {
  static const fs::path p = [] {
    const fs::path out = tmp("cat1.csit");
    const auto r = run("gen --profile eva --k 16 --nbs 2 --nue 2 --snr 25 --samples 40 --seed 5 --out " +
                       out.string());
    REQUIRE(r.status == 0);
    return out;
  }();
  return p;
}

}  // namespace

TEST_CASE("gen writes the requested tensors deterministically") {
  const auto a = tmp("gen_a.csit");
  const auto b = tmp("gen_b.csit");
  const std::string flags = "gen --profile epa --k 128 --nbs 32 --nue 4 --snr 20 --samples 64 --seed 7 --out ";
  REQUIRE(run(flags + a.string()).status == 0);
  REQUIRE(run(flags + b.string()).status == 0);
  const auto c = csiae::read_container(a);
  CHECK(c.dims == std::vector<std::uint32_t>{64, 2, 128, 32, 4});
  CHECK(slurp(a) == slurp(b));
  CHECK(fs::exists(a.string() + ".json"));

  const auto m = nlohmann::json::parse(slurp(a.string() + ".manifest.json"));
  CHECK(m["command"] == "gen");
  CHECK(m["outputs"][0]["sha256"].get<std::string>().size() == 64);

  // The run manifest alone reproduces the output.
  const auto c2 = tmp("gen_c.csit");
  REQUIRE(run("gen --config " + a.string() + ".manifest.json --out " + c2.string()).status == 0);
  CHECK(slurp(c2) == slurp(a));
}

TEST_CASE("gen rejects out-of-range K") {
  const auto r = run("gen --k 300 --out " + tmp("bad.csit").string());
  CHECK(r.status != 0);
  CHECK(r.output.find("K out of supported range") != std::string::npos);
  CHECK(run("gen --profile nope --out " + tmp("bad.csit").string()).status != 0);
}

TEST_CASE("gen expands first:last:step ranges") {
  const fs::path out = tmp("ranges.csit");
  REQUIRE(run("gen --k 16:12:2 --out " + out.string()).status != 0);
  REQUIRE(run("gen --k 12:16:2,9 --snr 10:11.5:0.5,inf --nbs 1 --nue 1 --samples 1 --domain delay --out " +
              out.string())
              .status == 0);
  const auto settings = csiae::read_manifest_settings(out.string() + ".json");
  REQUIRE(settings.size() == 20);
  std::vector<double> snrs;
  std::vector<int> ks;
  for (const auto& s : settings) {
    if (std::find(snrs.begin(), snrs.end(), s.snr_db) == snrs.end()) snrs.push_back(s.snr_db);
    if (std::find(ks.begin(), ks.end(), s.k) == ks.end()) ks.push_back(s.k);
  }
  CHECK(ks == std::vector<int>{12, 14, 16, 9});
  REQUIRE(snrs.size() == 5);
  CHECK(snrs[3] == 11.5);
  CHECK(std::isinf(snrs[4]));
}

TEST_CASE("default output directory comes from the environment") {
  const fs::path dir = tmp("envout");
  fs::remove_all(dir);
  REQUIRE(run("gen --k 16 --nbs 1 --nue 1 --samples 2", "CSIAE_OUT_DIR=" + dir.string()).status == 0);
  CHECK(fs::exists(dir / "data.csit"));
}

TEST_CASE("train produces the requested bundles") {
  const auto data = small_cat4_data().string();
  const auto masked = tmp("masked.csae");
  auto r = run("train --data " + data + " --approach masked --lambdas 4,8,16,32 --fine-tune --epochs 2 "
               "--substep-epochs 1 --batch 32 --out " + masked.string());
  REQUIRE_MESSAGE(r.status == 0, r.output);
  auto ck = csiae::load_checkpoint(masked);
  CHECK(ck.bundle.encoders.size() == 1);
  CHECK(ck.bundle.decoders.size() == 4);
  const auto hist = read_csv(masked.string() + ".history.csv");
  CHECK(hist.front() == std::vector<std::string>{"epoch", "phase", "target_lambda", "D_4", "D_8", "D_16", "D_32", "total"});
  CHECK(hist.size() == 1 + 3 + 4);

  const auto naive = tmp("naive.csae");
  r = run("train --data " + data + " --approach naive --lambdas 8 --epochs 1 --out " + naive.string());
  REQUIRE_MESSAGE(r.status == 0, r.output);
  ck = csiae::load_checkpoint(naive);
  CHECK(ck.bundle.encoders.size() == 1);
  CHECK(ck.bundle.decoders.size() == 1);

  const auto saldr = tmp("saldr.csae");
  r = run("train --data " + data + " --approach saldr --lambdas 4,8,16,32 --epochs 1 --out " + saldr.string());
  REQUIRE_MESSAGE(r.status == 0, r.output);
  ck = csiae::load_checkpoint(saldr);
  const auto meta = nlohmann::json::parse(ck.metadata_json);
  CHECK(meta["encoder_params"] == 37724);
  CHECK(meta["decoder_params"] == 4 * ((32 * 128 + 128) + (128 * 256 + 256)));
  CHECK(meta["extra"]["manifest"]["command"] == "train");
}

TEST_CASE("train rejects mismatched configurations") {
  const auto data = small_cat1_data().string();
  auto r = run("train --data " + data + " --approach masked --lambdas 4,8,64 --epochs 1 --out " +
               tmp("x.csae").string());
  CHECK(r.status != 0);
  CHECK(r.output.find("error:") != std::string::npos);
  CHECK(run("train --data " + data + " --approach saldr --fine-tune --epochs 1 --out " + tmp("x.csae").string())
            .status != 0);
  CHECK(run("train --data " + data + " --approach vae").status != 0);
}

TEST_CASE("eval output recomputes from the raw dump") {
  const auto data = small_cat1_data().string();
  const auto ck = tmp("eval.csae");
  REQUIRE(run("train --data " + data + " --lambdas 2,4,8 --epochs 3 --split all --out " + ck.string()).status == 0);
  const auto csv = tmp("eval_nmse.csv");
  const auto dump = tmp("eval_dump.npy");
  const auto r = run("eval --checkpoint " + ck.string() + " --data " + data + " --split all --out " +
                     csv.string() + " --dump " + dump.string());
  REQUIRE_MESSAGE(r.status == 0, r.output);
  std::vector<std::size_t> shape;
  const auto v = read_npy(dump, shape);
  REQUIRE(shape.size() == 4);
  CHECK(shape[0] == 3);
  CHECK(shape[1] == 160);
  CHECK(shape[2] == 2);
  CHECK(shape[3] == 32);
  const auto rows = read_csv(csv);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"approach", "lambda", "cr", "nmse_linear", "nmse_db", "n"});
  const std::size_t len = shape[3];
  for (std::size_t l = 0; l < shape[0]; ++l) {
    double mean = 0.0;
    for (std::size_t i = 0; i < shape[1]; ++i) {
      const double* h = v.data() + ((l * shape[1] + i) * 2) * len;
      const double* g = h + len;
      double err = 0.0, ref = 0.0;
      for (std::size_t j = 0; j < len; ++j) {
        err += (h[j] - g[j]) * (h[j] - g[j]);
        ref += h[j] * h[j];
      }
      mean += err / ref;
    }
    mean /= static_cast<double>(shape[1]);
    const double reported = std::stod(rows[l + 1][3]);
    CHECK(std::abs(reported - mean) <= 1e-9 * std::max(1.0, mean));
    CHECK(rows[l + 1][5] == "160");
  }
  CHECK(fs::exists(tmp("eval_nmse_tensor.csv")));
  CHECK(run("eval --checkpoint " + tmp("missing.csae").string() + " --data " + data).status != 0);
}

TEST_CASE("bench with a single repeat emits one row") {
  const auto out = tmp("bench.csv");
  const auto r = run("bench --approach masked --lambdas 4,8,16,32 --repeats 1 --out " + out.string());
  REQUIRE_MESSAGE(r.status == 0, r.output);
  const auto rows = read_csv(out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"approach", "cardinality", "params", "latency_s", "flops"});
  CHECK(rows[1][0] == "masked");
  CHECK(rows[1][2] == "37024");
  CHECK(std::stod(rows[1][3]) > 0.0);
  CHECK(read_csv(tmp("bench_per_cr.csv")).size() == 5);
}

TEST_CASE("compare covers both cases and emits plot data") {
  const auto data = small_cat1_data().string();
  const auto dir = tmp("compare");
  const auto r = run("compare --data " + data + " --cases 4,32 --epochs 1 --substep-epochs 1 --repeats 1 "
                     "--cardinalities 1,4,32 --emit-plot-data --out-dir " + dir.string());
  REQUIRE_MESSAGE(r.status == 0, r.output);
  const auto table = read_csv(dir / "table3.csv");
  REQUIRE(table.size() == 7);
  int case4 = 0, case32 = 0;
  for (std::size_t i = 1; i < table.size(); ++i) {
    if (table[i][1] == "4") ++case4;
    if (table[i][1] == "32") ++case32;
  }
  CHECK(case4 == 3);
  CHECK(case32 == 3);
  for (const char* f : {"fig7.csv", "fig8.csv", "fig9.csv", "fig10.csv", "nmse_case4.csv", "nmse_case32.csv"}) {
    CHECK_MESSAGE(fs::exists(dir / f), f);
  }
  CHECK(read_csv(dir / "fig8.csv").size() == 1 + 9);
  CHECK(read_csv(dir / "fig7.csv").size() == 1 + 12);
  CHECK(fs::exists(dir / "compare.manifest.json"));
}
