#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#ifndef FLOCBAL_BIN
#error "FLOCBAL_BIN must point at the command-line binary"
#endif

#ifdef __unix__
#include <sys/wait.h>
#endif

namespace {

namespace fs = std::filesystem;

const fs::path kScratch = "cli_scratch";

void reset_scratch() {
  fs::remove_all(kScratch);
  fs::create_directories(kScratch);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the binary with the given arguments; fills captured stdout/stderr.
int run_cli(const std::string& args, std::string* out_text = nullptr,
            std::string* err_text = nullptr) {
  const fs::path out_file = kScratch / "stdout.txt";
  const fs::path err_file = kScratch / "stderr.txt";
  std::string cmd = std::string("\"") + FLOCBAL_BIN + "\" " + args + " > " +
                    out_file.string() + " 2> " + err_file.string();
  int status = std::system(cmd.c_str());
#ifdef __unix__
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#else
  int code = status;
#endif
  if (out_text) *out_text = slurp(out_file);
  if (err_text) *err_text = slurp(err_file);
  return code;
}

std::vector<std::vector<double>> read_csv_rows(const fs::path& path,
                                               std::string* header = nullptr) {
  std::ifstream in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      if (header) *header = line;
      first = false;
      continue;
    }
    std::vector<double> row;
    std::istringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) row.push_back(std::strtod(tok.c_str(), nullptr));
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

const char* kRelaxConfig = R"(# relaxation toward the turbulence-set equilibrium
[grid]
lambda_min = 5
lambda_max = 65
bins = 64
spacing = uniform

[relaxation]
T_eq = 2.0
sigma0 = 3.0
c_k = 2.0

[scenario]
mode = zero_d_relax
t_end = 4.0
dt = 0.05

[initial]
shape = gamma
mass = 2.0
width = 4.0

[fluid]
k = 1.0
eps = 1.0

[output]
stride = 10
)";

const char* kAggFragConfig = R"([grid]
lambda_min = 1
lambda_max = 32
bins = 24

[kernels]
d = 1
aggregation = constant
beta0 = 0.5
fragmentation = constant
k_f = 0.2

[fluid]
eps = 0.01

[scenario]
mode = zero_d_aggfrag
t_end = 1.0
dt = 0.05

[initial]
shape = uniform
mass = 1.0
mean = 4
width = 4

[output]
stride = 5
)";

const char* kColumnConfig = R"([grid]
lambda_min = 1
lambda_max = 8
bins = 6

[kernels]
aggregation = constant
beta0 = 0.3

[fluid]
eps = 0.01

[scenario]
mode = column
t_end = 0.5
dt = 0.05

[column]
nz = 5
depth = 1.0
r0 = 2.0
settling.w0 = 0.01
settling.r_gel = 100

[initial]
shape = uniform
mass = 1.0
mean = 2
width = 2
)";

}  // namespace

TEST_CASE("validate accepts a well-formed configuration") {
  reset_scratch();
  write_file(kScratch / "relax.ini", kRelaxConfig);
  std::string out, err;
  int code = run_cli("validate " + (kScratch / "relax.ini").string(), &out, &err);
  CHECK(code == 0);
  CHECK(out.find("ok") != std::string::npos);
}

TEST_CASE("validate names the offending key") {
  reset_scratch();
  std::string bad = kRelaxConfig;
  const std::string from = "T_eq = 2.0";
  bad.replace(bad.find(from), from.size(), "T_eq = -2.0");
  write_file(kScratch / "bad.ini", bad);
  std::string out, err;
  int code = run_cli("validate " + (kScratch / "bad.ini").string(), &out, &err);
  CHECK(code == 2);
  CHECK(err.find("relaxation.T_eq") != std::string::npos);
}

TEST_CASE("validate rejects unknown kernel families and unknown keys") {
  reset_scratch();
  write_file(kScratch / "fam.ini",
             "[grid]\nlambda_min = 1\nlambda_max = 8\nbins = 4\n"
             "[kernels]\naggregation = ballistic\n"
             "[scenario]\nmode = zero_d_aggfrag\nt_end = 1\ndt = 0.1\n");
  std::string err;
  CHECK(run_cli("validate " + (kScratch / "fam.ini").string(), nullptr, &err) == 2);
  CHECK(err.find("kernels.aggregation") != std::string::npos);

  write_file(kScratch / "key.ini",
             "[grid]\nlambda_min = 1\nlambda_mx = 8\nbins = 4\n"
             "[scenario]\nmode = zero_d_relax\nt_end = 1\ndt = 0.1\n");
  CHECK(run_cli("validate " + (kScratch / "key.ini").string(), nullptr, &err) == 2);
  CHECK(err.find("lambda_mx") != std::string::npos);

  write_file(kScratch / "rng.ini",
             "[grid]\nlambda_min = 5\nlambda_max = 5\nbins = 4\n"
             "[scenario]\nmode = zero_d_relax\nt_end = 1\ndt = 0.1\n");
  CHECK(run_cli("validate " + (kScratch / "rng.ini").string(), nullptr, &err) == 2);
  CHECK(err.find("grid.lambda_max") != std::string::npos);
}

TEST_CASE("missing config files and malformed command lines exit with code 2") {
  reset_scratch();
  CHECK(run_cli("validate " + (kScratch / "no_such.ini").string()) == 2);
  CHECK(run_cli("run") == 2);          // missing required positional
  CHECK(run_cli("frobnicate x") == 2); // unknown subcommand
  write_file(kScratch / "ok.ini", kRelaxConfig);
  CHECK(run_cli("run " + (kScratch / "ok.ini").string() + " --mode sideways") == 2);
}

TEST_CASE("relaxation run produces a conservative, monotone series") {
  reset_scratch();
  write_file(kScratch / "relax.ini", kRelaxConfig);
  const std::string out_dir = (kScratch / "out").string();
  std::string out, err;
  int code = run_cli("run " + (kScratch / "relax.ini").string() + " --out " + out_dir,
                     &out, &err);
  CHECK(code == 0);
  CHECK(fs::exists(kScratch / "out" / "series.csv"));
  CHECK(fs::exists(kScratch / "out" / "report.txt"));
  CHECK(fs::exists(kScratch / "out" / "dist_4.csv"));

  std::string header;
  auto rows = read_csv_rows(kScratch / "out" / "series.csv", &header);
  CHECK(header == "t,mass_total,number_total,weighted_mass,deposited,leak_redirected");
  REQUIRE(rows.size() == 9);  // steps 0..80, stride 10
  CHECK(rows.front()[0] == 0.0);
  CHECK(rows.back()[0] == doctest::Approx(4.0));
  for (const auto& r : rows) {
    REQUIRE(r.size() == 6);
    CHECK(r[1] == doctest::Approx(2.0).epsilon(1e-12));  // mass_total
    CHECK(r[3] == doctest::Approx(r[1]).epsilon(1e-13)); // unweighted: equals mass
    CHECK(r[4] == 0.0);
    CHECK(r[5] == 0.0);
  }
  // the number column relaxes monotonically toward its equilibrium value
  const double first_step = rows[1][2] - rows[0][2];
  REQUIRE(first_step != 0.0);
  double prev = rows[0][2];
  double prev_diff = first_step;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double diff = rows[i][2] - prev;
    CHECK(diff * first_step > 0.0);          // consistent direction
    CHECK(std::abs(diff) <= std::abs(prev_diff) * 1.0000001);
    prev = rows[i][2];
    prev_diff = diff;
  }

  // the distribution snapshot covers the whole grid
  auto dist = read_csv_rows(kScratch / "out" / "dist_4.csv", &header);
  CHECK(header == "bin,lambda_lo,lambda_hi,rho");
  CHECK(dist.size() == 64);
  CHECK(dist.front()[1] == doctest::Approx(5.0));
  CHECK(dist.back()[2] == doctest::Approx(65.0));
}

TEST_CASE("aggregation-fragmentation run passes the full conservation audit") {
  reset_scratch();
  write_file(kScratch / "af.ini", kAggFragConfig);
  const std::string out_dir = (kScratch / "out").string();
  std::string out, err;
  int code = run_cli("run " + (kScratch / "af.ini").string() + " --out " + out_dir +
                         " --check-conservation",
                     &out, &err);
  CHECK(code == 0);
  CHECK(out.find("residual") != std::string::npos);

  auto rows = read_csv_rows(kScratch / "out" / "series.csv");
  REQUIRE(!rows.empty());
  const double m0 = rows.front()[1];
  for (const auto& r : rows) CHECK(r[1] == doctest::Approx(m0).epsilon(1e-10));
  const std::string report = slurp(kScratch / "out" / "report.txt");
  CHECK(report.find("conservation check (100 densities)") != std::string::npos);
}

TEST_CASE("uncorrected low-order tables trip the budget guard with exit code 3") {
  reset_scratch();
  std::string cfg = kAggFragConfig;
  cfg += "budget_tol = 1e-15\n";  // appended inside [output]
  write_file(kScratch / "af.ini", cfg);
  const std::string out_dir = (kScratch / "out").string();
  std::string out, err;
  int code = run_cli("run " + (kScratch / "af.ini").string() + " --out " + out_dir +
                         " --mode raw --quad-order 1",
                     &out, &err);
  CHECK(code == 3);
  CHECK(err.find("numerical failure") != std::string::npos);
  const std::string report = slurp(kScratch / "out" / "report.txt");
  CHECK(report.find("RUN FAILED") != std::string::npos);
}

TEST_CASE("column run conserves suspended plus deposited mass") {
  reset_scratch();
  write_file(kScratch / "col.ini", kColumnConfig);
  const std::string out_dir = (kScratch / "out").string();
  std::string out, err;
  int code = run_cli("run " + (kScratch / "col.ini").string() + " --out " + out_dir,
                     &out, &err);
  CHECK(code == 0);
  CHECK(fs::exists(kScratch / "out" / "dist_0.5.csv"));
  auto rows = read_csv_rows(kScratch / "out" / "series.csv");
  REQUIRE(rows.size() >= 2);
  const double b0 = rows.front()[1] + rows.front()[4];
  double dep_prev = -1.0;
  for (const auto& r : rows) {
    CHECK(r[1] + r[4] == doctest::Approx(b0).epsilon(1e-9));
    CHECK(r[4] >= dep_prev);
    dep_prev = r[4];
  }
  CHECK(rows.back()[4] > 0.0);  // something actually reached the bed
}

TEST_CASE("identical configuration and seed give byte-identical outputs") {
  reset_scratch();
  write_file(kScratch / "af.ini", kAggFragConfig);
  const std::string out_a = (kScratch / "a").string();
  const std::string out_b = (kScratch / "b").string();
  CHECK(run_cli("run " + (kScratch / "af.ini").string() + " --out " + out_a) == 0);
  CHECK(run_cli("run " + (kScratch / "af.ini").string() + " --out " + out_b) == 0);
  CHECK(slurp(kScratch / "a" / "series.csv") == slurp(kScratch / "b" / "series.csv"));
  CHECK(slurp(kScratch / "a" / "dist_1.csv") == slurp(kScratch / "b" / "dist_1.csv"));
  CHECK(slurp(kScratch / "a" / "report.txt") == slurp(kScratch / "b" / "report.txt"));
  CHECK(!slurp(kScratch / "a" / "series.csv").empty());
}
