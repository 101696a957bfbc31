#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#ifndef LEVYCAL_CLI
#error "LEVYCAL_CLI must name the command line binary"
#endif

namespace {

const std::string kDir = LEVYCAL_TEST_TMP;

int run(const std::string& args) {
    const std::string cmd = std::string(LEVYCAL_CLI) + " " + args + " > /dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

void write(const std::string& name, const std::string& text) { std::ofstream(kDir + "/" + name) << text; }

std::string read(const std::string& name) {
    std::ifstream f(kDir + "/" + name, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

const char* kMerton = R"({"model": {"sigma": 0.1, "lambda": 5, "eta": -0.1, "v": 0.2},
  "market": {"S": 1, "r": 0.06, "T": 0.25}})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help and usage errors") {
    CHECK(run("--help") == 0);
    CHECK(run("") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("coverage --workers") == 2);
}

TEST_CASE("price: oracle column and schema errors") {
    write("merton.json", kMerton);
    CHECK(run("price -c " + kDir + "/merton.json --oracle -o " + kDir + "/prices.csv") == 0);
    std::istringstream in(read("prices.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "strike,price,price_series");
    int rows = 0;
    while (std::getline(in, line)) {
        double k, a, b;
        char c1, c2;
        std::istringstream ls(line);
        ls >> k >> c1 >> a >> c2 >> b;
        CHECK(std::abs(a - b) <= 1e-6 * b);
        ++rows;
    }
    CHECK(rows == 21);
    write("nomat.json", R"({"model": {"sigma": 0.1, "lambda": 5, "eta": -0.1, "v": 0.2}, "market": {"S": 1, "r": 0.06}})");
    CHECK(run("price -c " + kDir + "/nomat.json") == 2);
    write("unknown.json", R"({"model": {"sigma": 0.1, "lambda": 5, "eta": -0.1, "v": 0.2, "rho": 1}})");
    CHECK(run("price -c " + kDir + "/unknown.json") == 2);
}

TEST_CASE("calibrate: reruns are byte-identical and two quotes are rejected") {
    write("merton.json", kMerton);
    CHECK(run("simulate -c " + kDir + "/merton.json --rep 3 -o " + kDir + "/q.csv") == 0);
    CHECK(run("calibrate -c " + kDir + "/merton.json -q " + kDir + "/q.csv -o " + kDir + "/run1") == 0);
    CHECK(run("calibrate -c " + kDir + "/merton.json -q " + kDir + "/q.csv -o " + kDir + "/run2") == 0);
    CHECK(read("run1.json") == read("run2.json"));
    CHECK(read("run1_mu.csv") == read("run2_mu.csv"));
    CHECK(read("run1_mu.csv").rfind("x,mu_hat,ci_lo,ci_hi\n", 0) == 0);
    write("two.csv", "#S=1,r=0.06,T=0.25\nstrike,kind,price,noise_sd\n0.9,call,0.12,0.001\n1.1,call,0.02,0.001\n");
    CHECK(run("calibrate -c " + kDir + "/merton.json -q " + kDir + "/two.csv -o " + kDir + "/bad") == 2);
    write("auto.json", R"({"calibration": {"policy": "oracle"}})");
    CHECK(run("calibrate -c " + kDir + "/auto.json -q " + kDir + "/q.csv -o " + kDir + "/bad") == 2);
}

TEST_CASE("voltest and volset") {
    write("merton.json", kMerton);
    CHECK(run("voltest -c " + kDir + "/merton.json --sigma0 0.1 -o " + kDir + "/vt.json") == 0);
    CHECK(read("vt.json").find("\"reject\"") != std::string::npos);
    CHECK(run("voltest -c " + kDir + "/merton.json --sigma0 0.5") == 2);
    CHECK(run("volset -c " + kDir + "/merton.json -o " + kDir + "/vs.json") == 0);
    CHECK(read("vs.json").find("\"intervals\"") != std::string::npos);
}

TEST_CASE("coverage output does not depend on the worker count") {
    write("fast.json", R"({"calibration": {"policy": "fixed", "U": 15},
      "inference": {"mu_n": 5, "check_convergence": false}, "simulation": {"reps": 6, "seed": 11}})");
    CHECK(run("coverage -c " + kDir + "/fast.json --workers 1 -o " + kDir + "/c1.json --trace " + kDir + "/t1.csv") == 0);
    CHECK(run("coverage -c " + kDir + "/fast.json --workers 3 -o " + kDir + "/c3.json --trace " + kDir + "/t3.csv") == 0);
    CHECK(read("c1.json") == read("c3.json"));
    CHECK(read("t1.csv") == read("t3.csv"));
    CHECK(read("t1.csv").rfind("rep,U,sigma2_hat,gamma_hat,lambda_hat,hit_sigma2,hit_gamma,hit_lambda\n", 0) == 0);
    CHECK(run("coverage -c " + kDir + "/fast.json --reps 0") == 2);
}

}
