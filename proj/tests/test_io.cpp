#include "oracles.hpp"

#include "rkbs/io.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace rkbs;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const io::FormatError& e) {
        return e.what();
    }
    return {};
}

io::TrainingData training(const std::string& text) {
    std::istringstream in(text);
    return io::parse_training_csv(in, "train.csv");
}

}  // namespace

TEST_CASE("kernel JSON round trip") {
    std::mt19937_64 rng(51);
    const std::vector<OperatorKernel> kernels{
        {ScalarKernelSpec::t_family(0.7), TaskCoupling(Eigen::Matrix2d{{2, 0.5}, {0.5, 1}}), 2.0},
        {ScalarKernelSpec::brownian_bridge(Interval{0.1, 0.9}), TaskCoupling::identity(1), 1.0},
        {ScalarKernelSpec::exponential(), TaskCoupling(oracle::random_spd(3, rng)), INFINITY},
        {ScalarKernelSpec::exponential(Interval{-2.0, 2.0}), TaskCoupling::identity(2), 1.5},
        {ScalarKernelSpec::wendland(), TaskCoupling::identity(1), 2.0},
        {ScalarKernelSpec::combination(1.0, 2.5, -0.5), TaskCoupling::identity(2), 2.0},
        {ScalarKernelSpec::gaussian(0.123456789), TaskCoupling::identity(1), 2.0},
    };
    for (const auto& k : kernels) {
        const io::json j = io::kernel_to_json(k);
        const OperatorKernel back = io::kernel_from_json(io::json::parse(j.dump()));
        CHECK(back.scalar.family() == k.scalar.family());
        CHECK(back.scalar.t() == k.scalar.t());
        CHECK(back.scalar.c1() == k.scalar.c1());
        CHECK(back.scalar.c2() == k.scalar.c2());
        CHECK(back.scalar.sigma() == k.scalar.sigma());
        CHECK(back.scalar.domain().lo == k.scalar.domain().lo);
        CHECK(back.scalar.domain().hi == k.scalar.domain().hi);
        CHECK(back.p == k.p);
        CHECK(back.coupling.matrix() == k.coupling.matrix());
        CHECK(io::kernel_to_json(back) == j);
    }
}

TEST_CASE("documented kernel JSON parses") {
    const auto j = io::json::parse(
        R"({"family":"tfamily","t":0.7,"domain":[0,1],"p":2,"coupling":{"n":2,"A":[[2,0.5],[0.5,1]]}})");
    const OperatorKernel k = io::kernel_from_json(j);
    CHECK(k.scalar.family() == KernelFamily::TFamily);
    CHECK(k.scalar.t() == 0.7);
    CHECK(k.tasks() == 2);
    CHECK(k.coupling.matrix()(0, 1) == 0.5);

    CHECK_THROWS_AS(io::kernel_from_json(io::json::parse(R"({"t":0.7})")), io::FormatError);
    CHECK_THROWS_AS(io::kernel_from_json(io::json::parse(
                        R"({"family":"tfamily","t":0.7,"domain":[0,1,2],"p":2,"coupling":{"n":1}})")),
                    io::FormatError);
    CHECK_THROWS_AS(io::kernel_from_json(io::json::parse(R"({"family":"tfamily","t":3,"p":2})")), UsageError);
}

TEST_CASE("model JSON round trip preserves predictions bitwise") {
    std::mt19937_64 rng(52);
    const OperatorKernel k(ScalarKernelSpec::combination(1.0, 1.0, 0.3), TaskCoupling(oracle::random_spd(2, rng)), 1.0);
    const auto x = oracle::random_sites(5, 0.0, 1.0, 0.05, rng);
    FitModel model = min_norm_interpolant(k, x, BlockVector(oracle::random_matrix(5, 2, rng), 1.0));
    model.meta.seed = 99;
    const FitModel back = io::model_from_json(io::json::parse(io::model_to_json(model).dump(2)));
    CHECK(back.centers == model.centers);
    CHECK(back.coeffs.matrix() == model.coeffs.matrix());
    CHECK(back.norm_lp1 == model.norm_lp1);
    CHECK(back.meta.solver == "exact");
    CHECK(back.meta.seed == 99);
    std::uniform_real_distribution<double> u(0.001, 0.999);
    for (int i = 0; i < 100; ++i) {
        const double q = u(rng);
        const Eigen::VectorXd a = predict(model, q), b = predict(back, q);
        CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * 2) == 0);
    }
}

TEST_CASE("non-finite reals") {
    CHECK(io::real_to_json(INFINITY) == "inf");
    CHECK(io::real_to_json(-INFINITY) == "-inf");
    CHECK(io::real_to_json(std::nan("")) == "nan");
    CHECK(io::real_from_json("inf") == INFINITY);
    CHECK(std::isnan(io::real_from_json("nan")));
    CHECK(io::real_from_json(2.5) == 2.5);
    CHECK_THROWS_AS(io::real_from_json("two"), io::FormatError);
}

TEST_CASE("format_real round trips") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> ex(-300, 300);
    for (int i = 0; i < 10000; ++i) {
        const double v = std::ldexp(mant(rng), ex(rng));
        CHECK(std::stod(io::format_real(v)) == v);
    }
    CHECK(io::format_real(4.0) == "4");
    CHECK(io::format_real(0.1) == "0.1");
}

TEST_CASE("training CSV") {
    const auto d = training("x,y1,y2\n0.1,1,2\n\n0.5, -3.5e-1 ,4\n");
    REQUIRE(d.x.size() == 2);
    CHECK(d.x[1] == 0.5);
    CHECK(d.y(1, 0) == -0.35);
    CHECK(d.y(1, 1) == 4.0);

    CHECK(error_of([] { training("x,y1\n0.1,1\n0.2,1,3\n"); }).find("row 3, column 3") != std::string::npos);
    CHECK(error_of([] { training("x,y1\n0.1,1\n0.2\n"); }).find("row 3, column 2") != std::string::npos);
    const std::string bad = error_of([] { training("x,y1,y2\n0.1,1,2\n0.2,abc,3\n"); });
    CHECK(bad.find("train.csv") != std::string::npos);
    CHECK(bad.find("row 3, column 2") != std::string::npos);
    CHECK(error_of([] { training("x,y1\n0.1,nan\n"); }).find("row 2, column 2") != std::string::npos);
    CHECK(error_of([] { training("x,y2\n0.1,1\n"); }).find("row 1, column 2") != std::string::npos);
    CHECK_FALSE(error_of([] { training("t,y1\n0.1,1\n"); }).empty());
    CHECK_FALSE(error_of([] { training("x,y1\n"); }).empty());
}

TEST_CASE("points CSV") {
    std::istringstream with_header("x\n0.1\n0.2\n");
    CHECK(io::parse_points_csv(with_header, "p") == std::vector<double>{0.1, 0.2});
    std::istringstream bare("0.3,9\n0.4,8\n");
    CHECK(io::parse_points_csv(bare, "p") == std::vector<double>{0.3, 0.4});
    std::istringstream ragged("0.3,9\n0.4\n");
    CHECK_THROWS_AS(io::parse_points_csv(ragged, "p"), io::FormatError);
    std::istringstream empty("x\n");
    CHECK_THROWS_AS(io::parse_points_csv(empty, "p"), io::FormatError);
}

TEST_CASE("matrix CSV") {
    std::istringstream ok("2,0.5\n0.5,1\n");
    const Eigen::MatrixXd a = io::parse_matrix_csv(ok, "a.csv");
    CHECK(a(0, 1) == 0.5);
    CHECK(a.rows() == 2);
    std::istringstream wide("1,2,3\n4,5,6\n");
    CHECK_THROWS_AS(io::parse_matrix_csv(wide, "a.csv"), io::FormatError);
}

TEST_CASE("CSV emitters") {
    const std::vector<double> pts{0.25, 0.5};
    const Eigen::MatrixXd v{{1.0, 0.1}, {2.0, -3.0}};
    CHECK(io::predictions_csv(pts, v) == "x,y1,y2\n0.25,1,0.1\n0.5,2,-3\n");
    CenterSetRecord r;
    r.m = 2;
    r.trial = 7;
    r.worst_lebesgue = 1.5;
    CHECK(io::scan_records_csv({r}) == "m,trial,worst_lambda\n2,7,1.5\n");
}

TEST_CASE("atomic write leaves no temp file") {
    const fs::path dir = fs::temp_directory_path() / "rkbs_io_test";
    fs::create_directories(dir);
    const fs::path target = dir / "out.json";
    io::write_file_atomic(target, "first");
    io::write_file_atomic(target, "second");
    std::ifstream in(target);
    std::string content;
    std::getline(in, content);
    CHECK(content == "second");
    CHECK_FALSE(fs::exists(dir / "out.json.tmp"));
    fs::remove_all(dir);
}

TEST_CASE("report JSON layout") {
    const OperatorKernel k(ScalarKernelSpec::wendland(), TaskCoupling::identity(1), 2.0);
    CertificationConfig cfg;
    cfg.max_centers = 2;
    cfg.trials = 3;
    cfg.grid_size = 16;
    const io::json j = io::report_to_json(k, certify(k, cfg));
    for (const char* key : {"kernel", "config", "a1", "a2", "a3", "a4", "verdict"}) CHECK(j.contains(key));
    CHECK(j["a1"].contains("worst_cond"));
    CHECK(j["a2"].contains("kappa"));
    CHECK(j["a4"]["centers"].is_array());
    CHECK(j["a4"].contains("query"));
    CHECK(j["verdict"]["all"] == "pass");
}
