#include "rkbs/cli.hpp"

#include "rkbs/admissibility.hpp"
#include "rkbs/io.hpp"
#include "rkbs/solvers.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

namespace rkbs::cli {

namespace {

using io::json;

struct KernelOptions {
    std::string family = "tfamily";
    std::string kernel_file;
    double t = 1.0;
    double c1 = 1.0;
    double c2 = 1.0;
    double sigma = 1.0;
    std::string domain;
    std::string p = "2";
    std::string coupling = "identity:1";

    void attach(CLI::App* app) {
        app->add_option("--kernel", family, "kernel family: brownian, tfamily, wendland, exponential, combination, gaussian");
        app->add_option("--kernel-file", kernel_file, "kernel JSON (overrides the other kernel flags)");
        app->add_option("--t", t, "tfamily parameter in [-1, 1]");
        app->add_option("--c1", c1, "combination weight on the tfamily kernel");
        app->add_option("--c2", c2, "combination weight on the Wendland kernel");
        app->add_option("--sigma", sigma, "gaussian width");
        app->add_option("--domain", domain, "open interval lo,hi");
        app->add_option("--p", p, "group exponent (1, 2, any p > 1, or inf)");
        app->add_option("--coupling", coupling, "identity:n or a CSV file with an n x n SPD matrix");
    }

    OperatorKernel build() const {
        if (!kernel_file.empty()) {
            return io::kernel_from_json(io::read_json(kernel_file));
        }
        std::optional<Interval> dom;
        if (!domain.empty()) {
            const auto comma = domain.find(',');
            if (comma == std::string::npos) throw UsageError("--domain expects lo,hi");
            dom = Interval{parse_real(domain.substr(0, comma), "--domain"),
                           parse_real(domain.substr(comma + 1), "--domain")};
        }
        const KernelFamily fam = family_from_name(family);
        ScalarKernelSpec spec = [&] {
            switch (fam) {
                case KernelFamily::BrownianBridge: return ScalarKernelSpec::brownian_bridge(dom.value_or(Interval::unit()));
                case KernelFamily::Exponential: return ScalarKernelSpec::exponential(dom.value_or(Interval::real_line()));
                case KernelFamily::TFamily: return ScalarKernelSpec::t_family(t, dom.value_or(Interval::unit()));
                case KernelFamily::Wendland: return ScalarKernelSpec::wendland(dom.value_or(Interval::unit()));
                case KernelFamily::Combination:
                    return ScalarKernelSpec::combination(c1, c2, t, dom.value_or(Interval::unit()));
                case KernelFamily::Gaussian: return ScalarKernelSpec::gaussian(sigma, dom.value_or(Interval::unit()));
            }
            throw UsageError("unsupported kernel family");
        }();
        return OperatorKernel(std::move(spec), build_coupling(), parse_real(p, "--p"));
    }

    TaskCoupling build_coupling() const {
        const std::string prefix = "identity:";
        if (coupling.rfind(prefix, 0) == 0) {
            const std::string count = coupling.substr(prefix.size());
            std::size_t used = 0;
            long n = 0;
            try {
                n = std::stol(count, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != count.size() || n < 1) throw UsageError("--coupling identity:n needs a positive n");
            return TaskCoupling::identity(n);
        }
        return TaskCoupling(io::read_matrix_csv(coupling));
    }

    static double parse_real(const std::string& s, const char* flag) {
        if (s == "inf") return std::numeric_limits<double>::infinity();
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || s.empty()) throw UsageError(std::string(flag) + ": not a real number: '" + s + "'");
        return v;
    }
};

struct CertifyOptions {
    CertificationConfig cfg;
    std::string out;
    std::string csv;
    bool strict = false;

    void attach(CLI::App* app, bool with_strict) {
        app->add_option("--max-centers", cfg.max_centers, "largest center-set size")->check(CLI::PositiveNumber);
        app->add_option("--grid", cfg.grid_size, "query grid resolution")->check(CLI::PositiveNumber);
        app->add_option("--trials", cfg.trials, "random center sets per size")->check(CLI::PositiveNumber);
        app->add_option("--seed", cfg.seed, "base seed");
        app->add_option("--tolerance", cfg.tolerance, "slack above the bound 1")->check(CLI::PositiveNumber);
        app->add_option("--out", out, "JSON report path (stdout if omitted)");
        app->add_option("--csv", csv, "optional CSV of (m, trial, worst_lambda)");
        if (with_strict) app->add_flag("--strict", strict, "exit 2 when A4 fails");
    }
};

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

void stamp(json& j, bool deterministic) {
    if (!j.contains("meta")) j["meta"] = json::object();
    j["meta"]["tool"] = "rkbs";
    if (!deterministic) j["meta"]["generated_at"] = timestamp_utc();
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
    } else {
        io::write_file_atomic(path, content);
    }
}

BlockVector data_blocks(const io::TrainingData& data, const OperatorKernel& kernel) {
    if (data.y.cols() != kernel.tasks()) {
        throw ShapeError("data has " + std::to_string(data.y.cols()) + " value columns but the coupling has n = " +
                         std::to_string(kernel.tasks()));
    }
    return BlockVector(data.y, kernel.p);
}

std::vector<double> parse_list(const std::string& s, const char* flag) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(KernelOptions::parse_real(item, flag));
    }
    return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Group-lasso kernel interpolation, learning and admissibility certification"};
    app.require_subcommand(1);
    app.fallthrough();
    bool deterministic = false;
    app.add_flag("--deterministic", deterministic, "omit timestamps so identical runs give identical bytes");

    KernelOptions kernel_opts_interp, kernel_opts_fit, kernel_opts_cert, kernel_opts_scan, kernel_opts_pursuit;

    auto* interpolate = app.add_subcommand("interpolate", "exact minimal-norm interpolant");
    std::string interp_data, interp_out;
    kernel_opts_interp.attach(interpolate);
    interpolate->add_option("--data", interp_data, "training CSV x,y1,...,yn")->required();
    interpolate->add_option("--out", interp_out, "model JSON path");

    auto* fit = app.add_subcommand("fit", "regularized group-lasso learning");
    std::string fit_data, fit_out, fit_loss = "squared", fit_solver = "auto", fit_path_lambdas, fit_path_out;
    LearnConfig learn;
    bool no_restart = false;
    std::uint64_t fit_seed = 0;
    kernel_opts_fit.attach(fit);
    fit->add_option("--data", fit_data, "training CSV x,y1,...,yn")->required();
    fit->add_option("--out", fit_out, "model JSON path");
    fit->add_option("--lambda", learn.lambda, "regularization weight")->required();
    fit->add_option("--loss", fit_loss, "squared or absolute");
    fit->add_option("--solver", fit_solver, "auto, fista or admm");
    fit->add_option("--max-iters", learn.max_iters, "iteration cap");
    fit->add_option("--tol", learn.tol, "stopping tolerance");
    fit->add_flag("--no-restart", no_restart, "disable adaptive FISTA restart");
    fit->add_option("--seed", fit_seed, "recorded in the model metadata");
    fit->add_option("--path-lambdas", fit_path_lambdas, "comma-separated lambda grid for a regularization path");
    fit->add_option("--path-out", fit_path_out, "CSV of (lambda, norm, objective) for --path-lambdas");

    auto* predict_cmd = app.add_subcommand("predict", "evaluate a saved model");
    std::string pred_model, pred_points, pred_out;
    predict_cmd->add_option("--model", pred_model, "model JSON")->required();
    predict_cmd->add_option("--points", pred_points, "CSV whose first column holds query points")->required();
    predict_cmd->add_option("--out", pred_out, "predictions CSV path");

    auto* certify_cmd = app.add_subcommand("certify", "numeric A1-A4 certification");
    CertifyOptions cert_opts;
    kernel_opts_cert.attach(certify_cmd);
    cert_opts.attach(certify_cmd, true);

    auto* scan_cmd = app.add_subcommand("lebesgue-scan", "Lebesgue constant supremum search");
    CertifyOptions scan_opts;
    kernel_opts_scan.attach(scan_cmd);
    scan_opts.attach(scan_cmd, false);

    auto* pursuit = app.add_subcommand("pursuit", "group basis pursuit over an enlarged center set");
    std::string pursuit_data, pursuit_extra, pursuit_out;
    AdmmOptions admm;
    kernel_opts_pursuit.attach(pursuit);
    pursuit->add_option("--data", pursuit_data, "constraint CSV x,y1,...,yn")->required();
    pursuit->add_option("--extra-centers", pursuit_extra, "comma-separated additional centers");
    pursuit->add_option("--out", pursuit_out, "model JSON path");
    pursuit->add_option("--tol", admm.tol, "ADMM residual tolerance");
    pursuit->add_option("--max-iters", admm.max_iters, "ADMM iteration cap");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    }

    try {
        if (interpolate->parsed()) {
            const OperatorKernel kernel = kernel_opts_interp.build();
            const io::TrainingData data = io::read_training_csv(interp_data);
            const BlockVector y = data_blocks(data, kernel);
            FitModel model = min_norm_interpolant(kernel, data.x, y);
            json j = io::model_to_json(model);
            stamp(j, deterministic);
            emit(interp_out, j.dump(2) + "\n", out);
        } else if (fit->parsed()) {
            const OperatorKernel kernel = kernel_opts_fit.build();
            const io::TrainingData data = io::read_training_csv(fit_data);
            const BlockVector y = data_blocks(data, kernel);
            learn.loss = loss_from_name(fit_loss);
            learn.restart = !no_restart;
            if (fit_solver != "auto" && fit_solver != "fista" && fit_solver != "admm") {
                throw UsageError("--solver must be auto, fista or admm");
            }
            if (fit_solver == "fista" && learn.loss == Loss::Absolute) {
                throw UsageError("FISTA needs the squared loss");
            }
            const std::vector<double> path = parse_list(fit_path_lambdas, "--path-lambdas");
            if (!path.empty() && fit_path_out.empty()) throw UsageError("--path-lambdas needs --path-out");
            learn.validate();
            auto solve = [&](const LearnConfig& cfg) {
                return fit_solver == "admm" ? fit_regularized_admm(kernel, data.x, y, cfg)
                                            : fit_regularized(kernel, data.x, y, cfg);
            };
            if (!path.empty()) {
                std::ostringstream csv;
                csv << "lambda,norm,objective\n";
                for (double lam : path) {
                    LearnConfig cfg = learn;
                    cfg.lambda = lam;
                    const FitModel m = solve(cfg);
                    csv << io::format_real(lam) << ',' << io::format_real(m.norm_lp1) << ','
                        << io::format_real(m.meta.objective) << '\n';
                }
                io::write_file_atomic(fit_path_out, csv.str());
            }
            FitModel model = solve(learn);
            model.meta.seed = fit_seed;
            json j = io::model_to_json(model);
            stamp(j, deterministic);
            emit(fit_out, j.dump(2) + "\n", out);
        } else if (predict_cmd->parsed()) {
            const FitModel model = io::model_from_json(io::read_json(pred_model));
            const std::vector<double> pts = io::read_points_csv(pred_points);
            for (double q : pts) model.kernel.scalar.check_in_domain(q);
            Eigen::MatrixXd values(static_cast<Eigen::Index>(pts.size()), model.kernel.tasks());
            for (std::size_t r = 0; r < pts.size(); ++r) {
                values.row(static_cast<Eigen::Index>(r)) = predict(model, pts[r]).transpose();
            }
            emit(pred_out, io::predictions_csv(pts, values), out);
        } else if (certify_cmd->parsed()) {
            const OperatorKernel kernel = kernel_opts_cert.build();
            cert_opts.cfg.validate();
            const CertificationReport report = certify(kernel, cert_opts.cfg);
            json j = io::report_to_json(kernel, report);
            stamp(j, deterministic);
            emit(cert_opts.out, j.dump(2) + "\n", out);
            if (!cert_opts.csv.empty()) io::write_file_atomic(cert_opts.csv, io::scan_records_csv(report.records));
            if (cert_opts.strict && !report.verdict.a4) {
                err << "A4 bound violated: worst Lebesgue value " << io::format_real(report.a4.worst.value) << "\n";
                return kMathFailure;
            }
        } else if (scan_cmd->parsed()) {
            const OperatorKernel kernel = kernel_opts_scan.build();
            scan_opts.cfg.validate();
            const ScanResult scan = lebesgue_scan(kernel, scan_opts.cfg);
            json j = io::scan_to_json(kernel, scan_opts.cfg, scan);
            stamp(j, deterministic);
            emit(scan_opts.out, j.dump(2) + "\n", out);
            if (!scan_opts.csv.empty()) io::write_file_atomic(scan_opts.csv, io::scan_records_csv(scan.records));
        } else if (pursuit->parsed()) {
            const OperatorKernel kernel = kernel_opts_pursuit.build();
            const io::TrainingData data = io::read_training_csv(pursuit_data);
            const BlockVector y = data_blocks(data, kernel);
            std::vector<double> centers = data.x;
            const std::vector<double> extra = parse_list(pursuit_extra, "--extra-centers");
            centers.insert(centers.end(), extra.begin(), extra.end());
            FitModel model = group_basis_pursuit(kernel, centers, data.x, y, kernel.p, admm);
            json j = io::model_to_json(model);
            stamp(j, deterministic);
            emit(pursuit_out, j.dump(2) + "\n", out);
        }
    } catch (const MathError& e) {
        err << "error: " << e.what() << "\n";
        return kMathFailure;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kSuccess;
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace rkbs::cli
