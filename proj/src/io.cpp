#include "rkbs/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

namespace rkbs::io {

json real_to_json(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double real_from_json(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw FormatError("expected a real number, got " + j.dump());
}

namespace {

json matrix_rows(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(real_to_json(m(i, k)));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_rows(const json& rows, Eigen::Index expected_cols, const char* what) {
    if (!rows.is_array()) throw FormatError(std::string(what) + " must be an array of rows");
    const auto m = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd out(m, expected_cols);
    for (Eigen::Index i = 0; i < m; ++i) {
        const json& row = rows[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != expected_cols) {
            throw FormatError(std::string(what) + " row " + std::to_string(i) + " must have " +
                              std::to_string(expected_cols) + " entries");
        }
        for (Eigen::Index k = 0; k < expected_cols; ++k) {
            out(i, k) = real_from_json(row[static_cast<std::size_t>(k)]);
        }
    }
    return out;
}

json reals(const std::vector<double>& v) {
    json arr = json::array();
    for (double d : v) arr.push_back(real_to_json(d));
    return arr;
}

std::vector<double> reals_from(const json& j, const char* what) {
    if (!j.is_array()) throw FormatError(std::string(what) + " must be an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& e : j) out.push_back(real_from_json(e));
    return out;
}

const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw FormatError(std::string("missing field '") + key + "'");
    }
    return j.at(key);
}

double real_or(const json& j, const char* key, double fallback) {
    return j.contains(key) ? real_from_json(j.at(key)) : fallback;
}

}  // namespace

json kernel_to_json(const OperatorKernel& kernel) {
    const ScalarKernelSpec& g = kernel.scalar;
    json j;
    j["family"] = std::string(family_name(g.family()));
    switch (g.family()) {
        case KernelFamily::TFamily:
        case KernelFamily::BrownianBridge:
            j["t"] = g.t();
            break;
        case KernelFamily::Combination:
            j["t"] = g.t();
            j["c1"] = g.c1();
            j["c2"] = g.c2();
            break;
        case KernelFamily::Gaussian:
            j["sigma"] = g.sigma();
            break;
        case KernelFamily::Exponential:
        case KernelFamily::Wendland:
            break;
    }
    j["domain"] = json::array({real_to_json(g.domain().lo), real_to_json(g.domain().hi)});
    j["p"] = real_to_json(kernel.p);
    j["coupling"] = {{"n", kernel.coupling.n()}, {"A", matrix_rows(kernel.coupling.matrix())}};
    return j;
}

OperatorKernel kernel_from_json(const json& j) {
    const KernelFamily family = family_from_name(field(j, "family").get<std::string>());
    Interval domain;
    bool has_domain = false;
    if (j.contains("domain")) {
        const auto d = reals_from(j.at("domain"), "domain");
        if (d.size() != 2) throw FormatError("domain must be [lo, hi]");
        domain = {d[0], d[1]};
        has_domain = true;
    }
    ScalarKernelSpec spec = [&] {
        switch (family) {
            case KernelFamily::BrownianBridge:
                return ScalarKernelSpec::brownian_bridge(has_domain ? domain : Interval::unit());
            case KernelFamily::Exponential:
                return ScalarKernelSpec::exponential(has_domain ? domain : Interval::real_line());
            case KernelFamily::TFamily:
                return ScalarKernelSpec::t_family(real_from_json(field(j, "t")), has_domain ? domain : Interval::unit());
            case KernelFamily::Wendland:
                return ScalarKernelSpec::wendland(has_domain ? domain : Interval::unit());
            case KernelFamily::Combination:
                return ScalarKernelSpec::combination(real_from_json(field(j, "c1")), real_from_json(field(j, "c2")),
                                                     real_or(j, "t", 1.0), has_domain ? domain : Interval::unit());
            case KernelFamily::Gaussian:
                return ScalarKernelSpec::gaussian(real_or(j, "sigma", 1.0), has_domain ? domain : Interval::unit());
        }
        throw FormatError("unsupported kernel family");
    }();
    const double p = real_or(j, "p", 2.0);
    if (!j.contains("coupling")) {
        return OperatorKernel(spec, TaskCoupling::identity(1), p);
    }
    const json& c = j.at("coupling");
    const auto n = field(c, "n").get<Eigen::Index>();
    if (n < 1) throw FormatError("coupling.n must be >= 1");
    Eigen::MatrixXd a = c.contains("A") ? matrix_from_rows(c.at("A"), n, "coupling.A")
                                        : Eigen::MatrixXd::Identity(n, n).eval();
    if (a.rows() != n) throw FormatError("coupling.A must have n rows");
    return OperatorKernel(spec, TaskCoupling(std::move(a)), p);
}

json model_to_json(const FitModel& model) {
    json j;
    j["kernel"] = kernel_to_json(model.kernel);
    j["centers"] = reals(model.centers);
    j["coeffs"] = matrix_rows(model.coeffs.matrix());
    j["p"] = real_to_json(model.coeffs.p());
    j["norm_lp1"] = real_to_json(model.norm_lp1);
    j["meta"] = {
        {"solver", model.meta.solver},
        {"iterations", model.meta.iterations},
        {"primal_residual", real_to_json(model.meta.primal_residual)},
        {"dual_residual", real_to_json(model.meta.dual_residual)},
        {"objective", real_to_json(model.meta.objective)},
        {"lambda", real_to_json(model.meta.lambda)},
        {"loss", model.meta.loss},
        {"seed", model.meta.seed},
    };
    return j;
}

FitModel model_from_json(const json& j) {
    OperatorKernel kernel = kernel_from_json(field(j, "kernel"));
    std::vector<double> centers = reals_from(field(j, "centers"), "centers");
    const double p = real_or(j, "p", kernel.p);
    Eigen::MatrixXd coeffs = matrix_from_rows(field(j, "coeffs"), kernel.tasks(), "coeffs");
    if (static_cast<std::size_t>(coeffs.rows()) != centers.size()) {
        throw FormatError("coeffs must have one block per center");
    }
    check_centers(kernel.scalar, centers);
    BlockVector c(std::move(coeffs), p);
    FitModel model{std::move(kernel), std::move(centers), std::move(c), 0.0, {}};
    model.norm_lp1 = lp1_norm(model.coeffs);
    if (j.contains("meta")) {
        const json& m = j.at("meta");
        model.meta.solver = m.value("solver", "");
        model.meta.iterations = m.value("iterations", std::size_t{0});
        model.meta.primal_residual = real_or(m, "primal_residual", 0.0);
        model.meta.dual_residual = real_or(m, "dual_residual", 0.0);
        model.meta.objective = real_or(m, "objective", 0.0);
        model.meta.lambda = real_or(m, "lambda", 0.0);
        model.meta.loss = m.value("loss", "");
        model.meta.seed = m.value("seed", std::uint64_t{0});
    }
    return model;
}

json config_to_json(const CertificationConfig& cfg) {
    return {{"max_centers", cfg.max_centers},
            {"grid_size", cfg.grid_size},
            {"trials", cfg.trials},
            {"seed", cfg.seed},
            {"tolerance", real_to_json(cfg.tolerance)}};
}

json witness_to_json(const LebesgueWitness& w) {
    return {{"worst", real_to_json(w.value)}, {"centers", reals(w.centers)}, {"query", real_to_json(w.query)}};
}

json report_to_json(const OperatorKernel& kernel, const CertificationReport& report) {
    json j;
    j["kernel"] = kernel_to_json(kernel);
    j["config"] = config_to_json(report.config);
    json singular = json::array();
    for (const auto& s : report.a1.singular_sets) singular.push_back(reals(s));
    j["a1"] = {{"worst_cond", real_to_json(report.a1.worst_condition)},
               {"center_sets", report.a1.center_sets},
               {"cholesky_failures", report.a1.cholesky_failures},
               {"singular_sets", std::move(singular)}};
    j["a2"] = {{"kappa", real_to_json(report.a2.kappa)},
               {"scalar_sup", real_to_json(report.a2.scalar_sup)},
               {"coupling_norm", real_to_json(report.a2.coupling_norm)}};
    j["a3"] = {{"status", std::string(a3_status_name(report.verdict.a3))}};
    j["a4"] = witness_to_json(report.a4.worst);
    j["a4"]["center_sets"] = report.a4.center_sets;
    j["a4"]["queries_per_set"] = report.a4.queries_per_set;
    j["a4"]["bound"] = real_to_json(1.0 + report.config.tolerance);
    const auto pf = [](bool ok) { return ok ? "pass" : "fail"; };
    j["verdict"] = {{"a1", pf(report.verdict.a1)},
                    {"a2", pf(report.verdict.a2)},
                    {"a3", std::string(a3_status_name(report.verdict.a3))},
                    {"a4", pf(report.verdict.a4)},
                    {"all", pf(report.verdict.all_pass())}};
    return j;
}

json scan_to_json(const OperatorKernel& kernel, const CertificationConfig& cfg, const ScanResult& scan) {
    json j;
    j["kernel"] = kernel_to_json(kernel);
    j["config"] = config_to_json(cfg);
    j["a4"] = witness_to_json(scan.worst);
    j["a4"]["center_sets"] = scan.records.size();
    j["verdict"] = {{"a4", scan.worst.value <= 1.0 + cfg.tolerance ? "pass" : "fail"}};
    return j;
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return cells;
}

bool parse_real(const std::string& cell, double& out) {
    if (cell.empty()) return false;
    const char* first = cell.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), out);
    return ec == std::errc() && ptr == cell.data() + cell.size() && std::isfinite(out);
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

// Reads non-empty lines. Cells must be finite decimal reals; `row` in errors
// is the 1-based line number in the file.
Table parse_table(std::istream& in, const std::string& source, bool header_required, bool header_optional) {
    Table table;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_row(line);
        if (first) {
            first = false;
            double probe = 0.0;
            const bool numeric = parse_real(cells.front(), probe);
            if (header_required || (header_optional && !numeric)) {
                table.header = std::move(cells);
                width = table.header.size();
                continue;
            }
        }
        if (width == 0) width = cells.size();
        if (cells.size() != width) {
            // The first column that is missing or unexpected.
            const std::size_t column = std::min(width, cells.size()) + 1;
            throw FormatError(source + ": row " + std::to_string(line_no) + ", column " + std::to_string(column) +
                              ": expected " + std::to_string(width) + " columns, found " +
                              std::to_string(cells.size()));
        }
        std::vector<double> values(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (!parse_real(cells[c], values[c])) {
                throw FormatError(source + ": row " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                                  ": not a finite real: '" + cells[c] + "'");
            }
        }
        table.rows.push_back(std::move(values));
    }
    return table;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    return in;
}

}  // namespace

TrainingData parse_training_csv(std::istream& in, const std::string& source) {
    const Table table = parse_table(in, source, true, false);
    if (table.header.size() < 2 || table.header.front() != "x") {
        throw FormatError(source + ": header must be x,y1,...,yn");
    }
    for (std::size_t c = 1; c < table.header.size(); ++c) {
        if (table.header[c] != "y" + std::to_string(c)) {
            throw FormatError(source + ": row 1, column " + std::to_string(c + 1) + ": expected header 'y" +
                              std::to_string(c) + "', found '" + table.header[c] + "'");
        }
    }
    if (table.rows.empty()) throw FormatError(source + ": no data rows");
    TrainingData data;
    const auto n = static_cast<Eigen::Index>(table.header.size() - 1);
    data.y.resize(static_cast<Eigen::Index>(table.rows.size()), n);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        data.x.push_back(table.rows[r][0]);
        for (Eigen::Index k = 0; k < n; ++k) {
            data.y(static_cast<Eigen::Index>(r), k) = table.rows[r][static_cast<std::size_t>(k + 1)];
        }
    }
    return data;
}

TrainingData read_training_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_training_csv(in, path.string());
}

std::vector<double> parse_points_csv(std::istream& in, const std::string& source) {
    const Table table = parse_table(in, source, false, true);
    if (table.rows.empty()) throw FormatError(source + ": no points");
    std::vector<double> pts;
    pts.reserve(table.rows.size());
    for (const auto& row : table.rows) pts.push_back(row.front());
    return pts;
}

std::vector<double> read_points_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_points_csv(in, path.string());
}

Eigen::MatrixXd parse_matrix_csv(std::istream& in, const std::string& source) {
    const Table table = parse_table(in, source, false, false);
    const std::size_t n = table.rows.size();
    if (n == 0) throw FormatError(source + ": empty matrix");
    Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        if (table.rows[r].size() != n) {
            throw FormatError(source + ": matrix must be square (" + std::to_string(n) + " rows, " +
                              std::to_string(table.rows[r].size()) + " columns)");
        }
        for (std::size_t c = 0; c < n; ++c) {
            a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = table.rows[r][c];
        }
    }
    return a;
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_matrix_csv(in, path.string());
}

json read_json(const std::filesystem::path& path) {
    auto in = open_input(path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::string format_real(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

std::string predictions_csv(const std::vector<double>& points, const Eigen::MatrixXd& values) {
    std::ostringstream os;
    os << "x";
    for (Eigen::Index k = 0; k < values.cols(); ++k) os << ",y" << (k + 1);
    os << '\n';
    for (std::size_t r = 0; r < points.size(); ++r) {
        os << format_real(points[r]);
        for (Eigen::Index k = 0; k < values.cols(); ++k) {
            os << ',' << format_real(values(static_cast<Eigen::Index>(r), k));
        }
        os << '\n';
    }
    return os.str();
}

std::string scan_records_csv(const std::vector<CenterSetRecord>& records) {
    std::ostringstream os;
    os << "m,trial,worst_lambda\n";
    for (const auto& rec : records) {
        os << rec.m << ',' << rec.trial << ',' << (rec.singular ? std::string("nan") : format_real(rec.worst_lebesgue))
           << '\n';
    }
    return os.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw FormatError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw FormatError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

}  // namespace rkbs::io
