#pragma once

#include "rkbs/admissibility.hpp"
#include "rkbs/kernels.hpp"
#include "rkbs/solvers.hpp"
#include "rkbs/errors.hpp"

#include <json.hpp>

#include <Eigen/Core>

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

namespace rkbs::io {

using json = nlohmann::json;

/// Malformed input file. The message names the source, row and column.
class FormatError : public UsageError {
public:
    using UsageError::UsageError;
};

// Non-finite reals are written as the strings "inf", "-inf", "nan".
json real_to_json(double v);
double real_from_json(const json& j);

json kernel_to_json(const OperatorKernel& kernel);
OperatorKernel kernel_from_json(const json& j);

json model_to_json(const FitModel& model);
FitModel model_from_json(const json& j);

json config_to_json(const CertificationConfig& cfg);
json witness_to_json(const LebesgueWitness& w);
json report_to_json(const OperatorKernel& kernel, const CertificationReport& report);
json scan_to_json(const OperatorKernel& kernel, const CertificationConfig& cfg, const ScanResult& scan);

/// Training data with header `x,y1,...,yn`.
struct TrainingData {
    std::vector<double> x;
    Eigen::MatrixXd y;  // one row per sample
};

TrainingData parse_training_csv(std::istream& in, const std::string& source);
TrainingData read_training_csv(const std::filesystem::path& path);

/// Query points: first column of each row; an optional non-numeric header
/// row is skipped; every row must have the same column count.
std::vector<double> parse_points_csv(std::istream& in, const std::string& source);
std::vector<double> read_points_csv(const std::filesystem::path& path);

/// n rows of n comma-separated reals.
Eigen::MatrixXd parse_matrix_csv(std::istream& in, const std::string& source);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

json read_json(const std::filesystem::path& path);

/// Shortest decimal form that round-trips the double exactly.
std::string format_real(double v);

std::string predictions_csv(const std::vector<double>& points, const Eigen::MatrixXd& values);
std::string scan_records_csv(const std::vector<CenterSetRecord>& records);

/// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace rkbs::io
