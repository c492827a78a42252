#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "sqrtpen/basis.hpp"
#include "sqrtpen/dataset.hpp"
#include "sqrtpen/dyadic.hpp"
#include "sqrtpen/experiments.hpp"
#include "sqrtpen/solver.hpp"
#include "sqrtpen/theory.hpp"

namespace sqrtpen {

/// A file does not match the expected layout.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Provenance written into every output file.
struct OutputStamp {
  std::string config_hash;
  std::uint64_t seed = 0;
};

/// %.17g; "nan", "inf" and "-inf" for non-finite values.
std::string format_double(double v);

/// JSON text with every floating-point number printed as %.17g (null when not
/// finite), objects in key order, two-space indent and a trailing newline.
std::string dump_json(const nlohmann::json& j);

/// Leading "# config_hash=<hash>,seed=<seed>" line used by the CSV writers.
std::string stamp_line(const OutputStamp& stamp);

/// Header s_1,...,s_d,t,y then one row per sample. Lines starting with '#' are
/// skipped on reading; d is taken from the header.
void write_dataset_csv(std::ostream& os, const Dataset& data, const OutputStamp* stamp = nullptr);
Dataset read_dataset_csv(std::istream& is);

/// Header "d=<d>,depth=<depth>" then one cell value per line in row-major order.
void write_edge_csv(std::ostream& os, const DyadicTable& table, const OutputStamp* stamp = nullptr);
DyadicTable read_edge_csv(std::istream& is);

/// {"d": d, "L": L, "blocks": [[level 1 values], ..., [level L values]]}.
nlohmann::json coefficients_to_json(const CoefficientVector& alpha);
CoefficientVector coefficients_from_json(const nlohmann::json& j, const BasisSystem& basis);

nlohmann::json dataset_meta_json(const Dataset& data);
nlohmann::json fit_result_to_json(const FitResult& fit, const PenaltyConfig& pen, const SolverConfig& solver);
nlohmann::json rate_table_to_json(const RateTable& table);
void write_rate_table_csv(std::ostream& os, const RateTable& table, const OutputStamp* stamp = nullptr);
nlohmann::json check_report_to_json(const CheckReport& rep);
nlohmann::json probe_report_to_json(const ProbeReport& rep);
nlohmann::json assumption_b_to_json(const AssumptionBReport& rep);

/// Writes the whole string, throwing std::runtime_error when the file cannot be written.
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace sqrtpen
