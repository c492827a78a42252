#include "sqrtpen/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include <fmt/format.h>
#include <fmt/printf.h>

namespace sqrtpen {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::sprintf("%.17g", v);
}

namespace {

void dump_value(const json& j, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner + json(it.key()).dump() + ": ";
        dump_value(it.value(), indent + 1, out);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
      out += flat ? "[" : "[\n";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat ? ", " : ",\n";
        first = false;
        if (!flat) out += inner;
        dump_value(e, indent + 1, out);
      }
      out += flat ? "]" : "\n" + pad + "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? fmt::sprintf("%.17g", v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

double parse_number(const std::string& field, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size() || errno == ERANGE) {
    throw SchemaError(fmt::format("line {}: '{}' is not a number", line, field));
  }
  return v;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Next line that is neither blank nor a '#' comment; strips a trailing '\r'.
bool next_line(std::istream& is, std::string& line, std::size_t& lineno) {
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace

std::string dump_json(const json& j) {
  std::string out;
  dump_value(j, 0, out);
  out += "\n";
  return out;
}

std::string stamp_line(const OutputStamp& stamp) {
  return fmt::format("# config_hash={},seed={}\n", stamp.config_hash, stamp.seed);
}

void write_dataset_csv(std::ostream& os, const Dataset& data, const OutputStamp* stamp) {
  if (stamp) os << stamp_line(*stamp);
  for (int i = 1; i <= data.d(); ++i) os << "s_" << i << ',';
  os << "t,y\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.s(i)) os << format_double(v) << ',';
    os << format_double(data.t(i)) << ',' << format_double(data.y(i)) << '\n';
  }
}

Dataset read_dataset_csv(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  if (!next_line(is, line, lineno)) throw SchemaError("dataset: missing header");
  const std::vector<std::string> header = split_commas(line);
  const int d = static_cast<int>(header.size()) - 2;
  if (d < 1) throw SchemaError("dataset: header needs s_1,...,s_d,t,y");
  for (int i = 0; i < d; ++i) {
    if (header[i] != fmt::format("s_{}", i + 1)) throw SchemaError(fmt::format("dataset: bad column '{}'", header[i]));
  }
  if (header[d] != "t" || header[d + 1] != "y") throw SchemaError("dataset: last columns must be t,y");
  Dataset data(d);
  std::vector<double> s(d);
  while (next_line(is, line, lineno)) {
    const std::vector<std::string> f = split_commas(line);
    if (f.size() != header.size()) {
      throw SchemaError(fmt::format("dataset line {}: expected {} fields, got {}", lineno, header.size(), f.size()));
    }
    for (int i = 0; i < d; ++i) s[i] = parse_number(f[i], lineno);
    try {
      data.push_back(s, parse_number(f[d], lineno), parse_number(f[d + 1], lineno));
    } catch (const std::invalid_argument& e) {
      throw SchemaError(fmt::format("dataset line {}: {}", lineno, e.what()));
    }
  }
  return data;
}

void write_edge_csv(std::ostream& os, const DyadicTable& table, const OutputStamp* stamp) {
  if (stamp) os << stamp_line(*stamp);
  os << "d=" << table.d() << ",depth=" << table.depth() << '\n';
  for (double v : table.values()) os << format_double(v) << '\n';
}

DyadicTable read_edge_csv(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  if (!next_line(is, line, lineno)) throw SchemaError("edge: missing header");
  int d = 0;
  int depth = 0;
  char tail = 0;
  if (std::sscanf(line.c_str(), "d=%d,depth=%d%c", &d, &depth, &tail) != 2 || d < 1 || depth < 0) {
    throw SchemaError(fmt::format("edge: bad header '{}'", line));
  }
  std::vector<double> values;
  while (next_line(is, line, lineno)) values.push_back(parse_number(line, lineno));
  const std::size_t expected = std::size_t{1} << (d * depth);
  if (values.size() != expected) {
    throw SchemaError(fmt::format("edge: expected {} cells, got {}", expected, values.size()));
  }
  return DyadicTable(d, depth, std::move(values));
}

json coefficients_to_json(const CoefficientVector& alpha) {
  json blocks = json::array();
  for (int l = 1; l <= alpha.levels(); ++l) {
    const auto lv = alpha.level(l);
    blocks.push_back(std::vector<double>(lv.begin(), lv.end()));
  }
  return json{{"d", alpha.d()}, {"L", alpha.levels()}, {"blocks", blocks}};
}

CoefficientVector coefficients_from_json(const json& j, const BasisSystem& basis) {
  try {
    if (j.at("d").get<int>() != basis.d() || j.at("L").get<int>() != basis.levels()) {
      throw SchemaError("coefficients: (d, L) do not match the basis");
    }
    CoefficientVector a(basis);
    const json& blocks = j.at("blocks");
    if (!blocks.is_array() || static_cast<int>(blocks.size()) != basis.levels()) {
      throw SchemaError("coefficients: wrong number of blocks");
    }
    for (int l = 1; l <= basis.levels(); ++l) {
      const auto vals = blocks[l - 1].get<std::vector<double>>();
      auto dst = a.level(l);
      if (vals.size() != dst.size()) throw SchemaError(fmt::format("coefficients: block {} has the wrong size", l));
      std::copy(vals.begin(), vals.end(), dst.begin());
    }
    return a;
  } catch (const json::exception& e) {
    throw SchemaError(fmt::format("coefficients: {}", e.what()));
  }
}

json dataset_meta_json(const Dataset& data) {
  const DatasetMeta& m = data.meta();
  json params = json::object();
  for (const auto& [k, v] : m.params) params[k] = v;
  return json{{"model_kind", m.model_kind}, {"seed", m.seed}, {"n", data.size()}, {"d", data.d()}, {"params", params}};
}

json fit_result_to_json(const FitResult& fit, const PenaltyConfig& pen, const SolverConfig& solver) {
  return json{{"objective", fit.objective},
              {"empirical_risk", fit.empirical_risk},
              {"penalty", fit.penalty},
              {"lambda_n", pen.lambda_n},
              {"c_lambda", pen.c_lambda},
              {"sweeps", fit.sweeps},
              {"certificate", fit.certificate},
              {"method", to_string(solver.method)},
              {"restart_objectives", fit.restart_objectives},
              {"restarts_disagree", fit.restarts_disagree},
              {"nonsparsity", nonsparsity(fit.alpha)},
              {"coefficients", coefficients_to_json(fit.alpha)}};
}

namespace {

json slope_json(const SlopeFit& s) {
  return json{{"slope", s.slope}, {"intercept", s.intercept}, {"slope_se", s.slope_se},
              {"intercept_se", s.intercept_se}};
}

}  // namespace

json rate_table_to_json(const RateTable& t) {
  json rows = json::array();
  for (const RateRow& r : t.rows) {
    rows.push_back(json{{"n", r.n},
                        {"replicates", r.replicates},
                        {"lambda_n", r.lambda},
                        {"mean_excess", r.mean_excess},
                        {"se_excess", r.se_excess},
                        {"mean_l1", r.mean_l1},
                        {"se_l1", r.se_l1},
                        {"disagreement_fraction", r.disagreement_fraction}});
  }
  json out{{"rows", rows},
           {"predicted_exponents", {{"excess", t.predicted.excess}, {"l1", t.predicted.l1}}},
           {"degenerate", t.degenerate}};
  if (!t.degenerate) {
    out["slopes"] = json{{"excess_log_factor", slope_json(t.excess_slope)},
                         {"l1_log_factor", slope_json(t.l1_slope)},
                         {"excess_plain", slope_json(t.excess_slope_plain)},
                         {"l1_plain", slope_json(t.l1_slope_plain)}};
  }
  return out;
}

void write_rate_table_csv(std::ostream& os, const RateTable& t, const OutputStamp* stamp) {
  if (stamp) os << stamp_line(*stamp);
  os << "n,replicates,lambda_n,mean_excess,se_excess,mean_l1,se_l1,disagreement_fraction\n";
  for (const RateRow& r : t.rows) {
    os << r.n << ',' << r.replicates << ',' << format_double(r.lambda) << ',' << format_double(r.mean_excess) << ','
       << format_double(r.se_excess) << ',' << format_double(r.mean_l1) << ',' << format_double(r.se_l1) << ','
       << format_double(r.disagreement_fraction) << '\n';
  }
}

json check_report_to_json(const CheckReport& rep) {
  json params = json::object();
  for (const auto& [k, v] : rep.params) params[k] = v;
  return json{{"name", rep.name},           {"trials", rep.trials},         {"violations", rep.violations},
              {"tolerance", rep.tolerance}, {"worst_ratio", rep.worst_ratio}, {"passed", rep.passed()},
              {"params", params},           {"notes", rep.notes}};
}

json probe_report_to_json(const ProbeReport& rep) {
  json params = json::object();
  for (const auto& [k, v] : rep.params) params[k] = v;
  return json{{"name", rep.name},           {"statistics", rep.statistics}, {"bound", rep.bound},
              {"frequency", rep.frequency}, {"tail_value", rep.tail_value}, {"params", params},
              {"notes", rep.notes}};
}

json assumption_b_to_json(const AssumptionBReport& rep) {
  json levels = json::array();
  for (const auto& c : rep.per_level) {
    levels.push_back(json{{"level", c.level},
                          {"size", c.size},
                          {"max_l1_norm", c.max_l1_norm},
                          {"sup_abs_sum", c.sup_abs_sum},
                          {"required_c_psi", c.required_c_psi}});
  }
  return json{{"d", rep.d},
              {"L", rep.levels},
              {"stored_c_psi", rep.stored_c_psi},
              {"minimal_c_psi", rep.minimal_c_psi},
              {"max_orthonormality_error", rep.max_orthonormality_error},
              {"functions_checked", rep.functions_checked},
              {"per_level", levels},
              {"violations", rep.violations},
              {"passed", rep.passed()}};
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
  os << text;
  os.flush();
  if (!os) throw std::runtime_error(fmt::format("failed writing '{}'", path));
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error(fmt::format("cannot open '{}'", path));
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace sqrtpen
