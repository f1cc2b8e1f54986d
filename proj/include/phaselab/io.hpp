#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "phaselab/error.hpp"
#include "phaselab/game.hpp"
#include "phaselab/numerics.hpp"

namespace phaselab {

using Json = nlohmann::json;

// Instance files are JSON documents.
//   adversary: {"kind": "adversary", "dims": {"N", "M"},
//               "V":  {"rows", "cols", "real": [...], "imag": [...]},   row-major
//               "Pi": {...same...}}
//   family:    {"kind": "family", "dims": {"K", "N"}, "entries": [+-1, ...]}   row-major K x N
using Instance = std::variant<AdversarySpec, FunctionFamily>;

namespace detail {

inline Json matrix_to_json(const ComplexMatrix& m) {
  std::vector<double> re, im;
  re.reserve(static_cast<std::size_t>(m.size()));
  im.reserve(static_cast<std::size_t>(m.size()));
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) {
      re.push_back(m(r, c).real());
      im.push_back(m(r, c).imag());
    }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"real", re}, {"imag", im}};
}

inline const Json& field(const Json& j, const std::string& name, const std::string& where) {
  require(j.is_object(), ErrorKind::kParse, "'" + where + "' must be an object");
  const auto it = j.find(name);
  require(it != j.end(), ErrorKind::kParse, "missing field '" + where + "." + name + "'");
  return *it;
}

inline std::size_t count_field(const Json& j, const std::string& name, const std::string& where) {
  const Json& v = field(j, name, where);
  require(v.is_number_integer() && v.get<long long>() >= 1, ErrorKind::kParse,
          "field '" + where + "." + name + "' must be a positive integer");
  return v.get<std::size_t>();
}

inline ComplexMatrix matrix_from_json(const Json& j, const std::string& where) {
  const std::size_t rows = count_field(j, "rows", where), cols = count_field(j, "cols", where);
  const Json& re = field(j, "real", where);
  const Json& im = field(j, "imag", where);
  for (const auto& [name, arr] : {std::pair<const char*, const Json*>{"real", &re}, {"imag", &im}}) {
    require(arr->is_array() && arr->size() == rows * cols, ErrorKind::kParse,
            "field '" + where + "." + name + "' must be an array of rows*cols = " + std::to_string(rows * cols) +
                " numbers");
    for (const auto& x : *arr)
      require(x.is_number(), ErrorKind::kParse, "field '" + where + "." + name + "' has a non-numeric entry");
  }
  ComplexMatrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  std::size_t i = 0;
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c, ++i) m(r, c) = Complex(re[i].get<double>(), im[i].get<double>());
  return m;
}

}  // namespace detail

inline Json instance_to_json(const AdversarySpec& adv) {
  return {{"kind", "adversary"},
          {"dims", {{"N", adv.N()}, {"M", adv.M()}}},
          {"V", detail::matrix_to_json(adv.V())},
          {"Pi", detail::matrix_to_json(adv.Pi())}};
}

inline Json instance_to_json(const FunctionFamily& r) {
  std::vector<int> entries(r.values().begin(), r.values().end());
  return {{"kind", "family"}, {"dims", {{"K", r.K()}, {"N", r.N()}}}, {"entries", entries}};
}

inline Instance instance_from_json(const Json& j) {
  const Json& kind = detail::field(j, "kind", "instance");
  detail::require(kind.is_string(), ErrorKind::kParse, "field 'instance.kind' must be a string");
  const Json& dims = detail::field(j, "dims", "instance");
  if (kind == "adversary") {
    const std::size_t n = detail::count_field(dims, "N", "dims"), m = detail::count_field(dims, "M", "dims");
    ComplexMatrix v = detail::matrix_from_json(detail::field(j, "V", "instance"), "V");
    ComplexMatrix pi = detail::matrix_from_json(detail::field(j, "Pi", "instance"), "Pi");
    detail::require(v.rows() == static_cast<Index>(m) && v.cols() == static_cast<Index>(n), ErrorKind::kParse,
                    "field 'V' must be M x N as given in 'dims'");
    detail::require(pi.rows() == static_cast<Index>(m) && pi.cols() == static_cast<Index>(m), ErrorKind::kParse,
                    "field 'Pi' must be M x M as given in 'dims'");
    return AdversarySpec(std::move(v), std::move(pi));
  }
  if (kind == "family") {
    const std::size_t k = detail::count_field(dims, "K", "dims"), n = detail::count_field(dims, "N", "dims");
    const Json& entries = detail::field(j, "entries", "instance");
    detail::require(entries.is_array() && entries.size() == k * n, ErrorKind::kParse,
                    "field 'entries' must be an array of K*N = " + std::to_string(k * n) + " integers");
    std::vector<std::int8_t> values;
    values.reserve(k * n);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const Json& e = entries[i];
      detail::require(e.is_number_integer() && (e.get<long long>() == 1 || e.get<long long>() == -1), ErrorKind::kParse,
                      "field 'entries[" + std::to_string(i) + "]' is " + e.dump() + ", entries must be +1 or -1");
      values.push_back(static_cast<std::int8_t>(e.get<int>()));
    }
    return FunctionFamily(k, n, std::move(values));
  }
  throw Error(ErrorKind::kParse, "field 'instance.kind' is " + kind.dump() + ", expected \"adversary\" or \"family\"");
}

inline void save_instance(const std::string& path, const Instance& inst) {
  std::ofstream out(path);
  detail::require(static_cast<bool>(out), ErrorKind::kInvalidInput, "cannot write '" + path + "'");
  std::visit([&](const auto& x) { out << instance_to_json(x).dump(1) << '\n'; }, inst);
}

inline Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  detail::require(static_cast<bool>(in), ErrorKind::kInvalidInput, "cannot open instance file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::kParse, "'" + path + "' is not valid JSON: " + e.what());
  }
  return instance_from_json(j);
}

template <class T>
T load_instance_as(const std::string& path) {
  Instance inst = load_instance(path);
  auto* p = std::get_if<T>(&inst);
  detail::require(p != nullptr, ErrorKind::kParse,
                  "'" + path + "' holds a " + (inst.index() == 0 ? "adversary" : "family") + " instance, not the expected kind");
  return std::move(*p);
}

// One result record per run: config echo, measured values, metadata.
struct ExperimentRecord {
  Json config;
  std::vector<std::pair<std::string, double>> values;  // in insertion order
  double wall_time_seconds = 0.0;
  std::string version;
  std::string rng_fingerprint;

  void set(const std::string& name, double value) {
    for (auto& [k, v] : values)
      if (k == name) {
        v = value;
        return;
      }
    values.emplace_back(name, value);
  }

  double get(const std::string& name) const {
    for (const auto& [k, v] : values)
      if (k == name) return v;
    throw Error(ErrorKind::kInvalidInput, "record has no value '" + name + "'");
  }

  // Non-finite values become null.
  Json measured() const {
    Json m = Json::object();
    for (const auto& [k, v] : values) m[k] = std::isfinite(v) ? Json(v) : Json(nullptr);
    return m;
  }

  Json to_json() const {
    return {{"config", config}, {"values", measured()}, {"wall_time_seconds", wall_time_seconds},
            {"version", version}, {"rng_fingerprint", rng_fingerprint}};
  }
};

inline void append_jsonl(const std::string& path, const ExperimentRecord& rec) {
  std::ofstream out(path, std::ios::app);
  detail::require(static_cast<bool>(out), ErrorKind::kInvalidInput, "cannot write '" + path + "'");
  out << rec.to_json().dump() << '\n';
}

inline constexpr const char* kCsvHeader = "kind,seed,version,rng_fingerprint,field,value";

// Long format: one row per measured value.
inline std::string to_csv_rows(const ExperimentRecord& rec) {
  std::ostringstream os;
  const std::string kind = rec.config.value("kind", "");
  const std::string seed = rec.config.contains("seed") ? rec.config["seed"].dump() : "";
  for (const auto& [k, v] : rec.values) {
    os << kind << ',' << seed << ',' << rec.version << ',' << rec.rng_fingerprint << ',' << k << ',';
    if (std::isfinite(v)) os << Json(v).dump();
    os << '\n';
  }
  return os.str();
}

inline void append_csv(const std::string& path, const ExperimentRecord& rec) {
  const bool fresh = !std::ifstream(path).good();
  std::ofstream out(path, std::ios::app);
  detail::require(static_cast<bool>(out), ErrorKind::kInvalidInput, "cannot write '" + path + "'");
  if (fresh) out << kCsvHeader << '\n';
  out << to_csv_rows(rec);
}

}  // namespace phaselab
