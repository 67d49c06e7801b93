#include "chicap/records.hpp"

#include "chicap/errors.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace chicap::records {

namespace {

[[noreturn]] void bad(const std::string& what) { throw InvalidInput("record: " + what); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const Json& j, const char* what) {
  if (!j.is_number()) bad(std::string(what) + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad(std::string(what) + " must be finite");
  return v;
}

std::size_t count(const Json& j, const char* what) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) bad(std::string(what) + " must be an integer");
  const auto v = j.get<long long>();
  if (v < 1) bad(std::string(what) + " must be positive");
  return static_cast<std::size_t>(v);
}

std::uint64_t seed_of(const Json& p) { return p.contains("seed") ? p.at("seed").get<std::uint64_t>() : 1; }

std::size_t param_count(const Json& p, const char* key) { return count(field(p, key), key); }

KrausChannel named_channel(const std::string& family, const Json& p) {
  if (family == "noiseless") return noiseless(param_count(p, "d"));
  if (family == "depolarizing") return depolarizing(number(field(p, "p"), "p"), param_count(p, "d"));
  if (family == "completely_depolarizing") return completely_depolarizing(param_count(p, "d"));
  if (family == "constant") return constant_channel(param_count(p, "din"), parse_state(field(p, "omega")));
  if (family == "random")
    return random_channel(param_count(p, "din"), param_count(p, "dout"), param_count(p, "rank"), seed_of(p));
  if (family == "random_entanglement_breaking")
    return random_entanglement_breaking(param_count(p, "din"), param_count(p, "dout"), param_count(p, "outcomes"),
                                        seed_of(p));
  if (family == "entanglement_breaking") {
    std::vector<HermitianOperator> povm;
    std::vector<DensityMatrix> outputs;
    for (const Json& m : field(p, "povm")) povm.emplace_back(parse_matrix(m));
    for (const Json& m : field(p, "outputs")) outputs.push_back(parse_state(m));
    return entanglement_breaking(povm, outputs);
  }
  bad("unknown channel family '" + family + "'");
}

// Dimension implied by a factor record, 0 when it carries none.
std::size_t implied_dim(const Json& j) {
  const std::string type = field(j, "type").get<std::string>();
  if (type == "linear") return static_cast<std::size_t>(parse_matrix(field(j, "A")).rows());
  if (type == "singleton") return static_cast<std::size_t>(parse_matrix(field(j, "rho")).rows());
  if (type == "marginals" && j.contains("dh") && j.contains("dk"))
    return count(j.at("dh"), "dh") * count(j.at("dk"), "dk");
  return 0;
}

}  // namespace

Matrix parse_matrix(const Json& j) {
  if (!j.is_array() || j.empty()) bad("matrix literal must be a non-empty list of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j.front().is_array() || j.front().empty()) bad("matrix rows must be non-empty lists");
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) bad("matrix rows must have equal length");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Json& e = row[static_cast<std::size_t>(c)];
      if (e.is_number()) {
        m(r, c) = {number(e, "matrix entry"), 0.0};
      } else if (e.is_array() && e.size() == 2) {
        m(r, c) = {number(e[0], "matrix entry"), number(e[1], "matrix entry")};
      } else {
        bad("matrix entries must be [re, im] pairs");
      }
    }
  }
  return m;
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

KrausChannel parse_channel(const Json& j) {
  if (!j.is_object()) bad("channel record must be an object");
  if (j.contains("kraus")) {
    std::vector<Matrix> kraus;
    for (const Json& k : j.at("kraus")) kraus.push_back(parse_matrix(k));
    if (kraus.empty()) bad("kraus list is empty");
    const auto din = static_cast<std::size_t>(kraus.front().cols());
    const auto dout = static_cast<std::size_t>(kraus.front().rows());
    return KrausChannel(din, dout, std::move(kraus));
  }
  if (j.contains("family")) {
    const Json params = j.contains("params") ? j.at("params") : Json::object();
    return named_channel(j.at("family").get<std::string>(), params);
  }
  if (j.contains("blocks")) bad("a block channel is not allowed here");
  bad("channel record needs 'family' or 'kraus'");
}

bool is_block_record(const Json& j) {
  return j.is_object() && (j.contains("blocks") || (j.contains("family") && j.at("family") == "erasure"));
}

BlockChannel parse_block_channel(const Json& j) {
  if (j.is_object() && j.contains("family") && j.at("family") == "erasure") {
    const Json& p = field(j, "params");
    return erasure(number(field(p, "q"), "q"), param_count(p, "d"));
  }
  if (!j.is_object() || !j.contains("blocks")) return BlockChannel::single(parse_channel(j));
  std::vector<BlockChannel::Component> parts;
  for (const Json& b : j.at("blocks")) parts.push_back({number(field(b, "weight"), "weight"), parse_channel(field(b, "channel"))});
  return BlockChannel(std::move(parts));
}

ConstraintSet parse_constraint(const Json& j, std::size_t din) {
  const std::string type = field(j, "type").get<std::string>();
  if (type == "full") return ConstraintSet::full();
  if (type == "linear") {
    const Matrix a = parse_matrix(field(j, "A"));
    if (static_cast<std::size_t>(a.rows()) != din) bad("linear constraint dimension mismatch");
    return ConstraintSet::linear(a, number(field(j, "alpha"), "alpha"));
  }
  if (type == "singleton") {
    const DensityMatrix rho = parse_state(field(j, "rho"));
    if (rho.dim() != din) bad("singleton constraint dimension mismatch");
    return ConstraintSet::singleton(rho);
  }
  if (type == "marginals") {
    const Json& left = field(j, "left");
    const Json& right = field(j, "right");
    std::size_t dh = j.contains("dh") ? count(j.at("dh"), "dh") : implied_dim(left);
    std::size_t dk = j.contains("dk") ? count(j.at("dk"), "dk") : implied_dim(right);
    if (dh == 0 && dk != 0 && din % dk == 0) dh = din / dk;
    if (dk == 0 && dh != 0 && din % dh == 0) dk = din / dh;
    if (dh == 0 || dk == 0) bad("marginals constraint needs dh and dk");
    if (dh * dk != din) bad("marginals constraint dimensions do not match the channel input");
    return ConstraintSet::marginals(parse_constraint(left, dh), parse_constraint(right, dk), dh, dk);
  }
  bad("unknown constraint type '" + type + "'");
}

DensityMatrix parse_state(const Json& j) { return DensityMatrix(parse_matrix(j)); }

Ensemble parse_ensemble(const Json& j) {
  std::vector<double> weights;
  std::vector<DensityMatrix> states;
  for (const Json& w : field(j, "weights")) weights.push_back(number(w, "weight"));
  for (const Json& s : field(j, "states")) states.push_back(parse_state(s));
  if (weights.size() != states.size()) bad("ensemble weights and states differ in length");
  return Ensemble(std::move(weights), std::move(states));
}

Json to_json(const Ensemble& e) {
  Json states = Json::array();
  for (const auto& s : e.states()) states.push_back(to_json(s.matrix()));
  return {{"weights", e.weights()}, {"states", std::move(states)}};
}

ShorExtension parse_extension(const Json& j) {
  return ShorExtension(parse_channel(field(j, "base")), parse_matrix(field(j, "effect")), number(field(j, "q"), "q"),
                       count(field(j, "d"), "d"));
}

double round9(double v) {
  if (!std::isfinite(v)) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

namespace {

Json num(double v) {
  if (std::isfinite(v)) return round9(v);
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

}  // namespace

Json to_json(const CapacityResult& r) {
  Json members = Json::array();
  for (std::size_t i = 0; i < r.ensemble.size(); ++i) {
    const RealVector ev = eigenvalues_h(r.ensemble.state(i).matrix());
    members.push_back({{"weight", num(r.ensemble.weight(i))}, {"purity_max_eig", num(ev.maxCoeff())}});
  }
  Json out = {{"value", num(r.value)},
              {"certificate", num(r.certificate)},
              {"certificate_gap", num(r.certificate_gap)},
              {"converged", r.converged},
              {"members", std::move(members)}};
  if (r.multiplier) out["lambda"] = num(*r.multiplier);
  return out;
}

Json to_json(const GapReport& r, const Json& instance) {
  Json details = Json::object();
  for (const auto& [k, v] : r.details) details[k] = num(v);
  Json out = {{"quantity", r.quantity}, {"lhs", num(r.lhs)},         {"rhs", num(r.rhs)},
              {"gap", num(r.gap)},      {"tolerance", r.tolerance},  {"converged", r.converged},
              {"proven", r.proven},     {"details", std::move(details)}};
  // Proven inequalities pass or fail; conjectured ones are only reported.
  if (r.proven)
    out["pass"] = r.pass;
  else
    out["report"] = r.pass ? "no-violation" : "violation";
  Json inst = instance;
  if (r.state) inst["witness_state"] = to_json(*r.state);
  out["instance"] = std::move(inst);
  out["seed"] = r.seed;
  return out;
}

Json to_json(const Prop3Report& r, std::size_t d) {
  return {{"quantity", "prop3"},        {"d", d},
          {"lhs", num(r.lhs)},          {"rhs", num(r.rhs)},
          {"deviation", num(r.deviation)}, {"bound", num(r.bound)},
          {"slack", r.slack},           {"pass", r.pass},
          {"converged", r.converged}};
}

Json to_json(const AlphaProfile& p) {
  Json pts = Json::array();
  for (const auto& pt : p.points)
    pts.push_back({{"alpha", num(pt.alpha)}, {"value", num(pt.value)}, {"converged", pt.converged}});
  return {{"quantity", "alpha_profile"},
          {"points", std::move(pts)},
          {"nondecreasing", p.nondecreasing},
          {"concave", p.concave},
          {"max_decrease", num(p.max_decrease)},
          {"max_second_difference", num(p.max_second_difference)}};
}

}  // namespace chicap::records
