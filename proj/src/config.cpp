#include "simcert/config.hpp"

#include <fstream>
#include <sstream>

namespace simcert {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ConfigError("config: " + msg); }

const json& field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) fail(std::string("missing field '") + name + "'");
  return *it;
}

double number(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_number()) fail(std::string("field '") + name + "' must be a number");
  return v.get<double>();
}

Vector parse_vector(const json& j) {
  if (j.is_array()) {
    Vector v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
    return v;
  }
  if (j.is_object() && j.contains("constant_fill")) {
    const json& cf = j["constant_fill"];
    const Index n = cf.at("dim").get<Index>();
    Vector v = Vector::Constant(n, cf.at("value").get<double>());
    return v;
  }
  fail("expected a vector (array or constant_fill)");
}

}  // namespace

Matrix parse_matrix(const json& j) {
  if (j.is_array()) {
    if (j.empty()) return Matrix(0, 0);
    if (!j[0].is_array()) fail("dense matrix must be an array of rows");
    const Index rows = static_cast<Index>(j.size());
    const Index cols = static_cast<Index>(j[0].size());
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
      if (static_cast<Index>(j[r].size()) != cols) fail("ragged dense matrix");
      for (Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
  }
  if (!j.is_object()) fail("matrix must be an array or a generator object");
  if (j.contains("identity")) {
    const Index n = j["identity"].get<Index>();
    return Matrix::Identity(n, n);
  }
  if (j.contains("zeros")) {
    const auto& z = j["zeros"];
    return Matrix::Zero(z.at(0).get<Index>(), z.at(1).get<Index>());
  }
  if (j.contains("ones")) {
    const auto& o = j["ones"];
    return Matrix::Ones(o.at(0).get<Index>(), o.at(1).get<Index>());
  }
  if (j.contains("scaled")) {
    const auto& s = j["scaled"];
    return s.at(0).get<double>() * parse_matrix(s.at(1));
  }
  if (j.contains("basis_row")) {
    const auto& b = j["basis_row"];
    Matrix m = Matrix::Zero(1, b.at("dim").get<Index>());
    m(0, b.at("index").get<Index>()) = 1.0;
    return m;
  }
  if (j.contains("block_diag")) {
    std::vector<Matrix> blocks;
    for (const auto& g : j["block_diag"]) blocks.push_back(parse_matrix(g));
    Index rows = 0, cols = 0;
    for (const auto& b : blocks) {
      rows += b.rows();
      cols += b.cols();
    }
    Matrix m = Matrix::Zero(rows, cols);
    Index r = 0, c = 0;
    for (const auto& b : blocks) {
      m.block(r, c, b.rows(), b.cols()) = b;
      r += b.rows();
      c += b.cols();
    }
    return m;
  }
  if (j.contains("complete_graph_laplacian")) {
    return complete_graph_laplacian(j["complete_graph_laplacian"].get<Index>());
  }
  fail("unknown matrix generator");
}

namespace {

Nonlinearity parse_phi(const json& j) {
  const std::string kind = field(j, "kind").get<std::string>();
  if (kind == "zero") return Nonlinearity::zero();
  if (kind == "sine") return Nonlinearity::sine();
  if (kind == "table") {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : field(j, "points")) {
      pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    }
    const double shift = j.contains("shift") ? j["shift"].get<double>() : 0.0;
    return Nonlinearity::table(std::move(pts), number(j, "slope_bound"), shift);
  }
  fail("unknown nonlinearity kind '" + kind + "'");
}

SystemModel parse_system(const json& j) {
  SystemModel m;
  m.A = parse_matrix(field(j, "A"));
  m.B = parse_matrix(field(j, "B"));
  m.C1 = parse_matrix(field(j, "C1"));
  m.C2 = parse_matrix(field(j, "C2"));
  m.D = parse_matrix(field(j, "D"));
  m.E = parse_matrix(field(j, "E"));
  m.F = parse_matrix(field(j, "F"));
  m.R = parse_matrix(field(j, "R"));
  m.phi = parse_phi(field(j, "phi"));
  m.validate();
  return m;
}

StorageCertificate parse_certificate(const json& j) {
  StorageCertificate c;
  c.Mtil = parse_matrix(field(j, "Mtil"));
  c.K = parse_matrix(field(j, "K"));
  c.Q = parse_matrix(field(j, "Q"));
  c.L1 = parse_matrix(field(j, "L1"));
  c.L2 = parse_matrix(field(j, "L2"));
  c.Z = parse_matrix(field(j, "Z"));
  c.G = parse_matrix(field(j, "G"));
  c.Ghat = parse_matrix(field(j, "Ghat"));
  c.H = parse_matrix(field(j, "H"));
  c.P = parse_matrix(field(j, "P"));
  c.Rtil = parse_matrix(field(j, "Rtil"));
  c.Xbar11 = parse_matrix(field(j, "Xbar11"));
  c.Xbar12 = parse_matrix(field(j, "Xbar12"));
  c.Xbar21 = parse_matrix(field(j, "Xbar21"));
  c.Xbar22 = parse_matrix(field(j, "Xbar22"));
  c.kappa_hat = number(j, "kappa_hat");
  c.k_til = number(j, "k_til");
  return c;
}

std::string letter_from_atoms(const json& atoms, const std::vector<std::string>& aps) {
  std::uint32_t mask = 0;
  for (const auto& a : atoms) {
    const std::string name = a.get<std::string>();
    bool found = false;
    for (std::size_t i = 0; i < aps.size(); ++i) {
      if (aps[i] == name) {
        mask |= 1u << i;
        found = true;
        break;
      }
    }
    if (!found) fail("labeling letter uses atom '" + name + "' not in atomic_props");
  }
  return letter_name(aps, mask);
}

LabeledPartition parse_labeling(const json& j, const std::vector<std::string>& aps) {
  LabeledPartition p;
  p.dim = field(j, "dim").get<Index>();
  for (const auto& r : field(j, "regions")) {
    LabeledRegion region;
    region.letter = letter_from_atoms(field(r, "letter"), aps);
    for (const auto& bj : field(r, "boxes")) {
      Box b;
      b.lo = Vector(p.dim);
      b.hi = Vector(p.dim);
      if (static_cast<Index>(bj.size()) != p.dim) fail("box axis count != labeling dim");
      for (Index d = 0; d < p.dim; ++d) {
        b.lo(d) = bj[d].at(0).get<double>();
        b.hi(d) = bj[d].at(1).get<double>();
      }
      region.boxes.push_back(std::move(b));
    }
    p.regions.push_back(std::move(region));
  }
  p.default_letter = letter_from_atoms(field(j, "default_letter"), aps);
  p.validate();
  return p;
}

AbstractPolicy parse_policy(const json& j, Index input_dim) {
  const std::string kind = field(j, "kind").get<std::string>();
  const double sat = number(j, "saturation");
  AbstractPolicy p;
  if (kind == "constant") {
    p = constant_policy(parse_vector(field(j, "value")), sat);
  } else if (kind == "waypoint") {
    std::vector<Vector> wps;
    for (const auto& w : field(j, "waypoints")) wps.push_back(parse_vector(w));
    const double tol = j.contains("advance_tol") ? j["advance_tol"].get<double>() : 0.5;
    p = waypoint_policy(std::move(wps), sat, tol);
  } else if (kind == "lookup_table") {
    std::vector<Vector> table;
    for (const auto& v : field(j, "table")) table.push_back(parse_vector(v));
    p = lookup_table_policy(std::move(table), sat);
  } else {
    fail("unknown policy kind '" + kind + "'");
  }
  p.validate(input_dim);
  return p;
}

}  // namespace

Network ProjectConfig::concrete_network() const {
  Network net;
  net.subsystems = concretes;
  net.M = M;
  return net;
}

Network ProjectConfig::abstract_network() const {
  Network net;
  net.subsystems = abstracts;
  // the abstract coupling is solved, not configured; the simulator carries it
  Index p = 0, q = 0;
  for (const auto& s : abstracts) {
    p += s.int_input_dim();
    q += s.int_output_dim();
  }
  net.M = Matrix::Zero(p, q);
  return net;
}

ProjectConfig parse_config(const json& j) {
  ProjectConfig cfg;
  cfg.raw = j;
  try {
    const json& systems = field(j, "systems");
    for (const auto& sub : field(systems, "subsystems")) {
      cfg.concretes.push_back(parse_system(field(sub, "concrete")));
      cfg.abstracts.push_back(parse_system(field(sub, "abstract")));
    }
    if (cfg.concretes.empty()) fail("no subsystems");

    const json& coupling = field(systems, "coupling");
    if (coupling.contains("complete_graph")) {
      const json& cg = coupling["complete_graph"];
      const Index nodes = cg.at("nodes").get<Index>();
      const double tau_num = cg.at("tau_numerator").get<double>();
      const double tau = tau_num / static_cast<double>(nodes - 1);
      cfg.M = -tau * complete_graph_laplacian(nodes);
    } else if (coupling.contains("matrix")) {
      cfg.M = parse_matrix(coupling["matrix"]);
    } else {
      fail("coupling needs 'complete_graph' or 'matrix'");
    }

    for (const auto& c : field(j, "certificates")) {
      cfg.certificates.push_back(parse_certificate(c));
    }
    if (cfg.certificates.size() != cfg.concretes.size()) {
      fail("certificate count != subsystem count");
    }

    for (const auto& m : field(j, "mu")) cfg.mu.push_back(m.get<double>());
    if (cfg.mu.size() != cfg.concretes.size()) fail("mu length != subsystem count");

    const json& spec = field(j, "spec");
    cfg.spec.formula_text = field(spec, "formula").get<std::string>();
    if (spec.contains("bounded_always")) {
      const json& ba = spec["bounded_always"];
      cfg.spec.bounded_always = {field(ba, "operand").get<std::string>(),
                                 field(ba, "horizon").get<int>()};
    }
    for (const auto& a : field(spec, "atomic_props")) {
      cfg.spec.atomic_props.push_back(a.get<std::string>());
    }
    cfg.spec.labeling = parse_labeling(field(spec, "labeling"), cfg.spec.atomic_props);
    cfg.spec.epsilon = number(spec, "epsilon");
    cfg.spec.horizon = field(spec, "horizon").get<long>();

    Index abst_input_dim = 0;
    for (const auto& s : cfg.abstracts) abst_input_dim += s.ext_input_dim();
    cfg.policy = parse_policy(field(j, "policy"), abst_input_dim);

    const json& mc = field(j, "mc");
    cfg.mc.trials = field(mc, "trials").get<long>();
    cfg.mc.seed = field(mc, "seed").get<std::uint64_t>();
    cfg.mc.x0 = parse_vector(field(mc, "initial_concrete"));
    cfg.mc.xhat0 = parse_vector(field(mc, "initial_abstract"));
    if (mc.contains("eps_grid")) {
      for (const auto& e : mc["eps_grid"]) cfg.mc.eps_grid.push_back(e.get<double>());
    }
    if (cfg.mc.x0.size() != cfg.concrete_network().state_dim()) {
      fail("initial_concrete dimension mismatch");
    }
    if (cfg.mc.xhat0.size() != cfg.abstract_network().state_dim()) {
      fail("initial_abstract dimension mismatch");
    }
  } catch (const json::exception& e) {
    fail(std::string("malformed document: ") + e.what());
  }
  return cfg;
}

ProjectConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }
  return parse_config(j);
}

void save_config(const ProjectConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("config: cannot write '" + path + "'");
  out << config.raw.dump(2) << "\n";
}

json case_study_json(Index block_dim, long trials, std::uint64_t seed) {
  const Index ni = block_dim;
  const Index n = 3 * ni;
  json sub;
  sub["concrete"] = {
      {"A", {{"identity", ni}}},
      {"B", {{"identity", ni}}},
      {"C1", {{"basis_row", {{"dim", ni}, {"index", 0}}}}},
      {"C2", {{"identity", ni}}},
      {"D", {{"identity", ni}}},
      {"E", {{"ones", {ni, 1}}}},
      {"F", {{"basis_row", {{"dim", ni}, {"index", 0}}}}},
      {"R", {{"scaled", {0.007, {{"ones", {ni, 1}}}}}}},
      {"phi", {{"kind", "sine"}}},
  };
  sub["abstract"] = {
      {"A", json::array({json::array({0.5})})},
      {"B", json::array({json::array({1.0})})},
      {"C1", json::array({json::array({1.0})})},
      {"C2", json::array({json::array({1.0})})},
      {"D", json::array({json::array({1.0})})},
      {"E", json::array({json::array({0.1})})},
      {"F", json::array({json::array({1.0})})},
      {"R", {{"zeros", {1, 0}}}},
      {"phi", {{"kind", "sine"}}},
  };
  json cert = {
      {"Mtil", {{"identity", ni}}},
      {"K", {{"scaled", {-0.5, {{"identity", ni}}}}}},
      {"Q", {{"scaled", {-0.5, {{"ones", {ni, 1}}}}}}},
      {"L1", {{"scaled", {-1.0, {{"ones", {ni, 1}}}}}}},
      {"L2", {{"scaled", {-0.1, {{"ones", {ni, 1}}}}}}},
      {"Z", {{"identity", ni}}},
      {"G", {{"identity", ni}}},
      {"Ghat", {{"ones", {ni, 1}}}},
      {"H", {{"ones", {ni, 1}}}},
      {"P", {{"ones", {ni, 1}}}},
      {"Rtil", {{"ones", {ni, 1}}}},
      {"Xbar11", {{"identity", ni}}},
      {"Xbar12", {{"scaled", {0.5, {{"identity", ni}}}}}},
      {"Xbar21", {{"scaled", {0.5, {{"identity", ni}}}}}},
      {"Xbar22", {{"zeros", {ni, ni}}}},
      {"kappa_hat", 0.95},
      {"k_til", 1.0},
  };

  // Output-space geometry: the safe box, three avoid boxes (two of them
  // degenerate slabs, loaded as written), two target boxes. Region letters
  // are singleton atoms; obstacle regions and the outside share the empty
  // letter, so any of them falsifies the safety conjunct.
  auto box3 = [](double l1, double u1, double l2, double u2, double l3, double u3) {
    return json::array({json::array({l1, u1}), json::array({l2, u2}),
                        json::array({l3, u3})});
  };
  json regions = json::array();
  regions.push_back({{"letter", {"t1"}}, {"boxes", {box3(-10, -6, -10, -6, -10, -6)}}});
  regions.push_back({{"letter", {"t2"}}, {"boxes", {box3(6, 10, 6, 10, 6, 10)}}});
  regions.push_back({{"letter", json::array()},
                     {"boxes",
                      {box3(-10, -6, 6, 10, 10, 10), box3(-5, 5, -5, 5, -5, 5),
                       box3(6, 10, -10, -6, 10, 10)}}});
  // the rest of the safe box S = [-14,14]^3, sliced along the third axis
  // around the removed full-dimensional boxes
  json s_boxes = json::array();
  s_boxes.push_back(box3(-14, 14, -14, 14, -14, -10));                // below T1 slab
  s_boxes.push_back(box3(-14, -10, -14, 14, -10, -6));                // T1 slab ring
  s_boxes.push_back(box3(-6, 14, -14, 14, -10, -6));
  s_boxes.push_back(box3(-10, -6, -14, -10, -10, -6));
  s_boxes.push_back(box3(-10, -6, -6, 14, -10, -6));
  s_boxes.push_back(box3(-14, 14, -14, 14, -6, -5));                  // thin belt
  s_boxes.push_back(box3(-14, -5, -14, 14, -5, 5));                   // O2 slab ring
  s_boxes.push_back(box3(5, 14, -14, 14, -5, 5));
  s_boxes.push_back(box3(-5, 5, -14, -5, -5, 5));
  s_boxes.push_back(box3(-5, 5, 5, 14, -5, 5));
  s_boxes.push_back(box3(-14, 14, -14, 14, 5, 6));                    // thin belt
  s_boxes.push_back(box3(-14, 6, -14, 14, 6, 10));                    // T2 slab ring
  s_boxes.push_back(box3(10, 14, -14, 14, 6, 10));
  s_boxes.push_back(box3(6, 10, -14, 6, 6, 10));
  s_boxes.push_back(box3(6, 10, 10, 14, 6, 10));
  s_boxes.push_back(box3(-14, 14, -14, 14, 10, 14));                  // above T2 slab
  regions.push_back({{"letter", {"s"}}, {"boxes", s_boxes}});

  json j;
  j["systems"] = {
      {"subsystems", json::array({sub, sub, sub})},
      {"coupling", {{"complete_graph", {{"nodes", n}, {"tau_numerator", 0.9}}}}},
  };
  j["certificates"] = json::array({cert, cert, cert});
  j["mu"] = {1.0, 1.0, 1.0};
  j["spec"] = {
      {"formula", "F t1 & F t2"},
      {"bounded_always", {{"operand", "s | t1 | t2"}, {"horizon", 10}}},
      {"atomic_props", {"s", "t1", "t2"}},
      {"labeling",
       {{"dim", 3}, {"regions", regions}, {"default_letter", json::array()}}},
      {"epsilon", 1.0},
      {"horizon", 10},
  };
  j["policy"] = {
      {"kind", "waypoint"},
      {"saturation", 4.0},
      {"advance_tol", 0.5},
      {"waypoints",
       {{-8.0, -8.0, -8.0},
        {-4.0, -4.0, -8.0},
        {0.9, 0.9, -5.6},
        {2.5, 2.5, 5.2},
        {8.0, 8.0, 8.0}}},
  };
  j["mc"] = {
      {"trials", trials},
      {"seed", seed},
      {"initial_concrete", {{"constant_fill", {{"dim", n}, {"value", -13.0}}}}},
      {"initial_abstract", {{"constant_fill", {{"dim", 3}, {"value", -13.0}}}}},
      {"eps_grid", {0.04, 0.1, 0.5, 1.0}},
  };
  return j;
}

}  // namespace simcert
