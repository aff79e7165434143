// SPDX-License-Identifier: Apache-2.0
#include "mamc/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace mamc {

using nlohmann::json;

namespace {

json vec2_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

Vec2 vec2_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("expected a 2-element array");
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

json config_to_json(const SystemConfig& cfg) {
  json j;
  j["M"] = cfg.num_tx;
  j["group_sizes"] = cfg.group_sizes;
  j["L"] = cfg.num_paths;
  j["A"] = cfg.region_size;
  j["D"] = cfg.min_distance;
  j["pmax_dbm"] = watt_to_dbm(cfg.pmax_w);
  j["noise_dbm"] = watt_to_dbm(cfg.noise_w);
  if (!cfg.noise_override.empty()) {
    json arr = json::array();
    for (double s : cfg.noise_override) arr.push_back(watt_to_dbm(s));
    j["noise_dbm_per_user"] = arr;
  }
  j["weight"] = cfg.weight;
  if (!cfg.weight_override.empty()) j["weights"] = cfg.weight_override;
  j["c0_db"] = linear_to_db(cfg.c0);
  j["pathloss_exponent"] = cfg.pathloss_exponent;
  j["bs_location"] = vec2_json(cfg.bs_location);
  j["user_disk_center"] = vec2_json(cfg.user_disk_center);
  j["user_disk_radius"] = cfg.user_disk_radius;
  j["epsilon"] = cfg.epsilon;
  j["seed"] = cfg.rng_seed;
  return j;
}

SystemConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{
      "M", "group_sizes", "L", "A", "D", "pmax_dbm", "pmax_w", "noise_dbm", "noise_w",
      "noise_dbm_per_user", "weight", "weights", "c0_db", "c0", "pathloss_exponent", "bs_location",
      "user_disk_center", "user_disk_radius", "epsilon", "seed"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  SystemConfig cfg;
  try {
    if (j.contains("M")) cfg.num_tx = j["M"].get<int>();
    if (j.contains("group_sizes")) cfg.group_sizes = j["group_sizes"].get<std::vector<int>>();
    if (j.contains("L")) cfg.num_paths = j["L"].get<int>();
    if (j.contains("A")) cfg.region_size = j["A"].get<double>();
    if (j.contains("D")) cfg.min_distance = j["D"].get<double>();
    if (j.contains("pmax_dbm")) cfg.pmax_w = dbm_to_watt(j["pmax_dbm"].get<double>());
    if (j.contains("pmax_w")) cfg.pmax_w = j["pmax_w"].get<double>();
    if (j.contains("noise_dbm")) cfg.noise_w = dbm_to_watt(j["noise_dbm"].get<double>());
    if (j.contains("noise_w")) cfg.noise_w = j["noise_w"].get<double>();
    if (j.contains("noise_dbm_per_user")) {
      cfg.noise_override.clear();
      for (double d : j["noise_dbm_per_user"].get<std::vector<double>>()) cfg.noise_override.push_back(dbm_to_watt(d));
    }
    if (j.contains("weight")) cfg.weight = j["weight"].get<double>();
    if (j.contains("weights")) cfg.weight_override = j["weights"].get<std::vector<double>>();
    if (j.contains("c0_db")) cfg.c0 = db_to_linear(j["c0_db"].get<double>());
    if (j.contains("c0")) cfg.c0 = j["c0"].get<double>();
    if (j.contains("pathloss_exponent")) cfg.pathloss_exponent = j["pathloss_exponent"].get<double>();
    if (j.contains("bs_location")) cfg.bs_location = vec2_from(j["bs_location"]);
    if (j.contains("user_disk_center")) cfg.user_disk_center = vec2_from(j["user_disk_center"]);
    if (j.contains("user_disk_radius")) cfg.user_disk_radius = j["user_disk_radius"].get<double>();
    if (j.contains("epsilon")) cfg.epsilon = j["epsilon"].get<double>();
    if (j.contains("seed")) cfg.rng_seed = j["seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError("cannot parse '" + path.string() + "': " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

SystemConfig load_config(const std::filesystem::path& path) { return config_from_json(read_json_file(path)); }

json scenario_to_json(const Scenario& sc) {
  json j;
  json cfg = config_to_json(sc.config);
  // exact linear values so a snapshot replays bit for bit
  cfg["pmax_w"] = sc.config.pmax_w;
  cfg["noise_w"] = sc.config.noise_w;
  cfg["c0"] = sc.config.c0;
  cfg.erase("pmax_dbm");
  cfg.erase("noise_dbm");
  cfg.erase("c0_db");
  if (!sc.config.noise_override.empty()) {
    cfg.erase("noise_dbm_per_user");
    cfg["noise_w_per_user"] = sc.config.noise_override;
  }
  j["config"] = cfg;
  json users = json::array();
  for (const auto& u : sc.users) {
    json ju;
    ju["group"] = u.group;
    ju["location"] = vec2_json(u.location);
    ju["distance"] = u.distance;
    auto angles = [](const std::vector<PathAngles>& a) {
      json arr = json::array();
      for (const auto& p : a) arr.push_back(json::array({p.theta, p.phi}));
      return arr;
    };
    ju["tx_angles"] = angles(u.tx_angles);
    ju["rx_angles"] = angles(u.rx_angles);
    json rows = json::array();
    for (Eigen::Index r = 0; r < u.path_response.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < u.path_response.cols(); ++c) {
        const cdouble z = u.path_response(r, c);
        row.push_back(json::array({z.real(), z.imag()}));
      }
      rows.push_back(row);
    }
    ju["path_response"] = rows;
    users.push_back(ju);
  }
  j["users"] = users;
  return j;
}

Scenario scenario_from_json(const json& j) {
  Scenario sc;
  try {
    json cfg = j.at("config");
    std::vector<double> per_user;
    if (cfg.contains("noise_w_per_user")) {
      per_user = cfg["noise_w_per_user"].get<std::vector<double>>();
      cfg.erase("noise_w_per_user");
    }
    sc.config = config_from_json(cfg);
    if (!per_user.empty()) {
      sc.config.noise_override = per_user;
      sc.config.validate();
    }
    for (const auto& ju : j.at("users")) {
      UserChannel u;
      u.group = ju.at("group").get<int>();
      u.location = vec2_from(ju.at("location"));
      u.distance = ju.at("distance").get<double>();
      for (const auto& a : ju.at("tx_angles")) u.tx_angles.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
      for (const auto& a : ju.at("rx_angles")) u.rx_angles.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
      u.refresh_directions();
      const auto& rows = ju.at("path_response");
      u.path_response = CMatrix::Zero(static_cast<Eigen::Index>(rows.size()),
                                      static_cast<Eigen::Index>(u.tx_angles.size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != u.tx_angles.size()) throw ConfigError("path_response row has wrong length");
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
          u.path_response(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
              cdouble(rows[r][c].at(0).get<double>(), rows[r][c].at(1).get<double>());
        }
      }
      if (rows.size() != u.rx_angles.size()) throw ConfigError("path_response has wrong row count");
      sc.users.push_back(std::move(u));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario snapshot error: ") + e.what());
  }
  if (sc.num_users() != sc.config.num_users()) throw ConfigError("user count does not match group_sizes");
  sc.rebuild_groups();
  return sc;
}

json problem_to_json(const MaxEtaProblem& p) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  auto mat = [&](const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec(m.row(r).transpose()));
    return rows;
  };
  auto bound = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json j;
  j["n_vars"] = p.n_vars;
  j["eta_index"] = p.eta_index;
  json aff = json::array();
  for (const auto& c : p.affine) aff.push_back({{"a", vec(c.a)}, {"b", c.b}});
  json quad = json::array();
  for (const auto& c : p.quadratic) quad.push_back({{"Q", mat(c.Q)}, {"q", vec(c.q)}, {"c", c.c}});
  json nrm = json::array();
  for (const auto& c : p.norm) nrm.push_back({{"S", mat(c.S)}, {"s", vec(c.s)}, {"rho", c.rho}});
  j["affine"] = aff;
  j["quadratic"] = quad;
  j["norm"] = nrm;
  json lo = json::array(), hi = json::array();
  for (Eigen::Index i = 0; i < p.n_vars; ++i) {
    lo.push_back(bound(p.lower[i]));
    hi.push_back(bound(p.upper[i]));
  }
  j["lower"] = lo;
  j["upper"] = hi;
  return j;
}

MaxEtaProblem problem_from_json(const json& j) {
  auto vec = [](const json& a) {
    const auto v = a.get<std::vector<double>>();
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  auto mat = [&](const json& rows, Eigen::Index cols) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) m.row(static_cast<Eigen::Index>(r)) = vec(rows[r]).transpose();
    return m;
  };
  const auto n = j.at("n_vars").get<Eigen::Index>();
  MaxEtaProblem p(n, j.at("eta_index").get<Eigen::Index>());
  for (const auto& c : j.at("affine")) p.add_affine(vec(c.at("a")), c.at("b").get<double>());
  for (const auto& c : j.at("quadratic")) p.add_quadratic(mat(c.at("Q"), n), vec(c.at("q")), c.at("c").get<double>());
  for (const auto& c : j.at("norm")) p.add_norm(mat(c.at("S"), n), vec(c.at("s")), c.at("rho").get<double>());
  const double inf = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& lo = j.at("lower").at(static_cast<std::size_t>(i));
    const auto& hi = j.at("upper").at(static_cast<std::size_t>(i));
    p.set_bounds(i, lo.is_null() ? -inf : lo.get<double>(), hi.is_null() ? inf : hi.get<double>());
  }
  return p;
}

void dump_problem(const MaxEtaProblem& p, const std::filesystem::path& path) {
  write_text_file(path, problem_to_json(p).dump(2) + "\n");
}

void write_trace_csv(std::ostream& os, const IterationTrace& trace) {
  os << kTraceHeader << '\n';
  for (const auto& r : trace.records) {
    std::string tx;
    for (std::size_t m = 0; m < r.tx_status.size(); ++m) {
      if (m) tx += ';';
      tx += block_status_name(r.tx_status[m]);
    }
    const double db = r.objective > 0.0 ? linear_to_db(r.objective) : -std::numeric_limits<double>::infinity();
    os << r.iteration << ',' << fmt_double(r.objective) << ',' << fmt_double(db) << ','
       << (r.iteration == 0 ? std::string_view("initial") : block_status_name(r.beam_status)) << ',' << tx << ','
       << (r.iteration == 0 ? std::string_view("initial") : block_status_name(r.rx_status)) << '\n';
  }
}

void write_trace_csv(const IterationTrace& trace, const std::filesystem::path& path) {
  std::ostringstream os;
  write_trace_csv(os, trace);
  write_text_file(path, os.str());
}

}  // namespace mamc
