#include "bfep/instance_io.hpp"

#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

namespace bfep {

using nlohmann::json;

namespace {

void require_keys(const json& obj, const std::string& path, const std::set<std::string>& required,
                  const std::set<std::string>& optional = {}) {
  if (!obj.is_object()) throw SchemaError("expected object", path);
  for (const auto& key : required)
    if (!obj.contains(key)) throw SchemaError("missing field '" + key + "'", path);
  for (const auto& [key, _] : obj.items())
    if (!required.count(key) && !optional.count(key))
      throw SchemaError("unknown field '" + key + "'", path);
}

int get_int(const json& obj, const std::string& path) {
  if (!obj.is_number_integer() && !obj.is_number_unsigned())
    throw SchemaError("expected integer", path);
  return obj.get<int>();
}

double get_num(const json& obj, const std::string& path) {
  if (!obj.is_number()) throw SchemaError("expected number", path);
  return obj.get<double>();
}

Money as_money(const json& obj, const std::string& path) {
  if (!obj.is_number()) throw SchemaError("expected number (dollars)", path);
  return money_from_dollars(obj.get<double>());
}

std::string get_str(const json& obj, const std::string& path) {
  if (!obj.is_string()) throw SchemaError("expected string", path);
  return obj.get<std::string>();
}

template <typename T>
int index_of(const std::vector<T>& items, const std::string& id, const std::string& path) {
  for (int i = 0; i < static_cast<int>(items.size()); ++i)
    if (items[i].id == id) return i;
  throw SchemaError("unknown id '" + id + "'", path);
}

}  // namespace

Instance load_instance(const std::string& bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error& e) {
    // nlohmann reports a byte offset; recover line/column from it.
    int line = 1, col = 1;
    for (size_t i = 0; i < std::min(bytes.size(), e.byte); ++i) {
      if (bytes[i] == '\n') { ++line; col = 1; } else { ++col; }
    }
    throw ParseError(e.what(), line, col);
  }

  require_keys(doc, "$",
               {"meta", "routes", "depots", "terminals", "bus_types", "charger_types", "costs",
                "budgets", "retirement_caps", "kappa", "initial_state"});

  Instance inst;
  const json& meta = doc["meta"];
  require_keys(meta, "$.meta", {"P", "T", "gamma"}, {"rho", "service_days", "shared_budget"});
  inst.periods = get_int(meta["P"], "$.meta.P");
  inst.intervals = get_int(meta["T"], "$.meta.T");
  inst.gamma = get_num(meta["gamma"], "$.meta.gamma");
  inst.rho = meta.contains("rho") ? get_int(meta["rho"], "$.meta.rho") : 1;
  inst.service_days = meta.contains("service_days") ? get_int(meta["service_days"], "$.meta.service_days") : 1;
  if (meta.contains("shared_budget")) {
    if (!meta["shared_budget"].is_boolean()) throw SchemaError("expected bool", "$.meta.shared_budget");
    inst.shared_budget = meta["shared_budget"].get<bool>();
  }

  if (!doc["depots"].is_array()) throw SchemaError("expected array", "$.depots");
  for (size_t i = 0; i < doc["depots"].size(); ++i) {
    const std::string path = "$.depots[" + std::to_string(i) + "]";
    require_keys(doc["depots"][i], path, {"id", "host_cap"});
    inst.depots.push_back({get_str(doc["depots"][i]["id"], path + ".id"),
                           get_int(doc["depots"][i]["host_cap"], path + ".host_cap")});
  }
  if (!doc["terminals"].is_array()) throw SchemaError("expected array", "$.terminals");
  for (size_t j = 0; j < doc["terminals"].size(); ++j) {
    const std::string path = "$.terminals[" + std::to_string(j) + "]";
    require_keys(doc["terminals"][j], path, {"id", "host_cap"});
    inst.terminals.push_back({get_str(doc["terminals"][j]["id"], path + ".id"),
                              get_int(doc["terminals"][j]["host_cap"], path + ".host_cap")});
  }
  if (!doc["bus_types"].is_array()) throw SchemaError("expected array", "$.bus_types");
  for (size_t b = 0; b < doc["bus_types"].size(); ++b) {
    const std::string path = "$.bus_types[" + std::to_string(b) + "]";
    require_keys(doc["bus_types"][b], path, {"id", "battery", "price"});
    inst.bus_types.push_back({get_str(doc["bus_types"][b]["id"], path + ".id"),
                              get_int(doc["bus_types"][b]["battery"], path + ".battery"),
                              as_money(doc["bus_types"][b]["price"], path + ".price")});
  }
  if (!doc["charger_types"].is_array()) throw SchemaError("expected array", "$.charger_types");
  for (size_t k = 0; k < doc["charger_types"].size(); ++k) {
    const std::string path = "$.charger_types[" + std::to_string(k) + "]";
    require_keys(doc["charger_types"][k], path, {"id", "price"});
    inst.charger_types.push_back({get_str(doc["charger_types"][k]["id"], path + ".id"),
                                  as_money(doc["charger_types"][k]["price"], path + ".price")});
  }

  if (!doc["routes"].is_array()) throw SchemaError("expected array", "$.routes");
  for (size_t r = 0; r < doc["routes"].size(); ++r) {
    const std::string path = "$.routes[" + std::to_string(r) + "]";
    const json& jr = doc["routes"][r];
    require_keys(jr, path, {"id", "terminals", "demand", "travel"});
    Route route;
    route.id = get_str(jr["id"], path + ".id");
    if (!jr["terminals"].is_array()) throw SchemaError("expected array", path + ".terminals");
    for (const auto& tid : jr["terminals"])
      route.terminals.push_back(index_of(inst.terminals, get_str(tid, path + ".terminals"), path + ".terminals"));
    if (!jr["demand"].is_array()) throw SchemaError("expected array", path + ".demand");
    for (size_t p = 0; p < jr["demand"].size(); ++p) {
      const json& day = jr["demand"][p];
      if (!day.is_array()) throw SchemaError("expected array", path + ".demand");
      std::vector<int> row;
      for (size_t t = 0; t < day.size(); ++t)
        row.push_back(get_int(day[t], path + ".demand[" + std::to_string(p) + "][" + std::to_string(t) + "]"));
      route.demand.push_back(std::move(row));
    }
    if (!jr["travel"].is_object()) throw SchemaError("expected object", path + ".travel");
    route.travel.assign(inst.depots.size(), 0);
    for (const auto& [depot_id, val] : jr["travel"].items())
      route.travel[index_of(inst.depots, depot_id, path + ".travel")] =
          get_int(val, path + ".travel." + depot_id);
    inst.routes.push_back(std::move(route));
  }

  const json& costs = doc["costs"];
  require_keys(costs, "$.costs",
               {"service", "idle", "charge_trip", "onroute_service", "conventional_service",
                "conventional_maintenance", "onroute_bus_price", "onroute_charger_price"});
  inst.costs.service.assign(inst.bus_types.size(), 0);
  inst.costs.idle.assign(inst.bus_types.size(), 0);
  if (!costs["service"].is_object()) throw SchemaError("expected object", "$.costs.service");
  for (const auto& [bid, val] : costs["service"].items())
    inst.costs.service[index_of(inst.bus_types, bid, "$.costs.service")] =
        as_money(val, "$.costs.service." + bid);
  if (!costs["idle"].is_object()) throw SchemaError("expected object", "$.costs.idle");
  for (const auto& [bid, val] : costs["idle"].items())
    inst.costs.idle[index_of(inst.bus_types, bid, "$.costs.idle")] = as_money(val, "$.costs.idle." + bid);
  inst.costs.onroute_service = as_money(costs["onroute_service"], "$.costs.onroute_service");
  inst.costs.conventional_service = as_money(costs["conventional_service"], "$.costs.conventional_service");
  inst.costs.conventional_maintenance =
      as_money(costs["conventional_maintenance"], "$.costs.conventional_maintenance");
  inst.costs.onroute_bus_price = as_money(costs["onroute_bus_price"], "$.costs.onroute_bus_price");
  inst.costs.onroute_charger_price =
      as_money(costs["onroute_charger_price"], "$.costs.onroute_charger_price");

  // kappa and charge_trip share the nested map layout route -> bus -> depot -> charger -> [s].
  auto read_table = [&](const json& tbl, const std::string& name, auto convert, auto& out) {
    using Cell = decltype(convert(json{}, std::string{}));
    out.assign(inst.routes.size(), {});
    for (size_t r = 0; r < inst.routes.size(); ++r)
      out[r].assign(inst.bus_types.size(), {});
    if (!tbl.is_object()) throw SchemaError("expected object", name);
    for (const auto& [rid, by_bus] : tbl.items()) {
      const int r = index_of(inst.routes, rid, name);
      if (!by_bus.is_object()) throw SchemaError("expected object", name + "." + rid);
      for (const auto& [bid, by_depot] : by_bus.items()) {
        const int b = index_of(inst.bus_types, bid, name + "." + rid);
        out[r][b].assign(inst.depots.size(), {});
        if (!by_depot.is_object()) throw SchemaError("expected object", name + "." + rid + "." + bid);
        for (const auto& [iid, by_charger] : by_depot.items()) {
          const int i = index_of(inst.depots, iid, name + "." + rid + "." + bid);
          out[r][b][i].assign(inst.charger_types.size(), {});
          if (!by_charger.is_object())
            throw SchemaError("expected object", name + "." + rid + "." + bid + "." + iid);
          for (const auto& [kid, arr] : by_charger.items()) {
            const int k = index_of(inst.charger_types, kid, name + "." + rid + "." + bid + "." + iid);
            if (!arr.is_array())
              throw SchemaError("expected array", name + "." + rid + "." + bid + "." + iid + "." + kid);
            std::vector<Cell> col;
            for (const auto& v : arr)
              col.push_back(convert(v, name + "." + rid + "." + bid + "." + iid + "." + kid));
            out[r][b][i][k] = std::move(col);
          }
        }
      }
    }
  };
  read_table(doc["kappa"], "$.kappa",
             [](const json& v, const std::string& p) { return get_int(v, p); }, inst.kappa);
  read_table(costs["charge_trip"], "$.costs.charge_trip",
             [](const json& v, const std::string& p) { return as_money(v, p); }, inst.charge_cost);

  if (!doc["budgets"].is_array()) throw SchemaError("expected array", "$.budgets");
  for (size_t p = 0; p < doc["budgets"].size(); ++p)
    inst.budgets.push_back(as_money(doc["budgets"][p], "$.budgets[" + std::to_string(p) + "]"));
  if (!doc["retirement_caps"].is_array()) throw SchemaError("expected array", "$.retirement_caps");
  for (size_t p = 0; p < doc["retirement_caps"].size(); ++p)
    inst.retirement_caps.push_back(
        get_int(doc["retirement_caps"][p], "$.retirement_caps[" + std::to_string(p) + "]"));

  const json& x0 = doc["initial_state"];
  require_keys(x0, "$.initial_state",
               {"chi_depot", "chi_terminal", "eta_depot", "eta_onroute", "eta_conventional"});
  inst.initial_state = zero_state(inst);
  for (const auto& [iid, by_charger] : x0["chi_depot"].items()) {
    const int i = index_of(inst.depots, iid, "$.initial_state.chi_depot");
    for (const auto& [kid, v] : by_charger.items())
      inst.initial_state.chi_depot[i][index_of(inst.charger_types, kid, "$.initial_state.chi_depot")] =
          get_int(v, "$.initial_state.chi_depot." + iid + "." + kid);
  }
  for (const auto& [jid, v] : x0["chi_terminal"].items())
    inst.initial_state.chi_terminal[index_of(inst.terminals, jid, "$.initial_state.chi_terminal")] =
        get_int(v, "$.initial_state.chi_terminal." + jid);
  for (const auto& [rid, by_bus] : x0["eta_depot"].items()) {
    const int r = index_of(inst.routes, rid, "$.initial_state.eta_depot");
    for (const auto& [bid, v] : by_bus.items())
      inst.initial_state.eta_depot[r][index_of(inst.bus_types, bid, "$.initial_state.eta_depot")] =
          get_int(v, "$.initial_state.eta_depot." + rid + "." + bid);
  }
  for (const auto& [rid, v] : x0["eta_onroute"].items())
    inst.initial_state.eta_onroute[index_of(inst.routes, rid, "$.initial_state.eta_onroute")] =
        get_int(v, "$.initial_state.eta_onroute." + rid);
  for (const auto& [rid, v] : x0["eta_conventional"].items())
    inst.initial_state.eta_conventional[index_of(inst.routes, rid, "$.initial_state.eta_conventional")] =
        get_int(v, "$.initial_state.eta_conventional." + rid);

  return inst;
}

std::string save_instance(const Instance& inst) {
  json doc;
  doc["meta"] = {{"P", inst.periods},       {"T", inst.intervals},
                 {"gamma", inst.gamma},     {"rho", inst.rho},
                 {"service_days", inst.service_days}, {"shared_budget", inst.shared_budget}};

  doc["depots"] = json::array();
  for (const auto& d : inst.depots) doc["depots"].push_back({{"id", d.id}, {"host_cap", d.host_cap}});
  doc["terminals"] = json::array();
  for (const auto& t : inst.terminals)
    doc["terminals"].push_back({{"id", t.id}, {"host_cap", t.host_cap}});
  doc["bus_types"] = json::array();
  for (const auto& b : inst.bus_types)
    doc["bus_types"].push_back(
        {{"id", b.id}, {"battery", b.battery}, {"price", money_to_dollars(b.price)}});
  doc["charger_types"] = json::array();
  for (const auto& k : inst.charger_types)
    doc["charger_types"].push_back({{"id", k.id}, {"price", money_to_dollars(k.price)}});

  doc["routes"] = json::array();
  for (const auto& r : inst.routes) {
    json jr = {{"id", r.id}, {"demand", r.demand}};
    jr["terminals"] = json::array();
    for (int j : r.terminals) jr["terminals"].push_back(inst.terminals[j].id);
    jr["travel"] = json::object();
    for (size_t i = 0; i < r.travel.size(); ++i) jr["travel"][inst.depots[i].id] = r.travel[i];
    doc["routes"].push_back(std::move(jr));
  }

  json costs;
  costs["service"] = json::object();
  costs["idle"] = json::object();
  for (size_t b = 0; b < inst.bus_types.size(); ++b) {
    costs["service"][inst.bus_types[b].id] = money_to_dollars(inst.costs.service[b]);
    costs["idle"][inst.bus_types[b].id] = money_to_dollars(inst.costs.idle[b]);
  }
  costs["onroute_service"] = money_to_dollars(inst.costs.onroute_service);
  costs["conventional_service"] = money_to_dollars(inst.costs.conventional_service);
  costs["conventional_maintenance"] = money_to_dollars(inst.costs.conventional_maintenance);
  costs["onroute_bus_price"] = money_to_dollars(inst.costs.onroute_bus_price);
  costs["onroute_charger_price"] = money_to_dollars(inst.costs.onroute_charger_price);

  auto write_table = [&](const auto& table, auto convert) {
    json out = json::object();
    for (size_t r = 0; r < inst.routes.size(); ++r)
      for (size_t b = 0; b < inst.bus_types.size(); ++b) {
        if (table[r][b].empty()) continue;
        for (size_t i = 0; i < inst.depots.size(); ++i)
          for (size_t k = 0; k < inst.charger_types.size(); ++k) {
            json arr = json::array();
            for (const auto& v : table[r][b][i][k]) arr.push_back(convert(v));
            out[inst.routes[r].id][inst.bus_types[b].id][inst.depots[i].id]
               [inst.charger_types[k].id] = std::move(arr);
          }
      }
    return out;
  };
  doc["kappa"] = write_table(inst.kappa, [](int v) { return json(v); });
  costs["charge_trip"] = write_table(inst.charge_cost, [](Money v) { return json(money_to_dollars(v)); });
  doc["costs"] = std::move(costs);

  doc["budgets"] = json::array();
  for (Money m : inst.budgets) doc["budgets"].push_back(money_to_dollars(m));
  doc["retirement_caps"] = inst.retirement_caps;

  json x0;
  x0["chi_depot"] = json::object();
  for (size_t i = 0; i < inst.depots.size(); ++i)
    for (size_t k = 0; k < inst.charger_types.size(); ++k)
      x0["chi_depot"][inst.depots[i].id][inst.charger_types[k].id] =
          inst.initial_state.chi_depot[i][k];
  x0["chi_terminal"] = json::object();
  for (size_t j = 0; j < inst.terminals.size(); ++j)
    x0["chi_terminal"][inst.terminals[j].id] = inst.initial_state.chi_terminal[j];
  x0["eta_depot"] = json::object();
  for (size_t r = 0; r < inst.routes.size(); ++r)
    for (size_t b = 0; b < inst.bus_types.size(); ++b)
      x0["eta_depot"][inst.routes[r].id][inst.bus_types[b].id] = inst.initial_state.eta_depot[r][b];
  x0["eta_onroute"] = json::object();
  x0["eta_conventional"] = json::object();
  for (size_t r = 0; r < inst.routes.size(); ++r) {
    x0["eta_onroute"][inst.routes[r].id] = inst.initial_state.eta_onroute[r];
    x0["eta_conventional"][inst.routes[r].id] = inst.initial_state.eta_conventional[r];
  }
  doc["initial_state"] = std::move(x0);

  return doc.dump(2) + "\n";
}

Instance load_instance_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_instance(ss.str());
}

void save_instance_file(const Instance& inst, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write instance file: " + path);
  out << save_instance(inst);
}

}  // namespace bfep
