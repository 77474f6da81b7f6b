#include "bmcd/manifold_file.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bmcd/error.hpp"

namespace bmcd {

namespace {

using json = nlohmann::json;

LoadedManifold from_zoo(ZooEntry e) {
  ChartManifold m = e.manifold;
  return {std::move(m), std::move(e)};
}

std::string metric_entry(const json& metric, int i, int j, std::set<std::string>& seen) {
  const std::string keys[] = {"g_" + std::to_string(i) + "_" + std::to_string(j),
                              "g_" + std::to_string(j) + "_" + std::to_string(i),
                              "g" + std::to_string(i) + std::to_string(j),
                              "g" + std::to_string(j) + std::to_string(i)};
  const bool short_ok = i < 10 && j < 10;
  std::optional<std::string> found;
  for (int k = 0; k < 4; ++k) {
    if (k >= 2 && !short_ok) break;
    auto it = metric.find(keys[k]);
    if (it == metric.end()) continue;
    seen.insert(keys[k]);
    if (!it->is_string()) throw InputError("metric entry " + keys[k] + " must be an expression string");
    if (found && *found != it->get<std::string>())
      throw InputError("conflicting metric entries for g_" + std::to_string(i) + "_" + std::to_string(j));
    found = it->get<std::string>();
  }
  if (!found) throw InputError("missing metric entry g" + std::to_string(i) + std::to_string(j));
  return *found;
}

}  // namespace

LoadedManifold parse_manifold_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("manifold file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InputError("manifold file must hold a JSON object");

  if (auto b = doc.find("builtin"); b != doc.end()) {
    if (b->is_string()) return from_zoo(builtin(b->get<std::string>()));
    if (b->is_object() && b->contains("name") && (*b)["name"].is_string()) {
      std::vector<double> params;
      if (b->contains("params")) {
        if (!(*b)["params"].is_array()) throw InputError("builtin params must be an array of numbers");
        for (const auto& p : (*b)["params"]) {
          if (!p.is_number()) throw InputError("builtin params must be an array of numbers");
          params.push_back(p.get<double>());
        }
      }
      return from_zoo(builtin((*b)["name"].get<std::string>(), params));
    }
    throw InputError("builtin must be a name string or {\"name\", \"params\"}");
  }

  if (!doc.contains("dim") || !doc["dim"].is_number_integer()) throw InputError("manifold file needs an integer dim");
  const int n = doc["dim"].get<int>();
  if (n < 1 || n > 16) throw InputError("dim must lie in [1, 16]");
  if (!doc.contains("domain") || !doc["domain"].is_array() || doc["domain"].size() != static_cast<std::size_t>(2 * n))
    throw InputError("domain must list 2*dim numbers: lo1, hi1, lo2, hi2, ...");
  Box box{Vec(n), Vec(n)};
  for (int i = 0; i < n; ++i) {
    const auto& lo = doc["domain"][static_cast<std::size_t>(2 * i)];
    const auto& hi = doc["domain"][static_cast<std::size_t>(2 * i + 1)];
    if (!lo.is_number() || !hi.is_number()) throw InputError("domain entries must be numbers");
    box.lo(i) = lo.get<double>();
    box.hi(i) = hi.get<double>();
    if (!(box.lo(i) < box.hi(i))) throw InputError("domain needs lo < hi on every axis");
  }
  if (!doc.contains("metric") || !doc["metric"].is_object()) throw InputError("manifold file needs a metric object");
  std::vector<std::string> lower;
  std::set<std::string> seen;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= i; ++j) lower.push_back(metric_entry(doc["metric"], i, j, seen));
  for (const auto& item : doc["metric"].items())
    if (!seen.count(item.key())) throw InputError("unexpected metric entry " + item.key());
  std::string V = "0";
  if (auto w = doc.find("weight"); w != doc.end()) {
    if (!w->is_object() || !w->contains("V") || !(*w)["V"].is_string())
      throw InputError("weight must be {\"V\": expression}");
    V = (*w)["V"].get<std::string>();
  }
  std::string name = "file";
  if (auto nm = doc.find("name"); nm != doc.end() && nm->is_string()) name = nm->get<std::string>();
  return {ChartManifold::from_strings(n, box, lower, V, name), std::nullopt};
}

LoadedManifold load_manifold(const std::string& spec) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(spec, ec)) {
    std::ifstream in(spec);
    if (!in) throw InputError("cannot read manifold file " + spec);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_manifold_json(ss.str());
  }
  return from_zoo(builtin(spec));
}

}  // namespace bmcd
