#include "plumeinv/asc_tables.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace plumeinv {

using nlohmann::json;

std::string to_string(DispersionScheme s) {
  switch (s) {
    case DispersionScheme::Draxler: return "draxler";
    case DispersionScheme::Smith: return "smith";
    case DispersionScheme::Briggs: return "briggs";
  }
  return "?";
}

std::string to_string(AscClass c) {
  static const char* names = "ABCDEF";
  return std::string(1, names[static_cast<int>(c)]);
}

DispersionScheme dispersion_scheme_from_string(const std::string& s) {
  if (s == "draxler") return DispersionScheme::Draxler;
  if (s == "smith") return DispersionScheme::Smith;
  if (s == "briggs") return DispersionScheme::Briggs;
  throw ConfigError("unknown dispersion scheme: '" + s + "'");
}

AscClass asc_class_from_string(const std::string& s) {
  if (s.size() == 1 && s[0] >= 'A' && s[0] <= 'F')
    return static_cast<AscClass>(s[0] - 'A');
  throw ConfigError("unknown stability class: '" + s + "' (expected A-F)");
}

namespace {

SigmaFormula formula_from_json(const json& j, const std::string& where) {
  SigmaFormula f;
  f.a = j.at("a").get<double>();
  f.b = j.at("b").get<double>();
  f.c = j.value("c", 0.0);
  f.d = j.value("d", 1.0);
  f.e = j.value("e", 1.0);
  if (!(f.a > 0.0)) throw ConfigError(where + ": coefficient a must be > 0");
  if (!(f.b > 0.0)) throw ConfigError(where + ": exponent b must be > 0");
  if (f.c < 0.0) throw ConfigError(where + ": coefficient c must be >= 0");
  if (!(f.d > 0.0)) throw ConfigError(where + ": exponent d must be > 0");
  return f;
}

json formula_to_json(const SigmaFormula& f) {
  return json{{"a", f.a}, {"b", f.b}, {"c", f.c}, {"d", f.d}, {"e", f.e}};
}

}  // namespace

AscCoefficientStore AscCoefficientStore::from_json_text(
    const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(origin + ": " + e.what());
  }

  AscCoefficientStore store;
  store.version_ = j.value("version", 1);
  const json& schemes = j.at("schemes");
  for (DispersionScheme scheme : {DispersionScheme::Smith, DispersionScheme::Briggs}) {
    const std::string sname = to_string(scheme);
    if (!schemes.contains(sname))
      throw ConfigError(origin + ": missing scheme '" + sname + "'");
    for (int c = 0; c < 6; ++c) {
      const AscClass cls = static_cast<AscClass>(c);
      const std::string cname = to_string(cls);
      const std::string where = sname + "/" + cname;
      if (!schemes.at(sname).contains(cname))
        throw ConfigError(origin + ": missing class " +
                          (char(std::toupper(sname[0])) + sname.substr(1)) + "/" + cname);
      const json& e = schemes.at(sname).at(cname);
      AscEntry entry;
      entry.sigma_h = formula_from_json(e.at("sigma_h"), where + "/sigma_h");
      entry.sigma_v = formula_from_json(e.at("sigma_v"), where + "/sigma_v");
      store.entries_[{scheme, cls}] = entry;
    }
  }
  return store;
}

AscCoefficientStore AscCoefficientStore::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open coefficient file: " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str(), file.filename().string());
}

const AscEntry& AscCoefficientStore::entry(DispersionScheme scheme,
                                           AscClass cls) const {
  auto it = entries_.find({scheme, cls});
  if (it == entries_.end()) {
    std::string sname = to_string(scheme);
    sname[0] = static_cast<char>(std::toupper(sname[0]));
    throw ConfigError("no coefficients for " + sname + "/" + to_string(cls));
  }
  return it->second;
}

std::string AscCoefficientStore::to_json_text() const {
  json schemes = json::object();
  for (const auto& [key, entry] : entries_) {
    schemes[to_string(key.first)][to_string(key.second)] = {
        {"sigma_h", formula_to_json(entry.sigma_h)},
        {"sigma_v", formula_to_json(entry.sigma_v)}};
  }
  json j{{"version", version_}, {"schemes", schemes}};
  return j.dump(2) + "\n";
}

void AscCoefficientStore::save(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write coefficient file: " + file.string());
  out << to_json_text();
}

}  // namespace plumeinv
