#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>

#include "plumeinv/dual.hpp"
#include "plumeinv/errors.hpp"

namespace plumeinv {

enum class DispersionScheme { Draxler, Smith, Briggs };
enum class AscClass { A, B, C, D, E, F };

std::string to_string(DispersionScheme s);
std::string to_string(AscClass c);
DispersionScheme dispersion_scheme_from_string(const std::string& s);
AscClass asc_class_from_string(const std::string& s);

/// One sigma curve, sigma(x) = a * x^b * (1 + c * x^d)^e with x the downwind
/// distance in meters. Covers the published Briggs open-country power laws
/// (b = 1, d = 1, e in {-1/2, -1}) and the Hosker rational fits used for the
/// Smith curves (e = -1). Pure power laws set c = 0.
struct SigmaFormula {
  double a = 0.0;  ///< leading coefficient, must be > 0
  double b = 1.0;  ///< distance exponent, must be > 0
  double c = 0.0;  ///< rational-term coefficient, must be >= 0
  double d = 1.0;  ///< rational-term exponent, must be > 0
  double e = 1.0;  ///< rational-term power

  template <class S>
  S eval(const S& x) const {
    using std::pow;
    S s = a * pow(x, b);
    if (c != 0.0) s = s * pow(S(1.0) + c * pow(x, d), e);
    return s;
  }
};

struct AscEntry {
  SigmaFormula sigma_h;
  SigmaFormula sigma_v;
};

/// Immutable store of per-(scheme, class) sigma curves, loaded from the
/// versioned data file shipped under data/. Validation requires every class
/// A-F for both table schemes.
class AscCoefficientStore {
 public:
  static AscCoefficientStore load(const std::filesystem::path& file);
  static AscCoefficientStore from_json_text(const std::string& text,
                                            const std::string& origin);

  const AscEntry& entry(DispersionScheme scheme, AscClass cls) const;
  std::size_t size() const { return entries_.size(); }
  int version() const { return version_; }

  std::string to_json_text() const;
  void save(const std::filesystem::path& file) const;

 private:
  std::map<std::pair<DispersionScheme, AscClass>, AscEntry> entries_;
  int version_ = 0;
};

}  // namespace plumeinv
