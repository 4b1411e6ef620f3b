#pragma once

#include <optional>
#include <string>
#include <vector>

#include "privdet/privacy.hpp"
#include "privdet/system_model.hpp"

namespace privdet {

// A system plus everything the experiments may attach to it.
struct Scenario {
  InterconnectedSystem system;
  // One mechanism per non-detector subsystem, ascending ("mechanism" sections).
  std::vector<PrivacyMechanism> mechanisms;
  // Optional second configuration ("mechanism2" sections) for comparisons.
  std::vector<PrivacyMechanism> mechanisms_alt;
  std::optional<AttackSignal> attack;
  std::optional<int> horizon;
  std::optional<double> p_false_alarm;
};

// Plain-text scenario format: '#' comments; top-level "subsystems N" /
// "horizon T" / "p_false_alarm x" lines; "[subsystem k]", "[mechanism k]",
// "[mechanism2 k]", "[attack]" sections (k is 1-based); inside a section,
// matrices as "name rows cols" followed by `rows` whitespace rows.
// Subsystem matrices: A B Ba C Sigma_w Sigma_v Sigma_x0 (Ba optional).
// Mechanism matrices: S Sigma_r.  Attack: "subsystem k" + values (T x r).
Scenario load_scenario(const std::string& path);

// CSV with "# key value" metadata lines before the header; every number
// is written with %.12g so identical runs produce identical bytes.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  ~CsvWriter();

  void metadata(const std::string& key, const std::string& value);
  void metadata(const std::string& key, double value);
  void header(const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);

 private:
  struct Impl;
  Impl* impl_;
};

std::string format_double(double value);

}  // namespace privdet
