// One line per criterion; exit status 1 when any criterion fails.
// Usage: acceptance [--quick] [id ...]

#include "urnsa/acceptance.hpp"

#include <cstdio>
#include <cstring>
#include <string>

int main(int argc, char** argv) {
  urnsa::AcceptanceOptions options;
  for (int k = 1; k < argc; ++k) {
    if (std::strcmp(argv[k], "--quick") == 0) {
      options.quick = true;
    } else {
      options.criteria.push_back(std::stoi(argv[k]));
    }
  }
  bool all = true;
  for (const auto& r : urnsa::run_acceptance(options)) {
    all = all && r.pass;
    std::printf("%s criterion %d: %s (%.2f s, limit %.0f s)\n", r.pass ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.runtime_s, r.runtime_limit_s);
    for (const auto& m : r.measurements) {
      if (m.relation == "info") {
        std::printf("      %-70s %.6g\n", m.name.c_str(), m.value);
      } else if (m.relation == "in") {
        std::printf("    %s %-70s %.6g in [%.6g, %.6g]\n", m.pass ? "ok" : "XX", m.name.c_str(),
                    m.value, m.tolerance, m.upper.value_or(m.tolerance));
      } else {
        std::printf("    %s %-70s %.6g %s %.6g\n", m.pass ? "ok" : "XX", m.name.c_str(), m.value,
                    m.relation.c_str(), m.tolerance);
      }
    }
    for (const auto& note : r.notes) std::printf("      note: %s\n", note.c_str());
    if (!r.error.empty()) std::printf("      error: %s\n", r.error.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
