#pragma once

#include <string>
#include <vector>

namespace corpus {

struct Entry {
  std::string sequent;
  bool provable;
  // Entries 0..12 double as the validity round-trip set; 13..17 are the fixed
  // negative validity set.
  bool round_trip_core;
};

inline const std::vector<Entry>& golden() {
  static const std::vector<Entry> entries{
      // provable, validity round-trip core
      {"|- a -o a", true, true},
      {"a, b |- a * b", true, true},
      {"a * b |- b * a", true, true},
      {"a & b |- a", true, true},
      {"a |- a + b", true, true},
      {"|- 1", true, true},
      {"1, a |- a", true, true},
      {"0 |- c", true, true},
      {"|- top", true, true},
      {"!a |- a", true, true},
      {"!a |- a * a", true, true},
      {"!a |- !!a", true, true},
      {"!(a & b) |- !a * !b", true, true},
      // fixed negative validity set
      {"a |- a * a", false, true},
      {"a + b |- a", false, true},
      {"a |- !a", false, true},
      {"|- 0", false, true},
      {"a * b |- a", false, true},
      // further positives
      {"a, a -o b |- b", true, false},
      {"a -o b, b -o c, a |- c", true, false},
      {"a * b -o c |- a -o (b -o c)", true, false},
      {"a & b |- b & a", true, false},
      {"a + b |- b + a", true, false},
      {"a |- top", true, false},
      {"!a, b |- b", true, false},
      {"!(a -o b), !a |- !b", true, false},
      // further negatives
      {"a, b |- a", false, false},
      {"|- a", false, false},
      {"a |- b", false, false},
      {"a -o b |- b", false, false},
  };
  return entries;
}

}  // namespace corpus
