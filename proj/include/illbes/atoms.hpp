#pragma once

#include <compare>
#include <string>
#include <utility>

#include "illbes/errors.hpp"

namespace illbes {

// Propositional atoms. User atoms come from the surface syntax
// ([a-z][a-zA-Z0-9_]*); flattened atoms live in a reserved namespace,
// rendered "#<name>", and never collide with user atoms. The unit mirrors
// "#top", "#one", "#zero" are fixed flattened atoms standing for the units
// when they occur inside atomic rules.
class AtomId {
 public:
  enum class Ns : unsigned char { User = 0, Flattened = 1 };

  AtomId() : ns_(Ns::User), name_("?") {}

  static AtomId user(std::string name) { return AtomId(Ns::User, std::move(name)); }
  static AtomId flattened(std::string name) { return AtomId(Ns::Flattened, std::move(name)); }
  static AtomId fresh(std::size_t index) { return flattened(std::to_string(index)); }
  static AtomId top_mirror() { return flattened("top"); }
  static AtomId one_mirror() { return flattened("one"); }
  static AtomId zero_mirror() { return flattened("zero"); }

  Ns ns() const { return ns_; }
  const std::string& name() const { return name_; }
  bool is_user() const { return ns_ == Ns::User; }
  bool is_flattened() const { return ns_ == Ns::Flattened; }

  std::string text() const { return is_flattened() ? "#" + name_ : name_; }

  friend bool operator==(const AtomId& a, const AtomId& b) {
    return a.ns_ == b.ns_ && a.name_ == b.name_;
  }
  friend std::strong_ordering operator<=>(const AtomId& a, const AtomId& b) {
    if (a.ns_ != b.ns_) return a.ns_ <=> b.ns_;
    return a.name_ <=> b.name_;
  }

 private:
  AtomId(Ns ns, std::string name) : ns_(ns), name_(std::move(name)) {}
  Ns ns_;
  std::string name_;
};

inline bool valid_user_atom_name(const std::string& s) {
  if (s.empty() || s[0] < 'a' || s[0] > 'z') return false;
  for (char c : s)
    if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_'))
      return false;
  return true;
}

// Parses an atom token: either a user atom or "#digits" / "#top" / "#one" /
// "#zero". Other "#..." spellings are rejected.
inline AtomId atom_from_text(const std::string& s) {
  if (!s.empty() && s[0] == '#') {
    std::string body = s.substr(1);
    if (body == "top" || body == "one" || body == "zero") return AtomId::flattened(body);
    if (!body.empty()) {
      bool digits = true;
      for (char c : body) digits = digits && c >= '0' && c <= '9';
      if (digits) return AtomId::flattened(body);
    }
    throw IoError("malformed flattened atom '" + s + "'");
  }
  if (s == "top") throw IoError("'top' is a reserved token, not an atom");
  if (!valid_user_atom_name(s)) throw IoError("malformed atom name '" + s + "'");
  return AtomId::user(s);
}

}  // namespace illbes
