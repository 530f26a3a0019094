#pragma once

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "illbes/atomic.hpp"
#include "illbes/base.hpp"
#include "illbes/errors.hpp"
#include "illbes/formula.hpp"
#include "illbes/nill.hpp"
#include "illbes/semantics.hpp"

namespace illbes {

// Canonical field order matters for golden files, so everything goes through
// ordered_json.
using Json = nlohmann::ordered_json;

// --- formulas, multisets, sequents ------------------------------------------

inline Json to_json(const Formula& f) {
  switch (f.kind()) {
    case FormulaKind::Atom: return Json{{"k", "atom"}, {"name", f.atom_id().text()}};
    case FormulaKind::Top: return Json{{"k", "top"}};
    case FormulaKind::Zero: return Json{{"k", "zero"}};
    case FormulaKind::One: return Json{{"k", "one"}};
    case FormulaKind::Lolli:
      return Json{{"k", "lolli"}, {"l", to_json(f.left())}, {"r", to_json(f.right())}};
    case FormulaKind::Tensor:
      return Json{{"k", "tensor"}, {"l", to_json(f.left())}, {"r", to_json(f.right())}};
    case FormulaKind::With:
      return Json{{"k", "with"}, {"l", to_json(f.left())}, {"r", to_json(f.right())}};
    case FormulaKind::Plus:
      return Json{{"k", "plus"}, {"l", to_json(f.left())}, {"r", to_json(f.right())}};
    case FormulaKind::Bang: return Json{{"k", "bang"}, {"f", to_json(f.child())}};
  }
  throw IoError("unknown formula kind");
}

inline Formula formula_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("k")) throw IoError("formula: expected a tagged object");
  std::string k = j.at("k").get<std::string>();
  if (k == "atom") return Formula::atom(atom_from_text(j.at("name").get<std::string>()));
  if (k == "top") return Formula::top();
  if (k == "zero") return Formula::zero();
  if (k == "one") return Formula::one();
  if (k == "bang") return Formula::bang(formula_from_json(j.at("f")));
  Formula l = formula_from_json(j.at("l"));
  Formula r = formula_from_json(j.at("r"));
  if (k == "lolli") return Formula::lolli(std::move(l), std::move(r));
  if (k == "tensor") return Formula::tensor(std::move(l), std::move(r));
  if (k == "with") return Formula::with(std::move(l), std::move(r));
  if (k == "plus") return Formula::plus(std::move(l), std::move(r));
  throw IoError("formula: unknown kind '" + k + "'");
}

inline Json to_json(const Multiset<Formula>& m) {
  Json arr = Json::array();
  for (const auto& [f, c] : m.entries()) arr.push_back(Json::array({to_json(f), c}));
  return arr;
}

inline Multiset<Formula> formula_multiset_from_json(const Json& j) {
  if (!j.is_array()) throw IoError("multiset: expected an array of [item,count]");
  Multiset<Formula> m;
  for (const Json& e : j) {
    if (!e.is_array() || e.size() != 2) throw IoError("multiset: expected [item,count]");
    m.insert(formula_from_json(e.at(0)), e.at(1).get<std::size_t>());
  }
  return m;
}

inline Json to_json(const Sequent& s) {
  return Json{{"ctx", to_json(s.context)}, {"concl", to_json(s.conclusion)}};
}

inline Sequent sequent_from_json(const Json& j) {
  return Sequent{formula_multiset_from_json(j.at("ctx")), formula_from_json(j.at("concl"))};
}

// --- atoms and bases ---------------------------------------------------------

inline Json to_json(const Multiset<AtomId>& m) {
  Json arr = Json::array();
  for (const AtomId& a : m.expand()) arr.push_back(a.text());
  return arr;
}

inline Multiset<AtomId> atom_multiset_from_json(const Json& j) {
  if (!j.is_array()) throw IoError("atomic multiset: expected an array of atoms");
  Multiset<AtomId> m;
  for (const Json& e : j) m.insert(atom_from_text(e.get<std::string>()));
  return m;
}

inline Json to_json(const AtomicSequent& s) {
  return Json{{"prem", to_json(s.premises)}, {"concl", s.conclusion.text()}};
}

inline AtomicSequent atomic_sequent_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("concl"))
    throw IoError("atomic sequent: conclusion must be an atom");
  if (!j.at("concl").is_string())
    throw IoError("atomic sequent: conclusion must be an atom, not a formula");
  return AtomicSequent{atom_multiset_from_json(j.at("prem")),
                       atom_from_text(j.at("concl").get<std::string>())};
}

inline Json to_json(const AtomicRule& r) {
  Json boxes = Json::array();
  for (const AdditiveBox& b : r.boxes) {
    Json box = Json::array();
    for (const AtomicSequent& s : b.sequents) box.push_back(to_json(s));
    boxes.push_back(std::move(box));
  }
  Json modal = Json::array();
  for (const AtomicSequent& s : r.modal.sequents) modal.push_back(to_json(s));
  return Json{{"boxes", std::move(boxes)}, {"modal", std::move(modal)}, {"concl", r.conclusion.text()}};
}

inline AtomicRule atomic_rule_from_json(const Json& j) {
  std::vector<AdditiveBox> boxes;
  for (const Json& bj : j.at("boxes")) {
    AdditiveBox box;
    for (const Json& sj : bj) box.sequents.push_back(atomic_sequent_from_json(sj));
    boxes.push_back(std::move(box));
  }
  AdditiveBox modal;
  for (const Json& sj : j.at("modal")) modal.sequents.push_back(atomic_sequent_from_json(sj));
  if (!j.at("concl").is_string()) throw IoError("rule conclusion must be an atom");
  return AtomicRule(std::move(boxes), std::move(modal),
                    atom_from_text(j.at("concl").get<std::string>()));
}

inline Json to_json(const Base& b) {
  Json rules = Json::array();
  for (const AtomicRule& r : b.rules) rules.push_back(to_json(r));
  Json out{{"rules", std::move(rules)}};
  if (!b.top_families.empty()) {
    Json fam = Json::array();
    for (const AtomId& a : b.top_families) fam.push_back(a.text());
    out["top_families"] = std::move(fam);
  }
  if (!b.zero_families.empty()) {
    Json fam = Json::array();
    for (const AtomId& a : b.zero_families) fam.push_back(a.text());
    out["zero_families"] = std::move(fam);
  }
  return out;
}

struct BaseLoadResult {
  Base base;
  std::size_t duplicates_collapsed = 0;
};

inline BaseLoadResult base_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("rules")) throw IoError("base: expected {\"rules\": [...]}");
  BaseLoadResult out;
  for (const Json& rj : j.at("rules")) {
    AtomicRule r = atomic_rule_from_json(rj);
    if (!out.base.rules.insert(std::move(r)).second) ++out.duplicates_collapsed;
  }
  if (j.contains("top_families"))
    for (const Json& a : j.at("top_families"))
      out.base.top_families.insert(atom_from_text(a.get<std::string>()));
  if (j.contains("zero_families"))
    for (const Json& a : j.at("zero_families"))
      out.base.zero_families.insert(atom_from_text(a.get<std::string>()));
  return out;
}

// Structural validity of a base value: currently the constructors enforce the
// shape, so this re-serializes and re-parses as a round-trip self-check.
inline void validate_base(const Base& b) {
  BaseLoadResult r = base_from_json(to_json(b));
  if (!(r.base == b)) throw IoError("base failed canonical round-trip");
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw IoError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

// Writes once, atomically: to a temporary in the same directory, then rename.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw IoError("cannot rename into " + path);
}

inline Base load_base(const std::string& path) { return base_from_json(read_json_file(path)).base; }

inline void save_base(const Base& b, const std::string& path) {
  write_file_atomic(path, to_json(b).dump(2) + "\n");
}

// --- derivations -------------------------------------------------------------

inline Json to_json(const NILLDerivation& d) {
  Json params = Json::array();
  for (const Formula& f : d.params()) params.push_back(to_json(f));
  Json prems = Json::array();
  for (const NILLDerivation& p : d.premises()) prems.push_back(to_json(p));
  return Json{{"rule", nill_rule_name(d.rule())}, {"params", std::move(params)},
              {"premises", std::move(prems)}};
}

inline NILLDerivation nill_derivation_from_json(const Json& j) {
  std::string rn = j.at("rule").get<std::string>();
  NILLRule rule = NILLRule::Ax;
  bool found = false;
  for (int i = 0; i <= static_cast<int>(NILLRule::Ctr); ++i) {
    if (rn == nill_rule_name(static_cast<NILLRule>(i))) {
      rule = static_cast<NILLRule>(i);
      found = true;
      break;
    }
  }
  if (!found) throw IoError("unknown rule '" + rn + "'");
  std::vector<Formula> params;
  for (const Json& p : j.at("params")) params.push_back(formula_from_json(p));
  std::vector<NILLDerivation> prems;
  for (const Json& p : j.at("premises")) prems.push_back(nill_derivation_from_json(p));
  return NILLDerivation(rule, std::move(params), std::move(prems));
}

// Atomic derivations reference their rule by index into the canonical rule
// order of the accompanying base file; family instances inline the rule.
inline Json to_json(const AtomicDerivation& d, const Base& b) {
  if (d.is_ref()) return Json{{"ref", d.ref_atom().text()}};
  Json out;
  if (auto it = b.rules.find(d.rule()); it != b.rules.end()) {
    out["rule"] = static_cast<std::size_t>(std::distance(b.rules.begin(), it));
  } else {
    out["family_rule"] = to_json(d.rule());
  }
  Json ctxs = Json::array();
  for (const auto& c : d.box_contexts()) ctxs.push_back(to_json(c));
  out["contexts"] = std::move(ctxs);
  Json box_subs = Json::array();
  for (const auto& subs : d.box_subs()) {
    Json row = Json::array();
    for (const AtomicDerivation& s : subs) row.push_back(to_json(s, b));
    box_subs.push_back(std::move(row));
  }
  out["box_subs"] = std::move(box_subs);
  Json datoms = Json::array();
  Json dctxs = Json::array();
  Json dsubs = Json::array();
  for (std::size_t i = 0; i < d.d_atoms().size(); ++i) {
    datoms.push_back(d.d_atoms()[i].text());
    dctxs.push_back(to_json(d.d_contexts()[i]));
    dsubs.push_back(to_json(d.d_subs()[i], b));
  }
  out["d"] = std::move(datoms);
  out["d_contexts"] = std::move(dctxs);
  out["d_subs"] = std::move(dsubs);
  Json modal = Json::array();
  for (const AtomicDerivation& s : d.modal_subs()) modal.push_back(to_json(s, b));
  out["modal_subs"] = std::move(modal);
  return out;
}

inline AtomicDerivation atomic_derivation_from_json(const Json& j, const Base& b) {
  if (j.contains("ref")) return AtomicDerivation(atom_from_text(j.at("ref").get<std::string>()));
  AtomicRule rule;
  if (j.contains("rule")) {
    std::size_t idx = j.at("rule").get<std::size_t>();
    if (idx >= b.rules.size()) throw IoError("rule index out of range");
    auto it = b.rules.begin();
    std::advance(it, idx);
    rule = *it;
  } else if (j.contains("family_rule")) {
    rule = atomic_rule_from_json(j.at("family_rule"));
  } else {
    throw IoError("derivation node needs 'ref', 'rule' or 'family_rule'");
  }
  std::vector<Multiset<AtomId>> ctxs;
  for (const Json& c : j.at("contexts")) ctxs.push_back(atom_multiset_from_json(c));
  std::vector<std::vector<AtomicDerivation>> box_subs;
  for (const Json& row : j.at("box_subs")) {
    std::vector<AtomicDerivation> subs;
    for (const Json& s : row) subs.push_back(atomic_derivation_from_json(s, b));
    box_subs.push_back(std::move(subs));
  }
  std::vector<AtomId> datoms;
  for (const Json& a : j.at("d")) datoms.push_back(atom_from_text(a.get<std::string>()));
  std::vector<Multiset<AtomId>> dctxs;
  for (const Json& c : j.at("d_contexts")) dctxs.push_back(atom_multiset_from_json(c));
  std::vector<AtomicDerivation> dsubs;
  for (const Json& s : j.at("d_subs")) dsubs.push_back(atomic_derivation_from_json(s, b));
  std::vector<AtomicDerivation> modal;
  for (const Json& s : j.at("modal_subs")) modal.push_back(atomic_derivation_from_json(s, b));
  return AtomicDerivation(std::move(rule), std::move(ctxs), std::move(box_subs),
                          std::move(datoms), std::move(dctxs), std::move(dsubs),
                          std::move(modal));
}

// --- universes and reports ---------------------------------------------------

inline Json to_json(const BoundedUniverse& u) {
  Json atoms = Json::array();
  for (const AtomId& a : u.atoms) atoms.push_back(a.text());
  Json rules = Json::array();
  for (const AtomicRule& r : u.candidate_rules) rules.push_back(to_json(r));
  return Json{{"atoms", std::move(atoms)},
              {"rules", std::move(rules)},
              {"msetBound", u.mset_bound},
              {"depth", u.deriv_depth}};
}

inline BoundedUniverse universe_from_json(const Json& j) {
  BoundedUniverse u;
  for (const Json& a : j.at("atoms")) u.atoms.push_back(atom_from_text(a.get<std::string>()));
  for (const Json& r : j.at("rules")) u.candidate_rules.push_back(atomic_rule_from_json(r));
  u.mset_bound = j.at("msetBound").get<std::size_t>();
  u.deriv_depth = j.at("depth").get<std::size_t>();
  return u;
}

inline Json to_json(const LemmaReport& r) {
  Json failures = Json::array();
  for (const std::string& f : r.failures) failures.push_back(f);
  return Json{{"lemma", r.lemma}, {"instances", r.instances}, {"failures", std::move(failures)}};
}

}  // namespace illbes
