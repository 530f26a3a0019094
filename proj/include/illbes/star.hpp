#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "illbes/errors.hpp"
#include "illbes/formula.hpp"
#include "illbes/nill.hpp"

namespace illbes {

// The eighteen inference-schema families. TopI and ZeroE are indexed by the
// arity n >= 0 carried by the instance.
enum class SchemaKind : unsigned char {
  LolliI, LolliE, TensorI, TensorE, OneI, OneE, WithI, WithE1, WithE2,
  PlusI1, PlusI2, PlusE, TopI, ZeroE, Prom, Der, Wk, Ctr
};

inline const char* schema_name(SchemaKind k) {
  switch (k) {
    case SchemaKind::LolliI: return "lolli_i";
    case SchemaKind::LolliE: return "lolli_e";
    case SchemaKind::TensorI: return "tensor_i";
    case SchemaKind::TensorE: return "tensor_e";
    case SchemaKind::OneI: return "one_i";
    case SchemaKind::OneE: return "one_e";
    case SchemaKind::WithI: return "with_i";
    case SchemaKind::WithE1: return "with_e1";
    case SchemaKind::WithE2: return "with_e2";
    case SchemaKind::PlusI1: return "plus_i1";
    case SchemaKind::PlusI2: return "plus_i2";
    case SchemaKind::PlusE: return "plus_e";
    case SchemaKind::TopI: return "top_i";
    case SchemaKind::ZeroE: return "zero_e";
    case SchemaKind::Prom: return "prom";
    case SchemaKind::Der: return "der";
    case SchemaKind::Wk: return "wk";
    case SchemaKind::Ctr: return "ctr";
  }
  return "?";
}

// A schema together with the formulas instantiating its metavariables.
// `formulas` carries [phi], [phi, psi] or [phi, psi, chi] as needed; for TopI
// it is the whole list phi_1..phi_n and for ZeroE the list phi_1..phi_n, chi.
struct SchemaInstance {
  SchemaKind kind;
  std::vector<Formula> formulas;
};

struct FormulaSequent {
  Multiset<Formula> premises;
  Formula conclusion;
};

// One additive box: a group of sequents whose derivations share a context.
struct FormulaBox {
  std::vector<FormulaSequent> sequents;
};

// The concrete triple <A, S, phi> an instance denotes.
struct SchemaTriple {
  std::vector<FormulaBox> boxes;
  std::vector<FormulaSequent> modal;
  Formula conclusion;
};

namespace detail {

inline void need_formulas(const SchemaInstance& s, std::size_t n) {
  if (s.formulas.size() != n)
    throw CheckError(std::string(schema_name(s.kind)) + ": expected " + std::to_string(n) +
                     " instantiating formula(s), got " + std::to_string(s.formulas.size()));
}

inline FormulaBox single_box(FormulaSequent s) { return FormulaBox{{std::move(s)}}; }
inline FormulaSequent closed(Formula f) { return FormulaSequent{{}, std::move(f)}; }

}  // namespace detail

inline SchemaTriple instantiate_schema(const SchemaInstance& s) {
  using detail::closed;
  using detail::single_box;
  const auto& fs = s.formulas;
  switch (s.kind) {
    case SchemaKind::LolliI:
      detail::need_formulas(s, 2);
      return {{FormulaBox{{FormulaSequent{{fs[0]}, fs[1]}}}}, {}, Formula::lolli(fs[0], fs[1])};
    case SchemaKind::LolliE:
      detail::need_formulas(s, 2);
      return {{single_box(closed(Formula::lolli(fs[0], fs[1]))), single_box(closed(fs[0]))},
              {},
              fs[1]};
    case SchemaKind::TensorI:
      detail::need_formulas(s, 2);
      return {{single_box(closed(fs[0])), single_box(closed(fs[1]))},
              {},
              Formula::tensor(fs[0], fs[1])};
    case SchemaKind::TensorE:
      detail::need_formulas(s, 3);
      return {{single_box(closed(Formula::tensor(fs[0], fs[1]))),
               FormulaBox{{FormulaSequent{{fs[0], fs[1]}, fs[2]}}}},
              {},
              fs[2]};
    case SchemaKind::OneI:
      detail::need_formulas(s, 0);
      return {{}, {}, Formula::one()};
    case SchemaKind::OneE:
      detail::need_formulas(s, 1);
      return {{single_box(closed(Formula::one())), single_box(closed(fs[0]))}, {}, fs[0]};
    case SchemaKind::WithI:
      detail::need_formulas(s, 2);
      return {{FormulaBox{{closed(fs[0]), closed(fs[1])}}}, {}, Formula::with(fs[0], fs[1])};
    case SchemaKind::WithE1:
      detail::need_formulas(s, 2);
      return {{single_box(closed(Formula::with(fs[0], fs[1])))}, {}, fs[0]};
    case SchemaKind::WithE2:
      detail::need_formulas(s, 2);
      return {{single_box(closed(Formula::with(fs[0], fs[1])))}, {}, fs[1]};
    case SchemaKind::PlusI1:
      detail::need_formulas(s, 2);
      return {{single_box(closed(fs[0]))}, {}, Formula::plus(fs[0], fs[1])};
    case SchemaKind::PlusI2:
      detail::need_formulas(s, 2);
      return {{single_box(closed(fs[1]))}, {}, Formula::plus(fs[0], fs[1])};
    case SchemaKind::PlusE:
      detail::need_formulas(s, 3);
      return {{single_box(closed(Formula::plus(fs[0], fs[1]))),
               FormulaBox{{FormulaSequent{{fs[0]}, fs[2]}, FormulaSequent{{fs[1]}, fs[2]}}}},
              {},
              fs[2]};
    case SchemaKind::TopI: {
      SchemaTriple t{{}, {}, Formula::top()};
      for (const Formula& f : fs) t.boxes.push_back(single_box(closed(f)));
      return t;
    }
    case SchemaKind::ZeroE: {
      if (fs.empty()) throw CheckError("zero_e: needs at least the concluded formula");
      SchemaTriple t{{}, {}, fs.back()};
      for (std::size_t i = 0; i + 1 < fs.size(); ++i) t.boxes.push_back(single_box(closed(fs[i])));
      t.boxes.push_back(single_box(closed(Formula::zero())));
      return t;
    }
    case SchemaKind::Prom:
      detail::need_formulas(s, 1);
      return {{}, {closed(fs[0])}, Formula::bang(fs[0])};
    case SchemaKind::Der:
      detail::need_formulas(s, 2);
      return {{single_box(closed(Formula::bang(fs[0]))),
               FormulaBox{{FormulaSequent{{fs[0]}, fs[1]}}}},
              {},
              fs[1]};
    case SchemaKind::Wk:
      detail::need_formulas(s, 2);
      return {{single_box(closed(Formula::bang(fs[0]))), single_box(closed(fs[1]))}, {}, fs[1]};
    case SchemaKind::Ctr: {
      detail::need_formulas(s, 2);
      Formula b = Formula::bang(fs[0]);
      Multiset<Formula> two;
      two.insert(b, 2);
      return {{single_box(closed(b)), FormulaBox{{FormulaSequent{std::move(two), fs[1]}}}},
              {},
              fs[1]};
    }
  }
  throw CheckError("unknown schema");
}

// Derivations of the alternative derivability relation: Ref leaves and App
// nodes over schema instances. An App node carries, in order, the contexts
// Gamma_1..Gamma_n where n = #boxes + |bangs|; `box_subs` holds one
// subderivation per sequent of each box (in instance order), `bang_subs` one
// per element of the canonical expansion of `bangs`, and `modal_subs` one per
// modal-box sequent.
class StarDerivation {
 public:
  StarDerivation() : StarDerivation(Formula::one()) {}

  // Ref node.
  explicit StarDerivation(Formula phi)
      : node_(std::make_shared<const Node>(Node{true, std::move(phi), {}, {}, {}, {}, {}, {}})) {}

  StarDerivation(SchemaInstance schema, std::vector<Multiset<Formula>> contexts,
                 Multiset<Formula> bangs, std::vector<std::vector<StarDerivation>> box_subs,
                 std::vector<StarDerivation> bang_subs, std::vector<StarDerivation> modal_subs)
      : node_(std::make_shared<const Node>(Node{false, Formula::one(), std::move(schema),
                                                std::move(contexts), std::move(bangs),
                                                std::move(box_subs), std::move(bang_subs),
                                                std::move(modal_subs)})) {}

  bool is_ref() const { return node_->is_ref; }
  const Formula& ref_formula() const { return node_->ref_formula; }
  const SchemaInstance& schema() const { return node_->schema; }
  const std::vector<Multiset<Formula>>& contexts() const { return node_->contexts; }
  const Multiset<Formula>& bangs() const { return node_->bangs; }
  const std::vector<std::vector<StarDerivation>>& box_subs() const { return node_->box_subs; }
  const std::vector<StarDerivation>& bang_subs() const { return node_->bang_subs; }
  const std::vector<StarDerivation>& modal_subs() const { return node_->modal_subs; }

 private:
  struct Node {
    bool is_ref;
    Formula ref_formula;
    SchemaInstance schema;
    std::vector<Multiset<Formula>> contexts;
    Multiset<Formula> bangs;
    std::vector<std::vector<StarDerivation>> box_subs;
    std::vector<StarDerivation> bang_subs;
    std::vector<StarDerivation> modal_subs;
  };
  std::shared_ptr<const Node> node_;
};

// Checks the Ref/App clauses; returns the endsequent.
inline Sequent check_star(const StarDerivation& d) {
  if (d.is_ref())
    return {Multiset<Formula>::singleton(d.ref_formula()), d.ref_formula()};

  const char* sn = schema_name(d.schema().kind);
  SchemaTriple triple = instantiate_schema(d.schema());
  std::size_t m = triple.boxes.size();
  std::vector<Formula> bang_list = d.bangs().expand();
  std::size_t n = m + bang_list.size();
  if (d.contexts().size() != n)
    throw CheckError(std::string(sn) + ": expected " + std::to_string(n) + " context(s), got " +
                     std::to_string(d.contexts().size()));
  for (const Formula& b : bang_list)
    if (!b.is_bang())
      throw CheckError(std::string(sn) + ": bang multiset element " + b.text() +
                       " lacks a top-level !");

  if (d.box_subs().size() != m)
    throw CheckError(std::string(sn) + ": expected subderivations for " + std::to_string(m) +
                     " box(es)");
  for (std::size_t i = 0; i < m; ++i) {
    const FormulaBox& box = triple.boxes[i];
    if (d.box_subs()[i].size() != box.sequents.size())
      throw CheckError(std::string(sn) + ": box " + std::to_string(i + 1) + " expects " +
                       std::to_string(box.sequents.size()) + " subderivation(s)");
    for (std::size_t j = 0; j < box.sequents.size(); ++j) {
      Sequent got = check_star(d.box_subs()[i][j]);
      Sequent want{mset_union(d.contexts()[i], box.sequents[j].premises),
                   box.sequents[j].conclusion};
      if (!(got == want))
        throw CheckError(std::string(sn) + ": box " + std::to_string(i + 1) + " sequent " +
                         std::to_string(j + 1) + " endsequent mismatch: wanted " + want.text() +
                         ", got " + got.text());
    }
  }

  if (d.bang_subs().size() != bang_list.size())
    throw CheckError(std::string(sn) + ": expected " + std::to_string(bang_list.size()) +
                     " bang subderivation(s)");
  for (std::size_t i = 0; i < bang_list.size(); ++i) {
    Sequent got = check_star(d.bang_subs()[i]);
    Sequent want{d.contexts()[m + i], bang_list[i]};
    if (!(got == want))
      throw CheckError(std::string(sn) + ": bang subderivation " + std::to_string(i + 1) +
                       " endsequent mismatch: wanted " + want.text() + ", got " + got.text());
  }

  if (d.modal_subs().size() != triple.modal.size())
    throw CheckError(std::string(sn) + ": expected " + std::to_string(triple.modal.size()) +
                     " modal subderivation(s)");
  for (std::size_t j = 0; j < triple.modal.size(); ++j) {
    Sequent got = check_star(d.modal_subs()[j]);
    Sequent want{mset_union(d.bangs(), triple.modal[j].premises), triple.modal[j].conclusion};
    if (!(got == want))
      throw CheckError(std::string(sn) + ": modal subderivation " + std::to_string(j + 1) +
                       " has open assumptions beyond the bang multiset: wanted " + want.text() +
                       ", got " + got.text());
  }

  Multiset<Formula> ctx;
  for (const auto& c : d.contexts()) ctx = mset_union(ctx, c);
  return {std::move(ctx), triple.conclusion};
}

namespace detail {

inline StarDerivation star_app_simple(SchemaInstance schema,
                                      std::vector<Multiset<Formula>> contexts,
                                      std::vector<std::vector<StarDerivation>> box_subs) {
  return StarDerivation(std::move(schema), std::move(contexts), {}, std::move(box_subs), {}, {});
}

}  // namespace detail

// Translates a sequent-style derivation into a schematic one with the same
// endsequent. Throws if the input does not check.
inline StarDerivation star_of_nill(const NILLDerivation& d) {
  Sequent end = check_nill(d);
  const auto& prem = d.premises();
  std::vector<Sequent> ps;
  ps.reserve(prem.size());
  for (const auto& p : prem) ps.push_back(check_nill(p));
  auto sub = [&](std::size_t i) { return star_of_nill(prem[i]); };

  switch (d.rule()) {
    case NILLRule::Ax:
      return StarDerivation(d.params()[0]);
    case NILLRule::LolliI: {
      Formula phi = d.params()[0];
      Formula psi = ps[0].conclusion;
      return detail::star_app_simple({SchemaKind::LolliI, {phi, psi}}, {end.context}, {{sub(0)}});
    }
    case NILLRule::LolliE:
      return detail::star_app_simple(
          {SchemaKind::LolliE, {ps[0].conclusion.left(), ps[0].conclusion.right()}},
          {ps[0].context, ps[1].context}, {{sub(0)}, {sub(1)}});
    case NILLRule::TensorI:
      return detail::star_app_simple({SchemaKind::TensorI, {ps[0].conclusion, ps[1].conclusion}},
                                     {ps[0].context, ps[1].context}, {{sub(0)}, {sub(1)}});
    case NILLRule::TensorE: {
      Formula phi = ps[0].conclusion.left(), psi = ps[0].conclusion.right();
      Multiset<Formula> delta = ps[1].context;
      delta.erase_one(phi);
      delta.erase_one(psi);
      return detail::star_app_simple({SchemaKind::TensorE, {phi, psi, ps[1].conclusion}},
                                     {ps[0].context, delta}, {{sub(0)}, {sub(1)}});
    }
    case NILLRule::OneI:
      return detail::star_app_simple({SchemaKind::OneI, {}}, {}, {});
    case NILLRule::OneE:
      return detail::star_app_simple({SchemaKind::OneE, {ps[1].conclusion}},
                                     {ps[0].context, ps[1].context}, {{sub(0)}, {sub(1)}});
    case NILLRule::WithI:
      return detail::star_app_simple({SchemaKind::WithI, {ps[0].conclusion, ps[1].conclusion}},
                                     {ps[0].context}, {{sub(0), sub(1)}});
    case NILLRule::WithE1:
      return detail::star_app_simple(
          {SchemaKind::WithE1, {ps[0].conclusion.left(), ps[0].conclusion.right()}},
          {ps[0].context}, {{sub(0)}});
    case NILLRule::WithE2:
      return detail::star_app_simple(
          {SchemaKind::WithE2, {ps[0].conclusion.left(), ps[0].conclusion.right()}},
          {ps[0].context}, {{sub(0)}});
    case NILLRule::PlusI1:
      return detail::star_app_simple({SchemaKind::PlusI1, {ps[0].conclusion, d.params()[0]}},
                                     {ps[0].context}, {{sub(0)}});
    case NILLRule::PlusI2:
      return detail::star_app_simple({SchemaKind::PlusI2, {d.params()[0], ps[0].conclusion}},
                                     {ps[0].context}, {{sub(0)}});
    case NILLRule::PlusE: {
      Formula phi = ps[0].conclusion.left(), psi = ps[0].conclusion.right();
      Multiset<Formula> delta = ps[1].context;
      delta.erase_one(phi);
      return detail::star_app_simple({SchemaKind::PlusE, {phi, psi, ps[1].conclusion}},
                                     {ps[0].context, delta}, {{sub(0)}, {sub(1), sub(2)}});
    }
    case NILLRule::TopI: {
      SchemaInstance inst{SchemaKind::TopI, {}};
      std::vector<Multiset<Formula>> ctxs;
      std::vector<std::vector<StarDerivation>> subs;
      for (std::size_t i = 0; i < ps.size(); ++i) {
        inst.formulas.push_back(ps[i].conclusion);
        ctxs.push_back(ps[i].context);
        subs.push_back({sub(i)});
      }
      return detail::star_app_simple(std::move(inst), std::move(ctxs), std::move(subs));
    }
    case NILLRule::ZeroE: {
      SchemaInstance inst{SchemaKind::ZeroE, {}};
      std::vector<Multiset<Formula>> ctxs;
      std::vector<std::vector<StarDerivation>> subs;
      for (std::size_t i = 0; i + 1 < ps.size(); ++i) {
        inst.formulas.push_back(ps[i].conclusion);
        ctxs.push_back(ps[i].context);
        subs.push_back({sub(i)});
      }
      inst.formulas.push_back(d.params()[0]);
      ctxs.push_back(ps.back().context);
      subs.push_back({sub(ps.size() - 1)});
      return detail::star_app_simple(std::move(inst), std::move(ctxs), std::move(subs));
    }
    case NILLRule::Prom: {
      // Premises 1..n become the bang subderivations; the closed premise
      // becomes the modal subderivation.
      Multiset<Formula> bangs = ps.back().context;
      std::vector<Formula> order = bangs.expand();
      std::vector<Multiset<Formula>> ctxs(order.size());
      std::vector<StarDerivation> bang_subs(order.size());
      // Align premises with the canonical expansion of the bang multiset.
      std::vector<bool> used(ps.size() - 1, false);
      for (std::size_t slot = 0; slot < order.size(); ++slot) {
        for (std::size_t i = 0; i + 1 < ps.size(); ++i) {
          if (used[i] || !(ps[i].conclusion == order[slot])) continue;
          used[i] = true;
          ctxs[slot] = ps[i].context;
          bang_subs[slot] = sub(i);
          break;
        }
      }
      return StarDerivation({SchemaKind::Prom, {ps.back().conclusion}}, std::move(ctxs),
                            std::move(bangs), {}, std::move(bang_subs),
                            {sub(ps.size() - 1)});
    }
    case NILLRule::Der: {
      Formula phi = ps[0].conclusion.child();
      Multiset<Formula> delta = ps[1].context;
      delta.erase_one(phi);
      return detail::star_app_simple({SchemaKind::Der, {phi, ps[1].conclusion}},
                                     {ps[0].context, delta}, {{sub(0)}, {sub(1)}});
    }
    case NILLRule::Wk:
      return detail::star_app_simple(
          {SchemaKind::Wk, {ps[0].conclusion.child(), ps[1].conclusion}},
          {ps[0].context, ps[1].context}, {{sub(0)}, {sub(1)}});
    case NILLRule::Ctr: {
      Formula phi = ps[0].conclusion.child();
      Multiset<Formula> delta = ps[1].context;
      delta.erase_one(ps[0].conclusion);
      delta.erase_one(ps[0].conclusion);
      return detail::star_app_simple({SchemaKind::Ctr, {phi, ps[1].conclusion}},
                                     {ps[0].context, delta}, {{sub(0)}, {sub(1)}});
    }
  }
  throw CheckError("unknown rule");
}

// Translates a schematic derivation back into sequent style with the same
// endsequent. App nodes whose schema has no modal box but which carry a bang
// multiset are rendered as the core rule followed by a chain of Wk steps.
inline NILLDerivation nill_of_star(const StarDerivation& d) {
  Sequent end = check_star(d);
  if (d.is_ref()) return nill::ax(d.ref_formula());

  const SchemaInstance& inst = d.schema();
  const auto& fs = inst.formulas;
  auto box_sub = [&](std::size_t i, std::size_t j) { return nill_of_star(d.box_subs()[i][j]); };

  NILLDerivation core;
  switch (inst.kind) {
    case SchemaKind::LolliI: core = nill::lolli_i(fs[0], box_sub(0, 0)); break;
    case SchemaKind::LolliE: core = nill::lolli_e(box_sub(0, 0), box_sub(1, 0)); break;
    case SchemaKind::TensorI: core = nill::tensor_i(box_sub(0, 0), box_sub(1, 0)); break;
    case SchemaKind::TensorE: core = nill::tensor_e(box_sub(0, 0), box_sub(1, 0)); break;
    case SchemaKind::OneI: core = nill::one_i(); break;
    case SchemaKind::OneE: core = nill::one_e(box_sub(0, 0), box_sub(1, 0)); break;
    case SchemaKind::WithI: core = nill::with_i(box_sub(0, 0), box_sub(0, 1)); break;
    case SchemaKind::WithE1: core = nill::with_e1(box_sub(0, 0)); break;
    case SchemaKind::WithE2: core = nill::with_e2(box_sub(0, 0)); break;
    case SchemaKind::PlusI1: core = nill::plus_i1(fs[1], box_sub(0, 0)); break;
    case SchemaKind::PlusI2: core = nill::plus_i2(fs[0], box_sub(0, 0)); break;
    case SchemaKind::PlusE: core = nill::plus_e(box_sub(0, 0), box_sub(1, 0), box_sub(1, 1)); break;
    case SchemaKind::TopI: {
      std::vector<NILLDerivation> subs;
      for (std::size_t i = 0; i < d.box_subs().size(); ++i) subs.push_back(box_sub(i, 0));
      core = nill::top_i(std::move(subs));
      break;
    }
    case SchemaKind::ZeroE: {
      std::vector<NILLDerivation> subs;
      for (std::size_t i = 0; i < d.box_subs().size(); ++i) subs.push_back(box_sub(i, 0));
      core = nill::zero_e(fs.back(), std::move(subs));
      break;
    }
    case SchemaKind::Prom: {
      std::vector<NILLDerivation> subs;
      for (const StarDerivation& b : d.bang_subs()) subs.push_back(nill_of_star(b));
      subs.push_back(nill_of_star(d.modal_subs()[0]));
      return nill::prom(std::move(subs));
    }
    case SchemaKind::Der: core = nill::der(box_sub(0, 0), box_sub(1, 0)); break;
    case SchemaKind::Wk: core = nill::wk(box_sub(0, 0), box_sub(1, 0)); break;
    case SchemaKind::Ctr: core = nill::ctr(box_sub(0, 0), box_sub(1, 0)); break;
  }

  // A bang multiset on a schema without a modal box contributes one Wk per
  // element.
  for (const StarDerivation& b : d.bang_subs()) core = nill::wk(nill_of_star(b), std::move(core));
  return core;
}

}  // namespace illbes
