#pragma once

#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include "illbes/formula.hpp"
#include "illbes/nill.hpp"
#include "illbes/simulation.hpp"
#include "illbes/star.hpp"

namespace illbes {

namespace detail {

// Shared backward-search scaffolding. Rule order: axiom-like and invertible
// rules first (Ax, 1I, TopI from the context, &I, -oI), then the branching
// introductions, then eliminations keyed on a context occurrence, then &E
// goals through the subformula closure. Promotion draws its candidate
// formulas from the closure of the top-level goal, with n ranging from 0 to
// the context size. Not complete, by design; the bound limits rule nesting.
template <typename Deriv>
class BackwardProver {
 public:
  BackwardProver(const Sequent& goal, std::size_t bound) : bound_(bound) {
    for (const Formula& f : subformula_closure(goal)) closure_.push_back(f);
  }

  std::optional<Deriv> run(const Sequent& goal) {
    for (std::size_t d = 1; d <= bound_; ++d)
      if (auto r = search(goal.context, goal.conclusion, d)) return r;
    return std::nullopt;
  }

 protected:
  using Ctx = Multiset<Formula>;

  std::optional<Deriv> search(const Ctx& ctx, const Formula& goal, std::size_t depth) {
    if (depth == 0) return std::nullopt;
    auto key = std::make_tuple(ctx, goal, depth);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::optional<Deriv> r = attempt(ctx, goal, depth);
    memo_.emplace(std::move(key), r);
    return r;
  }

  std::optional<Deriv> attempt(const Ctx& ctx, const Formula& goal, std::size_t depth) {
    if (ctx == Ctx::singleton(goal)) return make_ax(goal);

    if (goal.kind() == FormulaKind::One && ctx.empty()) return make_one_i();

    if (goal.kind() == FormulaKind::Top && (ctx.empty() || depth >= 2))
      return make_top_i(ctx);

    if (goal.kind() == FormulaKind::With) {
      if (auto l = search(ctx, goal.left(), depth - 1))
        if (auto r = search(ctx, goal.right(), depth - 1))
          return make_with_i(ctx, goal, *l, *r);
    }

    if (goal.kind() == FormulaKind::Lolli) {
      Ctx extended = ctx;
      extended.insert(goal.left());
      if (auto p = search(extended, goal.right(), depth - 1)) return make_lolli_i(ctx, goal, *p);
    }

    if (goal.kind() == FormulaKind::Plus) {
      if (auto p = search(ctx, goal.left(), depth - 1)) return make_plus_i1(ctx, goal, *p);
      if (auto p = search(ctx, goal.right(), depth - 1)) return make_plus_i2(ctx, goal, *p);
    }

    if (goal.kind() == FormulaKind::Tensor) {
      std::optional<Deriv> found;
      for_each_submultiset(ctx, [&](const Ctx& gamma, const Ctx& delta) {
        auto l = search(gamma, goal.left(), depth - 1);
        if (!l) return true;
        auto r = search(delta, goal.right(), depth - 1);
        if (!r) return true;
        found = make_tensor_i(gamma, delta, goal, *l, *r);
        return false;
      });
      if (found) return found;
    }

    if (goal.kind() == FormulaKind::Bang) {
      if (auto r = search_promotion(ctx, goal, depth)) return r;
    }

    // Eliminations keyed on one context occurrence; the major premise is the
    // axiom on that occurrence.
    for (const auto& [alpha, cnt] : ctx.entries()) {
      Ctx rest = ctx;
      rest.erase_one(alpha);
      switch (alpha.kind()) {
        case FormulaKind::Tensor: {
          Ctx minor = rest;
          minor.insert(alpha.left());
          minor.insert(alpha.right());
          if (auto p = search(minor, goal, depth - 1))
            return make_tensor_e(alpha, rest, goal, *p);
          break;
        }
        case FormulaKind::One: {
          if (auto p = search(rest, goal, depth - 1)) return make_one_e(alpha, rest, goal, *p);
          break;
        }
        case FormulaKind::Plus: {
          Ctx ml = rest, mr = rest;
          ml.insert(alpha.left());
          mr.insert(alpha.right());
          if (auto l = search(ml, goal, depth - 1))
            if (auto r = search(mr, goal, depth - 1))
              return make_plus_e(alpha, rest, goal, *l, *r);
          break;
        }
        case FormulaKind::Zero: {
          if (depth >= 2) return make_zero_e(alpha, rest, goal);
          break;
        }
        case FormulaKind::Bang: {
          Ctx der = rest;
          der.insert(alpha.child());
          if (auto p = search(der, goal, depth - 1)) return make_der(alpha, rest, goal, *p);
          if (auto p = search(rest, goal, depth - 1)) return make_wk(alpha, rest, goal, *p);
          Ctx ctr = rest;
          ctr.insert(alpha, 2);
          if (auto p = search(ctr, goal, depth - 1)) return make_ctr(alpha, rest, goal, *p);
          break;
        }
        case FormulaKind::Lolli: {
          if (alpha.right() == goal)
            if (auto p = search(rest, alpha.left(), depth - 1))
              return make_lolli_e(alpha, rest, goal, *p);
          break;
        }
        default:
          break;
      }
    }

    // &E against &-formulas of the goal closure.
    for (const Formula& chi : closure_) {
      if (chi.kind() != FormulaKind::With) continue;
      if (chi.left() == goal)
        if (auto p = search(ctx, chi, depth - 1)) return make_with_e1(chi, *p);
      if (chi.right() == goal)
        if (auto p = search(ctx, chi, depth - 1)) return make_with_e2(chi, *p);
    }

    return std::nullopt;
  }

  // Promotion: one slot per promoted formula; slots take non-decreasing
  // (candidate, context) pairs, which removes permutation duplicates.
  std::optional<Deriv> search_promotion(const Ctx& ctx, const Formula& goal, std::size_t depth) {
    std::size_t max_n = ctx.size();
    std::vector<std::pair<Formula, Ctx>> slots;
    std::optional<Deriv> found;
    std::vector<Deriv> subs;

    auto closed_check = [&]() -> bool {
      Ctx banged;
      for (const auto& [psi, c] : slots) banged.insert(Formula::bang(psi));
      auto body = search(banged, goal.child(), depth - 1);
      if (!body) return true;
      found = make_prom(slots, goal, subs, *body);
      return false;
    };

    auto dfs = [&](auto&& self, const Ctx& remaining) -> bool {
      if (slots.size() <= max_n && remaining.empty())
        if (!closed_check()) return false;
      if (slots.size() == max_n) return true;
      for (const Formula& psi : closure_) {
        if (!slots.empty() && psi < slots.back().first) continue;
        bool keep_going = for_each_submultiset(
            remaining, [&](const Ctx& gamma, const Ctx& rest) {
              if (!slots.empty() && psi == slots.back().first && gamma < slots.back().second)
                return true;
              auto sub = search(gamma, Formula::bang(psi), depth - 1);
              if (!sub) return true;
              slots.push_back({psi, gamma});
              subs.push_back(*sub);
              bool cont = self(self, rest);
              slots.pop_back();
              subs.pop_back();
              return cont;
            });
        if (!keep_going) return false;
      }
      return true;
    };
    dfs(dfs, ctx);
    return found;
  }

  virtual Deriv make_ax(const Formula& f) = 0;
  virtual Deriv make_one_i() = 0;
  virtual Deriv make_top_i(const Ctx& ctx) = 0;
  virtual Deriv make_with_i(const Ctx&, const Formula& goal, Deriv l, Deriv r) = 0;
  virtual Deriv make_lolli_i(const Ctx&, const Formula& goal, Deriv p) = 0;
  virtual Deriv make_plus_i1(const Ctx&, const Formula& goal, Deriv p) = 0;
  virtual Deriv make_plus_i2(const Ctx&, const Formula& goal, Deriv p) = 0;
  virtual Deriv make_tensor_i(const Ctx& gamma, const Ctx& delta, const Formula& goal, Deriv l,
                              Deriv r) = 0;
  virtual Deriv make_prom(const std::vector<std::pair<Formula, Ctx>>& slots, const Formula& goal,
                          const std::vector<Deriv>& subs, Deriv body) = 0;
  virtual Deriv make_tensor_e(const Formula& alpha, const Ctx& rest, const Formula& goal,
                              Deriv minor) = 0;
  virtual Deriv make_one_e(const Formula& alpha, const Ctx& rest, const Formula& goal,
                           Deriv minor) = 0;
  virtual Deriv make_plus_e(const Formula& alpha, const Ctx& rest, const Formula& goal, Deriv l,
                            Deriv r) = 0;
  virtual Deriv make_zero_e(const Formula& alpha, const Ctx& rest, const Formula& goal) = 0;
  virtual Deriv make_der(const Formula& alpha, const Ctx& rest, const Formula& goal,
                         Deriv minor) = 0;
  virtual Deriv make_wk(const Formula& alpha, const Ctx& rest, const Formula& goal,
                        Deriv minor) = 0;
  virtual Deriv make_ctr(const Formula& alpha, const Ctx& rest, const Formula& goal,
                         Deriv minor) = 0;
  virtual Deriv make_lolli_e(const Formula& alpha, const Ctx& rest, const Formula& goal,
                             Deriv arg) = 0;
  virtual Deriv make_with_e1(const Formula& chi, Deriv p) = 0;
  virtual Deriv make_with_e2(const Formula& chi, Deriv p) = 0;

  std::size_t bound_;
  std::vector<Formula> closure_;
  std::map<std::tuple<Ctx, Formula, std::size_t>, std::optional<Deriv>> memo_;
};

class NILLProver final : public BackwardProver<NILLDerivation> {
 public:
  using BackwardProver::BackwardProver;

 private:
  using D = NILLDerivation;
  D make_ax(const Formula& f) override { return nill::ax(f); }
  D make_one_i() override { return nill::one_i(); }
  D make_top_i(const Ctx& ctx) override {
    std::vector<D> prems;
    for (const Formula& f : ctx.expand()) prems.push_back(nill::ax(f));
    return nill::top_i(std::move(prems));
  }
  D make_with_i(const Ctx&, const Formula&, D l, D r) override {
    return nill::with_i(std::move(l), std::move(r));
  }
  D make_lolli_i(const Ctx&, const Formula& goal, D p) override {
    return nill::lolli_i(goal.left(), std::move(p));
  }
  D make_plus_i1(const Ctx&, const Formula& goal, D p) override {
    return nill::plus_i1(goal.right(), std::move(p));
  }
  D make_plus_i2(const Ctx&, const Formula& goal, D p) override {
    return nill::plus_i2(goal.left(), std::move(p));
  }
  D make_tensor_i(const Ctx&, const Ctx&, const Formula&, D l, D r) override {
    return nill::tensor_i(std::move(l), std::move(r));
  }
  D make_prom(const std::vector<std::pair<Formula, Ctx>>&, const Formula&,
              const std::vector<D>& subs, D body) override {
    std::vector<D> prems = subs;
    prems.push_back(std::move(body));
    return nill::prom(std::move(prems));
  }
  D make_tensor_e(const Formula& alpha, const Ctx&, const Formula&, D minor) override {
    return nill::tensor_e(nill::ax(alpha), std::move(minor));
  }
  D make_one_e(const Formula& alpha, const Ctx&, const Formula&, D minor) override {
    return nill::one_e(nill::ax(alpha), std::move(minor));
  }
  D make_plus_e(const Formula& alpha, const Ctx&, const Formula&, D l, D r) override {
    return nill::plus_e(nill::ax(alpha), std::move(l), std::move(r));
  }
  D make_zero_e(const Formula& alpha, const Ctx& rest, const Formula& goal) override {
    std::vector<D> prems;
    for (const Formula& f : rest.expand()) prems.push_back(nill::ax(f));
    prems.push_back(nill::ax(alpha));
    return nill::zero_e(goal, std::move(prems));
  }
  D make_der(const Formula& alpha, const Ctx&, const Formula&, D minor) override {
    return nill::der(nill::ax(alpha), std::move(minor));
  }
  D make_wk(const Formula& alpha, const Ctx&, const Formula&, D minor) override {
    return nill::wk(nill::ax(alpha), std::move(minor));
  }
  D make_ctr(const Formula& alpha, const Ctx&, const Formula&, D minor) override {
    return nill::ctr(nill::ax(alpha), std::move(minor));
  }
  D make_lolli_e(const Formula& alpha, const Ctx&, const Formula&, D arg) override {
    return nill::lolli_e(nill::ax(alpha), std::move(arg));
  }
  D make_with_e1(const Formula&, D p) override { return nill::with_e1(std::move(p)); }
  D make_with_e2(const Formula&, D p) override { return nill::with_e2(std::move(p)); }
};

class StarProver final : public BackwardProver<StarDerivation> {
 public:
  using BackwardProver::BackwardProver;

 private:
  using D = StarDerivation;
  static D app(SchemaInstance inst, std::vector<Ctx> ctxs, std::vector<std::vector<D>> subs) {
    return D(std::move(inst), std::move(ctxs), {}, std::move(subs), {}, {});
  }
  D make_ax(const Formula& f) override { return D(f); }
  D make_one_i() override { return app({SchemaKind::OneI, {}}, {}, {}); }
  D make_top_i(const Ctx& ctx) override {
    SchemaInstance inst{SchemaKind::TopI, {}};
    std::vector<Ctx> ctxs;
    std::vector<std::vector<D>> subs;
    for (const Formula& f : ctx.expand()) {
      inst.formulas.push_back(f);
      ctxs.push_back(Ctx::singleton(f));
      subs.push_back({D(f)});
    }
    return app(std::move(inst), std::move(ctxs), std::move(subs));
  }
  D make_with_i(const Ctx& ctx, const Formula& goal, D l, D r) override {
    return app({SchemaKind::WithI, {goal.left(), goal.right()}}, {ctx},
               {{std::move(l), std::move(r)}});
  }
  D make_lolli_i(const Ctx& ctx, const Formula& goal, D p) override {
    return app({SchemaKind::LolliI, {goal.left(), goal.right()}}, {ctx}, {{std::move(p)}});
  }
  D make_plus_i1(const Ctx& ctx, const Formula& goal, D p) override {
    return app({SchemaKind::PlusI1, {goal.left(), goal.right()}}, {ctx}, {{std::move(p)}});
  }
  D make_plus_i2(const Ctx& ctx, const Formula& goal, D p) override {
    return app({SchemaKind::PlusI2, {goal.left(), goal.right()}}, {ctx}, {{std::move(p)}});
  }
  D make_tensor_i(const Ctx& gamma, const Ctx& delta, const Formula& goal, D l, D r) override {
    return app({SchemaKind::TensorI, {goal.left(), goal.right()}}, {gamma, delta},
               {{std::move(l)}, {std::move(r)}});
  }
  D make_prom(const std::vector<std::pair<Formula, Ctx>>& slots, const Formula& goal,
              const std::vector<D>& subs, D body) override {
    Ctx bangs;
    std::vector<Ctx> ctxs;
    for (const auto& [psi, gamma] : slots) {
      bangs.insert(Formula::bang(psi));
      ctxs.push_back(gamma);
    }
    // Align the slot subderivations with the canonical bang expansion.
    std::vector<Formula> order = bangs.expand();
    std::vector<Ctx> ordered_ctxs(order.size());
    std::vector<D> ordered_subs(order.size(), D(Formula::one()));
    std::vector<bool> used(slots.size(), false);
    for (std::size_t k = 0; k < order.size(); ++k)
      for (std::size_t i = 0; i < slots.size(); ++i) {
        if (used[i] || !(Formula::bang(slots[i].first) == order[k])) continue;
        used[i] = true;
        ordered_ctxs[k] = slots[i].second;
        ordered_subs[k] = subs[i];
        break;
      }
    return D({SchemaKind::Prom, {goal.child()}}, std::move(ordered_ctxs), std::move(bangs), {},
             std::move(ordered_subs), {std::move(body)});
  }
  D make_tensor_e(const Formula& alpha, const Ctx& rest, const Formula& goal, D minor) override {
    return app({SchemaKind::TensorE, {alpha.left(), alpha.right(), goal}},
               {Ctx::singleton(alpha), rest}, {{D(alpha)}, {std::move(minor)}});
  }
  D make_one_e(const Formula& alpha, const Ctx& rest, const Formula& goal, D minor) override {
    return app({SchemaKind::OneE, {goal}}, {Ctx::singleton(alpha), rest},
               {{D(alpha)}, {std::move(minor)}});
  }
  D make_plus_e(const Formula& alpha, const Ctx& rest, const Formula& goal, D l, D r) override {
    return app({SchemaKind::PlusE, {alpha.left(), alpha.right(), goal}},
               {Ctx::singleton(alpha), rest}, {{D(alpha)}, {std::move(l), std::move(r)}});
  }
  D make_zero_e(const Formula& alpha, const Ctx& rest, const Formula& goal) override {
    SchemaInstance inst{SchemaKind::ZeroE, {}};
    std::vector<Ctx> ctxs;
    std::vector<std::vector<D>> subs;
    for (const Formula& f : rest.expand()) {
      inst.formulas.push_back(f);
      ctxs.push_back(Ctx::singleton(f));
      subs.push_back({D(f)});
    }
    inst.formulas.push_back(goal);
    ctxs.push_back(Ctx::singleton(alpha));
    subs.push_back({D(alpha)});
    return app(std::move(inst), std::move(ctxs), std::move(subs));
  }
  D make_der(const Formula& alpha, const Ctx& rest, const Formula& goal, D minor) override {
    return app({SchemaKind::Der, {alpha.child(), goal}}, {Ctx::singleton(alpha), rest},
               {{D(alpha)}, {std::move(minor)}});
  }
  D make_wk(const Formula& alpha, const Ctx& rest, const Formula& goal, D minor) override {
    return app({SchemaKind::Wk, {alpha.child(), goal}}, {Ctx::singleton(alpha), rest},
               {{D(alpha)}, {std::move(minor)}});
  }
  D make_ctr(const Formula& alpha, const Ctx& rest, const Formula& goal, D minor) override {
    return app({SchemaKind::Ctr, {alpha.child(), goal}}, {Ctx::singleton(alpha), rest},
               {{D(alpha)}, {std::move(minor)}});
  }
  D make_lolli_e(const Formula& alpha, const Ctx& rest, const Formula& goal, D arg) override {
    return app({SchemaKind::LolliE, {alpha.left(), goal}}, {Ctx::singleton(alpha), rest},
               {{D(alpha)}, {std::move(arg)}});
  }
  D make_with_e1(const Formula& chi, D p) override {
    Sequent end = check_star(p);
    return app({SchemaKind::WithE1, {chi.left(), chi.right()}}, {end.context}, {{std::move(p)}});
  }
  D make_with_e2(const Formula& chi, D p) override {
    Sequent end = check_star(p);
    return app({SchemaKind::WithE2, {chi.left(), chi.right()}}, {end.context}, {{std::move(p)}});
  }
};

}  // namespace detail

// Bounded backward search over the sequent-style rules. A returned
// derivation passes check_nill with endsequent `s`; nullopt means no proof
// within the bound, not a refutation.
inline std::optional<NILLDerivation> prove_nill(const Sequent& s, std::size_t depth_bound) {
  detail::NILLProver prover(s, depth_bound);
  return prover.run(s);
}

// The same search over the Ref/App clauses of the schematic relation.
inline std::optional<StarDerivation> prove_star(const Sequent& s, std::size_t depth_bound) {
  detail::StarProver prover(s, depth_bound);
  return prover.run(s);
}

}  // namespace illbes
