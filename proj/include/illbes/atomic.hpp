#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "illbes/base.hpp"
#include "illbes/errors.hpp"
#include "illbes/multiset.hpp"

namespace illbes {

// An atomic judgement L |-_B p.
struct AtomicJudgement {
  Multiset<AtomId> context;
  AtomId conclusion;

  friend bool operator==(const AtomicJudgement&, const AtomicJudgement&) = default;
  friend auto operator<=>(const AtomicJudgement&, const AtomicJudgement&) = default;

  std::string text() const {
    std::string s;
    for (const AtomId& a : context.expand()) s += a.text() + ",";
    if (!s.empty()) s.pop_back();
    return s + " |- " + conclusion.text();
  }
};

// A derivation witnessing L |-_B p. Ref leaves carry the atom; App nodes
// carry the applied rule, one context per additive box (aligned with the
// rule's canonical box order, empty boxes pinned to the empty context), the
// persistent-atom multiset D in canonical expansion with one context and one
// subderivation per element, and one subderivation per modal-box sequent.
class AtomicDerivation {
 public:
  AtomicDerivation() : AtomicDerivation(AtomId::user("p")) {}

  explicit AtomicDerivation(AtomId ref_atom)
      : node_(std::make_shared<const Node>(Node{true, std::move(ref_atom), {}, {}, {}, {}, {}, {},
                                                {}})) {}

  AtomicDerivation(AtomicRule rule, std::vector<Multiset<AtomId>> box_contexts,
                   std::vector<std::vector<AtomicDerivation>> box_subs,
                   std::vector<AtomId> d_atoms, std::vector<Multiset<AtomId>> d_contexts,
                   std::vector<AtomicDerivation> d_subs, std::vector<AtomicDerivation> modal_subs)
      : node_(std::make_shared<const Node>(
            Node{false, AtomId(), std::move(rule), std::move(box_contexts), std::move(box_subs),
                 std::move(d_atoms), std::move(d_contexts), std::move(d_subs),
                 std::move(modal_subs)})) {}

  bool is_ref() const { return node_->is_ref; }
  const AtomId& ref_atom() const { return node_->ref_atom; }
  const AtomicRule& rule() const { return node_->rule; }
  const std::vector<Multiset<AtomId>>& box_contexts() const { return node_->box_contexts; }
  const std::vector<std::vector<AtomicDerivation>>& box_subs() const { return node_->box_subs; }
  const std::vector<AtomId>& d_atoms() const { return node_->d_atoms; }
  const std::vector<Multiset<AtomId>>& d_contexts() const { return node_->d_contexts; }
  const std::vector<AtomicDerivation>& d_subs() const { return node_->d_subs; }
  const std::vector<AtomicDerivation>& modal_subs() const { return node_->modal_subs; }

  Multiset<AtomId> d_multiset() const {
    Multiset<AtomId> d;
    for (const AtomId& a : node_->d_atoms) d.insert(a);
    return d;
  }

  // Context and conclusion, computed without checking.
  AtomicJudgement endsequent() const {
    if (is_ref()) return {Multiset<AtomId>::singleton(ref_atom()), ref_atom()};
    Multiset<AtomId> ctx;
    for (const auto& c : node_->box_contexts) ctx = mset_union(ctx, c);
    for (const auto& c : node_->d_contexts) ctx = mset_union(ctx, c);
    return {std::move(ctx), node_->rule.conclusion};
  }

  std::size_t depth() const {
    if (is_ref()) return 1;
    std::size_t d = 0;
    for (const auto& bs : node_->box_subs)
      for (const auto& s : bs) d = std::max(d, s.depth());
    for (const auto& s : node_->d_subs) d = std::max(d, s.depth());
    for (const auto& s : node_->modal_subs) d = std::max(d, s.depth());
    return d + 1;
  }

 private:
  struct Node {
    bool is_ref;
    AtomId ref_atom;
    AtomicRule rule;
    std::vector<Multiset<AtomId>> box_contexts;
    std::vector<std::vector<AtomicDerivation>> box_subs;
    std::vector<AtomId> d_atoms;
    std::vector<Multiset<AtomId>> d_contexts;
    std::vector<AtomicDerivation> d_subs;
    std::vector<AtomicDerivation> modal_subs;
  };
  std::shared_ptr<const Node> node_;
};

// Checks a derivation against the Ref/App clauses over `b`; returns the
// endsequent or throws CheckError.
inline AtomicJudgement check_atomic(const Base& b, const AtomicDerivation& d) {
  if (d.is_ref()) return d.endsequent();

  const AtomicRule& r = d.rule();
  if (!rule_in_base(b, r))
    throw CheckError("rule concluding " + r.conclusion.text() + " not in base");

  std::size_t m = r.boxes.size();
  if (d.box_contexts().size() != m || d.box_subs().size() != m)
    throw CheckError("context/subderivation count does not match the rule's boxes");
  for (std::size_t i = 0; i < m; ++i) {
    const AdditiveBox& box = r.boxes[i];
    if (box.empty() && !d.box_contexts()[i].empty())
      throw CheckError("empty additive box owns a non-empty context");
    if (d.box_subs()[i].size() != box.length())
      throw CheckError("box " + std::to_string(i + 1) + " expects " +
                       std::to_string(box.length()) + " subderivation(s)");
    for (std::size_t j = 0; j < box.length(); ++j) {
      AtomicJudgement got = check_atomic(b, d.box_subs()[i][j]);
      AtomicJudgement want{mset_union(d.box_contexts()[i], box.sequents[j].premises),
                           box.sequents[j].conclusion};
      if (!(got == want))
        throw CheckError("box " + std::to_string(i + 1) + " sequent " + std::to_string(j + 1) +
                         " endsequent mismatch: wanted " + want.text() + ", got " + got.text());
    }
  }

  std::set<AtomId> persistent = persistent_atoms(b);
  if (d.d_contexts().size() != d.d_atoms().size() || d.d_subs().size() != d.d_atoms().size())
    throw CheckError("persistent-atom slots misaligned");
  for (std::size_t i = 0; i < d.d_atoms().size(); ++i) {
    if (!persistent.contains(d.d_atoms()[i]))
      throw CheckError("atom " + d.d_atoms()[i].text() + " is not persistent in the base");
    AtomicJudgement got = check_atomic(b, d.d_subs()[i]);
    AtomicJudgement want{d.d_contexts()[i], d.d_atoms()[i]};
    if (!(got == want))
      throw CheckError("persistent-atom subderivation " + std::to_string(i + 1) +
                       " endsequent mismatch: wanted " + want.text() + ", got " + got.text());
  }

  Multiset<AtomId> dset = d.d_multiset();
  if (d.modal_subs().size() != r.modal.length())
    throw CheckError("expected " + std::to_string(r.modal.length()) +
                     " modal subderivation(s), got " + std::to_string(d.modal_subs().size()));
  for (std::size_t j = 0; j < r.modal.length(); ++j) {
    AtomicJudgement got = check_atomic(b, d.modal_subs()[j]);
    AtomicJudgement want{mset_union(dset, r.modal.sequents[j].premises),
                         r.modal.sequents[j].conclusion};
    if (!(got == want))
      throw CheckError("modal subderivation " + std::to_string(j + 1) +
                       " endsequent mismatch: wanted " + want.text() + ", got " + got.text());
  }

  return d.endsequent();
}

namespace detail {

// Bounded backward search for L |-_B p. Iterative deepening on App nesting
// depth; within a depth level d, rules whose conclusion is the goal are
// tried in canonical order, then persistent-atom multisets D with |D| <= d,
// then ordered context assignments slot by slot with early subgoal failure.
// A derivation of height h whose largest persistent multiset has size k is
// found at level max(h, k), so derive at bound n decides exactly the
// derivations with height <= n and |D| <= n throughout. The memo table is
// private to one search invocation (and to one level, since the D cap is
// part of a level's semantics).
class DeriveEngine {
 public:
  DeriveEngine(const Base& b, std::size_t bound) : base_(b), bound_(bound) {
    for (const AtomId& a : persistent_atoms(b)) persistent_.push_back(a);
    d_candidates_ = multisets_up_to(persistent_, bound_);  // ascending size
    for (const AtomicRule& r : base_.rules) by_conclusion_[r.conclusion].push_back(&r);
  }

  std::optional<AtomicDerivation> run(const Multiset<AtomId>& ctx, const AtomId& goal) {
    for (level_ = 1; level_ <= bound_; ++level_) {
      memo_.clear();
      if (auto r = search(ctx, goal, level_)) return r;
    }
    return std::nullopt;
  }

 private:
  using Key = std::tuple<Multiset<AtomId>, AtomId, std::size_t>;

  std::optional<AtomicDerivation> search(const Multiset<AtomId>& ctx, const AtomId& goal,
                                         std::size_t depth) {
    if (depth == 0) return std::nullopt;
    Key key{ctx, goal, depth};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::optional<AtomicDerivation> result = attempt(ctx, goal, depth);
    memo_.emplace(std::move(key), result);
    return result;
  }

  std::optional<AtomicDerivation> attempt(const Multiset<AtomId>& ctx, const AtomId& goal,
                                          std::size_t depth) {
    if (ctx == Multiset<AtomId>::singleton(goal)) return AtomicDerivation(goal);

    if (base_.top_families.contains(goal) && (ctx.empty() || depth >= 2))
      return family_app(make_top_family_instance(goal, ctx.expand()), ctx, {});

    for (const AtomId& z : base_.zero_families) {
      if (depth < 2) break;
      std::optional<AtomicDerivation> found;
      for_each_submultiset(ctx, [&](const Multiset<AtomId>& qs, const Multiset<AtomId>& zctx) {
        auto sub = search(zctx, z, depth - 1);
        if (!sub) return true;
        found = family_app(make_zero_family_instance(z, qs.expand(), goal), qs,
                           std::pair<Multiset<AtomId>, AtomicDerivation>{zctx, *sub});
        return false;
      });
      if (found) return found;
    }

    auto rules = by_conclusion_.find(goal);
    if (rules == by_conclusion_.end()) return std::nullopt;
    for (const AtomicRule* r : rules->second) {
      for (const Multiset<AtomId>& dset : d_candidates_) {
        if (dset.size() > level_) break;  // ascending size order
        // Modal subgoals depend only on D; check them before any partition.
        std::vector<AtomicDerivation> modal_subs;
        bool modal_ok = true;
        for (const AtomicSequent& uv : r->modal.sequents) {
          auto sub = search(mset_union(dset, uv.premises), uv.conclusion, depth - 1);
          if (!sub) {
            modal_ok = false;
            break;
          }
          modal_subs.push_back(*sub);
        }
        if (!modal_ok) continue;
        if (auto res = assign_slots(*r, dset, std::move(modal_subs), ctx, depth)) return res;
      }
    }
    return std::nullopt;
  }

  struct SlotState {
    std::vector<Multiset<AtomId>> box_contexts;
    std::vector<std::vector<AtomicDerivation>> box_subs;
    std::vector<Multiset<AtomId>> d_contexts;
    std::vector<AtomicDerivation> d_subs;
  };

  // Depth-first assignment of the context slots: non-empty boxes in rule
  // order, then D elements in canonical order. Empty boxes are pinned to the
  // empty context. Slots of equal boxes / equal D atoms take non-decreasing
  // contexts, which removes symmetric duplicates.
  std::optional<AtomicDerivation> assign_slots(const AtomicRule& r, const Multiset<AtomId>& dset,
                                               std::vector<AtomicDerivation> modal_subs,
                                               const Multiset<AtomId>& ctx, std::size_t depth) {
    std::vector<AtomId> d_atoms = dset.expand();
    std::size_t m = r.boxes.size();
    SlotState st;
    st.box_contexts.assign(m, {});
    st.box_subs.assign(m, {});
    st.d_contexts.assign(d_atoms.size(), {});
    st.d_subs.assign(d_atoms.size(), AtomicDerivation(AtomId::user("x")));

    std::vector<std::size_t> open_boxes;
    for (std::size_t i = 0; i < m; ++i)
      if (!r.boxes[i].empty()) open_boxes.push_back(i);
    std::size_t total_slots = open_boxes.size() + d_atoms.size();
    if (total_slots == 0) {
      if (!ctx.empty()) return std::nullopt;
      return AtomicDerivation(r, st.box_contexts, st.box_subs, d_atoms, st.d_contexts, {},
                              std::move(modal_subs));
    }

    std::optional<AtomicDerivation> found;
    auto dfs = [&](auto&& self, std::size_t slot, const Multiset<AtomId>& remaining) -> bool {
      bool last = slot + 1 == total_slots;
      auto try_context = [&](const Multiset<AtomId>& c, const Multiset<AtomId>& rest) -> bool {
        if (slot < open_boxes.size()) {
          std::size_t bi = open_boxes[slot];
          if (slot > 0 && slot - 1 < open_boxes.size() &&
              r.boxes[open_boxes[slot - 1]] == r.boxes[bi] &&
              c < st.box_contexts[open_boxes[slot - 1]])
            return true;  // symmetric duplicate, keep scanning
          std::vector<AtomicDerivation> subs;
          for (const AtomicSequent& qs : r.boxes[bi].sequents) {
            auto sub = search(mset_union(c, qs.premises), qs.conclusion, depth - 1);
            if (!sub) return true;
            subs.push_back(*sub);
          }
          st.box_contexts[bi] = c;
          st.box_subs[bi] = std::move(subs);
        } else {
          std::size_t di = slot - open_boxes.size();
          if (di > 0 && d_atoms[di - 1] == d_atoms[di] && c < st.d_contexts[di - 1])
            return true;
          auto sub = search(c, d_atoms[di], depth - 1);
          if (!sub) return true;
          st.d_contexts[di] = c;
          st.d_subs[di] = *sub;
        }
        if (last) {
          found = AtomicDerivation(r, st.box_contexts, st.box_subs, d_atoms, st.d_contexts,
                                   st.d_subs, modal_subs);
          return false;
        }
        return self(self, slot + 1, rest);
      };
      if (last) return try_context(remaining, {});
      return for_each_submultiset(remaining,
                                  [&](const Multiset<AtomId>& c, const Multiset<AtomId>& rest) {
                                    return try_context(c, rest);
                                  });
    };
    dfs(dfs, 0, ctx);
    return found;
  }

  AtomicDerivation family_app(
      AtomicRule rule, const Multiset<AtomId>& ref_atoms,
      std::optional<std::pair<Multiset<AtomId>, AtomicDerivation>> zero_slot) {
    // Family instances have premise-free singleton boxes. The q boxes are
    // closed by Ref with singleton contexts; the zero box, when present,
    // carries the searched subderivation. Contexts must follow the rule's
    // canonical box order.
    std::vector<Multiset<AtomId>> box_contexts;
    std::vector<std::vector<AtomicDerivation>> box_subs;
    Multiset<AtomId> remaining_refs = ref_atoms;
    bool zero_used = false;
    for (const AdditiveBox& box : rule.boxes) {
      const AtomId& q = box.sequents[0].conclusion;
      if (remaining_refs.count(q) > 0) {
        remaining_refs.erase_one(q);
        box_contexts.push_back(Multiset<AtomId>::singleton(q));
        box_subs.push_back({AtomicDerivation(q)});
      } else {
        // the zero box
        box_contexts.push_back(zero_slot->first);
        box_subs.push_back({zero_slot->second});
        zero_used = true;
      }
    }
    (void)zero_used;
    return AtomicDerivation(std::move(rule), std::move(box_contexts), std::move(box_subs), {}, {},
                            {}, {});
  }

  const Base& base_;
  std::size_t bound_;
  std::size_t level_ = 1;
  std::vector<AtomId> persistent_;
  std::vector<Multiset<AtomId>> d_candidates_;
  std::map<AtomId, std::vector<const AtomicRule*>> by_conclusion_;
  std::map<Key, std::optional<AtomicDerivation>> memo_;
};

}  // namespace detail

// Bounded proof search for L |-_B p. A returned derivation checks with
// endsequent (L, p); nullopt is bound-relative only. The persistent-atom
// multisets D considered satisfy |D| <= depth_bound.
inline std::optional<AtomicDerivation> derive(const Base& b, const Multiset<AtomId>& ctx,
                                              const AtomId& goal, std::size_t depth_bound) {
  detail::DeriveEngine engine(b, depth_bound);
  return engine.run(ctx, goal);
}

// Re-checks `d` in the superset base `c` and returns it; the tree is
// unchanged (rules of the smaller base are rules of `c`, persistence is
// monotone).
inline AtomicDerivation weaken_base(const AtomicDerivation& d, const Base& c) {
  check_atomic(c, d);
  return d;
}

namespace detail {

struct PlugList {
  // (cut atom, plug) pairs, consumed in order.
  std::vector<std::pair<AtomId, AtomicDerivation>> items;
};

// Lemma-shaped transformation: splice plugs into a host derivation. The host
// context is P + S where P is the multiset of plug atoms; the result derives
// T_1 + ... + T_n + S from the same rule skeleton.
inline AtomicDerivation cut_node(const AtomicDerivation& host, const PlugList& plugs,
                                 const Base& c) {
  if (plugs.items.empty()) return host;

  if (host.is_ref()) {
    if (plugs.items.size() != 1 || !(plugs.items[0].first == host.ref_atom()))
      throw CheckError("cut multiplicity mismatch at Ref(" + host.ref_atom().text() + ")");
    return plugs.items[0].second;
  }

  // Distribute the plugs over the host's context slots, greedily and
  // deterministically; capacities per atom add up to the host context, so a
  // placement always exists when the precondition holds.
  std::vector<Multiset<AtomId>> slots = host.box_contexts();
  for (const auto& dc : host.d_contexts()) slots.push_back(dc);
  std::vector<Multiset<AtomId>> capacity = slots;
  std::vector<PlugList> slot_plugs(slots.size());
  for (const auto& [atom, plug] : plugs.items) {
    bool placed = false;
    for (std::size_t i = 0; i < capacity.size() && !placed; ++i) {
      if (capacity[i].count(atom) > 0) {
        capacity[i].erase_one(atom);
        slot_plugs[i].items.push_back({atom, plug});
        placed = true;
      }
    }
    if (!placed)
      throw CheckError("cut multiplicity mismatch: host context lacks " + atom.text());
  }

  auto new_slot_context = [&](std::size_t i) {
    // (slot minus its cut atoms) + union of its plugs' contexts
    Multiset<AtomId> ctx = slots[i];
    Multiset<AtomId> added;
    for (const auto& [atom, plug] : slot_plugs[i].items) {
      ctx.erase_one(atom);
      added = mset_union(added, plug.endsequent().context);
    }
    return mset_union(ctx, added);
  };

  std::size_t m = host.box_contexts().size();
  std::vector<Multiset<AtomId>> box_contexts;
  std::vector<std::vector<AtomicDerivation>> box_subs;
  for (std::size_t i = 0; i < m; ++i) {
    box_contexts.push_back(new_slot_context(i));
    std::vector<AtomicDerivation> subs;
    for (const AtomicDerivation& sub : host.box_subs()[i])
      subs.push_back(cut_node(sub, slot_plugs[i], c));
    box_subs.push_back(std::move(subs));
  }
  std::vector<Multiset<AtomId>> d_contexts;
  std::vector<AtomicDerivation> d_subs;
  for (std::size_t i = 0; i < host.d_atoms().size(); ++i) {
    d_contexts.push_back(new_slot_context(m + i));
    d_subs.push_back(cut_node(host.d_subs()[i], slot_plugs[m + i], c));
  }

  return AtomicDerivation(host.rule(), std::move(box_contexts), std::move(box_subs),
                          host.d_atoms(), std::move(d_contexts), std::move(d_subs),
                          host.modal_subs());
}

}  // namespace detail

// Constructive cut: given a host deriving P + S |-_B q and plugs T_i |-_C p_i
// covering P = {p_1..p_n} with C a superset of B, produces a checked
// derivation of T_1 + ... + T_n + S |-_C q. `cut_atoms` lists P with
// multiplicity, aligned with `plugs`.
inline AtomicDerivation cut_compose(const Base& b, const AtomicDerivation& host,
                                    const std::vector<AtomId>& cut_atoms,
                                    const std::vector<AtomicDerivation>& plugs, const Base& c) {
  if (!b.subset_of(c)) throw CheckError("cut: bases are not in a subset relation");
  if (cut_atoms.size() != plugs.size()) throw CheckError("cut: atoms/plugs misaligned");
  AtomicJudgement host_end = check_atomic(b, host);
  Multiset<AtomId> p_mset;
  for (const AtomId& a : cut_atoms) p_mset.insert(a);
  if (!host_end.context.contains(p_mset))
    throw CheckError("cut multiplicity mismatch: host context does not contain the cut atoms");
  detail::PlugList pl;
  for (std::size_t i = 0; i < plugs.size(); ++i) {
    AtomicJudgement pe = check_atomic(c, plugs[i]);
    if (!(pe.conclusion == cut_atoms[i]))
      throw CheckError("cut: plug " + std::to_string(i + 1) + " concludes " +
                       pe.conclusion.text() + ", wanted " + cut_atoms[i].text());
    pl.items.push_back({cut_atoms[i], plugs[i]});
  }
  AtomicDerivation out = detail::cut_node(host, pl, c);
  check_atomic(c, out);
  return out;
}

// Naive fixpoint oracle: saturates the derivable pairs of `b` by rounds of
// rule application, then reports those over `alphabet` with contexts of size
// <= max_context. Round t adds exactly the pairs derivable at App-nesting
// depth t (persistent multisets D with |D| <= max_depth, like `derive`), so
// the reported set equals what `derive` at the same bound can reach.
// Internally the saturation tracks larger contexts: a subgoal context grows
// by at most the largest box premise per level, and modal subgoals start from
// D + U. Contexts are interned so the closure rounds run on indices.
inline std::set<std::pair<Multiset<AtomId>, AtomId>> enumerate_derivable(
    const Base& b, const std::vector<AtomId>& alphabet, std::size_t max_context,
    std::size_t max_depth) {
  std::set<AtomId> universe_set(alphabet.begin(), alphabet.end());
  std::size_t max_q = 0, max_u = 0;
  for (const AtomicRule& r : b.rules) {
    universe_set.insert(r.conclusion);
    for (const AdditiveBox& box : r.boxes)
      for (const AtomicSequent& s : box.sequents) {
        max_q = std::max(max_q, s.premises.size());
        universe_set.insert(s.conclusion);
        for (const auto& [a, cnt] : s.premises.entries()) universe_set.insert(a);
      }
    for (const AtomicSequent& s : r.modal.sequents) {
      max_u = std::max(max_u, s.premises.size());
      universe_set.insert(s.conclusion);
      for (const auto& [a, cnt] : s.premises.entries()) universe_set.insert(a);
    }
  }
  for (const AtomId& a : b.top_families) universe_set.insert(a);
  for (const AtomId& a : b.zero_families) universe_set.insert(a);
  std::vector<AtomId> universe(universe_set.begin(), universe_set.end());

  std::size_t internal =
      std::max(max_context, max_depth + max_u) + max_depth * std::max<std::size_t>(max_q, 1);
  std::vector<Multiset<AtomId>> all_ctxs = multisets_up_to(universe, internal);
  std::size_t n = all_ctxs.size();
  std::map<Multiset<AtomId>, int> ctx_index;
  for (std::size_t i = 0; i < n; ++i) ctx_index.emplace(all_ctxs[i], static_cast<int>(i));
  auto index_of = [&](const Multiset<AtomId>& m) -> int {
    auto it = ctx_index.find(m);
    return it == ctx_index.end() ? -1 : it->second;
  };
  std::map<AtomId, int> atom_index;
  for (std::size_t i = 0; i < universe.size(); ++i)
    atom_index.emplace(universe[i], static_cast<int>(i));

  // union_tab[i][j]: index of all_ctxs[i] + all_ctxs[j], or -1 beyond bound.
  std::vector<std::vector<int>> union_tab(n, std::vector<int>(n, -1));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      if (all_ctxs[i].size() + all_ctxs[j].size() > internal) continue;
      int u = index_of(mset_union(all_ctxs[i], all_ctxs[j]));
      union_tab[i][j] = union_tab[j][i] = u;
    }

  std::vector<AtomId> persistent;
  for (const AtomId& a : persistent_atoms(b)) persistent.push_back(a);
  std::vector<Multiset<AtomId>> d_candidates = multisets_up_to(persistent, max_depth);

  // have[atom][ctx]: derived in an earlier round; next: this round's additions.
  std::vector<std::vector<char>> have(universe.size(), std::vector<char>(n, 0));
  std::vector<std::vector<char>> next = have;

  for (std::size_t round = 1; round <= max_depth; ++round) {
    auto present = [&](int ctx, int atom) { return ctx >= 0 && have[atom][ctx]; };
    auto add = [&](int ctx, int atom) {
      if (ctx >= 0 && !have[atom][ctx]) next[atom][ctx] = 1;
    };

    if (round == 1)
      for (std::size_t ai = 0; ai < universe.size(); ++ai)
        add(index_of(Multiset<AtomId>::singleton(universe[ai])), static_cast<int>(ai));

    for (const AtomId& t : b.top_families)
      for (std::size_t ci = 0; ci < n; ++ci)
        if (all_ctxs[ci].empty() ? round == 1 : round == 2)
          add(static_cast<int>(ci), atom_index.at(t));

    if (round >= 2)
      for (const AtomId& z : b.zero_families) {
        int za = atom_index.at(z);
        for (std::size_t c2 = 0; c2 < n; ++c2) {
          if (!have[za][c2]) continue;
          for (std::size_t c1 = 0; c1 < n; ++c1) {
            int u = union_tab[c1][c2];
            if (u < 0) continue;
            for (std::size_t ai = 0; ai < universe.size(); ++ai) add(u, static_cast<int>(ai));
          }
        }
      }

    for (const AtomicRule& r : b.rules) {
      int concl = atom_index.at(r.conclusion);
      for (const Multiset<AtomId>& dset : d_candidates) {
        int d_idx = index_of(dset);
        if (d_idx < 0) continue;
        bool modal_ok = true;
        for (const AtomicSequent& uv : r.modal.sequents) {
          int u = union_tab[d_idx][index_of(uv.premises)];
          modal_ok = modal_ok && present(u, atom_index.at(uv.conclusion));
        }
        if (!modal_ok) continue;

        // Candidate context indices per open slot. Runs of equal boxes or
        // equal D atoms are symmetric, so their choices are taken
        // non-decreasing (the added pairs are unchanged, permutations of a
        // choice contribute the same union).
        std::vector<std::vector<int>> slot_candidates;
        std::vector<bool> same_as_prev;
        bool feasible = true;
        const AdditiveBox* prev_box = nullptr;
        for (const AdditiveBox& box : r.boxes) {
          if (box.empty()) continue;
          std::vector<int> cand;
          for (std::size_t ci = 0; ci < n; ++ci) {
            bool ok = true;
            for (const AtomicSequent& qs : box.sequents) {
              int u = union_tab[ci][index_of(qs.premises)];
              ok = ok && present(u, atom_index.at(qs.conclusion));
            }
            if (ok) cand.push_back(static_cast<int>(ci));
          }
          if (cand.empty()) feasible = false;
          slot_candidates.push_back(std::move(cand));
          same_as_prev.push_back(prev_box != nullptr && *prev_box == box);
          prev_box = &box;
        }
        const AtomId* prev_atom = nullptr;
        for (const AtomId& da : dset.expand()) {
          int ai = atom_index.at(da);
          std::vector<int> cand;
          for (std::size_t ci = 0; ci < n; ++ci)
            if (have[ai][ci]) cand.push_back(static_cast<int>(ci));
          if (cand.empty()) feasible = false;
          slot_candidates.push_back(std::move(cand));
          same_as_prev.push_back(prev_atom != nullptr && *prev_atom == da);
          prev_atom = &da;
        }
        if (!feasible) continue;

        auto dfs = [&](auto&& self, std::size_t slot, std::size_t from, int acc) -> void {
          if (acc < 0) return;
          if (slot == slot_candidates.size()) {
            add(acc, concl);
            return;
          }
          std::size_t start = same_as_prev[slot] ? from : 0;
          for (std::size_t k = start; k < slot_candidates[slot].size(); ++k)
            self(self, slot + 1, k, union_tab[acc][slot_candidates[slot][k]]);
        };
        dfs(dfs, 0, 0, index_of({}));
      }
    }

    for (std::size_t ai = 0; ai < universe.size(); ++ai)
      for (std::size_t ci = 0; ci < n; ++ci)
        if (next[ai][ci]) have[ai][ci] = 1;
  }

  std::set<std::pair<Multiset<AtomId>, AtomId>> out;
  for (std::size_t ai = 0; ai < universe.size(); ++ai) {
    if (std::find(alphabet.begin(), alphabet.end(), universe[ai]) == alphabet.end()) continue;
    for (std::size_t ci = 0; ci < n; ++ci) {
      if (!have[ai][ci] || all_ctxs[ci].size() > max_context) continue;
      bool in_alpha = true;
      for (const auto& [a, cnt] : all_ctxs[ci].entries())
        in_alpha = in_alpha && std::find(alphabet.begin(), alphabet.end(), a) != alphabet.end();
      if (in_alpha) out.insert({all_ctxs[ci], universe[ai]});
    }
  }
  return out;
}

}  // namespace illbes
