"""Bisimilarity checking between open nets.

Verdicts are always relative to a per-place bound on the explored markings:
a `Bisimilar` result certifies bisimilarity on the capped region, and the
`touched_overflow` flag records whether the exploration was truncated at
all.  A `NotBisimilar` verdict comes with a distinguishing play; when
neither net overflowed the bound, the play is valid for the unbounded nets.
`Inconclusive` is returned when the only way to relate the initial markings
equates a real marking with the overflow state, i.e. the verdict would rest
on unexplored behaviour.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import multiset, semantics
from .errors import (
    NotACorrespondence,
    PairExceedsCap,
    UnknownPlace,
    UnsupportedMode,
)
from .multiset import EMPTY, Multiset
from .nets import (
    Correspondence,
    OpenNet,
    close_place,
    validate_correspondence,
)
from .semantics import (
    DEFAULT_CAP,
    DEFAULT_MAX_STEP,
    FIRING,
    OVERFLOW,
    Lts,
    Obs,
    build_lts,
    label_sort_key,
    relabel,
    weak_closure,
)

__all__ = [
    "BisimVerdict",
    "PlayMove",
    "check_bisim",
    "search_correspondence",
    "induced_correspondence",
    "check_upto",
    "UpToResult",
    "out_degree",
    "subtractable",
    "subtractable_markings",
    "close_place",
    "partition_refinement",
    "naive_bisimulation",
]

BISIMILAR = "Bisimilar"
NOT_BISIMILAR = "NotBisimilar"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class PlayMove:
    """One exchange of the bisimulation game.

    The challenger on `side` (1 or 2) plays `label` reaching
    `challenger_target`; `response_target` is the strongest answer of the
    other net, or None when there is no answer at all.
    """

    side: int
    label: object
    source_pair: tuple
    challenger_target: object
    response_target: object


@dataclass
class BisimVerdict:
    kind: str  # "strong" | "weak"
    mode: str  # "firing" | "step"
    result: str
    bound: int
    witness: list | None
    play: list | None
    touched_overflow: bool
    eta: Correspondence | None = None

    @property
    def bisimilar(self) -> bool:
        return self.result == BISIMILAR


def out_degree(z: OpenNet, s: str) -> int:
    """The largest number of tokens one extended event can remove from s."""
    if s not in z.places:
        raise UnknownPlace(f"no place {s!r} in the net")
    candidates = [tr.pre.count(s) for tr in z.transitions.values()]
    if s in z.open_out:
        candidates.append(1)
    candidates.append(0)
    return max(candidates)


def subtractable(z: OpenNet, u: Multiset, v: Multiset) -> bool:
    """Whether v consists of surplus tokens on input-open places of u.

    Surplus means exceeding the place's out-degree, so removing v cannot
    disable any single event.
    """
    if not v.support() <= z.open_in:
        return False
    return all(v.count(s) <= max(u.count(s) - out_degree(z, s), 0) for s in v.support())


def subtractable_markings(z: OpenNet, u: Multiset):
    """All markings subtractable from u, in canonical order."""
    places = sorted(z.open_in)
    ceilings = [max(u.count(s) - out_degree(z, s), 0) for s in places]
    for counts in itertools.product(*(range(c + 1) for c in ceilings)):
        yield Multiset({s: c for s, c in zip(places, counts) if c})


def partition_refinement(lts_states: int, successors) -> list:
    """Coarsest bisimulation partition of a finite labelled graph.

    `successors[i]` lists (label, target) pairs; labels need only be
    hashable and orderable through label_sort_key.  Returns a block id per
    state; equal ids mean bisimilar states.
    """
    blocks = [0] * lts_states
    while True:
        signatures = []
        for i in range(lts_states):
            sig = frozenset((label_sort_key(lbl), blocks[dst]) for lbl, dst in successors[i])
            signatures.append((blocks[i], tuple(sorted(sig))))
        order = sorted(set(signatures))
        renumber = {sig: k for k, sig in enumerate(order)}
        new_blocks = [renumber[signatures[i]] for i in range(lts_states)]
        if new_blocks == blocks:
            return blocks
        blocks = new_blocks


def naive_bisimulation(lts_states: int, successors) -> set:
    """Greatest bisimulation as a set of state pairs, by fixpoint descent.

    Quadratic and slow; kept as the independent oracle for the partition
    refinement implementation.
    """
    related = {(i, j) for i in range(lts_states) for j in range(lts_states)}

    def transfer(a, b):
        for label, a2 in successors[a]:
            if not any(lbl == label and (a2, b2) in related for lbl, b2 in successors[b]):
                return False
        return True

    changed = True
    while changed:
        changed = False
        for pair in sorted(related):
            a, b = pair
            if not (transfer(a, b) and transfer(b, a)):
                related.discard(pair)
                changed = True
    return related


def _separation_depths(n1, succ1, n2, succ2) -> dict:
    """For each cross pair, the game round at which it is distinguished.

    Pairs missing from the result are bisimilar.  Round k means the
    challenger can win in k moves and no fewer.
    """
    alive = {(i, j) for i in range(n1) for j in range(n2)}
    depths = {}
    round_no = 0
    while True:
        round_no += 1
        swapped = {(b, a) for a, b in alive}
        dropped = set()
        for i, j in alive:
            ok = _transfer_ok(succ1[i], succ2[j], alive) and _transfer_ok(
                succ2[j], succ1[i], swapped
            )
            if not ok:
                dropped.add((i, j))
        if not dropped:
            return depths
        for pair in dropped:
            depths[pair] = round_no
            alive.discard(pair)


def _transfer_ok(challenger_edges, responder_edges, alive_pairs) -> bool:
    for label, a2 in challenger_edges:
        if not any(lbl == label and (a2, b2) in alive_pairs for lbl, b2 in responder_edges):
            return False
    return True


def _extract_play(lts1: Lts, lts2: Lts, depths: dict):
    """A shortest alternating challenge/response trace for the initial pair."""
    succ1 = lts1.successors()
    succ2 = lts2.successors()
    play = []
    i, j = lts1.initial, lts2.initial
    while (i, j) in depths:
        move, next_pair = _best_challenge(lts1, lts2, succ1, succ2, i, j, depths)
        play.append(move)
        if next_pair is None:
            break
        i, j = next_pair
    return play


def _pair_depth(depths, i, j):
    return depths.get((i, j), 0)  # 0 = never separated (bisimilar)


def _best_challenge(lts1, lts2, succ1, succ2, i, j, depths):
    """The canonical winning challenge at a separated pair.

    A challenge wins iff every response lands in a pair separated strictly
    earlier; the responder then answers with its most resistant option.
    Returns the move and the pair it leads to (None when the responder is
    stuck).
    """
    depth = depths[(i, j)]
    candidates = []
    for side, a, succ_a, b, succ_b in ((1, i, succ1, j, succ2), (2, j, succ2, i, succ1)):
        for label, a2 in succ_a[a]:
            responses = sorted(b2 for lbl, b2 in succ_b[b] if lbl == label)
            if side == 1:
                rdepths = [_pair_depth(depths, a2, b2) for b2 in responses]
            else:
                rdepths = [_pair_depth(depths, b2, a2) for b2 in responses]
            if all(0 < d < depth for d in rdepths):
                candidates.append((side, label, a2, responses, rdepths))
    # canonical: side, then label order, then target state index
    candidates.sort(key=lambda c: (c[0], label_sort_key(c[1]), c[2]))
    side, label, a2, responses, rdepths = candidates[0]
    response_index = max(zip(rdepths, responses))[1] if responses else None
    challenger_lts = lts1 if side == 1 else lts2
    responder_lts = lts2 if side == 1 else lts1
    move = PlayMove(
        side=side,
        label=label,
        source_pair=(
            semantics.format_marking(lts1.states[i]),
            semantics.format_marking(lts2.states[j]),
        ),
        challenger_target=semantics.format_marking(challenger_lts.states[a2]),
        response_target=(
            None if response_index is None
            else semantics.format_marking(responder_lts.states[response_index])
        ),
    )
    if response_index is None:
        return move, None
    next_pair = (a2, response_index) if side == 1 else (response_index, a2)
    return move, next_pair


def _eta_obs(eta: Correspondence):
    def fn(obs: Obs) -> Obs:
        if obs.kind == "plus":
            return Obs("plus", eta.eta_in[obs.name])
        if obs.kind == "minus":
            return Obs("minus", eta.eta_out[obs.name])
        return obs

    return fn


def _prepared_lts(z: OpenNet, kind, mode, tau_labels, cap, max_step, root=None) -> Lts:
    lts = build_lts(z, mode=mode, cap=cap, max_step=max_step, root=root)
    if kind == "weak":
        lts = weak_closure(lts, tau_labels)
    return lts


def check_bisim(z1: OpenNet, z2: OpenNet, eta: Correspondence,
                kind: str = "strong", mode: str = FIRING,
                tau_labels=frozenset(), cap: int = DEFAULT_CAP,
                max_step: int = DEFAULT_MAX_STEP) -> BisimVerdict:
    """Decide (weak) firing or step bisimilarity up to the marking cap.

    The correspondence aligns the interaction observations of the first net
    with those of the second; transition labels are compared as they are.
    """
    report = validate_correspondence(eta, z1, z2)
    if not report.ok:
        raise NotACorrespondence(str(report))
    lts1 = relabel(
        _prepared_lts(z1, kind, mode, tau_labels, cap, max_step), _eta_obs(eta)
    )
    lts2 = _prepared_lts(z2, kind, mode, tau_labels, cap, max_step)
    touched = lts1.has_overflow() or lts2.has_overflow()

    n1 = len(lts1.states)
    successors = [[] for _ in range(n1 + len(lts2.states))]
    for src, label, dst in lts1.edges:
        successors[src].append((label, dst))
    for src, label, dst in lts2.edges:
        successors[n1 + src].append((label, n1 + dst))
    blocks = partition_refinement(n1 + len(lts2.states), successors)

    if blocks[lts1.initial] == blocks[n1 + lts2.initial]:
        witness = []
        mixed_overflow = False
        for i, s1 in enumerate(lts1.states):
            for j, s2 in enumerate(lts2.states):
                if blocks[i] == blocks[n1 + j]:
                    witness.append((s1, s2))
                    if (s1 is OVERFLOW) != (s2 is OVERFLOW):
                        mixed_overflow = True
        result = INCONCLUSIVE if mixed_overflow else BISIMILAR
        return BisimVerdict(
            kind=kind, mode=mode, result=result, bound=cap,
            witness=witness, play=None,
            touched_overflow=touched or mixed_overflow, eta=eta,
        )

    depths = _separation_depths(n1, lts1.successors(), len(lts2.states), lts2.successors())
    play = _extract_play(lts1, lts2, depths)
    return BisimVerdict(
        kind=kind, mode=mode, result=NOT_BISIMILAR, bound=cap,
        witness=None, play=play, touched_overflow=touched, eta=eta,
    )


MAX_AUTO_INTERFACE = 5


def search_correspondence(z1: OpenNet, z2: OpenNet, kind="strong", mode=FIRING,
                          tau_labels=frozenset(), cap=DEFAULT_CAP,
                          max_step=DEFAULT_MAX_STEP) -> BisimVerdict:
    """Try every correspondence between the open places and keep any witness.

    Bisimilarity of nets quantifies existentially over correspondences, so
    the nets are bisimilar iff some eta works.  Interfaces are required to
    be small, the search being factorial.
    """
    for side in ("+", "-"):
        d1 = z1.open_in if side == "+" else z1.open_out
        d2 = z2.open_in if side == "+" else z2.open_out
        if len(d1) > MAX_AUTO_INTERFACE or len(d2) > MAX_AUTO_INTERFACE:
            raise NotACorrespondence(
                f"interface too large for automatic search (>{MAX_AUTO_INTERFACE} places); "
                "provide a correspondence explicitly"
            )
    if len(z1.open_in) != len(z2.open_in) or len(z1.open_out) != len(z2.open_out):
        raise NotACorrespondence(
            "no correspondence exists: the open interfaces have different sizes"
        )
    ins1, ins2 = sorted(z1.open_in), sorted(z2.open_in)
    outs1, outs2 = sorted(z1.open_out), sorted(z2.open_out)
    first = None
    fallback = None
    for perm_in in itertools.permutations(ins2):
        for perm_out in itertools.permutations(outs2):
            eta = Correspondence(
                eta_in=dict(zip(ins1, perm_in)),
                eta_out=dict(zip(outs1, perm_out)),
            )
            verdict = check_bisim(z1, z2, eta, kind, mode, tau_labels, cap, max_step)
            if verdict.result == BISIMILAR:
                return verdict
            if verdict.result == INCONCLUSIVE and fallback is None:
                fallback = verdict
            if first is None:
                first = verdict
    return fallback or first


def induced_correspondence(po1, po2, eta: Correspondence) -> Correspondence:
    """Lift a correspondence between the second components of two pushouts.

    Both pushouts must share the first leg's target (the common context).
    An open place of the first glued net coming from the context maps to the
    same context place in the second glued net; one coming from the varying
    component maps through eta.
    """
    eta_in = {}
    eta_out = {}
    for polarity, store in (("+", eta_in), ("-", eta_out)):
        opens1 = po1.z3.open_in if polarity == "+" else po1.z3.open_out
        for s3 in opens1:
            pre1 = po1.alpha1.place_preimages(s3)
            if pre1:
                (s,) = pre1
                store[s3] = po2.alpha1.place_map[s]
            else:
                (s,) = po1.alpha2.place_preimages(s3)
                mapped = eta.eta_in[s] if polarity == "+" else eta.eta_out[s]
                store[s3] = po2.alpha2.place_map[mapped]
    return Correspondence(eta_in=eta_in, eta_out=eta_out)


@dataclass
class UpToResult:
    accepted: bool
    reason: str | None
    touched_overflow: bool


def check_upto(z1: OpenNet, z2: OpenNet, eta: Correspondence, pairs,
               tau_labels=frozenset(), cap: int = DEFAULT_CAP,
               mode: str = FIRING) -> UpToResult:
    """Check a finite relation against the up-to transfer conditions.

    After each challenge/response exchange, tokens on input-open places
    exceeding the place's out-degree may be discarded from both successor
    markings before looking the pair up in the relation again.  Acceptance
    certifies that every pair is weakly firing bisimilar.

    The technique is specific to firing behaviour: a parallel step can
    consume arbitrarily many tokens, so no out-degree bound exists.
    """
    if mode != FIRING:
        raise UnsupportedMode(
            "the up-to technique applies to firing bisimilarity only; "
            "step-mode out-degrees are unbounded"
        )
    pair_list = sorted(pairs, key=lambda p: (str(p[0]), str(p[1])))
    relation = set(pair_list)
    for pair in pair_list:
        for u in pair:
            if not all(c <= cap for _, c in u.items()):
                raise PairExceedsCap(f"marking {u} in the relation exceeds the cap {cap}")

    touched = False
    # one weak-closed transition system per distinct root marking, per net
    cache = {}

    def responses(z, which, root, want_label):
        key = (which, root)
        if key not in cache:
            lts = _prepared_lts(z, "weak", FIRING, tau_labels, cap, DEFAULT_MAX_STEP, root=root)
            cache[key] = lts
        lts = cache[key]
        nonlocal touched
        if lts.has_overflow():
            touched = True
        out = []
        for label, dst in lts.successors()[lts.initial]:
            if label == want_label and lts.states[dst] is not OVERFLOW:
                out.append(lts.states[dst])
        return out

    def eta_marking(v: Multiset, forward: bool) -> Multiset:
        table = eta.eta_in if forward else {b: a for a, b in eta.eta_in.items()}
        return multiset.image(table, v)

    def eta_label(label, forward: bool):
        if label is None or label.kind == "lab":
            return label
        table = eta.eta_in if label.kind == "plus" else eta.eta_out
        if not forward:
            table = {b: a for a, b in table.items()}
        return Obs(label.kind, table[label.name])

    for u1, u2 in pair_list:
        for direction in (1, 2):
            challenger_z = z1 if direction == 1 else z2
            responder_z = z2 if direction == 1 else z1
            cu = u1 if direction == 1 else u2
            ru = u2 if direction == 1 else u1
            for step in semantics.enabled_steps(challenger_z, cu, FIRING, cap, 1):
                target = step.target
                if not all(c <= cap for _, c in target.items()):
                    raise PairExceedsCap(
                        f"challenge from {cu} reaches {target}, beyond the cap {cap}; "
                        "raise the cap"
                    )
                (event,) = tuple(step.events.support())
                label = semantics.observe(challenger_z, event)
                if label.kind == "lab" and label.name in tau_labels:
                    want = None
                else:
                    want = eta_label(label, forward=(direction == 1))
                answered = False
                for answer in responses(responder_z, direction % 2 + 1, ru, want):
                    for v in subtractable_markings(challenger_z, target):
                        v_mirror = eta_marking(v, forward=(direction == 1))
                        if not v_mirror <= answer:
                            continue
                        cut = target - v
                        cut_answer = answer - v_mirror
                        candidate = (cut, cut_answer) if direction == 1 else (cut_answer, cut)
                        if candidate in relation:
                            answered = True
                            break
                    if answered:
                        break
                if not answered:
                    side = "first" if direction == 1 else "second"
                    return UpToResult(
                        accepted=False,
                        reason=(
                            f"pair ({u1}, {u2}): {side}-net move "
                            f"{semantics.format_label(label)} to {target} has no "
                            "answer landing back in the relation"
                        ),
                        touched_overflow=touched,
                    )
    return UpToResult(accepted=True, reason=None, touched_overflow=touched)
