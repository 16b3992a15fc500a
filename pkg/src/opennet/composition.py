"""Gluing two open nets along a shared interface net.

Both nets embed a common interface; when the interface usage of each side is
matched by openness on the other (composability), the two nets can be glued.
The glued net is built as the disjoint union quotiented by the interface,
which is valid because both legs are injective.  Item names follow a fixed
scheme: interface items keep the interface net's names, items private to the
first leg's target get an "L:" prefix, items private to the second leg's
target an "R:" prefix.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import multiset, nets
from .errors import NotComposable, NotEmbedding, SourceMismatch
from .multiset import Multiset, SetPushout
from .nets import Morphism, OpenNet, PetriNet, Transition

LEFT_PREFIX = "L:"
RIGHT_PREFIX = "R:"
RESERVED_PREFIXES = (LEFT_PREFIX, RIGHT_PREFIX)


@dataclass(frozen=True)
class PushoutResult:
    """The glued net with its two legs and the span it was computed from."""

    z3: OpenNet
    alpha1: Morphism
    alpha2: Morphism
    f1: Morphism
    f2: Morphism

    @property
    def z0(self) -> OpenNet:
        return self.f1.source

    @property
    def z1(self) -> OpenNet:
        return self.f1.target

    @property
    def z2(self) -> OpenNet:
        return self.f2.target


def _require_span(f1: Morphism, f2: Morphism):
    if not nets.is_embedding(f1) or not nets.is_embedding(f2):
        raise NotEmbedding("both span legs must be embeddings")
    if f1.source != f2.source:
        raise SourceMismatch("span legs do not share their source net")


def composability_failures(f1: Morphism, f2: Morphism) -> list:
    """All violations of the composability conditions, as readable strings."""
    failures = []
    pairs = (
        (f1, f2, "first", "second"),
        (f2, f1, "second", "first"),
    )
    for fa, fb, name_a, name_b in pairs:
        for s in sorted(nets.in_places(fa)):
            if fb.place_map[s] not in fb.target.open_in:
                failures.append(
                    f"interface place {s!r} receives tokens from the {name_a} net but its "
                    f"image {fb.place_map[s]!r} is not input open in the {name_b} net"
                )
        for s in sorted(nets.out_places(fa)):
            if fb.place_map[s] not in fb.target.open_out:
                failures.append(
                    f"interface place {s!r} loses tokens to the {name_a} net but its "
                    f"image {fb.place_map[s]!r} is not output open in the {name_b} net"
                )
    return failures


def check_composable(f1: Morphism, f2: Morphism) -> bool:
    """True iff the two embeddings can be glued into a pushout of open nets."""
    _require_span(f1, f2)
    return not composability_failures(f1, f2)


def _glued_name(leg: Morphism, prefix: str, item: str, kind: str) -> str:
    mapping = leg.place_map if kind == "place" else leg.trans_map
    for x0, x in mapping.items():
        if x == item:
            return x0
    return prefix + item


def pushout(f1: Morphism, f2: Morphism) -> PushoutResult:
    """Glue the targets of two composable embeddings along their source.

    Open places of the result are those whose every preimage is open on its
    side; the initial marking amalgamates the two component markings over
    the interface marking.
    """
    _require_span(f1, f2)
    failures = composability_failures(f1, f2)
    if failures:
        raise NotComposable("; ".join(failures))

    z0, z1, z2 = f1.source, f1.target, f2.target
    a1_places = {s: _glued_name(f1, LEFT_PREFIX, s, "place") for s in z1.places}
    a2_places = {s: _glued_name(f2, RIGHT_PREFIX, s, "place") for s in z2.places}
    a1_trans = {t: _glued_name(f1, LEFT_PREFIX, t, "trans") for t in z1.transitions}
    a2_trans = {t: _glued_name(f2, RIGHT_PREFIX, t, "trans") for t in z2.transitions}

    places = frozenset(a1_places.values()) | frozenset(a2_places.values())
    transitions = {}
    for t, name in a1_trans.items():
        transitions[name] = Transition(
            label=z1.label(t),
            pre=multiset.image(a1_places, z1.pre(t)),
            post=multiset.image(a1_places, z1.post(t)),
        )
    for t, name in a2_trans.items():
        transitions[name] = Transition(
            label=z2.label(t),
            pre=multiset.image(a2_places, z2.pre(t)),
            post=multiset.image(a2_places, z2.post(t)),
        )

    open_in = set()
    open_out = set()
    inv1 = {v: k for k, v in a1_places.items()}
    inv2 = {v: k for k, v in a2_places.items()}
    for s3 in places:
        pre1 = inv1.get(s3)
        pre2 = inv2.get(s3)
        if (pre1 is None or pre1 in z1.open_in) and (pre2 is None or pre2 in z2.open_in):
            open_in.add(s3)
        if (pre1 is None or pre1 in z1.open_out) and (pre2 is None or pre2 in z2.open_out):
            open_out.add(s3)

    marking_square = SetPushout(f1=f1.place_map, f2=f2.place_map, a1=a1_places, a2=a2_places)
    initial = multiset.join(z1.initial, z2.initial, marking_square)

    z3 = OpenNet(
        net=PetriNet(places=places, transitions=transitions),
        open_in=frozenset(open_in),
        open_out=frozenset(open_out),
        initial=initial,
    )
    alpha1 = Morphism(source=z1, target=z3, place_map=a1_places, trans_map=a1_trans)
    alpha2 = Morphism(source=z2, target=z3, place_map=a2_places, trans_map=a2_trans)
    return PushoutResult(z3=z3, alpha1=alpha1, alpha2=alpha2, f1=f1, f2=f2)


def glue_names(po: PushoutResult) -> dict:
    """Where each item of the glued net came from.

    Maps every place and transition id of the result to a pair
    (origin, original id) with origin one of "interface", "left", "right".
    """
    naming = {}
    inv1p = {v: k for k, v in po.alpha1.place_map.items()}
    inv2p = {v: k for k, v in po.alpha2.place_map.items()}
    inv1t = {v: k for k, v in po.alpha1.trans_map.items()}
    inv2t = {v: k for k, v in po.alpha2.trans_map.items()}
    interface_places = {po.f1.place_map[s]: s for s in po.z0.places}
    interface_trans = {po.f1.trans_map[t]: t for t in po.z0.transitions}
    for s3 in sorted(po.z3.places):
        if s3 in inv1p and inv1p[s3] in interface_places:
            naming[s3] = ("interface", interface_places[inv1p[s3]])
        elif s3 in inv1p:
            naming[s3] = ("left", inv1p[s3])
        else:
            naming[s3] = ("right", inv2p[s3])
    for t3 in sorted(po.z3.transitions):
        if t3 in inv1t and inv1t[t3] in interface_trans:
            naming[t3] = ("interface", interface_trans[inv1t[t3]])
        elif t3 in inv1t:
            naming[t3] = ("left", inv1t[t3])
        else:
            naming[t3] = ("right", inv2t[t3])
    return naming


def places_square(po: PushoutResult) -> SetPushout:
    """The underlying pushout square on place sets."""
    return SetPushout(
        f1=po.f1.place_map,
        f2=po.f2.place_map,
        a1=po.alpha1.place_map,
        a2=po.alpha2.place_map,
    )


def mediating_morphism(po: PushoutResult, beta1: Morphism, beta2: Morphism) -> Morphism:
    """The unique morphism out of the pushout commuting with a cospan.

    Both legs of the pushout are jointly surjective, so the mediating map is
    fully determined; a ValueError signals a non-commuting cospan.
    """
    if beta1.source != po.z1 or beta2.source != po.z2 or beta1.target != beta2.target:
        raise SourceMismatch("cospan does not match the pushout span")
    place_map = {}
    trans_map = {}
    for kind, a1m, a2m, b1m, b2m, out in (
        ("place", po.alpha1.place_map, po.alpha2.place_map, beta1.place_map, beta2.place_map, place_map),
        ("transition", po.alpha1.trans_map, po.alpha2.trans_map, beta1.trans_map, beta2.trans_map, trans_map),
    ):
        for x1, x3 in a1m.items():
            out[x3] = b1m[x1]
        for x2, x3 in a2m.items():
            y = b2m[x2]
            if x3 in out and out[x3] != y:
                raise ValueError(f"cospan does not commute on {kind} {x3!r}")
            out[x3] = y
    return Morphism(source=po.z3, target=beta1.target, place_map=place_map, trans_map=trans_map)
