"""Marked open Petri nets, their morphisms, and validation.

An open net is a labelled P/T net together with two sets of open places
(input open: the environment may create tokens there; output open: the
environment may remove them) and an initial marking.  Morphisms map places
to places and transitions to transitions, preserve pre/post-sets and labels,
reflect openness, and reflect the initial marking.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping

from . import multiset
from .errors import DomainMismatch, PlaceNotOpen, UnknownPlace
from .multiset import Multiset


@dataclass(frozen=True, eq=True)
class Transition:
    label: str
    pre: Multiset
    post: Multiset


@dataclass(frozen=True, eq=True)
class PetriNet:
    places: frozenset
    transitions: Mapping[str, Transition]


@dataclass(frozen=True, eq=True)
class OpenNet:
    net: PetriNet
    open_in: frozenset
    open_out: frozenset
    initial: Multiset

    @property
    def places(self) -> frozenset:
        return self.net.places

    @property
    def transitions(self) -> Mapping[str, Transition]:
        return self.net.transitions

    def label(self, t: str) -> str:
        return self.net.transitions[t].label

    def pre(self, t: str) -> Multiset:
        return self.net.transitions[t].pre

    def post(self, t: str) -> Multiset:
        return self.net.transitions[t].post

    def labels(self) -> frozenset:
        return frozenset(tr.label for tr in self.net.transitions.values())

    def place_producers(self, s: str) -> frozenset:
        """Transitions with s in their post-set."""
        return frozenset(t for t, tr in self.net.transitions.items() if s in tr.post)

    def place_consumers(self, s: str) -> frozenset:
        """Transitions with s in their pre-set."""
        return frozenset(t for t, tr in self.net.transitions.items() if s in tr.pre)

    def is_open(self, s: str, polarity: str) -> bool:
        return s in (self.open_in if polarity == "+" else self.open_out)

    def with_initial(self, marking: Multiset) -> "OpenNet":
        return replace(self, initial=marking)


def build_net(places, transitions=None, open_in=(), open_out=(), initial=None) -> OpenNet:
    """Convenience constructor from plain dicts.

    `transitions` maps ids to (label, pre, post) with pre/post given as
    place->count mappings (or iterables of places).
    """
    trans = {}
    for tid, (label, pre, post) in (transitions or {}).items():
        trans[tid] = Transition(label=label, pre=Multiset(pre), post=Multiset(post))
    return OpenNet(
        net=PetriNet(places=frozenset(places), transitions=trans),
        open_in=frozenset(open_in),
        open_out=frozenset(open_out),
        initial=Multiset(initial),
    )


@dataclass(frozen=True, eq=True)
class Morphism:
    """A structure-preserving map between open nets.

    The maps are stored explicitly; nothing is ever inferred from item
    names coinciding.
    """

    source: OpenNet
    target: OpenNet
    place_map: Mapping[str, str]
    trans_map: Mapping[str, str]

    def apply_place(self, s: str) -> str:
        return self.place_map[s]

    def apply_trans(self, t: str) -> str:
        return self.trans_map[t]

    def place_image(self) -> frozenset:
        return frozenset(self.place_map.values())

    def trans_image(self) -> frozenset:
        return frozenset(self.trans_map.values())

    def place_preimages(self, s: str) -> frozenset:
        return frozenset(x for x, y in self.place_map.items() if y == s)

    def trans_preimages(self, t: str) -> frozenset:
        return frozenset(x for x, y in self.trans_map.items() if y == t)


def identity(z: OpenNet) -> Morphism:
    return Morphism(
        source=z,
        target=z,
        place_map={s: s for s in z.places},
        trans_map={t: t for t in z.transitions},
    )


def compose(f: Morphism, g: Morphism) -> Morphism:
    """The composite morphism applying f first, then g."""
    if f.target != g.source:
        raise DomainMismatch("target of the first morphism differs from source of the second")
    return Morphism(
        source=f.source,
        target=g.target,
        place_map={s: g.place_map[y] for s, y in f.place_map.items()},
        trans_map={t: g.trans_map[y] for t, y in f.trans_map.items()},
    )


def in_places(f: Morphism) -> frozenset:
    """Source places whose image gains a producer transition outside f's image.

    From the source's point of view these places receive tokens from the
    environment, so a valid morphism requires them to be input open.
    """
    result = set()
    for s in f.source.places:
        image_producers = f.target.place_producers(f.place_map[s])
        mapped = {f.trans_map[t] for t in f.source.place_producers(s)}
        if image_producers - mapped:
            result.add(s)
    return frozenset(result)


def out_places(f: Morphism) -> frozenset:
    """Dual of in_places: source places whose image gains a consumer."""
    result = set()
    for s in f.source.places:
        image_consumers = f.target.place_consumers(f.place_map[s])
        mapped = {f.trans_map[t] for t in f.source.place_consumers(s)}
        if image_consumers - mapped:
            result.add(s)
    return frozenset(result)


def is_embedding(f: Morphism) -> bool:
    """True iff both component maps are injective."""
    return len(set(f.place_map.values())) == len(f.place_map) and len(
        set(f.trans_map.values())
    ) == len(f.trans_map)


@dataclass(frozen=True)
class Issue:
    code: str
    message: str

    def __str__(self):
        return f"{self.code}: {self.message}"


@dataclass
class ValidationReport:
    issues: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def add(self, code: str, message: str):
        self.issues.append(Issue(code, message))

    def codes(self) -> set:
        return {issue.code for issue in self.issues}

    def __str__(self):
        if self.ok:
            return "ok"
        return "\n".join(str(issue) for issue in sorted(self.issues, key=str))


def validate_net(z: OpenNet) -> ValidationReport:
    """Check every structural invariant of an open net; empty report iff ok."""
    report = ValidationReport()
    clash = z.places & frozenset(z.transitions)
    for item in sorted(clash):
        report.add("IdClash", f"{item!r} is declared both as a place and as a transition")
    for t in sorted(z.transitions):
        tr = z.transitions[t]
        for s in sorted(tr.pre.support() - z.places):
            report.add("UnknownPlace", f"pre-set of {t!r} references undeclared place {s!r}")
        for s in sorted(tr.post.support() - z.places):
            report.add("UnknownPlace", f"post-set of {t!r} references undeclared place {s!r}")
    for s in sorted(z.open_in - z.places):
        report.add("OpenPlaceNotDeclared", f"input-open place {s!r} is not declared")
    for s in sorted(z.open_out - z.places):
        report.add("OpenPlaceNotDeclared", f"output-open place {s!r} is not declared")
    for s in sorted(z.initial.support() - z.places):
        report.add("UnknownPlace", f"initial marking references undeclared place {s!r}")
    return report


def validate_morphism(f: Morphism) -> ValidationReport:
    """Check totality, structure preservation, openness reflection and
    marking reflection; empty report iff f is a legal open-net morphism."""
    report = ValidationReport()
    src, tgt = f.source, f.target

    missing_places = src.places - frozenset(f.place_map)
    for s in sorted(missing_places):
        report.add("NotTotal", f"place {s!r} has no image")
    missing_trans = frozenset(src.transitions) - frozenset(f.trans_map)
    for t in sorted(missing_trans):
        report.add("NotTotal", f"transition {t!r} has no image")
    for s, y in sorted(f.place_map.items()):
        if s not in src.places:
            report.add("UnknownItem", f"place map defined on undeclared place {s!r}")
        if y not in tgt.places:
            report.add("ImageOutsideTarget", f"place {s!r} maps to undeclared {y!r}")
    for t, y in sorted(f.trans_map.items()):
        if t not in src.transitions:
            report.add("UnknownItem", f"transition map defined on undeclared transition {t!r}")
        if y not in tgt.transitions:
            report.add("ImageOutsideTarget", f"transition {t!r} maps to undeclared {y!r}")
    if not report.ok:
        return report

    for t in sorted(src.transitions):
        ft = f.trans_map[t]
        if tgt.label(ft) != src.label(t):
            report.add(
                "LabelMismatch",
                f"transition {t!r} is labelled {src.label(t)!r} but its image {ft!r} "
                f"is labelled {tgt.label(ft)!r}",
            )
        if tgt.pre(ft) != multiset.image(f.place_map, src.pre(t)):
            report.add("PrePostMismatch", f"pre-set of {t!r} is not preserved by the map")
        if tgt.post(ft) != multiset.image(f.place_map, src.post(t)):
            report.add("PrePostMismatch", f"post-set of {t!r} is not preserved by the map")

    for s in sorted(src.places):
        if f.place_map[s] in tgt.open_in and s not in src.open_in:
            report.add(
                "OpennessReflectionViolated",
                f"place {s!r} maps to an input-open place but is not input open",
            )
        if f.place_map[s] in tgt.open_out and s not in src.open_out:
            report.add(
                "OpennessReflectionViolated",
                f"place {s!r} maps to an output-open place but is not output open",
            )
    for s in sorted(in_places(f) - src.open_in):
        report.add(
            "OpennessReflectionViolated",
            f"the image of {s!r} gains an ingoing arc, so {s!r} must be input open",
        )
    for s in sorted(out_places(f) - src.open_out):
        report.add(
            "OpennessReflectionViolated",
            f"the image of {s!r} gains an outgoing arc, so {s!r} must be output open",
        )

    if src.initial != multiset.project(f.place_map, tgt.initial):
        report.add(
            "MarkingReflectionViolated",
            "initial marking of the source is not the projection of the target's",
        )
    return report


def close_place(z: OpenNet, s: str, polarity: str) -> OpenNet:
    """The same net with one open flag removed; marking unchanged."""
    if s not in z.places:
        raise UnknownPlace(f"no place {s!r} in the net")
    if polarity == "+":
        if s not in z.open_in:
            raise PlaceNotOpen(f"place {s!r} is not input open")
        return replace(z, open_in=z.open_in - {s})
    if polarity == "-":
        if s not in z.open_out:
            raise PlaceNotOpen(f"place {s!r} is not output open")
        return replace(z, open_out=z.open_out - {s})
    raise ValueError(f"polarity must be '+' or '-', got {polarity!r}")


@dataclass(frozen=True)
class Correspondence:
    """Paired bijections between the open-place sets of two nets.

    A place that is open in both directions may have different images under
    the input and output components.
    """

    eta_in: Mapping[str, str]
    eta_out: Mapping[str, str]

    def place(self, s: str, polarity: str) -> str:
        return self.eta_in[s] if polarity == "+" else self.eta_out[s]

    def inverse(self) -> "Correspondence":
        return Correspondence(
            eta_in={v: k for k, v in self.eta_in.items()},
            eta_out={v: k for k, v in self.eta_out.items()},
        )


def validate_correspondence(eta: Correspondence, z1: OpenNet, z2: OpenNet) -> ValidationReport:
    report = ValidationReport()
    for name, mapping, dom, cod in (
        ("input", eta.eta_in, z1.open_in, z2.open_in),
        ("output", eta.eta_out, z1.open_out, z2.open_out),
    ):
        if frozenset(mapping) != dom:
            report.add("NotBijective", f"{name} component is not total on the open places")
        if frozenset(mapping.values()) != cod or len(set(mapping.values())) != len(mapping):
            report.add("NotBijective", f"{name} component is not a bijection onto the open places")
    return report
