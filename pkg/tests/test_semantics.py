"""Steps, their projections along embeddings, and the transition systems."""

import random

import pytest

from opennet import build_net, pushout
from opennet.errors import IllegalEvent, InitialExceedsCap, NotEnabled
from opennet.multiset import EMPTY, Multiset
from opennet.nets import Morphism
from opennet.semantics import (
    FIRING,
    OVERFLOW,
    STEP,
    Obs,
    Step,
    StepSplit,
    build_lts,
    compose_steps,
    decompose_step,
    enabled_steps,
    events_post,
    events_pre,
    fire,
    is_valid_step,
    make_step,
    minus,
    plus,
    project_event,
    project_events,
    project_step,
    to_dot,
    trans,
    weak_closure,
)

from netlib import (
    absorber,
    agency_a,
    all_markings,
    loop_span,
    random_composable_span,
    silent_then_act,
    two_sided_span,
)


def test_enabled_firings_on_open_place():
    z = absorber()
    steps = enabled_steps(z, EMPTY, FIRING)
    assert [st.events for st in steps] == [Multiset.of(plus("s"))]
    assert steps[0].target == Multiset({"s": 1})


def test_agency_has_parallel_step():
    z = agency_a()
    steps = enabled_steps(z, z.initial, STEP, cap=2, max_step=6)
    both = Multiset.of(trans("tF"), trans("tH"))
    assert any(st.events == both for st in steps)


def test_closed_dead_net_has_no_steps():
    z = build_net(["s"], {"t": ("a", {"s": 1}, {})})
    assert enabled_steps(z, EMPTY, FIRING) == []
    assert enabled_steps(z, EMPTY, STEP) == []


def test_fire_environment_deletion():
    z = build_net(["s"], {}, open_out=["s"], initial={"s": 1})
    assert fire(z, Multiset({"s": 1}), Multiset.of(minus("s"))) == EMPTY


def test_fire_empty_step_is_noop():
    z = build_net(["s"], {}, initial={"s": 1})
    u = Multiset({"s": 1})
    assert fire(z, u, EMPTY) == u


def test_fire_not_enabled():
    z = build_net(["s"], {"t": ("a", {"s": 1}, {})})
    with pytest.raises(NotEnabled):
        fire(z, EMPTY, Multiset.of(trans("t")))


def test_fire_illegal_event_on_closed_place():
    z = build_net(["s"], {})
    with pytest.raises(IllegalEvent):
        fire(z, EMPTY, Multiset.of(plus("s")))


def _inclusion_with_outside_transition():
    """An embedding whose target has a transition touching only interface
    and private places: its projection is pure interaction."""
    z = build_net(
        ["s", "r"], {},
        open_in=["r"], open_out=["s"],
        initial={"s": 1},
    )
    zp = build_net(
        ["s", "r", "x"],
        {"tc": ("c", {"s": 1, "x": 1}, {"r": 1})},
        initial={"s": 1, "x": 1},
    )
    return Morphism(source=z, target=zp, place_map={"s": "s", "r": "r"}, trans_map={})


def test_project_event_in_image():
    f1, _ = two_sided_span()
    assert project_event(f1, trans("t0")) == Multiset.of(trans("t0"))


def test_project_event_outside_image():
    f = _inclusion_with_outside_transition()
    assert project_event(f, trans("tc")) == Multiset.of(minus("s"), plus("r"))


def test_project_interaction_outside_image_is_empty():
    f1, _ = two_sided_span()
    # w1 is private to the target, so its interactions vanish
    opened = f1.target
    assert project_event(
        Morphism(source=f1.source, target=opened,
                 place_map=f1.place_map, trans_map=f1.trans_map),
        plus("sp"),
    ) == Multiset.of(plus("sp"))
    f = _inclusion_with_outside_transition()
    zp = f.target
    zp_open = build_net(
        sorted(zp.places),
        {t: (zp.label(t), dict(zp.pre(t).items()), dict(zp.post(t).items()))
         for t in zp.transitions},
        open_in=["x"], open_out=[],
        initial=dict(zp.initial.items()),
    )
    # x is input open in the target but has no preimage
    f2 = Morphism(source=build_net([], {}), target=zp_open, place_map={}, trans_map={})
    assert project_event(f2, plus("x")) == EMPTY


def test_project_preserves_pre_post():
    f = _inclusion_with_outside_transition()
    zp, z = f.target, f.source
    from opennet.multiset import project as mproject

    for event in [trans("tc")]:
        projected = project_events(f, Multiset.of(event))
        assert events_pre(z, projected) == mproject(f.place_map, zp.pre("tc"))
        assert events_post(z, projected) == mproject(f.place_map, zp.post("tc"))


def test_project_step_of_outside_transition():
    # the outside transition consumes the shared s and produces into the
    # shared r, so the source sees one deletion and one creation
    f = _inclusion_with_outside_transition()
    zp = f.target
    st = make_step(zp, zp.initial, Multiset.of(trans("tc")))
    projected = project_step(f, st)
    assert projected.events == Multiset.of(minus("s"), plus("r"))
    assert projected.source == Multiset({"s": 1})
    assert projected.target == Multiset({"r": 1})
    assert is_valid_step(f.source, projected)


def test_projection_reflects_behaviour_randomly():
    rng = random.Random(3)
    for _ in range(30):
        f1, f2 = random_composable_span(rng)
        for f in (f1, f2):
            zp = f.target
            for u in list(all_markings(zp.places, 1))[:16]:
                for st in enabled_steps(zp, u, STEP, cap=2, max_step=2)[:8]:
                    assert is_valid_step(f.source, project_step(f, st))


def test_empty_step_projects_to_empty():
    f1, _ = two_sided_span()
    zp = f1.target
    st = Step(events=EMPTY, source=zp.initial, target=zp.initial)
    projected = project_step(f1, st)
    assert projected.events == EMPTY
    assert projected.source == projected.target


def test_compose_steps_interface_transition_plus_interaction():
    f1, f2 = two_sided_span()
    po = pushout(f1, f2)
    z1, z2 = f1.target, f2.target
    u1 = z1.initial  # s + w1
    u2 = z2.initial  # s + w2
    a1 = Multiset.of(trans("t0"), trans("t1p"))
    a2 = Multiset.of(trans("t0"), plus("sp"))
    st1 = make_step(z1, u1, a1)
    st2 = make_step(z2, u2, a2)
    split = StepSplit(a1_internal=a1, a1_external=EMPTY,
                      a2_internal=EMPTY, a2_external=a2)
    st3 = compose_steps(po, st1, st2, split)
    assert st3.events == Multiset.of(trans("t0"), trans("L:t1p"))
    assert st3.source == Multiset({"s": 1, "L:w1": 1, "R:w2": 1})
    assert st3.target == Multiset({"sp": 2, "R:w2": 1})
    # projecting recovers both component steps
    assert project_step(po.alpha1, st3) == st1
    assert project_step(po.alpha2, st3) == st2


def test_compose_steps_shared_deletion():
    f1, f2 = loop_span()
    po = pushout(f1, f2)
    u = Multiset({"s": 1})
    st1 = make_step(f1.target, u, Multiset.of(minus("s")))
    st2 = make_step(f2.target, u, Multiset.of(minus("s")))
    split = StepSplit(
        a1_internal=Multiset.of(minus("s")), a1_external=EMPTY,
        a2_internal=EMPTY, a2_external=Multiset.of(minus("s")),
    )
    st3 = compose_steps(po, st1, st2, split)
    assert st3.events == Multiset.of(minus("s"))
    assert st3.source == Multiset({"s": 1}) and st3.target == EMPTY


def test_compose_steps_both_empty():
    f1, f2 = loop_span()
    po = pushout(f1, f2)
    st1 = Step(events=EMPTY, source=Multiset({"s": 1}), target=Multiset({"s": 1}))
    st2 = Step(events=EMPTY, source=Multiset({"s": 1}), target=Multiset({"s": 1}))
    split = StepSplit(EMPTY, EMPTY, EMPTY, EMPTY)
    st3 = compose_steps(po, st1, st2, split)
    assert st3.events == EMPTY and st3.source == Multiset({"s": 1})


def test_decompose_private_transition():
    f1, f2 = two_sided_span()
    po = pushout(f1, f2)
    z3 = po.z3
    u3 = Multiset({"L:w1": 1})
    st3 = make_step(z3, u3, Multiset.of(trans("L:t1p")))
    st1, st2, split = decompose_step(po, st3)
    assert split.a1_internal == Multiset.of(trans("t1p"))
    assert all(e.kind != "trans" for e, _ in split.a2_internal.items())
    assert compose_steps(po, st1, st2, split) == st3


def test_decompose_interface_transition_goes_right():
    f1, f2 = two_sided_span()
    po = pushout(f1, f2)
    st3 = make_step(po.z3, Multiset({"s": 1}), Multiset.of(trans("t0")))
    st1, st2, split = decompose_step(po, st3)
    assert split.a2_internal == Multiset.of(trans("t0"))
    assert split.a1_internal == EMPTY
    assert split.a1_external == Multiset.of(trans("t0"))
    assert compose_steps(po, st1, st2, split) == st3


def test_decompose_compose_roundtrip_exhaustive():
    f1, f2 = loop_span()
    po = pushout(f1, f2)
    z3 = po.z3
    for u in all_markings(z3.places, 2):
        for st in enabled_steps(z3, u, STEP, cap=2, max_step=4):
            st1, st2, split = decompose_step(po, st)
            assert is_valid_step(f1.target, st1)
            assert is_valid_step(f2.target, st2)
            assert compose_steps(po, st1, st2, split) == st


def test_downup_mirrored_step():
    # a step of one side whose projection the other side mirrors verbatim
    f1, f2 = two_sided_span()
    po = pushout(f1, f2)
    z1, z2 = f1.target, f2.target
    a1 = Multiset.of(trans("t0"))
    st1 = make_step(z1, z1.initial, a1)
    a2 = Multiset.of(trans("t0"))  # image of the projection of a1
    st2 = make_step(z2, z2.initial, a2)
    split = StepSplit(a1_internal=a1, a1_external=EMPTY,
                      a2_internal=EMPTY, a2_external=a2)
    st3 = compose_steps(po, st1, st2, split)
    assert st3.events == Multiset.of(trans("t0"))


def test_build_lts_closed_chain():
    z = build_net(["s", "sp"], {"t": ("a", {"s": 1}, {"sp": 1})}, initial={"s": 1})
    lts = build_lts(z, FIRING, cap=2)
    assert len(lts.states) == 2
    assert lts.edges == [(0, Obs("lab", "a"), 1)]


def test_build_lts_open_place_overflows():
    z = build_net(["s"], {}, open_in=["s"])
    lts = build_lts(z, FIRING, cap=2)
    assert [str(s) if s is not OVERFLOW else "OVF" for s in lts.states] == \
        ["0", "s", "s:2", "OVF"]
    assert (2, Obs("plus", "s"), 3) in lts.edges
    assert lts.has_overflow()
    # no edges out of the overflow state
    assert all(src != 3 for src, _, _ in lts.edges)


def test_build_lts_agency_step_mode_parallel_label():
    z = agency_a()
    lts = build_lts(z, STEP, cap=2, max_step=6)
    parallel = Multiset.of(Obs("lab", "bookFlight"), Obs("lab", "bookHotel"))
    assert any(label == parallel for _, label, _ in lts.edges)


def test_build_lts_rejects_oversized_root():
    z = build_net(["s"], {}, initial={"s": 9})
    with pytest.raises(InitialExceedsCap):
        build_lts(z, FIRING, cap=2)


def test_build_lts_deterministic():
    z = agency_a()
    a = build_lts(z, STEP, cap=2, max_step=4)
    b = build_lts(z, STEP, cap=2, max_step=4)
    assert a.states == b.states and a.edges == b.edges


def test_weak_closure_empty_tau_adds_only_reflexive_loops():
    z = agency_a()
    strong = build_lts(z, FIRING, cap=2)
    weak = weak_closure(strong, frozenset())
    silent = [(s, l, d) for s, l, d in weak.edges if l is None]
    assert silent == [(i, None, i) for i in range(len(strong.states))]
    visible = {(s, l, d) for s, l, d in weak.edges if l is not None}
    assert visible == set(strong.edges)


def test_weak_closure_silent_path_then_visible():
    z = silent_then_act()
    strong = build_lts(z, FIRING, cap=3)
    weak = weak_closure(strong, frozenset({"tau"}))
    idx = {str(s): i for i, s in enumerate(strong.states)}
    # from the initial marking, the visible `a` is reachable through the tau
    assert (idx["s1"], Obs("lab", "a"), idx["0"]) in weak.edges
    # and the tau itself became a silent move
    assert (idx["s1"], None, idx["p"]) in weak.edges


def test_weak_closure_reflexive_everywhere():
    z = silent_then_act()
    weak = weak_closure(build_lts(z, FIRING, cap=3), frozenset({"tau"}))
    for i, state in enumerate(weak.states):
        if state is not OVERFLOW:
            assert (i, None, i) in weak.edges


def test_weak_closure_step_mode_excludes_mixed_steps():
    # one tau and one visible in parallel: neither silent nor a visible step
    z = build_net(
        ["x", "y"],
        {"tt": ("tau", {"x": 1}, {}), "ta": ("a", {"y": 1}, {})},
        initial={"x": 1, "y": 1},
    )
    strong = build_lts(z, STEP, cap=2, max_step=4)
    weak = weak_closure(strong, frozenset({"tau"}))
    mixed = Multiset.of(Obs("lab", "a"), Obs("lab", "tau"))
    assert all(label != mixed for _, label, _ in weak.edges)
    # but the visible step alone is reachable after the silent one
    idx = {str(s): i for i, s in enumerate(strong.states)}
    assert (idx["x+y"], Multiset.of(Obs("lab", "a")), idx["x"]) in weak.edges


def test_overflow_soundness_random():
    rng = random.Random(11)
    for _ in range(25):
        f1, _ = random_composable_span(rng)
        z = f1.target
        for mode in (FIRING, STEP):
            try:
                lts = build_lts(z, mode, cap=2, max_step=3)
            except InitialExceedsCap:
                continue
            overflow_ids = {i for i, s in enumerate(lts.states) if s is OVERFLOW}
            for src, _, dst in lts.edges:
                assert src not in overflow_ids
                target = lts.states[dst]
                assert target is OVERFLOW or all(c <= 2 for _, c in target.items())


def test_dot_export_shapes():
    z = absorber()
    lts = build_lts(z, FIRING, cap=1)
    dot = to_dot(lts)
    assert "doubleoctagon" in dot
    assert dot.startswith("digraph")
