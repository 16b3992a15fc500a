"""Marked open Petri nets: composition by gluing, firing/step (weak)
bisimilarity with open-place correspondences, and behaviour-preserving
double-pushout reconfiguration."""

from .errors import OpenNetError
from .multiset import EMPTY, Multiset, SetPushout, image, join, project
from .nets import (
    Correspondence,
    Morphism,
    OpenNet,
    PetriNet,
    Transition,
    build_net,
    close_place,
    compose,
    identity,
    is_embedding,
    validate_morphism,
    validate_net,
)
from .composition import PushoutResult, check_composable, glue_names, pushout
from .semantics import (
    FIRING,
    OVERFLOW,
    STEP,
    Event,
    Lts,
    Obs,
    Step,
    StepSplit,
    build_lts,
    compose_steps,
    decompose_step,
    enabled_steps,
    fire,
    minus,
    plus,
    project_event,
    project_step,
    to_dot,
    trans,
    weak_closure,
)
from .equivalence import (
    BisimVerdict,
    check_bisim,
    check_upto,
    induced_correspondence,
    out_degree,
    search_correspondence,
    subtractable,
)
from .rewriting import (
    Rule,
    TransformResult,
    apply_rule,
    check_behaviour_preserving,
    check_cor_proper,
    check_po_complement,
    check_proper,
    find_matches,
    pushout_complement,
    rule_correspondence,
)

__version__ = "0.1.0"
