"""Boundary algebras of tree lattices: segment alphabets, subshifts and their K-theory."""

from .alphabet import (Alphabet, Segment, TransitionMatrix, build_alphabet, build_decoration,
                       build_transition, canonical_orbit, count_orbits)
from .estimator import BoundaryKTheory
from .exceptions import (BoundError, ConsistencyError, GroupError, HypothesisError,
                         TreeckError)
from .groups import (Embedding, FiniteGroup, check_embedding, from_table, is_malnormal,
                     make_cyclic, symmetric_group_3)
from .ktheory import (AbelianGroup, PointedGroup, RelationLattice, bowen_franks, classify,
                      identity_class, pointed_isomorphic, smith_normal_form)
from .report import AnalyzeOptions, Report, analyze, emit
from .sft import check_h2, check_h3, count_words
from .spec_parser import SpecError, SpecSource, format_spec, lower_to_action, parse_spec
from .tree import (Amalgam, EdgeFreeProduct, StarFreeProduct, TreeModel, Vertex, build_model,
                   validate_hypotheses, verify_free_action)

__version__ = "0.1.0"
