"""Generating trees, conditioned colored walks and consecutive pattern
statistics for ten permutation families."""
from .errors import (ConfigError, ConsistencyError, DomainError, FeasibilityError,
                     GentreeError, MembershipError, ResourceError, SListError, SolverError)
from .families import FAMILIES, FAMILY_IDS, FamilySpec, get_family
from .perm import GeneralizedPattern, active_sites, c_occ, contains, member, standardize
from .tree import (ColoredJump, ColoredLabel, check_consistent, count_level, decode,
                   encode, enumerate_level, rule_children)
from .walks import (WalkParams, endpoint, make_rng, sample_conditioned_cycle,
                    sample_conditioned_rejection, solve_pq, uniform_permutation,
                    uniform_permutations)
from .slist import SList, pat_slist, slist_advance, slist_init, slist_read
from .stats import (PatternStats, clt_sample, gamma_sq, limit_order_restriction, mu,
                    pat_of_jumps)

__version__ = "0.1.0"
