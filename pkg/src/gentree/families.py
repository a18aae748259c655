"""Registry of the ten supported permutation families.

Each family is described by its forbidden patterns plus the data needed
by the generating tree and by the tilted random walk: the minimum
non-root label ``beta``, whether a synthetic root is prepended, the
statistic used as label, and the profile of jump multiplicities.

The child labels in site order are hand-coded here. They are checked
against the membership-based slow path in the test-suite, which is the
ground truth.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError
from .perm import BARRED, BARRED_ODD, GeneralizedPattern, classical

# kernel dispatch codes
AV123, AV132, AV1423, AV1234, AV1324, AV2314, AV2413, AV3412, FAMA, FAMB = range(10)


@dataclass(frozen=True)
class FamilySpec:
    id: str
    avoidance: tuple
    beta: int
    virtual_root: bool
    profile: str           # jump multiplicity profile, see mult()
    code: int              # dispatch code for the compiled kernels
    label_stat: str = "sites"   # "sites": number of active sites, "last": last value
    span: int = 1
    c_offset: int = 1
    description: str = field(default="", compare=False)

    @property
    def root_label(self) -> int:
        return self.beta - 1

    @property
    def first_label(self) -> int:
        """Label carried by the size-1 permutation."""
        return self.beta if self.virtual_root else self.beta - 1

    @property
    def n_offset(self) -> int:
        """Walk length minus permutation size."""
        return 1 if self.virtual_root else 0

    def c_of_h(self, h: int) -> int:
        return h + self.c_offset

    def mult(self, y: int) -> int:
        """Number of children with label k + y for any large k."""
        if y > 1:
            return 0
        if self.profile == "schroeder":
            return 2 if y == 1 else 1
        if self.profile == "famA":
            return 0 if y == 0 else 1
        if self.profile == "famB":
            return 1 if y % 2 else 0
        return 1

    def max_color(self) -> int:
        return 2 if self.profile == "schroeder" else 1

    def site_labels(self, k: int) -> list:
        """Child labels of a node with label k, in ascending site order."""
        self.check_label(k)
        if k == self.root_label and self.virtual_root:
            return [self.first_label]
        c = self.code
        if c == AV123:
            return [k + 1] + list(range(2, k + 1))
        if c == AV132:
            return [k + 1] + list(range(k, 1, -1))
        if c in (AV1423, AV1324):
            return [k + 1] + list(range(3, k + 1)) + [k + 1]
        if c == AV1234:
            return [k + 1, k + 1] + list(range(3, k + 1))
        if c in (AV2314, AV2413, AV3412):
            return list(range(3, k + 2)) + [k + 1]
        if c == FAMA:
            return list(range(1, k)) + [k + 1]
        if c == FAMB:
            return [l for l in range(1, k + 2) if (k - l) % 2 == 1]
        raise AssertionError(c)

    def check_label(self, k: int) -> None:
        if not isinstance(k, (int,)) or isinstance(k, bool):
            raise DomainError(f"label must be an integer, got {k!r}")
        if k < self.root_label:
            raise DomainError(f"label {k} below the root label {self.root_label} of {self.id}")

    def member(self, sigma) -> bool:
        from .perm import member
        return member(sigma, self.avoidance)


def _cl(*ps):
    return tuple(classical(p) for p in ps)


_A213 = classical("213")

FAMILIES = {
    f.id: f for f in [
        FamilySpec("av123", _cl("123"), 2, True, "catalan", AV123),
        FamilySpec("av132", _cl("132"), 2, True, "catalan", AV132),
        FamilySpec("av1423-4123", _cl("1423", "4123"), 3, False, "schroeder", AV1423),
        FamilySpec("av1234-2134", _cl("1234", "2134"), 3, False, "schroeder", AV1234),
        FamilySpec("av1324-3124", _cl("1324", "3124"), 3, False, "schroeder", AV1324),
        FamilySpec("av2314-3214", _cl("2314", "3214"), 3, False, "schroeder", AV2314),
        FamilySpec("av2413-4213", _cl("2413", "4213"), 3, False, "schroeder", AV2413),
        FamilySpec("av3412-4312", _cl("3412", "4312"), 3, False, "schroeder", AV3412),
        FamilySpec("famA", (_A213, GeneralizedPattern(BARRED)), 1, True, "famA", FAMA,
                   description="Av(213) where every descent has a smaller earlier value in between"),
        FamilySpec("famB", (_A213, GeneralizedPattern(BARRED_ODD)), 1, True, "famB", FAMB,
                   label_stat="last", span=2,
                   description="Av(213) where every descent has an odd number of such values"),
    ]
}

FAMILY_IDS = tuple(FAMILIES)


def get_family(fid) -> FamilySpec:
    if isinstance(fid, FamilySpec):
        return fid
    try:
        return FAMILIES[fid]
    except KeyError:
        raise DomainError(f"unknown family {fid!r}; choose from {', '.join(FAMILY_IDS)}") from None


# --- generating function of the jump multiplicities --------------------------
# phi(t) = sum_y m_y t^(-y); closed forms per profile, with derivative.

def _phi_closed(profile, t):
    if profile == "catalan":
        return 1 / t + 1 / (1 - t), -1 / t**2 + 1 / (1 - t) ** 2
    if profile == "schroeder":
        return 2 / t + 1 / (1 - t), -2 / t**2 + 1 / (1 - t) ** 2
    if profile == "famA":
        return 1 / t + t / (1 - t), -1 / t**2 + 1 / (1 - t) ** 2
    if profile == "famB":
        return 1 / t + t / (1 - t * t), -1 / t**2 + (1 + t * t) / (1 - t * t) ** 2
    raise KeyError(profile)


# exact tilting points, used as regression references
EXACT_T = {
    "catalan": 0.5,
    "schroeder": 2 - math.sqrt(2),
    "famA": 0.5,
    "famB": 1 / math.sqrt(3),
}
