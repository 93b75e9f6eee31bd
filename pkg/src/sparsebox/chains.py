"""Chain-of-derivatives diagnostics.

The chain value at order j with constant c is
    ||D^j u||_inf^(1/(j+1)) / (c^(j/(j+1)) (j!)^(1/(j+1)))
evaluated in the log domain (orders up to 12 with norms up to 1e12 overflow
naive factorials). Order structure over j separates ascending from descending
regimes; sections and strings classify windows of the chain; escape times mark
samples that every later sample exceeds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import DEFAULT_K_MAX, PeriodicField, derivative_sup_norm, lp_norm, sup_norm


class ChainError(ValueError):
    pass


def chain_value(j: int, c: float, dkj_supnorm: float) -> float:
    """Normalized chain value at order j (log-domain evaluation)."""
    if j < 0:
        raise ChainError(f"order must be non-negative, got {j}")
    if c <= 0:
        raise ChainError(f"constant must be positive, got {c}")
    if dkj_supnorm < 0:
        raise ChainError(f"sup-norm must be non-negative, got {dkj_supnorm}")
    if dkj_supnorm == 0.0:
        return 0.0
    log_r = (
        math.log(dkj_supnorm) / (j + 1)
        - (j / (j + 1)) * math.log(c)
        - math.lgamma(j + 1) / (j + 1)
    )
    return math.exp(log_r)


def chain_timespan(j: int, c: float, dkj_supnorm: float, m_star: float) -> float:
    """Window width (M*-1)^2 c^(2j/(j+1)) ||D^j u||^(-2/(j+1))."""
    if m_star <= 1.0:
        raise ChainError(f"M* must exceed 1, got {m_star}")
    if j < 0 or c <= 0 or dkj_supnorm < 0:
        raise ChainError("invalid chain inputs")
    if dkj_supnorm == 0.0:
        return math.inf
    log_t = (2.0 * j / (j + 1)) * math.log(c) - (2.0 / (j + 1)) * math.log(dkj_supnorm)
    return (m_star - 1.0) ** 2 * math.exp(log_t)


@dataclass
class ChainState:
    """Chain values over orders 0..j_max at one time, for one constant."""

    t: float
    c: float
    sup_norms: np.ndarray
    values: np.ndarray

    @classmethod
    def from_sup_norms(cls, sup_norms, c: float, t: float = 0.0) -> "ChainState":
        sup_norms = np.asarray(sup_norms, dtype=np.float64)
        if sup_norms.ndim != 1 or len(sup_norms) < 1:
            raise ChainError("need a 1D array of sup-norms over orders 0..j_max")
        vals = np.array([chain_value(j, c, s) for j, s in enumerate(sup_norms)])
        if not np.all(np.isfinite(vals)):
            raise ChainError("chain values must be finite")
        return cls(t=t, c=c, sup_norms=sup_norms, values=vals)

    @classmethod
    def from_values(cls, values, c: float, t: float = 0.0) -> "ChainState":
        """Chain with the given values held exactly (ties preserved bit-for-bit);
        the stored sup-norms are the consistent inverses."""
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 1 or len(values) < 1 or not np.all(np.isfinite(values)):
            raise ChainError("need a finite 1D array of chain values")
        if np.any(values < 0):
            raise ChainError("chain values must be non-negative")
        sups = np.array(
            [
                0.0
                if v == 0.0
                else math.exp((j + 1) * math.log(v) + j * math.log(c) + math.lgamma(j + 1))
                for j, v in enumerate(values)
            ]
        )
        return cls(t=t, c=c, sup_norms=sups, values=values.copy())

    @property
    def j_max(self) -> int:
        return len(self.values) - 1

    def with_constant(self, c: float) -> "ChainState":
        if c == self.c:
            return self
        return ChainState.from_sup_norms(self.sup_norms, c, self.t)


def chain_from_field(
    f: PeriodicField,
    c: float,
    j_max: int,
    t: float = 0.0,
    all_multi_indices: bool = False,
    k_max: int = DEFAULT_K_MAX,
) -> ChainState:
    """Chain state of a field: derivative sup-norms default to the first-axis
    restriction; the flag maximizes over all multi-indices per order."""
    if j_max > k_max:
        raise ChainError(f"j_max={j_max} exceeds k_max={k_max}")
    sups = np.array(
        [
            derivative_sup_norm(f, j, all_multi_indices=all_multi_indices, k_max=k_max)
            for j in range(j_max + 1)
        ]
    )
    return ChainState.from_sup_norms(sups, c, t)


@dataclass(frozen=True)
class OrderClassification:
    ascending: bool
    descending: bool
    ell: int
    k: int
    truncation_order: int

    @property
    def label(self) -> str:
        if self.ascending and self.descending:
            return "ascending+descending"
        if self.ascending:
            return "ascending"
        if self.descending:
            return "descending"
        return "neither"


def classify_order(chain: ChainState, ell: int, k: int) -> OrderClassification:
    """Ascending iff R(j) <= R(k) for all ell <= j <= k; descending iff
    R(k) >= R(j) for all j >= k up to j_max (truncation recorded)."""
    if not 0 <= ell <= k <= chain.j_max:
        raise ChainError(
            f"window (ell={ell}, k={k}) outside computed range 0..{chain.j_max}"
        )
    r = chain.values
    ascending = bool(np.all(r[ell : k + 1] <= r[k]))
    descending = bool(np.all(r[k] >= r[k : chain.j_max + 1]))
    return OrderClassification(ascending, descending, ell, k, chain.j_max)


def ascending_chain_condition(
    c: float,
    ell: int,
    k: int,
    u0_l2: float,
    u0_sup: float,
    d: int = 3,
    implied_constant: float = 1.0,
) -> tuple[float, float, bool]:
    """Lower-order-control condition: returns (lhs, rhs, lhs <= const*rhs).

    lhs = c ||u0||_2 ||u0||_inf^(d/2-1) (ell!)^(1/2) ell / (ell/2)!  with the
    half-order factorial through the gamma function for odd ell; rhs =
    (k!)^(1/(k+1)). Both sides evaluate in the log domain.
    """
    if k < ell or ell < 1:
        raise ChainError(f"need 1 <= ell <= k, got ell={ell}, k={k}")
    if c < 0 or u0_l2 < 0 or u0_sup < 0:
        raise ChainError("norms and constant must be non-negative")
    rhs = math.exp(math.lgamma(k + 1) / (k + 1))
    sup_exponent = d / 2.0 - 1.0
    if c == 0.0 or u0_l2 == 0.0 or (u0_sup == 0.0 and sup_exponent > 0):
        return 0.0, rhs, True
    log_lhs = (
        math.log(c)
        + math.log(u0_l2)
        + (sup_exponent * math.log(u0_sup) if sup_exponent != 0.0 else 0.0)
        + 0.5 * math.lgamma(ell + 1)
        + math.log(ell)
        - math.lgamma(ell / 2.0 + 1.0)
    )
    lhs = math.exp(log_lhs)
    return lhs, rhs, lhs <= implied_constant * rhs


def detect_escape_times(values) -> np.ndarray:
    """Indices n with value[m] > value[n] for every m > n; the last index never
    qualifies. Invariant under strictly increasing time reparameterization."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or len(v) < 2:
        raise ChainError("need a 1D series with at least 2 samples")
    suffix_min = np.minimum.accumulate(v[::-1])[::-1]
    marked = v[:-1] < suffix_min[1:]
    return np.nonzero(marked)[0]


# ---------------------------------------------------------------------------
# sections and strings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SectionLadder:
    """Doubling (or faster) breakpoints with per-section constants.

    The constant attached to the section starting at breakpoint i is the
    ladder constant of the next breakpoint; constants are non-increasing and
    below 1.
    """

    breakpoints: tuple[int, ...]
    constants: tuple[float, ...]  # one per section
    q: int = 2

    def __post_init__(self):
        bp = self.breakpoints
        if len(bp) < 2:
            raise ChainError("ladder needs at least two breakpoints (one section)")
        for a, b in zip(bp, bp[1:]):
            if b < 2 * a:
                raise ChainError(f"breakpoints must at least double: {a} -> {b}")
        if len(self.constants) != len(bp) - 1:
            raise ChainError("need one constant per section")
        prev = 1.0
        for cv in self.constants:
            if not 0.0 < cv < 1.0:
                raise ChainError(f"section constants must lie in (0, 1), got {cv}")
            if cv > prev:
                raise ChainError("section constants must be non-increasing")
            prev = cv

    @property
    def n_sections(self) -> int:
        return len(self.breakpoints) - 1


def build_section_ladder(
    ell0: int,
    j_max: int,
    q: int = 2,
    growth: float = 2.0,
    c_start: float = 0.9,
    c_decay: float = 1.0,
) -> SectionLadder:
    """Ladder ell_{i+1} = ceil(growth * ell_i) capped at j_max, with constants
    c_start * c_decay^i (c_decay <= 1)."""
    if ell0 < 1:
        raise ChainError(f"ell0 must be at least 1, got {ell0}")
    if growth < 2.0:
        raise ChainError(f"growth must be at least 2, got {growth}")
    bp = [ell0]
    while True:
        nxt = math.ceil(growth * bp[-1])
        if nxt > j_max:
            break
        bp.append(nxt)
    if len(bp) < 2:
        raise ChainError(
            f"j_max={j_max} leaves no room for a section above ell0={ell0}"
        )
    constants = tuple(c_start * c_decay**i for i in range(len(bp) - 1))
    return SectionLadder(tuple(bp), constants, q=q)


@dataclass(frozen=True)
class SectionLabel:
    lo: int
    hi: int
    constant: float
    maximizer: int
    label: str  # "A", "B" or "neither"


@dataclass(frozen=True)
class StringLabel:
    lo: int
    hi: int
    sections: tuple[int, ...]
    label: str


@dataclass(frozen=True)
class LabeledLadder:
    sections: tuple[SectionLabel, ...]
    strings: tuple[StringLabel, ...]
    truncation_order: int


def _first_argmax(values: np.ndarray) -> int:
    return int(np.argmax(values))


def label_sections(chain: ChainState, ladder: SectionLadder) -> LabeledLadder:
    """Label each ladder section and each q-section string on the chain.

    A section [lo, hi] with constant c and first maximizer m is labeled
    "A" when some order k > hi (up to the chain truncation) dominates the
    whole stretch [m, k], "B" when the maximizer strictly dominates every
    later order, and "neither" otherwise (ties beyond the section can block
    both). Strings are "A" only if all member sections are; "B" if any
    member is. The quantifier over all later orders is truncated at j_max,
    which is recorded in the output.
    """
    j_max = chain.j_max
    if ladder.breakpoints[-1] > j_max:
        raise ChainError(
            f"ladder top {ladder.breakpoints[-1]} exceeds chain range {j_max}"
        )
    sections = []
    for i in range(ladder.n_sections):
        lo, hi = ladder.breakpoints[i], ladder.breakpoints[i + 1]
        cv = ladder.constants[i]
        r = chain.with_constant(cv).values
        m = lo + _first_argmax(r[lo : hi + 1])
        type_a = False
        running = float(np.max(r[m : hi + 1]))
        for k in range(hi + 1, j_max + 1):
            running = max(running, r[k])
            if r[k] >= running:
                type_a = True
                break
        if m < j_max:
            type_b = bool(r[m] > np.max(r[m + 1 : j_max + 1]))
        else:
            type_b = False
        label = "A" if type_a else ("B" if type_b else "neither")
        sections.append(SectionLabel(lo, hi, cv, m, label))

    strings = []
    q = ladder.q
    for i in range(0, ladder.n_sections - q + 1):
        member = tuple(range(i, i + q))
        labels = [sections[j].label for j in member]
        if all(l == "A" for l in labels):
            slabel = "A"
        elif any(l == "B" for l in labels):
            slabel = "B"
        else:
            slabel = "neither"
        strings.append(
            StringLabel(ladder.breakpoints[i], ladder.breakpoints[i + q], member, slabel)
        )
    return LabeledLadder(tuple(sections), tuple(strings), j_max)


# ---------------------------------------------------------------------------
# scaling-gap table and exponent fit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GapRow:
    k: int
    regularity: float        # 1/(k+1)
    apriori: float           # 1/(k+3/2)
    energy: float            # 1/(3/2 (k+1))
    gap_ratio: float         # (k+1)/(k+3/2)
    vorticity_regularity: float  # 1/(k+2)
    vorticity_apriori: float     # 1/(k+5/2)


def scaling_gap_table(k_values) -> list[GapRow]:
    """Sparseness-scale exponents per derivative order and their closing gap."""
    rows = []
    for k in k_values:
        k = int(k)
        if k < 0:
            raise ChainError(f"order must be non-negative, got {k}")
        rows.append(
            GapRow(
                k=k,
                regularity=1.0 / (k + 1.0),
                apriori=1.0 / (k + 1.5),
                energy=1.0 / (1.5 * (k + 1.0)),
                gap_ratio=(k + 1.0) / (k + 1.5),
                vorticity_regularity=1.0 / (k + 2.0),
                vorticity_apriori=1.0 / (k + 2.5),
            )
        )
    return rows


@dataclass(frozen=True)
class AlphaFit:
    alpha: float
    coefficient: float
    r_squared: float
    n_used: int
    n_excluded: int


def alpha_fit(rho_star, dk_supnorm) -> AlphaFit:
    """Least-squares fit of log rho* = -alpha log||D^k u||_inf + log c.

    Non-finite rho* samples are excluded and counted; fewer than 4 usable
    samples or a degenerate regressor is an error.
    """
    rho = np.asarray(rho_star, dtype=np.float64)
    dk = np.asarray(dk_supnorm, dtype=np.float64)
    if rho.shape != dk.shape or rho.ndim != 1:
        raise ChainError("rho* and sup-norm series must be 1D and equally long")
    usable = np.isfinite(rho) & np.isfinite(dk) & (rho > 0) & (dk > 0)
    n_excluded = int(np.count_nonzero(~usable))
    x = np.log(dk[usable])
    y = np.log(rho[usable])
    n = len(x)
    if n < 4:
        raise ChainError(f"need at least 4 finite samples, got {n}")
    if np.ptp(x) < 1e-12:
        raise ChainError("degenerate regressor: sup-norms do not vary")
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    sxy = float(np.sum((x - xm) * (y - ym)))
    slope = sxy / sxx
    intercept = ym - slope * xm
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - ym) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return AlphaFit(
        alpha=-slope,
        coefficient=math.exp(intercept),
        r_squared=r2,
        n_used=n,
        n_excluded=n_excluded,
    )
