"""Self-paced training: alternating minimization with age schedules.

The training objective couples model parameters w with per-sample weights v:

    E(w, v; lam) = <v, l(w)> + lam * sum_i r_sp_base(v_i) + alpha * ||w||^2

and is solved by alternation: the v-step minimizes over weights (optionally
inside a curriculum region), the w-step solves the weighted model fit.  The
age parameter lam grows across stages following a schedule, admitting harder
samples over time.  The same problem has an equivalent unweighted form

    G(w) = sum_i latent(lam, l_i(w)) + alpha * ||w||^2

whose gradient weights samples by weight(lam, l_i); latent_descent_fit
minimizes G directly and is used to cross-check fixed points of the
alternating scheme.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .curriculum import (
    CurriculumRegion,
    affine_action,
    check_partition,
    weight_extended,
)
from .errors import (
    BadFractions,
    BadLabels,
    BadParam,
    InfeasibleCurriculum,
    NoRoot,
    SingularSystem,
    UnsupportedRegularizer,
)
from .regularizers import SPRegularizer, get_regularizer

WEIGHT_EPS = 1e-6  # a weight above this counts as "positive" for schedules


# ==== dataset =================================================================


@dataclass(frozen=True)
class Dataset:
    """A fixed design matrix (n, d), targets (n,), and optional group labels."""

    X: np.ndarray
    y: np.ndarray
    groups: np.ndarray | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.size:
            raise BadParam(f"need X (n, d) and y (n,), got {X.shape} and {y.shape}")
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise BadParam("dataset needs at least one sample and one feature")
        if not (np.isfinite(X).all() and np.isfinite(y).all()):
            raise BadParam("dataset entries must be finite")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if self.groups is not None:
            g = np.asarray(self.groups)
            if g.shape != y.shape:
                raise BadParam("group labels must align with targets")
            object.__setattr__(self, "groups", g.astype(int))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def group_partition(self) -> tuple:
        """Blocks of sample indices sharing a group label, in label order."""
        if self.groups is None:
            raise BadParam("dataset has no group labels")
        labels = np.unique(self.groups)
        return tuple(tuple(np.flatnonzero(self.groups == g)) for g in labels)


def load_dataset_csv(path) -> Dataset:
    """Read a dataset from CSV: feature columns, then the target column.

    The header row is mandatory.  An integer column named exactly `group`
    may appear anywhere and carries group labels; the last non-group column
    is the target, all remaining columns are features in file order.
    Raises ValueError with a file:line diagnostic on malformed input.
    """
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}:1: empty file, expected a header row") from None
        ncol = len(header)
        if ncol < 2:
            raise ValueError(f"{path}:1: need at least one feature and a target column")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != ncol:
                raise ValueError(
                    f"{path}:{lineno}: expected {ncol} fields, got {len(row)}"
                )
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=float)
    names = [h.strip() for h in header]
    group_cols = [i for i, h in enumerate(names) if h == "group"]
    groups = None
    if group_cols:
        if len(group_cols) > 1:
            raise ValueError(f"{path}:1: multiple 'group' columns")
        gcol = group_cols[0]
        gvals = data[:, gcol]
        if not np.allclose(gvals, np.round(gvals)):
            raise ValueError(f"{path}: group labels must be integers")
        groups = np.round(gvals).astype(int)
        data = np.delete(data, gcol, axis=1)
    if data.shape[1] < 2:
        raise ValueError(f"{path}:1: need at least one feature and a target column")
    return Dataset(data[:, :-1], data[:, -1], groups)


def write_dataset_csv(dataset: Dataset, path) -> None:
    """Write a dataset in the format load_dataset_csv reads back.

    Columns x0..x{d-1}, then y; a trailing integer `group` column when the
    dataset carries group labels.  Floats use repr so a write/read round
    trip is exact; LF line endings.
    """
    header = [f"x{j}" for j in range(dataset.d)] + ["y"]
    if dataset.groups is not None:
        header.append("group")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(dataset.n):
            cells = [repr(float(x)) for x in dataset.X[i]]
            cells.append(repr(float(dataset.y[i])))
            if dataset.groups is not None:
                cells.append(str(int(dataset.groups[i])))
            fh.write(",".join(cells) + "\n")


# ==== configuration ===========================================================


def _default_region() -> CurriculumRegion:
    return CurriculumRegion("none")


@dataclass(frozen=True)
class TrainConfig:
    """Everything a training run needs besides the data.

    schedule is one of:
      'median'   start with an age admitting about half the samples, then
                 multiply by `growth` each stage, for at most `stages`
                 stages, stopping early once every weight reaches
                 `full_weight_threshold`
      'portion'  at stage t, set the age to the loss quantile at
                 fractions[t] so about that portion of samples is admitted
      'fixed'    a single stage at age `lam`
    """

    regularizer: str = "hard"
    schedule: str = "median"
    lam: float | None = None
    fractions: tuple = ()
    growth: float = 1.3
    stages: int = 16
    ridge: float = 1e-3
    loss: str = "squared"
    region: CurriculumRegion = field(default_factory=_default_region)
    max_inner: int = 200
    inner_tol: float = 1e-9
    grad_tol: float = 1e-7
    full_weight_threshold: float = 0.99
    seed: int = 0

    def __post_init__(self):
        if self.schedule not in ("median", "portion", "fixed"):
            raise BadParam(f"unknown schedule {self.schedule!r}")
        if self.loss not in ("squared", "logistic"):
            raise BadParam(f"unknown loss {self.loss!r}")
        if self.inner_tol <= 0 or self.grad_tol <= 0:
            raise BadParam("tolerances must be positive")
        if self.growth <= 1.0:
            raise BadParam("growth factor must exceed 1")
        if self.stages < 1 or self.max_inner < 1:
            raise BadParam("stages and max_inner must be at least 1")
        if self.ridge < 0:
            raise BadParam("ridge coefficient must be nonnegative")
        if not 0 < self.full_weight_threshold <= 1:
            raise BadParam("full_weight_threshold must lie in (0, 1]")
        if self.lam is not None and not (np.isfinite(self.lam) and self.lam > 0):
            raise BadParam("age parameter lam must be finite and positive")
        if self.schedule == "fixed" and self.lam is None:
            raise BadParam("fixed schedule requires lam")
        object.__setattr__(self, "fractions", tuple(float(f) for f in self.fractions))
        if self.schedule == "portion":
            validate_fractions(self.fractions)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise BadParam(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(d)
        if "region" in kwargs and not isinstance(kwargs["region"], CurriculumRegion):
            kwargs["region"] = CurriculumRegion.from_dict(kwargs["region"])
        if "fractions" in kwargs and kwargs["fractions"] is not None:
            kwargs["fractions"] = tuple(kwargs["fractions"])
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {
            "regularizer": self.regularizer,
            "schedule": self.schedule,
            "lam": self.lam,
            "fractions": list(self.fractions),
            "growth": self.growth,
            "stages": self.stages,
            "ridge": self.ridge,
            "loss": self.loss,
            "region": self.region.to_dict(),
            "max_inner": self.max_inner,
            "inner_tol": self.inner_tol,
            "grad_tol": self.grad_tol,
            "full_weight_threshold": self.full_weight_threshold,
            "seed": self.seed,
        }


def validate_fractions(fractions: Sequence[float]):
    fr = tuple(float(f) for f in fractions)
    if len(fr) == 0:
        raise BadFractions("portion schedule needs at least one fraction")
    if any(not (0.0 < f <= 1.0) for f in fr):
        raise BadFractions(f"fractions must lie in (0, 1], got {fr}")
    if any(b <= a for a, b in zip(fr, fr[1:])):
        raise BadFractions(f"fractions must be strictly increasing, got {fr}")
    return fr


# ==== losses ==================================================================


def loss_vector(w: np.ndarray, dataset: Dataset, kind: str = "squared") -> np.ndarray:
    """Per-sample losses: squared residuals, or the logistic loss for +-1 labels."""
    scores = dataset.X @ np.asarray(w, dtype=float)
    if kind == "squared":
        return (scores - dataset.y) ** 2
    if kind == "logistic":
        y = dataset.y
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise BadLabels("logistic loss requires labels in {-1, +1}")
        return np.logaddexp(0.0, -y * scores)
    raise BadParam(f"unknown loss kind {kind!r}")


def loss_gradients(w: np.ndarray, dataset: Dataset, kind: str = "squared") -> np.ndarray:
    """Rows are the gradients of each per-sample loss at w, shape (n, d)."""
    scores = dataset.X @ np.asarray(w, dtype=float)
    if kind == "squared":
        return 2.0 * (scores - dataset.y)[:, None] * dataset.X
    if kind == "logistic":
        y = dataset.y
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise BadLabels("logistic loss requires labels in {-1, +1}")
        sig = 1.0 / (1.0 + np.exp(y * scores))  # sigmoid(-y * score)
        return (-y * sig)[:, None] * dataset.X
    raise BadParam(f"unknown loss kind {kind!r}")


# ==== the w-step ==============================================================


def w_step(v: np.ndarray, dataset: Dataset, config: TrainConfig) -> np.ndarray:
    """Minimize <v, l(w)> + ridge * ||w||^2 over w for fixed weights v."""
    v = np.asarray(v, dtype=float)
    if v.shape != (dataset.n,):
        raise BadParam(f"weights shape {v.shape} does not match {dataset.n} samples")
    if config.loss == "squared":
        return _weighted_ridge(v, dataset, config.ridge)
    return _weighted_logistic(v, dataset, config.ridge)


def _weighted_ridge(v: np.ndarray, dataset: Dataset, alpha: float) -> np.ndarray:
    X, y = dataset.X, dataset.y
    A = X.T @ (v[:, None] * X) + alpha * np.eye(dataset.d)
    b = X.T @ (v * y)
    try:
        w = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        raise SingularSystem(
            "weighted normal equations are singular (zero ridge with rank-deficient "
            "weighted design)"
        ) from None
    if not np.all(np.isfinite(w)):
        raise SingularSystem("weighted normal equations produced non-finite solution")
    return w


def _weighted_logistic(
    v: np.ndarray, dataset: Dataset, alpha: float, max_iter: int = 100
) -> np.ndarray:
    X, y = dataset.X, dataset.y
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise BadLabels("logistic loss requires labels in {-1, +1}")

    def objective(w):
        return float(v @ np.logaddexp(0.0, -y * (X @ w)) + alpha * (w @ w))

    w = np.zeros(dataset.d)
    obj = objective(w)
    for _ in range(max_iter):
        scores = X @ w
        sig = 1.0 / (1.0 + np.exp(y * scores))
        grad = X.T @ (v * (-y) * sig) + 2.0 * alpha * w
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= 1e-8:
            break
        curv = v * sig * (1.0 - sig)
        H = X.T @ (curv[:, None] * X) + 2.0 * alpha * np.eye(dataset.d)
        try:
            step = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            raise SingularSystem("logistic Newton system is singular") from None
        t = 1.0
        while t > 1e-12:
            cand = w - t * step
            cand_obj = objective(cand)
            if cand_obj <= obj - 1e-4 * t * float(grad @ step):
                w, obj = cand, cand_obj
                break
            t *= 0.5
        else:
            break  # no productive step left; gradient is numerically flat
    return w


# ==== the v-step ==============================================================


def _pair_normal(k: np.ndarray):
    """Decode k as a pairwise ordering v_i >= v_j; None if not that shape."""
    nz = np.flatnonzero(k)
    if nz.size != 2:
        return None
    a, b = nz
    if not math.isclose(k[a], -k[b], rel_tol=1e-12, abs_tol=0.0):
        return None
    return (a, b) if k[a] > 0 else (b, a)


def _chain_orders(region: CurriculumRegion, n: int):
    """Decode an intersection of pairwise orderings as disjoint chains.

    Returns a list of index chains [i1, i2, ...] meaning
    v_{i1} >= v_{i2} >= ..., or None when the halfspaces are not all
    homogeneous pairwise orderings arranged in simple chains.
    """
    succ: dict[int, int] = {}
    pred: dict[int, int] = {}
    for h in region.halfspaces:
        if abs(h.b) > 0:
            return None
        pair = _pair_normal(h.k)
        if pair is None:
            return None
        hi, lo = pair
        if hi in succ or lo in pred:
            return None  # branching order, not a chain
        succ[hi] = lo
        pred[lo] = hi
    chains = []
    heads = [i for i in succ if i not in pred]
    visited = set()
    for head in heads:
        chain = [head]
        visited.add(head)
        cur = head
        while cur in succ:
            cur = succ[cur]
            if cur in visited:
                return None  # cycle
            visited.add(cur)
            chain.append(cur)
        chains.append(chain)
    if len(visited) < len(set(succ) | set(pred)):
        return None  # leftover nodes imply a cycle
    return chains


def _pav_chain(reg: SPRegularizer, lam: float, losses: np.ndarray) -> np.ndarray:
    """Pool adjacent violators along a chain requiring non-increasing weights.

    Weights decrease in the loss, so the constraint is equivalent to the
    effective losses being non-decreasing along the chain; pooled blocks
    take the weight of their mean loss, which solves each block subproblem
    exactly for every penalty in the catalog shape (common weight at the
    block's mean).
    """
    blocks = []  # (sum, count)
    for l in losses:
        blocks.append([float(l), 1])
        while len(blocks) >= 2 and blocks[-1][0] / blocks[-1][1] < blocks[-2][0] / blocks[-2][1]:
            s, c = blocks.pop()
            blocks[-1][0] += s
            blocks[-1][1] += c
    out = np.empty(losses.size)
    pos = 0
    for s, c in blocks:
        out[pos : pos + c] = reg.weight(lam, s / c)
        pos += c
    return out


def _feasibility_precheck(region: CurriculumRegion):
    for h in region.halfspaces:
        cap = float(np.sum(np.maximum(h.k, 0.0)))
        if h.b > cap + 1e-12:
            raise InfeasibleCurriculum(
                f"halfspace <k, v> >= {h.b} cannot be met by weights in [0, 1]^n "
                f"(maximum attainable is {cap})"
            )


def _boundary_forced_weights(reg, lam, l, h):
    """Weights when b equals the box maximum of <k, v>: forced coordinates."""
    v = np.asarray(reg.weight(lam, l), dtype=float)
    v = np.where(h.k > 0, 1.0, np.where(h.k < 0, 0.0, v))
    return v


def _dual_single_halfspace(reg, lam, l, h):
    cap = float(np.sum(np.maximum(h.k, 0.0)))
    if abs(h.b - cap) <= 1e-12:
        return _boundary_forced_weights(reg, lam, l, h)
    try:
        result = affine_action(reg, lam, l, h)
    except NoRoot as exc:
        raise InfeasibleCurriculum(str(exc)) from None
    return np.asarray(result.weights, dtype=float)


def _dual_intersection(reg, lam, l, region, sweeps: int = 200):
    hs = region.halfspaces
    m = len(hs)
    mu = np.zeros(m)
    K = np.stack([h.k for h in hs])

    def weights_for(mu_vec):
        shift = K.T @ mu_vec
        return weight_extended(reg, lam, l - shift)

    for _ in range(sweeps):
        for j, h in enumerate(hs):
            other = mu.copy()
            other[j] = 0.0
            l_eff = l - K.T @ other
            balance = lambda m_j: float(weight_extended(reg, lam, l_eff - m_j * h.k) @ h.k)
            if balance(0.0) >= h.b:
                mu[j] = 0.0
                continue
            hi = max(1.0, float(np.linalg.norm(l_eff)) / float(np.linalg.norm(h.k)))
            grow = 0
            while balance(hi) < h.b:
                hi *= 2.0
                grow += 1
                if grow > 200:
                    raise InfeasibleCurriculum(
                        "dual ascent cannot satisfy a halfspace; region may be "
                        "infeasible or the penalty too flat"
                    )
            lo = 0.0
            while hi - lo > 1e-12 * max(1.0, hi):
                mid = 0.5 * (lo + hi)
                if balance(mid) >= h.b:
                    hi = mid
                else:
                    lo = mid
            mu[j] = hi  # feasible side for this constraint
        v = weights_for(mu)
        slack = K @ v - np.array([h.b for h in hs])
        if float(slack.min()) >= -1e-9 and float(np.max(mu * np.abs(slack))) <= 1e-8:
            return v
    raise InfeasibleCurriculum(
        "dual coordinate ascent did not reach KKT tolerance; region may be "
        "degenerate for this penalty"
    )


def v_step(
    l: np.ndarray,
    lam: float,
    reg: SPRegularizer,
    region: CurriculumRegion | None = None,
) -> np.ndarray:
    """Minimize <v, l> + lam * sum r_sp_base(v_i) over the region, exactly in [0,1]^n.

    Routing: no region -> elementwise weights; groups -> the weight of each
    block's mean loss; pairwise-order chains -> pool adjacent violators;
    other halfspaces -> dual multiplier search (bisection per constraint),
    which requires a strictly convex penalty and therefore refuses the
    binary-weight penalty outside the chain case.
    """
    l = np.asarray(l, dtype=float)
    if np.any(l < 0):
        raise BadParam("losses must be nonnegative")
    if region is None or region.kind == "none":
        return np.clip(np.asarray(reg.weight(lam, l), dtype=float), 0.0, 1.0)

    if region.kind == "groups":
        blocks = check_partition(region.partition, l.size)
        v = np.empty(l.size)
        for block in blocks:
            idx = list(block)
            v[idx] = reg.weight(lam, float(np.mean(l[idx])))
        return np.clip(v, 0.0, 1.0)

    _feasibility_precheck(region)
    v0 = np.asarray(reg.weight(lam, l), dtype=float)
    if all(float(v0 @ h.k) >= h.b - 1e-12 for h in region.halfspaces):
        return np.clip(v0, 0.0, 1.0)

    chains = _chain_orders(region, l.size)
    if chains is not None:
        v = v0.copy()
        for chain in chains:
            v[chain] = _pav_chain(reg, lam, l[chain])
        return np.clip(v, 0.0, 1.0)

    if reg.name == "hard":
        raise UnsupportedRegularizer(
            "binary-weight penalty supports only pairwise-order chains among "
            "halfspace constraints"
        )
    if region.kind == "halfspace":
        v = _dual_single_halfspace(reg, lam, l, region.halfspaces[0])
    else:
        v = _dual_intersection(reg, lam, l, region)
    return np.clip(v, 0.0, 1.0)


# ==== age schedules ===========================================================


def weight_support_radius(
    reg: SPRegularizer, threshold: float = WEIGHT_EPS, cap: float = 1e12
) -> float:
    """The base-scale loss beyond which the weight drops to `threshold` or less."""
    w0 = float(reg.weight_base(np.array(0.0)))
    if w0 <= threshold:
        return 0.0
    hi = 1.0
    while float(reg.weight_base(np.array(hi))) > threshold:
        hi *= 2.0
        if hi > cap:
            return cap
    lo = hi / 2.0 if hi > 1.0 else 0.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if float(reg.weight_base(np.array(mid))) > threshold:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _midpoint_above(sorted_losses: np.ndarray, count: int) -> float:
    """A level with `count` sorted losses strictly below it, tie-tolerant.

    Returns the midpoint between order statistics count and count+1; when
    they tie, moves to the next distinct value (admitting more samples,
    documented), and when no distinct value remains, a level just above the
    maximum.
    """
    n = sorted_losses.size
    if count <= 0:
        lo = float(sorted_losses[0])
        return lo / 2.0 if lo > 0 else 1e-12
    anchor = float(sorted_losses[count - 1])
    above = sorted_losses[count:]
    distinct = above[above > anchor * (1.0 + 1e-12) + 1e-300]
    if distinct.size:
        return 0.5 * (anchor + float(distinct[0]))
    return anchor * (1.0 + 1e-6) + 1e-12 if anchor > 0 else 1e-12


def median_schedule(
    losses: np.ndarray,
    reg: SPRegularizer,
    prev_lam: float | None = None,
    growth: float = 1.3,
) -> float:
    """Median-start geometric age schedule.

    The first call picks the age so that the ceil(n/2) smallest losses get
    weight above 1e-6: the midpoint between the straddling order statistics,
    divided by the regularizer's weight support radius.  Later calls
    multiply the previous age by the growth factor.
    """
    if prev_lam is not None:
        return float(prev_lam) * float(growth)
    losses = np.sort(np.asarray(losses, dtype=float))
    m = math.ceil(losses.size / 2)
    level = _midpoint_above(losses, m)
    radius = weight_support_radius(reg)
    if radius <= 0:
        raise BadParam("regularizer weight vanishes everywhere; cannot set an age")
    return level / radius


def portion_schedule(
    losses: np.ndarray, fraction: float, prev_lam: float | None = None
) -> float:
    """Quantile age schedule: the age sits at the loss quantile of `fraction`.

    Exactly floor(fraction * n) samples fall strictly below the returned
    age (more on ties, documented).  The sequence is forced non-decreasing
    against prev_lam since losses move between stages.
    """
    validate_fractions((fraction,))
    losses = np.sort(np.asarray(losses, dtype=float))
    count = math.floor(fraction * losses.size)
    level = _midpoint_above(losses, count)
    if prev_lam is not None:
        return max(float(prev_lam), level)
    return level


# ==== objectives ==============================================================


def sp_penalty_sum(reg: SPRegularizer, lam: float, v: np.ndarray) -> float:
    """lam * sum_i r_sp_base(v_i) with weights clipped into the unit box."""
    vals = np.asarray(reg.r_sp_base(np.clip(np.asarray(v, dtype=float), 0.0, 1.0)))
    return lam * float(np.sum(vals))


def full_objective(
    v: np.ndarray, l: np.ndarray, lam: float, reg: SPRegularizer, alpha: float, w: np.ndarray
) -> float:
    """The joint objective <v, l> + lam * sum r(v_i) + alpha * ||w||^2."""
    return float(v @ l) + sp_penalty_sum(reg, lam, v) + alpha * float(w @ w)


def latent_objective(
    v: np.ndarray, l: np.ndarray, lam: float, reg: SPRegularizer, alpha: float, w: np.ndarray
) -> float:
    """The unweighted-form objective G(w) evaluated through minimizing weights.

    For v attaining the v-step minimum this equals
    sum_i latent(lam, l_i) + alpha * ||w||^2 (with the curriculum-constrained
    latent when a region is active), by the normalization
    latent = min_v {<v, l> + lam sum r} - n * lam * min r.
    """
    return (
        full_objective(v, l, lam, reg, alpha, w)
        - l.size * lam * reg.r_base_min
    )


def gradient_norm(
    w: np.ndarray, dataset: Dataset, config: TrainConfig, lam: float, reg: SPRegularizer
) -> float:
    """||grad G(w)||_2 where G weights each loss gradient by the minimizing v."""
    l = loss_vector(w, dataset, config.loss)
    v = v_step(l, lam, reg, config.region)
    grads = loss_gradients(w, dataset, config.loss)
    g = grads.T @ v + 2.0 * config.ridge * w
    return float(np.linalg.norm(g))


# ==== train state =============================================================


@dataclass
class TrainState:
    """Mutable record of a training run and its per-iteration traces."""

    w: np.ndarray
    v: np.ndarray
    lam: float
    losses: np.ndarray
    iters: list = field(default_factory=list)
    lambdas: list = field(default_factory=list)
    spl_objectives: list = field(default_factory=list)
    latent_objectives: list = field(default_factory=list)
    weight_history: list = field(default_factory=list)
    stage_starts: list = field(default_factory=list)
    converged: bool = True
    grad_norm: float | None = None

    def record(self, lam: float, spl_obj: float, latent_obj: float, v: np.ndarray):
        self.iters.append(len(self.iters))
        self.lambdas.append(float(lam))
        self.spl_objectives.append(float(spl_obj))
        self.latent_objectives.append(float(latent_obj))
        self.weight_history.append(np.asarray(v, dtype=float).copy())

    def to_dict(self) -> dict:
        return {
            "w": [float(x) for x in self.w],
            "v": [float(x) for x in self.v],
            "lambda": float(self.lam),
            "losses": [float(x) for x in self.losses],
            "converged": bool(self.converged),
            "iterations": len(self.iters),
            "stage_starts": [
                {"iter": int(i), "lambda": float(l)} for i, l in self.stage_starts
            ],
            "grad_norm": None if self.grad_norm is None else float(self.grad_norm),
            "trace": {
                "iter": [int(i) for i in self.iters],
                "lambda": [float(x) for x in self.lambdas],
                "spl_objective": [float(x) for x in self.spl_objectives],
                "latent_objective": [float(x) for x in self.latent_objectives],
            },
        }

    def write_trace_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("iter,lambda,spl_objective,latent_objective\n")
            for i, lam, e, g in zip(
                self.iters, self.lambdas, self.spl_objectives, self.latent_objectives
            ):
                fh.write(f"{i},{float(lam)!r},{float(e)!r},{float(g)!r}\n")


# ==== the alternating solver ==================================================


def spl_fit(dataset: Dataset, config: TrainConfig) -> TrainState:
    """Alternating minimization over weights and parameters with an age schedule.

    Starts from the unweighted fit, then per stage alternates the v-step and
    w-step until the joint objective decreases by less than inner_tol or
    max_inner iterations pass.  After the last stage it keeps alternating at
    the final age until the unweighted-form gradient reaches grad_tol, so
    the returned parameters are a genuine stationary point (cap: 10 *
    max_inner extra iterations).  The latent-objective trace is
    non-increasing within any fixed stage.
    """
    reg = get_regularizer(config.regularizer)
    alpha = config.ridge
    region = config.region

    w = w_step(np.ones(dataset.n), dataset, config)
    losses = loss_vector(w, dataset, config.loss)
    state = TrainState(w=w, v=np.ones(dataset.n), lam=1.0, losses=losses)

    def run_stage(lam: float) -> bool:
        """Alternate at fixed age; True if the inner loop converged."""
        nonlocal w, losses
        prev_obj = None
        for _ in range(config.max_inner):
            v = v_step(losses, lam, reg, region)
            latent_val = latent_objective(v, losses, lam, reg, alpha, w)
            w = w_step(v, dataset, config)
            losses = loss_vector(w, dataset, config.loss)
            obj = full_objective(v, losses, lam, reg, alpha, w)
            state.record(lam, obj, latent_val, v)
            state.v = v
            if prev_obj is not None and prev_obj - obj < config.inner_tol:
                return True
            prev_obj = obj
        return False

    inner_ok = True
    lam = None
    if config.schedule == "fixed":
        lam = float(config.lam)
        state.stage_starts.append((len(state.iters), lam))
        inner_ok = run_stage(lam)
    elif config.schedule == "median":
        lam = median_schedule(losses, reg)
        for stage in range(config.stages):
            state.stage_starts.append((len(state.iters), lam))
            inner_ok = run_stage(lam)
            if float(np.min(state.v)) >= config.full_weight_threshold:
                break
            if stage + 1 < config.stages:
                lam = median_schedule(losses, reg, prev_lam=lam, growth=config.growth)
    else:  # portion
        prev = None
        for f in config.fractions:
            lam = portion_schedule(losses, f, prev_lam=prev)
            state.stage_starts.append((len(state.iters), lam))
            inner_ok = run_stage(lam)
            prev = lam

    # polish: alternate at the final age until the unweighted-form gradient
    # is small, so fixed points are stationary points of G
    polish_ok = True
    gnorm = gradient_norm(w, dataset, config, lam, reg)
    extra = 0
    while gnorm > config.grad_tol:
        if extra >= 10 * config.max_inner:
            polish_ok = False
            break
        v = v_step(losses, lam, reg, region)
        latent_val = latent_objective(v, losses, lam, reg, alpha, w)
        w = w_step(v, dataset, config)
        losses = loss_vector(w, dataset, config.loss)
        obj = full_objective(v, losses, lam, reg, alpha, w)
        state.record(lam, obj, latent_val, v)
        state.v = v
        extra += 1
        gnorm = gradient_norm(w, dataset, config, lam, reg)

    state.w = w
    state.losses = losses
    state.lam = float(lam)
    state.v = v_step(losses, lam, reg, region)
    state.converged = bool(inner_ok and polish_ok)
    state.grad_norm = gnorm
    return state


# ==== direct descent on the unweighted form ===================================


def latent_descent_fit(
    dataset: Dataset,
    config: TrainConfig,
    lam: float | None = None,
    w0: np.ndarray | None = None,
    max_iter: int | None = None,
) -> TrainState:
    """Gradient descent on G(w) = sum_i latent(lam, l_i(w)) + ridge * ||w||^2.

    The gradient weights each sample's loss gradient by its minimizing
    weight (with the curriculum-constrained weights when a region is
    active); at kinks of the binary-weight penalty the tie-break weight of
    the weight map is used as the descent direction.  Armijo backtracking
    guarantees monotone objective decrease; stops when the gradient norm
    reaches grad_tol.
    """
    reg = get_regularizer(config.regularizer)
    alpha = config.ridge
    if lam is None:
        if config.lam is None:
            raise BadParam("latent_descent_fit needs an age: set lam or config.lam")
        lam = float(config.lam)
    cap = max_iter if max_iter is not None else 50 * config.max_inner

    w = (
        np.asarray(w0, dtype=float).copy()
        if w0 is not None
        else w_step(np.ones(dataset.n), dataset, config)
    )

    def G(w_):
        l = loss_vector(w_, dataset, config.loss)
        v = v_step(l, lam, reg, config.region)
        return latent_objective(v, l, lam, reg, alpha, w_), l, v

    val, l, v = G(w)
    state = TrainState(w=w, v=v, lam=float(lam), losses=l)
    converged = False
    for _ in range(cap):
        grads = loss_gradients(w, dataset, config.loss)
        g = grads.T @ v + 2.0 * alpha * w
        gnorm = float(np.linalg.norm(g))
        state.record(lam, val + dataset.n * lam * reg.r_base_min, val, v)
        if gnorm <= config.grad_tol:
            converged = True
            break
        t = 1.0 / max(1.0, gnorm)
        accepted = False
        while t > 1e-20:
            cand = w - t * g
            cand_val, cand_l, cand_v = G(cand)
            if cand_val <= val - 1e-4 * t * gnorm**2:
                w, val, l, v = cand, cand_val, cand_l, cand_v
                accepted = True
                break
            t *= 0.5
        if not accepted:
            converged = gnorm <= 10 * config.grad_tol
            break

    state.w = w
    state.v = v
    state.losses = l
    state.converged = converged
    state.grad_norm = float(
        np.linalg.norm(loss_gradients(w, dataset, config.loss).T @ v + 2 * alpha * w)
    )
    return state
