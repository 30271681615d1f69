"""Sequential-picture operations, state/effect pairs and outcome distributions"""
import itertools
from typing import Dict, Iterator, List, Mapping, Sequence, Tuple

import attr
import numpy as np

from opnet import config
from opnet.core import linalg
from opnet.errors import InvalidMatrixError, InvalidOperationError, InvalidStateError
from opnet.models.layout import IndexLayout, LayoutLike, as_square, to_layout

Outcome = Tuple[str, ...]


def _to_kraus_stack(value) -> np.ndarray:
    try:
        ops = np.asarray(value, dtype=np.complex128)
    except (TypeError, ValueError) as e:
        raise InvalidMatrixError(f"kraus operators are not complex matrices: {e}")
    if ops.ndim == 2:
        ops = ops[np.newaxis]
    if ops.ndim != 3 or ops.shape[0] == 0:
        raise InvalidMatrixError(f"kraus stack must have shape (k, out, in), got {ops.shape}")
    if not np.all(np.isfinite(ops)):
        raise InvalidMatrixError("kraus operators have non-finite entries")
    return ops


@attr.s(frozen=True, eq=False)
class KrausSet:
    """CP map given by operators K of shape (output_dim, input_dim), stacked"""

    operators: np.ndarray = attr.ib(converter=_to_kraus_stack)

    def __attrs_post_init__(self):
        if self.count > max(self.input_dim * self.output_dim, 1):
            raise InvalidOperationError(
                f"{self.count} kraus operators exceed {self.input_dim}x{self.output_dim}; "
                "use KrausSet.from_operators to compress"
            )

    @classmethod
    def from_operators(cls, operators) -> "KrausSet":
        """kraus set from any number of operators, compressed when needed"""
        ops = _to_kraus_stack(operators)
        if ops.shape[0] > max(ops.shape[1] * ops.shape[2], 1):
            ops = compress_kraus(ops)
        return cls(ops)

    @classmethod
    def zero(cls, output_dim: int, input_dim: int) -> "KrausSet":
        return cls(np.zeros((1, output_dim, input_dim), dtype=np.complex128))

    @property
    def count(self) -> int:
        return self.operators.shape[0]

    @property
    def output_dim(self) -> int:
        return self.operators.shape[1]

    @property
    def input_dim(self) -> int:
        return self.operators.shape[2]

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self.operators)

    def apply(self, rho) -> np.ndarray:
        """sum_k K rho K^dagger"""
        rho = as_square(rho, "rho")
        return np.einsum("kab,bc,kdc->ad", self.operators, rho, np.conj(self.operators))

    def apply_dual(self, effect) -> np.ndarray:
        """sum_k K^dagger E K"""
        effect = as_square(effect, "effect")
        return np.einsum("kba,bc,kcd->ad", np.conj(self.operators), effect, self.operators)

    def gram(self) -> np.ndarray:
        """sum_k K^dagger K"""
        return np.einsum("kba,kbc->ac", np.conj(self.operators), self.operators)

    def choi(self) -> np.ndarray:
        """sum_k vec(K) vec(K)^dagger with row-major vec, indexed (out, in)"""
        vecs = self.operators.reshape(self.count, -1)
        return vecs.T @ np.conj(vecs)

    def normalization(self) -> float:
        """Tr M(I/d_in)"""
        return float(np.real(np.sum(np.abs(self.operators) ** 2))) / self.input_dim

    def scaled(self, factor: float) -> "KrausSet":
        """the map multiplied by a nonnegative factor"""
        return KrausSet(self.operators * np.sqrt(factor))

    def then(self, other: "KrausSet") -> "KrausSet":
        """the composition other after self"""
        ops = np.einsum("lab,kbc->lkac", other.operators, self.operators)
        return KrausSet.from_operators(ops.reshape(-1, other.output_dim, self.input_dim))

    def tensor(self, other: "KrausSet") -> "KrausSet":
        ops = [np.kron(k, l) for k in self.operators for l in other.operators]
        return KrausSet.from_operators(ops)

    @classmethod
    def concatenate(cls, sets: Sequence["KrausSet"]) -> "KrausSet":
        """kraus set of the sum of the maps"""
        return cls.from_operators(np.concatenate([s.operators for s in sets]))


def compress_kraus(operators: np.ndarray, rel_tol: float = 1e-14) -> np.ndarray:
    """minimal kraus operators of the same map via the choi eigendecomposition"""
    k, d_out, d_in = operators.shape
    vecs = operators.reshape(k, -1)
    choi = vecs.T @ np.conj(vecs)
    values, vectors = np.linalg.eigh(linalg.hermitian_part(choi))
    keep = values > rel_tol * max(values[-1], 0.0)
    if not np.any(keep):
        return np.zeros((1, d_out, d_in), dtype=np.complex128)
    vectors = vectors[:, keep] * np.sqrt(values[keep])
    return vectors.T.reshape(-1, d_out, d_in)


def kraus_from_psd(m, as_columns: bool) -> np.ndarray:
    """decompose a PSD matrix into rank-1 kraus columns (rho) or rows (effects)"""
    m = as_square(m)
    values, vectors = np.linalg.eigh(linalg.hermitian_part(m))
    keep = values > 1e-15 * max(values[-1], 0.0)
    if not np.any(keep) or values[-1] <= 0:
        shape = (1, m.shape[0], 1) if as_columns else (1, 1, m.shape[0])
        return np.zeros(shape, dtype=np.complex128)
    vectors = vectors[:, keep] * np.sqrt(values[keep])
    if as_columns:
        return vectors.T[:, :, np.newaxis]
    return np.conj(vectors.T)[:, np.newaxis, :]


def _check_psd(m: np.ndarray, name: str):
    if not linalg.is_psd(m):
        raise InvalidStateError(f"{name} is not positive semidefinite")


@attr.s(frozen=True, eq=False)
class SequentialOperation:
    """outcome-indexed family of CP maps from the input to the output systems"""

    input_layout: IndexLayout = attr.ib()
    output_layout: IndexLayout = attr.ib()
    outcomes: Tuple[Tuple[str, KrausSet], ...] = attr.ib(converter=tuple)

    def __attrs_post_init__(self):
        if not self.outcomes:
            raise InvalidOperationError("operation needs at least one outcome")
        labels = self.labels
        if len(set(labels)) != len(labels):
            raise InvalidOperationError(f"outcome labels must be unique, got {labels}")
        for label, kraus in self.outcomes:
            if (kraus.output_dim, kraus.input_dim) != (self.output_dim, self.input_dim):
                raise InvalidOperationError(
                    f"outcome {label!r} maps {kraus.input_dim}->{kraus.output_dim}, "
                    f"expected {self.input_dim}->{self.output_dim}"
                )

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(str(label) for label, _ in self.outcomes)

    @property
    def input_dim(self) -> int:
        return self.input_layout.size

    @property
    def output_dim(self) -> int:
        return self.output_layout.size

    @property
    def is_preparation(self) -> bool:
        return self.input_dim == 1

    @property
    def is_measurement(self) -> bool:
        return self.output_dim == 1

    def maps(self) -> Dict[str, KrausSet]:
        return dict(self.outcomes)

    def outcome(self, label: str) -> KrausSet:
        """lookup outcome map by label"""
        for name, kraus in self.outcomes:
            if name == label:
                return kraus
        raise InvalidOperationError(f"unknown outcome label {label!r}")

    def total(self) -> KrausSet:
        """the coarse-grained map M-bar"""
        return KrausSet.concatenate([k for _, k in self.outcomes])

    def normalization(self) -> float:
        """sum_i Tr M_i(I/d_in)"""
        return float(sum(k.normalization() for _, k in self.outcomes))

    def normalized(self) -> "SequentialOperation":
        """copy rescaled to unit generalized normalization"""
        norm = self.normalization()
        if norm <= 0:
            raise InvalidOperationError("cannot normalize the null operation")
        return self.with_outcomes([(label, k.scaled(1 / norm)) for label, k in self.outcomes])

    def with_outcomes(self, outcomes) -> "SequentialOperation":
        return SequentialOperation(self.input_layout, self.output_layout, outcomes)

    def states(self) -> Dict[str, np.ndarray]:
        """outcome states rho_i of a preparation"""
        if not self.is_preparation:
            raise InvalidOperationError("operation has a nontrivial input")
        one = np.ones((1, 1), dtype=np.complex128)
        return {label: k.apply(one) for label, k in self.outcomes}

    def effects(self) -> Dict[str, np.ndarray]:
        """outcome effects E_j of a measurement"""
        if not self.is_measurement:
            raise InvalidOperationError("operation has a nontrivial output")
        return {label: k.gram() for label, k in self.outcomes}

    @classmethod
    def preparation(
        cls, states: Mapping[str, np.ndarray], system: LayoutLike = "A"
    ) -> "SequentialOperation":
        """preparation with the given (unnormalized) outcome states"""
        outcomes = []
        for label, rho in states.items():
            rho = as_square(rho, f"state {label!r}")
            _check_psd(rho, f"state {label!r}")
            outcomes.append((str(label), KrausSet(kraus_from_psd(rho, as_columns=True))))
        dim = outcomes[0][1].output_dim
        return cls(IndexLayout.trivial(), to_layout(system, dim), outcomes)

    @classmethod
    def measurement(
        cls, effects: Mapping[str, np.ndarray], system: LayoutLike = "A"
    ) -> "SequentialOperation":
        """measurement with the given outcome effects"""
        outcomes = []
        for label, effect in effects.items():
            effect = as_square(effect, f"effect {label!r}")
            _check_psd(effect, f"effect {label!r}")
            outcomes.append((str(label), KrausSet(kraus_from_psd(effect, as_columns=False))))
        dim = outcomes[0][1].input_dim
        return cls(to_layout(system, dim), IndexLayout.trivial(), outcomes)

    @classmethod
    def instrument(
        cls,
        outcomes: Mapping[str, Sequence[np.ndarray]],
        source: LayoutLike = "A",
        target: LayoutLike = "B",
    ) -> "SequentialOperation":
        """operation from kraus operators per outcome"""
        maps = [(str(label), KrausSet.from_operators(ops)) for label, ops in outcomes.items()]
        first = maps[0][1]
        return cls(
            to_layout(source, first.input_dim), to_layout(target, first.output_dim), maps
        )

    @classmethod
    def channel(
        cls,
        kraus: Sequence[np.ndarray],
        source: LayoutLike = "A",
        target: LayoutLike = "B",
        label: str = "0",
    ) -> "SequentialOperation":
        """single-outcome operation"""
        return cls.instrument({label: kraus}, source, target)

    @classmethod
    def unitary(
        cls, u, source: LayoutLike = "A", target: LayoutLike = "B", label: str = "0"
    ) -> "SequentialOperation":
        return cls.channel([as_square(u, "unitary")], source, target, label)

    @classmethod
    def identity(
        cls, d: int, source: LayoutLike = "A", target: LayoutLike = "B"
    ) -> "SequentialOperation":
        return cls.unitary(np.eye(d), source, target)


@attr.s(frozen=True, eq=False)
class ValidationReport:
    """result of checking an operation against its invariants"""

    normalization_residual: float = attr.ib()
    positive: Dict[str, bool] = attr.ib(factory=dict)
    standard: bool = attr.ib(default=False)
    tolerance: float = attr.ib(default=1e-9)
    failures: List[str] = attr.ib(factory=list)

    @property
    def valid(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.valid


@attr.s(frozen=True, eq=False)
class StatePair:
    """(rho; rho-bar): the outcome state and the deterministic state of a preparation"""

    rho: np.ndarray = attr.ib(converter=as_square)
    rho_bar: np.ndarray = attr.ib(converter=as_square)

    def __attrs_post_init__(self):
        if self.rho.shape != self.rho_bar.shape:
            raise InvalidStateError("rho and rho-bar dimensions differ")
        _check_psd(self.rho, "rho")
        _check_psd(self.rho_bar - self.rho, "rho-bar - rho")
        residual = abs(linalg.real_trace(self.rho_bar) - 1.0)
        if residual > config.settings.normalization_tolerance:
            raise InvalidStateError(f"Tr rho-bar differs from 1 by {residual:.3e}")

    @classmethod
    def deterministic(cls, rho) -> "StatePair":
        """(rho; rho)"""
        return cls(rho, rho)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]


@attr.s(frozen=True, eq=False)
class EffectPair:
    """(E; E-bar): an outcome effect and the coarse-grained effect, Tr E-bar = d"""

    e: np.ndarray = attr.ib(converter=as_square)
    e_bar: np.ndarray = attr.ib(converter=as_square)

    def __attrs_post_init__(self):
        if self.e.shape != self.e_bar.shape:
            raise InvalidStateError("E and E-bar dimensions differ")
        _check_psd(self.e, "E")
        _check_psd(self.e_bar - self.e, "E-bar - E")
        residual = abs(linalg.real_trace(self.e_bar) - self.dim)
        if residual > config.settings.normalization_tolerance * self.dim:
            raise InvalidStateError(f"Tr E-bar differs from {self.dim} by {residual:.3e}")

    @classmethod
    def deterministic(cls, e) -> "EffectPair":
        """(E; E)"""
        return cls(e, e)

    @property
    def dim(self) -> int:
        return self.e.shape[0]


def _to_kernel(value) -> np.ndarray:
    t = np.asarray(value, dtype=float)
    if t.ndim != 2:
        raise InvalidOperationError(f"update kernel must be 2-dimensional, got {t.shape}")
    return t


@attr.s(frozen=True, eq=False)
class UpdateKernel:
    """T(j, i): weight of old outcome i in new outcome j"""

    t: np.ndarray = attr.ib(converter=_to_kernel)
    labels: Tuple[str, ...] = attr.ib(converter=tuple)

    def __attrs_post_init__(self):
        if len(self.labels) != self.t.shape[0]:
            raise InvalidOperationError(
                f"{len(self.labels)} new labels for {self.t.shape[0]} kernel rows"
            )
        if np.any(self.t < 0) or not np.all(np.isfinite(self.t)):
            raise InvalidOperationError("update kernel entries must be finite and >= 0")
        tol = config.settings.normalization_tolerance
        if np.any(self.t.sum(axis=0) > 1 + tol):
            raise InvalidOperationError("update kernel column sums must not exceed 1")

    @property
    def old_count(self) -> int:
        return self.t.shape[1]

    @classmethod
    def identity(cls, labels: Sequence[str]) -> "UpdateKernel":
        return cls(np.eye(len(labels)), labels)

    @classmethod
    def coarse_grain(cls, old_labels: Sequence[str], label: str = "e") -> "UpdateKernel":
        """all outcomes merged into one"""
        return cls(np.ones((1, len(old_labels))), (label,))

    @classmethod
    def restrict(
        cls, old_labels: Sequence[str], subset: Sequence[str], p: float = 1.0
    ) -> "UpdateKernel":
        """keep only the outcomes in subset, each with weight p"""
        old = list(old_labels)
        missing = [s for s in subset if s not in old]
        if missing:
            raise InvalidOperationError(f"unknown outcome labels {missing}")
        t = np.zeros((len(subset), len(old)))
        for j, label in enumerate(subset):
            t[j, old.index(label)] = p
        return cls(t, subset)


def _to_entries(value) -> Dict[Outcome, float]:
    entries = {}
    for key, p in dict(value).items():
        if isinstance(key, str):
            key = (key,)
        entries[tuple(str(x) for x in key)] = float(p)
    return dict(sorted(entries.items()))


@attr.s(frozen=True, eq=False)
class OutcomeDistribution:
    """joint probabilities keyed by outcome-label tuples"""

    entries: Dict[Outcome, float] = attr.ib(converter=_to_entries)
    names: Tuple[str, ...] = attr.ib(default=(), converter=tuple)
    null: bool = attr.ib(default=False)

    def __attrs_post_init__(self):
        if any(p < -1e-12 for p in self.entries.values()):
            raise InvalidStateError("probabilities must be nonnegative")
        if not self.null:
            residual = abs(sum(self.entries.values()) - 1.0)
            if residual > config.settings.normalization_tolerance:
                raise InvalidStateError(f"probabilities sum to 1{residual:+.3e}")

    @classmethod
    def from_array(
        cls,
        labels: Sequence[Sequence[str]],
        weights: np.ndarray,
        names: Sequence[str] = (),
    ) -> "OutcomeDistribution":
        """distribution over the product of label lists from unnormalized weights"""
        weights = np.clip(np.real(np.asarray(weights, dtype=np.complex128)), 0, None)
        total = weights.sum()
        keys = list(itertools.product(*labels))
        return cls(dict(zip(keys, (weights / total).ravel())), names)

    def __getitem__(self, outcome) -> float:
        if isinstance(outcome, str):
            outcome = (outcome,)
        return self.entries.get(tuple(outcome), 0.0)

    def __iter__(self) -> Iterator[Outcome]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def items(self):
        return self.entries.items()

    def probabilities(self) -> np.ndarray:
        return np.array(list(self.entries.values()))

    def marginal(self, positions: Sequence[int]) -> "OutcomeDistribution":
        """marginal over the outcome positions kept, in the order given"""
        out: Dict[Outcome, float] = {}
        for key, p in self.entries.items():
            sub = tuple(key[i] for i in positions)
            out[sub] = out.get(sub, 0.0) + p
        names = tuple(self.names[i] for i in positions) if self.names else ()
        return OutcomeDistribution(out, names, self.null)

    def reordered(self, positions: Sequence[int]) -> "OutcomeDistribution":
        """same distribution with outcome positions permuted"""
        return self.marginal(positions)

    def _aligned(self, other: "OutcomeDistribution"):
        keys = sorted(set(self.entries) | set(other.entries))
        return (
            np.array([self[k] for k in keys]),
            np.array([other[k] for k in keys]),
        )

    def total_variation(self, other: "OutcomeDistribution") -> float:
        a, b = self._aligned(other)
        return float(0.5 * np.sum(np.abs(a - b)))

    def max_abs_difference(self, other: "OutcomeDistribution") -> float:
        a, b = self._aligned(other)
        return float(np.max(np.abs(a - b), initial=0.0))

    @classmethod
    def null_distribution(
        cls, labels: Sequence[Sequence[str]], names: Sequence[str] = ()
    ) -> "OutcomeDistribution":
        """all-zero distribution flagged as null"""
        keys = itertools.product(*labels)
        return cls({k: 0.0 for k in keys}, names, null=True)
