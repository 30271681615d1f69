import json
import os
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pytest

from opnet.config import OpnetSettings, inject_settings
from opnet.core import linalg
from opnet.models.layout import IndexLayout
from opnet.models.network import ProcessOperator
from opnet.models.operations import SequentialOperation

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


class TestSettings(OpnetSettings):
    class Config:
        env_file = ".env.test"
        env_prefix = "OPNET_"


settings = TestSettings()
inject_settings(settings)


@pytest.fixture
def load_test_data() -> Callable[[str], Dict]:
    def load_file(filename: str) -> Dict:
        with open(os.path.join(DATA_DIR, filename)) as file:
            return json.load(file)

    return load_file


@pytest.fixture
def data_path() -> Callable[[str], str]:
    def path(filename: str) -> str:
        return os.path.join(DATA_DIR, filename)

    return path


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20211019)


@pytest.fixture
def restore_settings():
    """re-inject the test settings after a test overrides them"""
    yield
    inject_settings(settings)


def ginibre(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def inverse_sqrt_psd(m: np.ndarray) -> np.ndarray:
    values, vectors = np.linalg.eigh(linalg.hermitian_part(m))
    return (vectors / np.sqrt(values)) @ linalg.dagger(vectors)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(ginibre(d, d, rng))
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_density(d: int, rng: np.random.Generator, rank: Optional[int] = None) -> np.ndarray:
    g = ginibre(d, rank or d, rng)
    rho = g @ linalg.dagger(g)
    return rho / linalg.real_trace(rho)


def random_psd(d: int, rng: np.random.Generator) -> np.ndarray:
    g = ginibre(d, d, rng)
    return g @ linalg.dagger(g)


def random_instrument(
    d_in: int,
    d_out: int,
    n: int,
    rng: np.random.Generator,
    source="A",
    target="B",
    standard: bool = True,
    kraus_per_outcome: int = 2,
) -> SequentialOperation:
    """random operation with n outcomes, trace-preserving in total when standard"""
    ops = [
        [ginibre(d_out, d_in, rng) for _ in range(kraus_per_outcome)] for _ in range(n)
    ]
    if standard:
        gram = sum(k.conj().T @ k for outcome in ops for k in outcome)
        root = inverse_sqrt_psd(gram)
        ops = [[k @ root for k in outcome] for outcome in ops]
    op = SequentialOperation.instrument(
        {str(i): outcome for i, outcome in enumerate(ops)}, source, target
    )
    return op.normalized()


def random_preparation(
    d: int, n: int, rng: np.random.Generator, system="A"
) -> SequentialOperation:
    states = [random_psd(d, rng) for _ in range(n)]
    total = sum(linalg.real_trace(rho) for rho in states)
    return SequentialOperation.preparation(
        {str(i): rho / total for i, rho in enumerate(states)}, system
    )


def random_measurement(
    d: int, n: int, rng: np.random.Generator, system="A", standard: bool = True
) -> SequentialOperation:
    effects = [random_psd(d, rng) for _ in range(n)]
    if standard:
        root = inverse_sqrt_psd(sum(effects))
        effects = [root @ e @ root for e in effects]
    else:
        scale = d / linalg.real_trace(sum(effects))
        effects = [e * scale for e in effects]
    return SequentialOperation.measurement(
        {str(i): linalg.hermitian_part(e) for i, e in enumerate(effects)}, system
    )


def random_circuit(
    rng: np.random.Generator,
    dims: Sequence[int],
    outcomes: int = 2,
    standard: bool = True,
) -> Tuple[SequentialOperation, List[SequentialOperation], SequentialOperation]:
    """preparation on s0, one operation s{k} -> s{k+1} per extra dimension, measurement"""
    prep = random_preparation(dims[0], outcomes, rng, system="s0")
    middles = [
        random_instrument(
            dims[k], dims[k + 1], outcomes, rng, f"s{k}", f"s{k + 1}", standard=standard
        )
        for k in range(len(dims) - 1)
    ]
    meas = random_measurement(
        dims[-1], outcomes, rng, system=f"s{len(dims) - 1}", standard=standard
    )
    return prep, middles, meas


def random_symmetric(d: int, rng: np.random.Generator, sign: int = 1) -> np.ndarray:
    """S = A + sign A^T, generically invertible"""
    a = ginibre(d, d, rng)
    return a + sign * a.T


def random_symmetric_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    u = random_unitary(d, rng)
    return u @ u.T


def random_process_operator(
    layout: IndexLayout, rng: np.random.Generator
) -> ProcessOperator:
    return ProcessOperator(layout, random_density(layout.size, rng))
