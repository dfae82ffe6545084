"""Shared fixtures: the published spousal-mortality reference model and
small random-model helpers used by the property tests."""

import numpy as np
import pytest

from miph import GompertzTransform, Margin, MIPHModel, SubIntensity

# 10-state feed-forward sub-intensity fitted to male excess lifetimes
DIAG_1 = [-0.049, -3.662, -1.8e-7, -1.9e-4, -0.611, -0.002, -9.778, -0.36,
          -1.852, -0.023]
SUPER_1 = [1.7e-7, 2.877, 1.8e-7, 1.9e-4, 0.611, 0.002, 5.73, 0.225, 1.099]
# ... and to female excess lifetimes
DIAG_2 = [-0.196, -0.291, -0.763, -2.8e-8, -0.001, -0.003, -3.182, -0.172,
          -0.008, -3e-6]
SUPER_2 = [0.196, 0.291, 0.763, 2.8e-8, 0.001, 0.003, 1.165, 2e-7, 2.3e-10]

BETA_1 = 43.101
BETA_2 = 47.474

# per-couple initial vectors for entry ages (63,63), (68,63), (63,68), (73,63);
# published to 4 decimals, renormalized here to exact probability vectors
COUPLE_PI_RAW = {
    1: [0.0526, 0.0734, 0.0448, 0.0886, 0.4065, 0.0330, 0.0326, 0.0569,
        0.1077, 0.1039],
    2: [0.0356, 0.0313, 0.0297, 0.0398, 0.2805, 0.0476, 0.0396, 0.0384,
        0.2472, 0.2102],
    3: [0.0285, 0.0242, 0.0114, 0.1625, 0.4399, 0.0419, 0.0304, 0.1282,
        0.0819, 0.0510],
    4: [0.0172, 0.0095, 0.0140, 0.0127, 0.1378, 0.0489, 0.0343, 0.0184,
        0.4041, 0.3030],
}
COUPLE_AGES_YEARS = {1: (63.0, 63.0), 2: (68.0, 63.0), 3: (63.0, 68.0),
                     4: (73.0, 63.0)}

# multinomial-regression coefficients (reference state is row 0) on the
# design (1, age1, age2, age1*age2) with ages on the internal scale
GAMMA_TABLE = np.array([
    [0.0, 0.0, 0.0, 0.0],
    [-20.963, 43.733, 43.021, -84.049],
    [24.826, -24.630, -39.256, 38.453],
    [-51.036, 57.442, 90.062, -104.233],
    [-42.469, 56.804, 70.273, -89.556],
    [14.850, -41.377, -39.438, 89.687],
    [54.157, -97.618, -98.445, 173.553],
    [-14.363, -5.608, 22.990, 8.794],
    [-11.589, 12.732, -4.892, 18.559],
    [21.474, -31.068, -54.907, 84.080],
])


def chain_matrix(diag, superdiag):
    return np.diag(diag) + np.diag(superdiag, k=1)


def couple_pi(c: int) -> np.ndarray:
    raw = np.asarray(COUPLE_PI_RAW[c])
    return raw / raw.sum()


@pytest.fixture(scope="session")
def spousal_model() -> MIPHModel:
    return MIPHModel(margins=(
        Margin(SubIntensity(chain_matrix(DIAG_1, SUPER_1)),
               GompertzTransform(BETA_1)),
        Margin(SubIntensity(chain_matrix(DIAG_2, SUPER_2)),
               GompertzTransform(BETA_2)),
    ))


@pytest.fixture(scope="session")
def spousal_model_with_gamma(spousal_model) -> MIPHModel:
    return MIPHModel(margins=spousal_model.margins, gamma=GAMMA_TABLE)


def random_chain(rng, p: int, low: float = 0.1, high: float = 2.0) -> SubIntensity:
    """Random feed-forward sub-intensity with exits from every state."""
    sup = rng.uniform(low, high, size=p - 1) if p > 1 else np.empty(0)
    exits = rng.uniform(low, high, size=p)
    m = np.diag(sup, k=1) if p > 1 else np.zeros((p, p))
    m[np.arange(p), np.arange(p)] = -(np.concatenate([sup, [0.0]]) + exits)
    return SubIntensity(m)


def random_pi(rng, p: int) -> np.ndarray:
    w = rng.uniform(0.2, 1.0, size=p)
    return w / w.sum()


def random_bivariate_model(rng, p: int, betas=(1.0, 1.5)):
    """A random bivariate model plus a matching random initial vector."""
    model = MIPHModel(margins=(
        Margin(random_chain(rng, p), GompertzTransform(betas[0])),
        Margin(random_chain(rng, p), GompertzTransform(betas[1])),
    ))
    return model, random_pi(rng, p)
