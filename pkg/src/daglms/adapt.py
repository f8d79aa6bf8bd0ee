"""Parameter adaptation engine.

Tap-weight updates with pluggable step-size rules (constant, normalized by
regressor power, or derived from the a-posteriori error) and an optional
rational shaping filter applied to the correction sequence. The shaped
update keeps a short history of past estimates and past corrections; with
an empty :class:`~daglms.spr_design.DagConfig` it reduces exactly to the
plain update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spr_design import DagConfig

DEFAULT_DELTA = 1e-16
DIVERGENCE_LIMIT = 1e12


class DivergenceError(RuntimeError):
    """The estimate norm blew past the divergence guard."""

    def __init__(self, step: int, norm: float):
        super().__init__(f"estimate diverged at step {step} (norm {norm:.3e})")
        self.step = step
        self.norm = norm


@dataclass(frozen=True)
class StepSizePolicy:
    """Step-size rule: ``constant``, ``normalized`` or ``posterior``.

    ``normalized`` divides the base gain by ``delta + phi.phi``;
    ``posterior`` divides by ``1 + mu * phi.phi``, which makes the update
    equivalent to a gradient step on the a-posteriori error.
    """

    kind: str
    mu: float
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        if self.kind not in ("constant", "normalized", "posterior"):
            raise ValueError(f"unknown step-size kind {self.kind!r}")
        if not (math.isfinite(self.mu) and self.mu > 0.0):
            raise ValueError("mu must be a positive finite gain")
        if not (math.isfinite(self.delta) and self.delta > 0.0):
            raise ValueError("delta must be a positive finite regularizer")

    @classmethod
    def lms(cls, mu: float) -> StepSizePolicy:
        return cls("constant", mu)

    @classmethod
    def nlms(cls, mu: float, delta: float = DEFAULT_DELTA) -> StepSizePolicy:
        return cls("normalized", mu, delta)

    @classmethod
    def plms(cls, mu: float) -> StepSizePolicy:
        return cls("posterior", mu)


def step_size(policy: StepSizePolicy, phi) -> float:
    """Per-step gain for the given regressor; always finite and positive."""
    if policy.kind == "constant":
        return policy.mu
    power = float(np.dot(phi, phi))
    if policy.kind == "normalized":
        return policy.mu / (policy.delta + power)
    return policy.mu / (1.0 + policy.mu * power)


@dataclass
class PredictionPair:
    """Predicted output and errors for one step.

    ``e_post`` is filled only by the posterior policy, where it satisfies
    ``e_post * (1 + mu * phi.phi) == e0``.
    """

    z0_hat: float
    e0: float | None = None
    e_post: float | None = None


PRESETS: dict[str, DagConfig] = {
    "integral": DagConfig(),
    "conj_nesterov": DagConfig((), (0.9,)),
    "ipd": DagConfig((1.4, 0.5), ()),
    "ip": DagConfig((0.99,), ()),
    "arima2": DagConfig((0.99, 0.0), (0.9,)),
}

PRESET_ORDER = ("integral", "conj_nesterov", "ipd", "ip", "arima2")


def make_preset(name: str) -> DagConfig:
    """Named gain-filter configuration (see :data:`PRESET_ORDER`)."""
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; known: {sorted(PRESETS)}") from None


def preset_triple(name: str) -> tuple[float, float, float]:
    """The (c1, c2, d1p) coefficients of a preset, zero-padded."""
    cfg = make_preset(name)
    c1 = cfg.c[0] if len(cfg.c) > 0 else 0.0
    c2 = cfg.c[1] if len(cfg.c) > 1 else 0.0
    d1p = cfg.d_prime[0] if cfg.d_prime else 0.0
    return c1, c2, d1p


class AdaptState:
    """Mutable state of one adaptation loop.

    Keeps the estimate history (depth ``len(d)``, i.e. 1 for the trivial
    configuration) and the correction history (depth ``len(c)``), all
    vectors of length ``n_params``. Histories start from ``theta0``
    (default zero) and zero corrections, which makes the first steps
    well-defined and reproducible. Single-owner: one loop per instance.
    """

    def __init__(
        self,
        n_params: int,
        policy: StepSizePolicy,
        cfg: DagConfig | None = None,
        theta0=None,
        divergence_limit: float = DIVERGENCE_LIMIT,
    ):
        n_params = int(n_params)
        if n_params < 1:
            raise ValueError("n_params must be at least 1")
        self.n_params = n_params
        self.policy = policy
        self.cfg = cfg if cfg is not None else DagConfig()
        self._d = np.asarray(self.cfg.d, dtype=float)
        self._c = np.asarray(self.cfg.c, dtype=float)
        if theta0 is None:
            init = np.zeros(n_params)
        else:
            init = np.array(theta0, dtype=float)
            if init.shape != (n_params,):
                raise ValueError(f"theta0 must have shape ({n_params},)")
        self.theta_hist = np.tile(init, (self._d.size, 1))
        self.corr_hist = np.zeros((self._c.size, n_params))
        self.t = 0
        self.divergence_limit = float(divergence_limit)

    @property
    def theta(self) -> np.ndarray:
        """Latest estimate."""
        return self.theta_hist[0]

    def _check_phi(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        if phi.shape != (self.n_params,):
            raise ValueError(f"regressor must have shape ({self.n_params},), got {phi.shape}")
        return phi

    def effective_estimate(self) -> np.ndarray:
        """Weighted combination of past estimates and past corrections.

        This is the vector the predictor uses before the new correction is
        added; with the trivial configuration it is just the latest
        estimate.
        """
        d = self._d
        out = d[0] * self.theta_hist[0]
        for i in range(1, d.size):
            out += d[i] * self.theta_hist[i]
        c = self._c
        for k in range(c.size):
            out += c[k] * self.corr_hist[k]
        return out

    def a_priori_predict(self, phi) -> PredictionPair:
        """Predicted output before seeing the desired value."""
        phi = self._check_phi(phi)
        return PredictionPair(z0_hat=float(np.dot(self.effective_estimate(), phi)))

    def update(self, phi, x: float) -> PredictionPair:
        """One adaptation step against the desired output ``x``."""
        phi = self._check_phi(phi)
        base = self.effective_estimate()
        z0 = float(np.dot(base, phi))
        return self._advance(phi, float(x) - z0, base, z0)

    def update_from_error(self, phi, e0: float) -> PredictionPair:
        """One adaptation step driven by an externally measured error.

        Used when the a-priori error is observed directly (e.g. a residual
        sensor) instead of being computed from a desired output.
        """
        phi = self._check_phi(phi)
        base = self.effective_estimate()
        z0 = float(np.dot(base, phi))
        return self._advance(phi, float(e0), base, z0)

    def _advance(self, phi, e0: float, base, z0: float) -> PredictionPair:
        self.t += 1
        mu_t = step_size(self.policy, phi)
        corr = (mu_t * e0) * phi
        theta_new = base
        theta_new += corr
        norm = float(np.linalg.norm(theta_new))
        if not math.isfinite(norm) or norm > self.divergence_limit:
            raise DivergenceError(self.t, norm)
        if self.theta_hist.shape[0] > 1:
            self.theta_hist[1:] = self.theta_hist[:-1]
        self.theta_hist[0] = theta_new
        if self.corr_hist.shape[0] > 1:
            self.corr_hist[1:] = self.corr_hist[:-1]
        if self.corr_hist.shape[0]:
            self.corr_hist[0] = corr
        e_post = None
        if self.policy.kind == "posterior":
            e_post = e0 / (1.0 + self.policy.mu * float(np.dot(phi, phi)))
        return PredictionPair(z0, e0, e_post)
