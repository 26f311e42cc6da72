"""Covariance matrix adaptation evolution strategy, the emitter workhorse.

A deliberately small implementation of the standard (mu/mu_w, lambda)
update equations: rank-mu and rank-one covariance updates, cumulative step
size control, nothing else.  Callers rank candidates themselves and pass the
ordering to ``tell``, which makes the strategy agnostic to what is being
optimized (here: archive improvement, not raw fitness).
"""

from __future__ import annotations

import numpy as np


class CmaEs:
    def __init__(self, mean: np.ndarray, sigma: float, batch: int):
        self.mean = np.asarray(mean, float).copy()
        self.sigma = float(sigma)
        self.batch = int(batch)
        n = len(self.mean)
        self.n = n

        mu = batch // 2
        w = np.log((batch + 1) / 2.0) - np.log(np.arange(1, mu + 1))
        self.weights = w / w.sum()
        self.mu_eff = 1.0 / np.square(self.weights).sum()

        self.c_sigma = (self.mu_eff + 2.0) / (n + self.mu_eff + 5.0)
        self.d_sigma = (
            1.0 + 2.0 * max(0.0, np.sqrt((self.mu_eff - 1.0) / (n + 1.0)) - 1.0) + self.c_sigma
        )
        self.c_c = (4.0 + self.mu_eff / n) / (n + 4.0 + 2.0 * self.mu_eff / n)
        self.c_1 = 2.0 / ((n + 1.3) ** 2 + self.mu_eff)
        self.c_mu = min(
            1.0 - self.c_1,
            2.0 * (self.mu_eff - 2.0 + 1.0 / self.mu_eff) / ((n + 2.0) ** 2 + self.mu_eff),
        )
        self.chi_n = np.sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))

        self.cov = np.eye(n)
        self.p_sigma = np.zeros(n)
        self.p_c = np.zeros(n)
        self.generation = 0
        self._decompose()

    def _decompose(self) -> None:
        self.cov = (self.cov + self.cov.T) / 2.0
        vals, vecs = np.linalg.eigh(self.cov)
        self._eig_ok = bool(np.all(np.isfinite(vals)))
        vals = np.maximum(vals, 1e-20)
        self.eigvals = vals
        self.basis = vecs
        self.scale = vecs * np.sqrt(vals)  # C^{1/2}
        self.inv_sqrt = (vecs / np.sqrt(vals)) @ vecs.T

    def ask(self, rng: np.random.Generator, count: int | None = None) -> np.ndarray:
        count = self.batch if count is None else count
        z = rng.standard_normal((count, self.n))
        return self.mean + self.sigma * z @ self.scale.T

    def tell(self, xs: np.ndarray, order: np.ndarray) -> None:
        """Update from candidates ``xs`` given ``order`` (best first).

        Expects exactly ``batch`` candidates; a truncated final batch should
        simply not be told.
        """
        xs = np.asarray(xs, float)
        mu = len(self.weights)
        best = xs[np.asarray(order)[:mu]]
        y = (best - self.mean) / self.sigma
        y_w = self.weights @ y
        self.mean = self.mean + self.sigma * y_w
        self.generation += 1

        self.p_sigma = (1.0 - self.c_sigma) * self.p_sigma + np.sqrt(
            self.c_sigma * (2.0 - self.c_sigma) * self.mu_eff
        ) * (self.inv_sqrt @ y_w)
        expected = self.chi_n * np.sqrt(1.0 - (1.0 - self.c_sigma) ** (2 * self.generation))
        h_sigma = float(np.linalg.norm(self.p_sigma) < (1.4 + 2.0 / (self.n + 1.0)) * expected)
        self.p_c = (1.0 - self.c_c) * self.p_c + h_sigma * np.sqrt(
            self.c_c * (2.0 - self.c_c) * self.mu_eff
        ) * y_w

        rank_mu = (y.T * self.weights) @ y
        correction = (1.0 - h_sigma) * self.c_c * (2.0 - self.c_c)
        self.cov = (
            (1.0 - self.c_1 - self.c_mu) * self.cov
            + self.c_1 * (np.outer(self.p_c, self.p_c) + correction * self.cov)
            + self.c_mu * rank_mu
        )
        self.sigma *= np.exp(
            (self.c_sigma / self.d_sigma) * (np.linalg.norm(self.p_sigma) / self.chi_n - 1.0)
        )
        self._decompose()

    @property
    def converged(self) -> bool:
        if not (np.isfinite(self.sigma) and np.all(np.isfinite(self.mean)) and self._eig_ok):
            return True
        spread = self.sigma * np.sqrt(float(self.eigvals.max()))
        condition = float(self.eigvals.max() / self.eigvals.min())
        return spread < 1e-3 or condition > 1e14
